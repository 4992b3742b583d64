"""Command-line front end.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime fault.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from . import config as cfgmod
from .exceptions import ConfigError, SimulationFault
from .sim import CONTROLLERS, MODELS, run_scenario

logger = logging.getLogger("inverterlab")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
SUMMARY_FIELDS = ("thd", "rms_error", "rms_error_pct", "settle_time", "saturation_count")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _write_atomic(path: str, text: str):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(d: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def _run_to_dir(doc: dict, base_dir: str, out_dir: Optional[str], svg: bool = False):
    """Run one scenario; optionally write its outputs. Returns ``(status, payload)``.

    Runs inside worker processes, so failures are returned rather than raised.
    """
    try:
        cfg = cfgmod.build_config(doc, base_dir)
        result = run_scenario(cfg)
    except ConfigError as exc:
        return "config", str(exc)
    except SimulationFault as exc:
        return "fault", str(exc)
    summary = _jsonable(result.summary.as_dict())
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_atomic(os.path.join(out_dir, "trace.csv"), result.trace_csv())
        _write_atomic(os.path.join(out_dir, "spectrum.csv"), result.spectrum.csv_text())
        _write_atomic(os.path.join(out_dir, "summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if svg:
            from .plots import write_svgs

            write_svgs(result, out_dir)
    return "ok", summary


def _max_workers(n_jobs: int) -> int:
    env = os.environ.get("INVERTERLAB_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer INVERTERLAB_THREADS=%r", env)
    return max(1, min(cap, n_jobs))


def _run_many(jobs: List[tuple]) -> List[tuple]:
    workers = _max_workers(len(jobs))
    if workers == 1:
        return [_run_to_dir(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_to_dir, *job) for job in jobs]
        return [f.result() for f in futures]


def _prepare(args) -> tuple:
    doc = cfgmod.read_scenario(args.scenario)
    base = os.path.dirname(os.path.abspath(args.scenario)) if args.scenario else "."
    if getattr(args, "model", None):
        doc = cfgmod.set_key(doc, "sim.model", args.model)
    if getattr(args, "controller", None):
        doc = cfgmod.set_key(doc, "controller.type", args.controller)
    cfgmod.build_config(doc, base)  # fail fast on config errors
    return doc, base


def _fmt_cell(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_validate(args) -> int:
    _prepare(args)
    print("ok")
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc, base = _prepare(args)
    status, payload = _run_to_dir(doc, base, args.out, args.svg)
    if status != "ok":
        print(f"error: {payload}", file=sys.stderr)
        return EXIT_CONFIG if status == "config" else EXIT_RUNTIME
    for key in SUMMARY_FIELDS:
        print(f"{key:>17s}: {_fmt_cell(payload[key])}")
    return EXIT_OK


def cmd_compare(args) -> int:
    controllers = [c for item in args.controllers for c in item.split(",") if c]
    if not controllers:
        print("error: at least one controller is required", file=sys.stderr)
        return EXIT_CONFIG
    for c in controllers:
        if c not in CONTROLLERS:
            print(f"error: controller.type: unknown controller {c!r}", file=sys.stderr)
            return EXIT_CONFIG
    doc, base = _prepare(args)
    jobs = [
        (cfgmod.set_key(doc, "controller.type", c), base, os.path.join(args.out, c), args.svg)
        for c in controllers
    ]
    results = _run_many(jobs)

    header = ["controller", "status", *SUMMARY_FIELDS]
    rows = []
    for c, (status, payload) in zip(controllers, results):
        if status == "ok":
            rows.append([c, "ok", *[payload[k] for k in SUMMARY_FIELDS]])
        else:
            rows.append([c, f"failed: {payload}", *[None] * len(SUMMARY_FIELDS)])

    os.makedirs(args.out, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    _write_atomic(os.path.join(args.out, "comparison.csv"), buf.getvalue())

    cells = [header] + [[_fmt_cell(v) if i != 1 else v for i, v in enumerate(r)] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    text = "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells) + "\n"
    _write_atomic(os.path.join(args.out, "comparison.txt"), text)
    sys.stdout.write(text)
    return EXIT_OK if all(s == "ok" for s, _ in results) else EXIT_RUNTIME


def cmd_sweep(args) -> int:
    if args.key not in cfgmod.NUMERIC_KEYS:
        print(f"error: {args.key}: not a numeric scenario key", file=sys.stderr)
        return EXIT_CONFIG
    raw = [v for item in args.values for v in item.split(",") if v]
    if not raw:
        print("error: at least one value is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        values = [float(v) for v in raw]
    except ValueError as exc:
        print(f"error: bad sweep value: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    doc, base = _prepare(args)
    if cfgmod.SCHEMA[args.key][0] is int:
        values = [int(v) if v == int(v) else v for v in values]
    jobs = [(cfgmod.set_key(doc, args.key, v), base, None) for v in values]
    results = _run_many(jobs)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "status", "thd", "rms_error_pct", "settle_time"])
    for v, (status, payload) in zip(values, results):
        if status == "ok":
            w.writerow([repr(v), "ok", *[_csv(payload[k]) for k in ("thd", "rms_error_pct", "settle_time")]])
        else:
            w.writerow([repr(v), "failed", "", "", ""])
            logger.warning("%s=%r failed: %s", args.key, v, payload)
    os.makedirs(args.out, exist_ok=True)
    _write_atomic(os.path.join(args.out, "sweep.csv"), buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _csv(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="inverterlab", description="Single-phase inverter controller simulation toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("scenario", nargs="?", help="YAML/JSON scenario file (defaults when omitted)")
        sp.add_argument("--model", choices=MODELS)
        if out:
            sp.add_argument("--out", default="out", help="output directory (default: ./out)")

    sp = sub.add_parser("validate", help="check a scenario file and exit")
    common(sp, out=False)
    sp.add_argument("--controller", choices=CONTROLLERS)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="run one scenario")
    common(sp)
    sp.add_argument("--controller", choices=CONTROLLERS)
    sp.add_argument("--svg", action="store_true", help="also write SVG charts")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="run the same scenario under several controllers")
    common(sp)
    sp.add_argument("--controllers", nargs="*", default=[], help="e.g. sliding,fuzzy or sliding fuzzy")
    sp.add_argument("--svg", action="store_true")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("sweep", help="run one scenario per value of a numeric key")
    common(sp)
    sp.add_argument("--controller", choices=CONTROLLERS)
    sp.add_argument("--key", required=True, help="dotted scenario key, e.g. controller.beta")
    sp.add_argument("--values", nargs="+", required=True)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
