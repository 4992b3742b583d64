"""Independent brute-force Mamdani reference, sharing no code with the package."""

import numpy as np

TERMS = ["NB", "NM", "NS", "Z", "PS", "PM", "PB"]

# rows: error term, columns: change-of-error term
TABLE_1 = """\
NB NB NB NB NM NS Z
NB NB NB NM NS Z PS
NB NB NM NS Z PS PM
NB NM NS Z PS PM PB
NM NS Z PS PM PB PB
NS Z PS PM PB PB PB
Z PS PM PB PB PB PB
"""

TABLE = [[TERMS.index(c) for c in line.split()] for line in TABLE_1.strip().splitlines()]
CENTERS = np.linspace(-1.0, 1.0, 7)
GRID = np.linspace(-1.0, 1.0, 100_001)


def membership(k, x):
    x = np.asarray(x, dtype=float)
    m = np.maximum(0.0, 1.0 - 3.0 * np.abs(x - CENTERS[k]))
    if k == 0:
        m = np.where(x <= CENTERS[0], 1.0, m)
    if k == 6:
        m = np.where(x >= CENTERS[6], 1.0, m)
    return m


GRID_MU = np.array([membership(k, GRID) for k in range(7)])


def centroid(strengths):
    env = np.zeros_like(GRID)
    for k, w in enumerate(strengths):
        if w > 0:
            env = np.maximum(env, np.minimum(GRID_MU[k], w))
    return float((GRID * env).sum() / env.sum())


def flc(e, de, ke, kde, ku):
    en = min(1.0, max(-1.0, ke * e))
    den = min(1.0, max(-1.0, kde * de))
    strengths = [0.0] * 7
    for i in range(7):
        for j in range(7):
            w = min(float(membership(i, en)), float(membership(j, den)))
            out = TABLE[i][j]
            strengths[out] = max(strengths[out], w)
    return min(1.0, max(-1.0, ku * centroid(strengths)))
