"""Random finitely describable operands and dense brute-force oracles."""
import numpy as np

from puredmm import fd_matrix as fd

KEYS = range(8)  # exceptions are drawn from here
ROWS = [0, 1, 2, 3, 4, 100]  # 6 x 8 projection; 100 sits in the default class
COLS = [0, 1, 2, 3, 4, 5, 6, 100]
VALUES = (-3.0, -2.0, -1.5, -1.0, -0.5, 0.25, 0.5, 1.0, 2.0, 3.0)


def vector(rng, p_default=0.5, mask=False, finite=None):
    vals = (0.0, 1.0) if mask else VALUES
    if finite is True or (finite is None and rng.random() >= p_default):
        default = 0.0
    else:
        default = float(rng.choice(vals))
    keys = rng.choice(list(KEYS), size=int(rng.integers(0, 5)), replace=False)
    return fd.FDVector(default, {int(k): float(rng.choice(vals)) for k in keys})


def matrix(rng, max_terms=3, **kw):
    n = int(rng.integers(0, max_terms + 1))
    return fd.FDMatrix(tuple((vector(rng, **kw), vector(rng, **kw)) for _ in range(n)))


def mask_matrix(rng):
    """A random 0/1 mask built from lifts and finite blocks."""
    kind = rng.integers(4)
    if kind == 0:
        return fd.lift_row(vector(rng, mask=True))
    if kind == 1:
        return fd.lift_col(vector(rng, mask=True))
    if kind == 2:
        return fd.outer(vector(rng, mask=True), vector(rng, mask=True))
    return fd.ewise_max(fd.lift_row(vector(rng, mask=True)), fd.lift_col(vector(rng, mask=True)))


def dense(A, rows=ROWS, cols=COLS):
    return fd.to_dense(A, rows, cols)


def vec(v, keys):
    return np.array([v(k) for k in keys])


def row_combine_oracle(beta, A, cols=COLS):
    """Brute-force ``beta^T A`` on ``cols``, or ``None`` when the sum diverges."""
    if beta.default != 0.0:
        if any(u.default != 0.0 for u, _ in A.terms):
            return None
        rows = sorted({k for u, _ in A.terms for k in u.exceptions})
    else:
        rows = beta.keys
    if not rows:
        return np.zeros(len(cols))
    return vec(beta, rows) @ fd.to_dense(A, rows, cols)


def matrix_update_oracle(A, alpha, beta, gamma, rows=ROWS, cols=COLS):
    out = dense(A, rows, cols).copy()
    s = row_combine_oracle(beta, A, cols)
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            out[a, b] += gamma(i) * alpha(j) * s[b]
    return out
