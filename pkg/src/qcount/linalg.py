"""Dense exact linear algebra over a table-driven finite field.

Matrices are numpy uint8 arrays of element codes; every routine takes the
FieldSpec first.  Sizes at desk scale stay tiny (<= ~40 rows for hom-space
systems), so clarity beats asymptotics throughout.
"""

from __future__ import annotations

import numpy as np


def zeros(m, n):
    return np.zeros((m, n), dtype=np.uint8)


def identity(n):
    out = np.zeros((n, n), dtype=np.uint8)
    np.fill_diagonal(out, 1)
    return out


def mat_add(f, a, b):
    return f.ADD[a, b]


def mat_neg(f, a):
    return f.NEG[a]


def mat_sub(f, a, b):
    return f.ADD[a, f.NEG[b]]


def mat_mul(f, a, b):
    m, n = a.shape
    n2, r = b.shape
    if n != n2:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    acc = np.zeros((m, r), dtype=np.uint8)
    for k in range(n):
        acc = f.ADD[acc, f.MUL[a[:, k][:, None], b[k][None, :]]]
    return acc


def scalar_mul(f, c, a):
    return f.MUL[np.uint8(c), a]


def trace(f, a):
    acc = 0
    for i in range(min(a.shape)):
        acc = f.add(acc, int(a[i, i]))
    return acc


def rref(f, a):
    """Reduced row echelon form; returns (R, pivot column list)."""
    r_mat = np.array(a, dtype=np.uint8, copy=True)
    m, n = r_mat.shape
    pivots = []
    row = 0
    for col in range(n):
        pivot_row = None
        for i in range(row, m):
            if r_mat[i, col]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != row:
            r_mat[[row, pivot_row]] = r_mat[[pivot_row, row]]
        r_mat[row] = f.MUL[r_mat[row], f.INV[r_mat[row, col]]]
        for i in range(m):
            if i != row and r_mat[i, col]:
                r_mat[i] = f.ADD[r_mat[i], f.NEG[f.MUL[r_mat[row], r_mat[i, col]]]]
        pivots.append(col)
        row += 1
        if row == m:
            break
    return r_mat, pivots


def rank(f, a):
    return len(rref(f, a)[1])


def nullspace(f, a):
    """Columns form a basis of {x : a x = 0}."""
    r_mat, pivots = rref(f, a)
    n = a.shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((n, len(free)), dtype=np.uint8)
    for j, fc in enumerate(free):
        basis[fc, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = f.NEG[r_mat[i, fc]]
    return basis


def solve(f, a, b):
    """One solution of a x = b (column vector), or None if inconsistent."""
    m = a.shape[0]
    aug = np.concatenate([a, b.reshape(m, 1)], axis=1)
    r_mat, pivots = rref(f, aug)
    n = a.shape[1]
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for i, pc in enumerate(pivots):
        x[pc] = r_mat[i, n]
    return x


def is_invertible(f, a):
    m, n = a.shape
    return m == n and len(rref(f, a)[1]) == n


def mat_inv(f, a):
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = np.concatenate([a, identity(n)], axis=1)
    r_mat, pivots = rref(f, aug)
    if pivots[: n if len(pivots) >= n else len(pivots)] != list(range(n)):
        raise ValueError("singular matrix")
    return r_mat[:, n:].copy()


def batch_det(f, a):
    """Determinants of a stack (N, n, n), by Laplace expansion on row 0.

    Exponential in n; meant for the tiny blocks (n <= ~4) that batch
    unit-testing of endomorphism algebras needs.
    """
    n = a.shape[1]
    if n == 0:
        return np.ones(a.shape[0], dtype=np.uint8)
    if n == 1:
        return a[:, 0, 0].copy()
    acc = np.zeros(a.shape[0], dtype=np.uint8)
    cols = list(range(n))
    for j in range(n):
        minor = a[:, 1:, :][:, :, cols[:j] + cols[j + 1 :]]
        term = f.MUL[a[:, 0, j], batch_det(f, minor)]
        if j % 2:
            term = f.NEG[term]
        acc = f.ADD[acc, term]
    return acc


def rank_of_rowset(f, rows):
    """Rank of a (possibly huge) stack of row vectors, by incremental rref.

    Reduces the whole stack against each new pivot row with table
    gathers, so the Python loop runs at most 2 * n_cols times.
    """
    work = np.array(rows, dtype=np.uint8, copy=True)
    n_cols = work.shape[1] if work.ndim == 2 else 0
    rank = 0
    for _ in range(n_cols):
        nonzero = work.any(axis=1)
        if not nonzero.any():
            break
        first = int(np.argmax(nonzero))
        pivot_row = work[first]
        col = int(np.argmax(pivot_row != 0))
        pivot_row = f.MUL[pivot_row, f.INV[pivot_row[col]]]
        factors = work[:, col]
        work = f.ADD[work, f.MUL[f.NEG[factors][:, None], pivot_row[None, :]]]
        rank += 1
    return rank
