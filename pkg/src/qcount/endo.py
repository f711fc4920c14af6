"""Endomorphism algebras and the decomposable / indecomposable /
absolutely indecomposable classification.

The criterion: x is indecomposable iff End(x) is local (Fitting), and
absolutely indecomposable iff moreover the residue field is F_q itself.
Locality is decided by exhausting End(x) element-by-element, so this
stays an oracle with no radical machinery to trust.
"""

from __future__ import annotations

import itertools

import numpy as np

from qcount import linalg
from qcount.ff import embedding, extension_of
from qcount.orbits import (
    ABS_INDEC,
    DECOMPOSABLE,
    DEFAULT_BUDGET,
    INDEC_NOT_ABS,
    UNCLASSIFIED,
    BudgetError,
    OrbitEngine,
    iso_classes,
)
from qcount.quiver import Representation

DEFAULT_END_CAP = 1 << 22


class EndCapError(BudgetError):
    """End(x) has too many elements to exhaust."""


def hom_space(x, y):
    """Basis of Hom(x, y): tuples phi with phi_t M_a = N_a phi_s for all a.

    Each basis element is a dict vertex -> matrix of shape (w_i, v_i).
    """
    if x.quiver != y.quiver or x.field != y.field:
        raise ValueError("Hom needs one quiver and one field")
    quiver, f = x.quiver, x.field
    v, w = x.dim, y.dim
    idx = quiver.vertex_index
    # unknown layout: phi_i entries row-major, vertices in order
    offsets = []
    total = 0
    for i in range(len(quiver.vertices)):
        offsets.append(total)
        total += w[i] * v[i]
    rows = []
    for a in quiver.arrows:
        s, t = idx(a.source), idx(a.target)
        m_a, n_a = x.mats[a.name], y.mats[a.name]
        # equation grid: (phi_t M_a - N_a phi_s)[r, c] = 0
        for r in range(w[t]):
            for c in range(v[s]):
                row = np.zeros(total, dtype=np.uint8)
                for cc in range(v[t]):
                    pos = offsets[t] + r * v[t] + cc
                    row[pos] = f.ADD[row[pos], m_a[cc, c]]
                for rr in range(w[s]):
                    pos = offsets[s] + rr * v[s] + c
                    row[pos] = f.ADD[row[pos], f.NEG[n_a[r, rr]]]
                rows.append(row)
    if rows:
        system = np.stack(rows)
    else:
        system = np.zeros((0, total), dtype=np.uint8)
    kernel = linalg.nullspace(f, system)
    basis = []
    for j in range(kernel.shape[1]):
        vec = kernel[:, j]
        blocks = {}
        for i, label in enumerate(quiver.vertices):
            chunk = vec[offsets[i] : offsets[i] + w[i] * v[i]]
            blocks[label] = chunk.reshape(w[i], v[i]).copy()
        basis.append(blocks)
    return basis


class EndAlgebra:
    """End(x) presented by an F_q-basis of vertex-block tuples."""

    def __init__(self, x):
        self.x = x
        self.field = x.field
        self.basis = hom_space(x, x)
        self.dim = len(self.basis)

    def element(self, coeffs):
        f = self.field
        out = {}
        for i, label in enumerate(self.x.quiver.vertices):
            n = self.x.dim[i]
            acc = linalg.zeros(n, n)
            for c, b in zip(coeffs, self.basis):
                if c:
                    acc = f.ADD[acc, f.MUL[np.uint8(c), b[label]]]
            out[label] = acc
        return out

    def compose(self, e1, e2):
        f = self.field
        return {
            label: linalg.mat_mul(f, e1[label], e2[label])
            for label in self.x.quiver.vertices
        }

    def identity_element(self):
        return {
            label: linalg.identity(self.x.dim[i])
            for i, label in enumerate(self.x.quiver.vertices)
        }

    def contains(self, elem):
        """Membership in the span, for closure spot-checks."""
        f = self.field
        flat = _flatten_blocks(self.x, elem)
        if self.dim == 0:
            return not flat.any()
        mat = np.stack([_flatten_blocks(self.x, b) for b in self.basis], axis=1)
        return linalg.solve(f, mat, flat) is not None


def _flatten_blocks(x, blocks):
    parts = [blocks[label].reshape(-1) for label in x.quiver.vertices]
    if not parts:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(parts)


def end_algebra(x):
    return EndAlgebra(x)


def _batch_elements(end):
    """(q^dim, per-vertex stacks): every element of End(x) at once."""
    f = end.field
    q = f.q
    dim = end.dim
    n_el = q**dim
    coeff = np.zeros((n_el, dim), dtype=np.uint8)
    codes = np.arange(n_el, dtype=np.int64)
    for j in range(dim):
        # big-endian so element 0 is the zero map and enumeration is lex
        coeff[:, j] = (codes // q ** (dim - 1 - j)) % q
    stacks = {}
    for i, label in enumerate(end.x.quiver.vertices):
        n = end.x.dim[i]
        acc = np.zeros((n_el, n, n), dtype=np.uint8)
        for j, b in enumerate(end.basis):
            acc = f.ADD[acc, f.MUL[coeff[:, j][:, None, None], b[label][None, :, :]]]
        stacks[label] = acc
    return coeff, stacks


def _batch_invertible(f, stack):
    """Boolean mask of invertible matrices in an (N, n, n) stack."""
    n = stack.shape[1]
    if n == 0:
        return np.ones(stack.shape[0], dtype=bool)
    if n <= 4:
        return linalg.batch_det(f, stack) != 0
    return np.array([linalg.is_invertible(f, m) for m in stack], dtype=bool)


def is_local(end, cap=DEFAULT_END_CAP):
    """(True/False, residue size) or (None, None) when q^dim exceeds the cap.

    A finite ring is local iff its non-units are closed under addition;
    since non-units absorb unit scalars, that is the same as the
    non-units forming an F_q-subspace, which we test by comparing the
    count of non-units with the size of their span.
    """
    f = end.field
    n_el = f.q**end.dim
    if n_el > cap:
        return None, None
    coeff, stacks = _batch_elements(end)
    units = np.ones(n_el, dtype=bool)
    for label in end.x.quiver.vertices:
        units &= _batch_invertible(f, stacks[label])
    non_units = coeff[~units]
    n_non = non_units.shape[0]
    assert 0 < n_non < n_el, "zero is a non-unit and the identity is a unit"
    span_dim = linalg.rank_of_rowset(f, non_units)
    if f.q**span_dim != n_non:
        return False, None
    return True, n_el // n_non


def classify(x, cap=DEFAULT_END_CAP):
    """Decomposable / IndecNotAbs / AbsIndec / Unclassified for one rep."""
    if sum(x.dim) == 0:
        return DECOMPOSABLE
    end = end_algebra(x)
    local, residue = is_local(end, cap)
    if local is None:
        return UNCLASSIFIED
    if not local:
        return DECOMPOSABLE
    return ABS_INDEC if residue == x.field.q else INDEC_NOT_ABS


def count_ai(quiver, dim, field, budget=DEFAULT_BUDGET, cap=DEFAULT_END_CAP, reports=None):
    """Number of absolutely indecomposable classes in Rep_v(Q)(F_q)."""
    if reports is None:
        reports = iso_classes(quiver, dim, field, budget)
    total = 0
    for r in reports:
        tag = classify(r.representative, cap)
        if tag == UNCLASSIFIED:
            raise EndCapError(field.q ** len(hom_space(r.representative, r.representative)), cap)
        if tag == ABS_INDEC:
            total += 1
    return total


# -- Krull-Schmidt splitting -----------------------------------------------------


def _column_space_basis(f, a):
    """Columns of a spanning its image, as an (n, rank) matrix."""
    _, pivots = linalg.rref(f, a)
    return a[:, pivots].copy() if pivots else np.zeros((a.shape[0], 0), dtype=np.uint8)


def _find_idempotent(end, cap, from_end=False):
    """A nontrivial e = e^2 in End(x), or None; enumeration order is a knob
    so tests can confirm the split result does not depend on the choice."""
    f = end.field
    n_el = f.q**end.dim
    if n_el > cap:
        raise EndCapError(n_el, cap)
    ident = end.identity_element()
    order = range(n_el - 1, -1, -1) if from_end else range(n_el)
    q = f.q
    for code in order:
        coeffs = [(code // q**j) % q for j in range(end.dim)]
        e = end.element(coeffs)
        if all(not e[lb].any() for lb in end.x.quiver.vertices):
            continue
        if all((e[lb] == ident[lb]).all() for lb in end.x.quiver.vertices):
            continue
        if all(
            (linalg.mat_mul(f, e[lb], e[lb]) == e[lb]).all()
            for lb in end.x.quiver.vertices
        ):
            return e
    return None


def _split_by_idempotent(x, e):
    """x = im(e) + im(1-e) as subrepresentations; returns the two pieces."""
    f = x.field
    quiver = x.quiver
    idx = quiver.vertex_index
    change = {}
    split_at = {}
    for i, label in enumerate(quiver.vertices):
        n = x.dim[i]
        complement = linalg.mat_sub(f, linalg.identity(n), e[label])
        b1 = _column_space_basis(f, e[label])
        b2 = _column_space_basis(f, complement)
        p = np.concatenate([b1, b2], axis=1)
        if p.shape != (n, n) or not linalg.is_invertible(f, p):
            raise AssertionError("idempotent must split each vertex space")
        change[label] = p
        split_at[label] = b1.shape[1]
    dims1 = tuple(split_at[label] for label in quiver.vertices)
    dims2 = tuple(x.dim[i] - dims1[i] for i in range(len(x.dim)))
    mats1, mats2 = {}, {}
    for a in quiver.arrows:
        s, t = a.source, a.target
        moved = linalg.mat_mul(
            f, linalg.mat_inv(f, change[t]), linalg.mat_mul(f, x.mats[a.name], change[s])
        )
        k_t, k_s = split_at[t], split_at[s]
        assert not moved[k_t:, :k_s].any() and not moved[:k_t, k_s:].any(), (
            "arrow matrices must be block diagonal in the split basis"
        )
        mats1[a.name] = moved[:k_t, :k_s].copy()
        mats2[a.name] = moved[k_t:, k_s:].copy()
    return (
        Representation(quiver, f, dims1, mats1),
        Representation(quiver, f, dims2, mats2),
    )


def krull_schmidt(x, cap=DEFAULT_END_CAP, from_end=False):
    """Indecomposable summands of x, greedily splitting idempotents."""
    if sum(x.dim) == 0:
        return []
    e = _find_idempotent(end_algebra(x), cap, from_end)
    if e is None:
        return [x]
    y1, y2 = _split_by_idempotent(x, e)
    return krull_schmidt(y1, cap, from_end) + krull_schmidt(y2, cap, from_end)


def class_code(x, budget=DEFAULT_BUDGET):
    """Canonical integer naming the iso class of x: the least orbit code."""
    engine = OrbitEngine(x.quiver, x.field, x.dim, budget)
    return (x.dim, int(engine.orbit_codes(x.mats)[0]))


def rep_over_extension(x, n):
    """Base change along F_q -> F_{q^n}, entrywise through the embedding."""
    if n == 1:
        return x
    ext = extension_of(x.field, n)
    emb = embedding(x.field, ext)
    mats = {name: emb.map[m] for name, m in x.mats.items()}
    return Representation(x.quiver, ext, x.dim, mats)
