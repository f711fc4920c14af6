"""Moment map on doubled quivers and the AI / fiber-count identity.

The sign convention is pinned by the one-loop-plus-framing case, where
the map must read [B_1, B_2] + vw on the loop vertex and -wv on the
framing vertex: contributions M_a M_{a*} enter where a points in, and
-M_{a*} M_a where a points out, summed over the unstarred half of the
arrows.
"""

import itertools
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from qcount import linalg
from qcount.endo import count_ai
from qcount.orbits import DEFAULT_BUDGET, BudgetError, OrbitEngine, _bmm
from qcount.quiver import Representation, double_quiver


def _halves(quiver):
    """The (a, a*) arrow pairs of a double, oriented by the star suffix."""
    if quiver.star is None:
        raise ValueError("not a double quiver")
    pairs = []
    for a in quiver.arrows:
        if a.name.endswith("*"):
            continue
        partner = quiver.star[a.name]
        if not partner.endswith("*"):
            raise ValueError(f"cannot orient the pair ({a.name}, {partner})")
        pairs.append((a, quiver.arrow(partner)))
    if 2 * len(pairs) != len(quiver.arrows):
        raise ValueError("star matching does not split the arrows in half")
    return pairs


class CoadjointTarget:
    """Per-vertex square matrices with total trace zero."""

    __slots__ = ("quiver", "field", "dim", "blocks")

    def __init__(self, quiver, field, dim, blocks):
        dim = quiver.check_dim(dim)
        idx = quiver.vertex_index
        total = 0
        for vertex in quiver.vertices:
            block = np.asarray(blocks[vertex], dtype=np.uint8)
            n = dim[idx(vertex)]
            if block.shape != (n, n):
                raise ValueError(f"block at {vertex} must be {n}x{n}")
            total = field.add(total, linalg.trace(field, block))
        if total != 0:
            raise ValueError("total trace must vanish")
        self.quiver = quiver
        self.field = field
        self.dim = dim
        self.blocks = {v: np.asarray(blocks[v], dtype=np.uint8) for v in quiver.vertices}

    def __eq__(self, other):
        return (
            isinstance(other, CoadjointTarget)
            and self.field == other.field
            and self.dim == other.dim
            and all(
                np.array_equal(self.blocks[v], other.blocks[v])
                for v in self.quiver.vertices
            )
        )

    def __repr__(self):
        parts = ", ".join(f"{v}={self.blocks[v].tolist()}" for v in self.quiver.vertices)
        return f"CoadjointTarget({parts})"


def scalar_target(quiver, field, dim, scalars):
    """eta_i * Id blocks from one field scalar per vertex."""
    dim = quiver.check_dim(dim)
    if len(scalars) != len(quiver.vertices):
        raise ValueError("one scalar per vertex")
    idx = quiver.vertex_index
    blocks = {}
    for vertex, c in zip(quiver.vertices, scalars):
        code = field.scalar(int(c)).code
        n = dim[idx(vertex)]
        blocks[vertex] = linalg.scalar_mul(field, code, linalg.identity(n))
    return CoadjointTarget(quiver, field, dim, blocks)


def moment_map(x):
    """mu_i = sum_{t(a)=i} M_a M_{a*} - sum_{s(a)=i} M_{a*} M_a over unstarred a."""
    q = x.quiver
    f = x.field
    idx = q.vertex_index
    blocks = {v: linalg.zeros(x.dim[idx(v)], x.dim[idx(v)]) for v in q.vertices}
    for a, a_star in _halves(q):
        m, ms = x.mats[a.name], x.mats[a_star.name]
        blocks[a.target] = linalg.mat_add(f, blocks[a.target], linalg.mat_mul(f, m, ms))
        blocks[a.source] = linalg.mat_sub(f, blocks[a.source], linalg.mat_mul(f, ms, m))
    return CoadjointTarget(q, f, x.dim, blocks)


def half_dim_mo(quiver, v):
    """dim Rep_v(Q) - (v.v - 1): half the dimension of the reduced fiber."""
    if quiver.star is not None:
        raise ValueError("pass the original quiver, not its double")
    v = quiver.check_dim(v)
    idx = quiver.vertex_index
    rep_dim = sum(v[idx(a.source)] * v[idx(a.target)] for a in quiver.arrows)
    return rep_dim - (sum(x * x for x in v) - 1)


def diamond_check(field, z, v):
    """The genericity test on an eigenvalue tuple, grouped by vertex.

    True iff the total sum vanishes, coordinates within one vertex are
    pairwise distinct, and no proper nonempty sub-collection sums to
    zero.  A single coordinate passes vacuously whenever it sums to zero.
    Pass field=None to test rational data with ordinary addition.
    """
    z = tuple(int(c) for c in z)
    if len(z) != sum(v):
        raise ValueError(f"need {sum(v)} coordinates, got {len(z)}")
    if field is None:
        add = operator.add
    else:
        if any(not 0 <= c < field.q for c in z):
            raise ValueError("coordinates must be field codes")
        add = field.add
    if reduce(add, z, 0) != 0:
        return False
    offset = 0
    for n in v:
        group = z[offset : offset + n]
        if len(set(group)) != n:
            return False
        offset += n
    for k in range(1, len(z)):
        for sub in itertools.combinations(z, k):
            if reduce(add, sub, 0) == 0:
                return False
    return True


@dataclass
class FiberReport:
    q: int
    v: tuple
    n_points: int
    free: bool
    m_o: Fraction
    witness: object = None  # a fiber point with extra stabilizer, if any


def fiber_count(quiver, dim, field, target, budget=DEFAULT_BUDGET):
    """Brute-force #mu^{-1}(target) with an exhaustive freeness check.

    m_o is the fiber count divided by #PGL_v; it is the honest groupoid
    count only when the action is free, which the report records.
    """
    engine = OrbitEngine(quiver, field, dim, budget)
    pairs = _halves(quiver)
    if sum(engine.dim) == 0:
        raise ValueError("empty dimension vector")
    engine.check_budget(engine.scan_work())
    q = field.q
    n_pts = engine.n_points

    codes = np.arange(n_pts, dtype=np.int64)
    stacks = {}
    offset = 0
    for a, (r, c) in zip(quiver.arrows, engine.shapes):
        block = np.zeros((n_pts, r, c), dtype=np.uint8)
        for t in range(r * c):
            place = int(engine.places[offset + t])
            block[:, t // c, t % c] = (codes // place) % q
        stacks[a.name] = block
        offset += r * c

    idx = quiver.vertex_index
    mask = np.ones(n_pts, dtype=bool)
    for vertex in quiver.vertices:
        n = engine.dim[idx(vertex)]
        mu = np.zeros((n_pts, n, n), dtype=np.uint8)
        for a, a_star in pairs:
            if a.target == vertex:
                prod = _bmm(field, stacks[a.name], stacks[a_star.name])
                mu = field.ADD[mu, prod]
            if a.source == vertex:
                prod = _bmm(field, stacks[a_star.name], stacks[a.name])
                mu = field.ADD[mu, field.NEG[prod]]
        mask &= (mu == target.blocks[vertex][None]).reshape(n_pts, -1).all(axis=1)

    fiber = codes[mask]
    n_points = int(fiber.shape[0])

    stab_work = n_points * engine.gl_total
    if stab_work > budget:
        raise BudgetError(stab_work, budget)
    free = True
    witness = None
    seen = set()
    fiber_set = set(int(c) for c in fiber)
    for code in fiber_set:
        if code in seen:
            continue
        mats = engine.decode(code)
        orbit = engine.orbit_codes(mats)
        # orbit mates have conjugate stabilizers, skip the ones in the fiber
        seen.update(int(c) for c in orbit if int(c) in fiber_set)
        stab = engine.gl_total // int(orbit.shape[0])
        if stab != q - 1:
            free = False
            witness = Representation(quiver, field, engine.dim, mats)
            break

    m_o = Fraction(n_points * (q - 1), engine.gl_total)
    return FiberReport(
        q=q, v=engine.dim, n_points=n_points, free=free, m_o=m_o, witness=witness
    )


@dataclass
class MomentReport:
    q: int
    v: tuple
    eta: tuple
    n_ai: int
    half_dim: int
    m_o: Fraction
    fiber_points: int
    diamond: bool
    passed: bool


def ai_vs_fiber_check(
    quiver, dim, field, eta, budget=DEFAULT_BUDGET, require_diamond=True
):
    """Verify count_ai * q^{half_dim_mo} = m_o on the eta-fiber of the double.

    Restricted to dimension vectors with every v_i <= 1, where the Weyl
    group is trivial and the identity holds without isotypic bookkeeping.
    eta is one integer (or field code) per vertex, a scalar coadjoint
    target; with require_diamond the eigenvalue tuple must pass
    diamond_check, the genericity the identity relies on.
    """
    dim = quiver.check_dim(dim)
    if quiver.star is not None:
        raise ValueError("pass the original quiver, not its double")
    if any(x > 1 for x in dim) or sum(dim) == 0:
        raise ValueError("needs a nonzero dimension vector with all v_i <= 1")
    codes = [field.scalar(int(c)).code for c in eta]
    if len(codes) != len(quiver.vertices):
        raise ValueError("one eta scalar per vertex")

    z = tuple(c for c, n in zip(codes, dim) if n == 1)
    diamond = diamond_check(field, z, tuple(n for n in dim if n == 1))
    if require_diamond and not diamond:
        raise ValueError(f"eta {tuple(codes)} fails the genericity test")

    n_ai = count_ai(quiver, dim, field, budget=budget)
    dq = double_quiver(quiver)
    target = scalar_target(dq, field, dim, codes)
    fib = fiber_count(dq, dim, field, target, budget=budget)
    if not fib.free:
        raise AssertionError(
            f"PGL action is not free on the fiber: witness {fib.witness!r}"
        )
    lhs = n_ai * field.q ** half_dim_mo(quiver, dim)
    if lhs != fib.m_o:
        raise AssertionError(
            f"count_ai * q^half_dim = {lhs} but normalized fiber count = {fib.m_o}"
        )
    return MomentReport(
        q=field.q,
        v=dim,
        eta=tuple(codes),
        n_ai=n_ai,
        half_dim=half_dim_mo(quiver, dim),
        m_o=fib.m_o,
        fiber_points=fib.n_points,
        diamond=diamond,
        passed=True,
    )
