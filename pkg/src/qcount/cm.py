"""Nilpotent pairs, partition gluing, cell counts, and snakes.

Everything here orbits around one quiver: a loop plus a framing arrow.
Pairs (u, vec) with u nilpotent are its representations of dimension
(n, 1); their orbit combinatorics is partition bookkeeping.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from qcount import linalg
from qcount.endo import classify
from qcount.orbits import (
    ABS_INDEC,
    DEFAULT_BUDGET,
    BudgetError,
    OrbitEngine,
    _bmm,
    _gl_elements,
    gl_order,
    iso_classes,
)
from qcount.quiver import Representation, double_quiver, parse_quiver


@lru_cache(maxsize=None)
def framed_loop_quiver():
    return parse_quiver("vertices: c, f\narrows: l: c->c\narrows: e: f->c")[0]


# ------------------------------------------------------------------ partitions


def _parts(n, cap, strict):
    if n == 0:
        yield ()
        return
    for p in range(min(n, cap), 0, -1):
        for rest in _parts(n - p, p - 1 if strict else p, strict):
            yield (p,) + rest


def partitions_of(n, strict=False):
    """Partitions of n as weakly (or strictly) decreasing tuples."""
    if n < 0:
        raise ValueError("negative size")
    return list(_parts(n, n, strict))


@lru_cache(maxsize=None)
def partition_count(n):
    """p(n) by the pentagonal-number recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total, k = 0, 1
    while k * (3 * k - 1) // 2 <= n:
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - k * (3 * k - 1) // 2)
        total += sign * partition_count(n - k * (3 * k + 1) // 2)
        k += 1
    return total


def conjugate(partition):
    if not partition:
        return ()
    return tuple(
        sum(1 for p in partition if p >= i) for i in range(1, partition[0] + 1)
    )


def _strictly_decreasing(parts):
    return all(a > b for a, b in zip(parts, parts[1:])) and all(p > 0 for p in parts)


# -------------------------------------------------------------- the set Sigma


def in_sigma(pair):
    lam, mu = pair
    return (
        _strictly_decreasing(lam)
        and _strictly_decreasing(mu)
        and len(lam) in (len(mu), len(mu) + 1)
    )


@lru_cache(maxsize=None)
def sigma_set(n):
    """All (lam, mu) with strict parts, |lam|+|mu| = n, compatible lengths."""
    out = []
    for a in range(n + 1):
        for lam in partitions_of(a, strict=True):
            for mu in partitions_of(n - a, strict=True):
                if len(lam) in (len(mu), len(mu) + 1):
                    out.append((lam, mu))
    return tuple(sorted(out))


def _rows_from_boxes(boxes):
    """Left-justified row lengths of a box set, refusing ragged input."""
    if not boxes:
        return ()
    depth = max(y for _, y in boxes) + 1
    rows = []
    for y in range(depth):
        xs = sorted(x for x, yy in boxes if yy == y)
        if xs != list(range(len(xs))):
            raise ValueError(f"row {y} is not contiguous: {xs}")
        rows.append(len(xs))
    if any(a < b for a, b in zip(rows, rows[1:])):
        raise ValueError(f"row lengths increase: {rows}")
    return tuple(rows)


def frobenius_glue(pair):
    """The partition with Frobenius symbol (lam_i - 1 | mu_i).

    Defined exactly on sigma pairs; hook i contributes its corner on the
    diagonal, an arm of lam_i - 1, and a leg of mu_i (0 when lam is one
    row longer).
    """
    if not in_sigma(pair):
        raise ValueError(f"{pair} violates the sigma conditions")
    lam, mu = pair
    boxes = set()
    for i in range(len(lam)):
        leg = mu[i] if i < len(mu) else 0
        boxes.add((i, i))
        boxes.update((i + k, i) for k in range(1, lam[i]))
        boxes.update((i, i + k) for k in range(1, leg + 1))
    return _rows_from_boxes(boxes)


def glue_by_shifted_rows(pair):
    """Geometric form of the same gluing: shifted rows against the diagonal.

    Row i of lam starts on the diagonal box (i, i); row i of mu hangs as
    a column strictly below it.  Used as a crosscheck of frobenius_glue,
    not by the library itself.
    """
    if not in_sigma(pair):
        raise ValueError(f"{pair} violates the sigma conditions")
    lam, mu = pair
    boxes = set()
    for i, part in enumerate(lam):
        boxes.update((i + k, i) for k in range(part))
    for i, part in enumerate(mu):
        boxes.update((i, i + k) for k in range(1, part + 1))
    return _rows_from_boxes(boxes)


def frobenius_coords(partition):
    """Inverse of frobenius_glue: a partition back to its sigma pair."""
    if any(a < b for a, b in zip(partition, partition[1:])) or any(
        p < 1 for p in partition
    ):
        raise ValueError(f"not a partition: {partition}")
    conj = conjugate(partition)
    d = sum(1 for i, p in enumerate(partition) if p > i)
    lam = tuple(partition[i] - i for i in range(d))
    mu = tuple(conj[i] - i - 1 for i in range(d))
    while mu and mu[-1] == 0:
        mu = mu[:-1]
    return (lam, mu)


# ----------------------------------------------------- nilpotent pair orbits


def build_orbit_rep(pair, field):
    """The normal form (u, vec) of a partition pair.

    u lowers within Jordan blocks of sizes lam_i + mu_i; vec points at
    depth lam_i inside block i.  Defined for arbitrary partition pairs,
    indecomposable precisely on sigma.
    """
    lam, mu = pair
    d = max(len(lam), len(mu))
    nu = [
        (lam[i] if i < len(lam) else 0) + (mu[i] if i < len(mu) else 0)
        for i in range(d)
    ]
    n = sum(nu)
    index = {}
    for i, size in enumerate(nu):
        for j in range(1, size + 1):
            index[(i, j)] = len(index)
    u = linalg.zeros(n, n)
    for i, size in enumerate(nu):
        for j in range(2, size + 1):
            u[index[(i, j - 1)], index[(i, j)]] = 1
    vec = np.zeros((n, 1), dtype=np.uint8)
    for i, part in enumerate(lam):
        if part:
            vec[index[(i, part)], 0] = 1
    return u, vec


def pair_rep(pair, field):
    """(u, vec) packaged as a framed-loop representation of dimension (n, 1)."""
    u, vec = build_orbit_rep(pair, field)
    q = framed_loop_quiver()
    return Representation(q, field, (u.shape[0], 1), {"l": u, "e": vec})


def jordan_type(field, u):
    """Block-size partition of a nilpotent matrix, from its rank filtration."""
    n = u.shape[0]
    ranks = [n]
    power = linalg.identity(n)
    for _ in range(n):
        power = linalg.mat_mul(field, power, u)
        ranks.append(linalg.rank(field, power))
    if n and ranks[-1] != 0:
        raise ValueError("matrix is not nilpotent")
    cols = tuple(ranks[k - 1] - ranks[k] for k in range(1, n + 1) if ranks[k - 1] > ranks[k])
    return conjugate(cols)


def _is_nilpotent(field, u):
    power = u
    for _ in range(u.shape[0] - 1):
        power = linalg.mat_mul(field, power, u)
    return not power.any()


@dataclass
class NilOrbitReport:
    n: int
    q: int
    n_orbits: int        # orbits of (u, vec) with u nilpotent
    n_pairs: int         # partition pairs (lam, mu) with |lam| + |mu| = n
    n_indec: int
    sigma_size: int
    types_match: bool    # indec Jordan types == {lam + mu over sigma}

    @property
    def passed(self):
        return (
            self.n_orbits == self.n_pairs
            and self.n_indec == self.sigma_size
            and self.types_match
        )


def classify_nil_orbits(n, field, budget=DEFAULT_BUDGET):
    """Orbit census of nilpotent pairs, checked against the partition labels."""
    if n < 1:
        raise ValueError("need n >= 1")
    quiver = framed_loop_quiver()
    reports = [
        r
        for r in iso_classes(quiver, (n, 1), field, budget)
        if _is_nilpotent(field, r.representative.mats["l"])
    ]
    n_pairs = sum(
        partition_count(a) * partition_count(n - a) for a in range(n + 1)
    )
    indec_types = sorted(
        jordan_type(field, r.representative.mats["l"])
        for r in reports
        if classify(r.representative) == ABS_INDEC
    )
    sigma = sigma_set(n)
    glued = sorted(
        tuple(a + b for a, b in itertools.zip_longest(lam, mu, fillvalue=0))
        for lam, mu in sigma
    )
    return NilOrbitReport(
        n=n,
        q=field.q,
        n_orbits=len(reports),
        n_pairs=n_pairs,
        n_indec=len(indec_types),
        sigma_size=len(sigma),
        types_match=indec_types == glued,
    )


# ------------------------------------------------------------------ M_0 cells


@dataclass
class CellReport:
    n: int
    q: int
    n_points: int        # the whole brute-force fiber
    indec_points: int    # the part whose (B1, v) restriction is indecomposable
    cells: Fraction      # indec_points / #GL_n
    expected: int        # p(n) * q^n


_CHUNK = 1 << 20


def m0_count(n, field, budget=DEFAULT_BUDGET):
    """Census of {(B1, B2, v, w) : B1 nilpotent, [B1, B2] + vw = Id} over F_q.

    The component count p(n) * q^n belongs to the locus where the
    restriction (B1, v) is indecomposable; when the characteristic
    divides a sub-dimension the raw fiber is strictly larger (already at
    n = q = 2 it doubles), so cells is taken over the indecomposable
    part.  GL_n-freeness is verified pointwise on the whole fiber; a
    stabilized point or a cell count different from p(n) * q^n raises.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    quiver = double_quiver(framed_loop_quiver())
    engine = OrbitEngine(quiver, field, (n, 1), budget)
    engine.check_budget(engine.scan_work())
    q = field.q
    ident = linalg.identity(n)

    shapes = dict(zip((a.name for a in quiver.arrows), engine.shapes))
    offsets = {}
    offset = 0
    for a, (r, c) in zip(quiver.arrows, engine.shapes):
        offsets[a.name] = offset
        offset += r * c

    def stack(codes, name):
        r, c = shapes[name]
        block = np.zeros((len(codes), r, c), dtype=np.uint8)
        for t in range(r * c):
            place = int(engine.places[offsets[name] + t])
            block[:, t // c, t % c] = (codes // place) % q
        return block

    fiber = []
    for lo in range(0, engine.n_points, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, engine.n_points), dtype=np.int64)
        b1, b2 = stack(codes, "l"), stack(codes, "l*")
        v, w = stack(codes, "e"), stack(codes, "e*")
        mu = field.ADD[
            field.ADD[_bmm(field, b1, b2), field.NEG[_bmm(field, b2, b1)]],
            _bmm(field, v, w),
        ]
        mask = (mu == ident[None]).reshape(len(codes), -1).all(axis=1)
        power = b1
        for _ in range(n - 1):
            power = _bmm(field, power, b1)
        mask &= ~power.reshape(len(codes), -1).any(axis=1)
        fiber.append(codes[mask])
    fiber = np.concatenate(fiber)
    n_points = int(fiber.shape[0])

    # the group here is GL_n alone: the framing line is not quotiented
    gls, gl_invs = _gl_elements(field, n)
    n_g = gls.shape[0]
    if n_points * n_g > budget:
        raise BudgetError(n_points * n_g, budget)
    fiber_set = set(int(c) for c in fiber)
    seen = set()
    indec_points = 0
    for code in fiber_set:
        if code in seen:
            continue
        mats = engine.decode(code)
        moved = {
            "l": _bmm(field, _bmm(field, gls, np.broadcast_to(mats["l"], (n_g, n, n))), gl_invs),
            "l*": _bmm(field, _bmm(field, gls, np.broadcast_to(mats["l*"], (n_g, n, n))), gl_invs),
            "e": _bmm(field, gls, np.broadcast_to(mats["e"], (n_g, n, 1))),
            "e*": _bmm(field, np.broadcast_to(mats["e*"], (n_g, 1, n)), gl_invs),
        }
        flat = np.concatenate([moved[a.name].reshape(n_g, -1) for a in quiver.arrows], axis=1)
        orbit = np.unique(flat.astype(np.int64) @ engine.places)
        seen.update(int(c) for c in orbit)
        if orbit.shape[0] != n_g:
            raise AssertionError(
                f"point {code} has a stabilizer of order {n_g // orbit.shape[0]}"
            )
        restriction = Representation(
            framed_loop_quiver(), field, (n, 1), {"l": mats["l"], "e": mats["e"]}
        )
        if classify(restriction) == ABS_INDEC:
            indec_points += int(orbit.shape[0])
    expected = partition_count(n) * q**n
    cells = Fraction(indec_points, gl_order((n,), q))
    if cells != expected:
        raise AssertionError(f"cells = {cells}, expected p({n})*{q}^{n} = {expected}")
    return CellReport(
        n=n,
        q=q,
        n_points=n_points,
        indec_points=indec_points,
        cells=cells,
        expected=expected,
    )


# -------------------------------------------------------------------- snakes


def _box_colors(partition, n_colors):
    counts = [0] * n_colors
    for y, row in enumerate(partition):
        for x in range(row):
            counts[(x - y) % n_colors] += 1
    return tuple(counts)


def colored_diagrams(n_colors, v):
    """Partitions of sum(v) with exactly v_i boxes of content i mod n."""
    return [p for p in partitions_of(sum(v)) if _box_colors(p, n_colors) == tuple(v)]


def _snake_colors(length, mark, n_colors):
    counts = [0] * n_colors
    for content in range(1 - mark, length - mark + 1):
        counts[content % n_colors] += 1
    return tuple(counts)


def snake_collections(n_colors, v):
    """Marked snakes, strictly nested when aligned at their marks.

    A snake is (length, mark) with the mark on a box of content 0; head
    mark-1 and tail length-mark must strictly decrease across a
    collection on both sides at once.
    """
    total = sum(v)
    if total == 0:
        return [()]
    candidates = [(ln, m) for ln in range(1, total + 1) for m in range(1, ln + 1)]
    out = []
    for k in range(1, total + 1):
        for combo in itertools.combinations(candidates, k):
            if sum(s[0] for s in combo) != total:
                continue
            ordered = sorted(combo, key=lambda s: s[1] - 1, reverse=True)
            heads = [m - 1 for _, m in ordered]
            tails = [ln - m for ln, m in ordered]
            if any(a <= b for a, b in zip(heads, heads[1:])):
                continue
            if any(a <= b for a, b in zip(tails, tails[1:])):
                continue
            colors = [0] * n_colors
            for ln, m in ordered:
                for c, cnt in enumerate(_snake_colors(ln, m, n_colors)):
                    colors[c] += cnt
            if tuple(colors) == tuple(v):
                out.append(tuple(ordered))
    return sorted(out)


def bend(collection):
    """Fold each snake at its mark into a hook; stack hooks into a partition."""
    boxes = set()
    ordered = sorted(collection, key=lambda s: s[1] - 1, reverse=True)
    for i, (length, mark) in enumerate(ordered):
        head, tail = mark - 1, length - mark
        boxes.add((i, i))
        boxes.update((i + k, i) for k in range(1, tail + 1))
        boxes.update((i, i + k) for k in range(1, head + 1))
    return _rows_from_boxes(boxes)


@dataclass
class SnakeReport:
    n: int
    v: tuple
    collections: list
    diagrams: list
    table: list     # (collection, bent diagram) pairs

    @property
    def passed(self):
        bent = [d for _, d in self.table]
        return len(bent) == len(set(bent)) and sorted(bent) == sorted(self.diagrams)


def snakes(n_colors, v, framed=0):
    """Both sides of the fixed-point bijection for one cyclic dimension vector.

    framed names the cycle vertex carrying the framing; colors are
    rotated so that marks sit on content-zero boxes.
    """
    v = tuple(v)
    if len(v) != n_colors:
        raise ValueError("one multiplicity per color")
    w = tuple(v[(c + framed) % n_colors] for c in range(n_colors))
    collections = snake_collections(n_colors, w)
    diagrams = colored_diagrams(n_colors, w)
    table = [(col, bend(col)) for col in collections]
    return SnakeReport(n=n_colors, v=v, collections=collections, diagrams=diagrams, table=table)
