"""Brute-force enumeration of Rep_v(Q)(F_q) and its GL_v-action.

A point is the tuple of arrow matrices, flattened to base-q digits and
packed big-endian into one integer, so integer order is lex order on
entries.  The orbit sweep walks codes in increasing order; the first
unseen code in an orbit is therefore its lexicographically least
element, which becomes the class representative.

Everything here is an oracle: independent of the closed-form and
generating-series layers it is used to verify.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from qcount import linalg
from qcount.ff import CycloInt, CycloRational, additive_character, extension_of, make_field
from qcount.quiver import Potential, Representation, evaluate_potential

DEFAULT_BUDGET = 1 << 34
# seen-bitmap allocation guard, independent of the ops budget
_MAX_STATES = 1 << 28

DECOMPOSABLE = "Decomposable"
INDEC_NOT_ABS = "IndecNotAbs"
ABS_INDEC = "AbsIndec"
UNCLASSIFIED = "Unclassified"


class BudgetError(RuntimeError):
    def __init__(self, work, budget):
        self.work = work
        self.budget = budget
        super().__init__(f"estimated work {work} exceeds budget {budget}")


@dataclass
class ClassReport:
    representative: Representation
    orbit_size: int
    aut_order: int
    tag: str = UNCLASSIFIED


@dataclass
class CountBundle:
    q: int
    v: tuple
    n_points: int
    n_iso: int
    stacky: Fraction
    n_ai: int | None
    reports: list


def count_points(quiver, dim, field_or_q):
    """#Rep_v(Q)(F_q) = q^(sum over arrows of v_source * v_target)."""
    dim = quiver.check_dim(dim)
    q = field_or_q if isinstance(field_or_q, int) else field_or_q.q
    idx = quiver.vertex_index
    e = sum(dim[idx(a.source)] * dim[idx(a.target)] for a in quiver.arrows)
    return q**e


def gl_order(dim, q):
    """#GL_v(F_q) = prod_i prod_{j<v_i} (q^{v_i} - q^j)."""
    total = 1
    for n in dim:
        for j in range(n):
            total *= q**n - q**j
    return total


def stacky_count(quiver, dim, field_or_q):
    q = field_or_q if isinstance(field_or_q, int) else field_or_q.q
    return Fraction(count_points(quiver, dim, q), gl_order(quiver.check_dim(dim), q))


_GL_CACHE = {}


def _gl_elements(field, n):
    """All of GL_n(F_q) with inverses, as stacked code matrices."""
    key = (field.p, field.k, n)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    if n == 0:
        empty = np.zeros((1, 0, 0), dtype=np.uint8)
        _GL_CACHE[key] = (empty, empty)
        return _GL_CACHE[key]
    q = field.q
    mats, invs = [], []
    for code in range(q ** (n * n)):
        m = np.zeros((n, n), dtype=np.uint8)
        c = code
        for t in range(n * n):
            m[t // n, t % n] = c % q
            c //= q
        if linalg.is_invertible(field, m):
            mats.append(m)
            invs.append(linalg.mat_inv(field, m))
    out = (np.stack(mats), np.stack(invs))
    assert out[0].shape[0] == gl_order((n,), q)
    _GL_CACHE[key] = out
    return out


def _bmm(f, a, b):
    """Batched matrix product over the field: (N,m,k) x (N,k,n)."""
    n_batch, m, k = a.shape
    r = b.shape[2]
    acc = np.zeros((n_batch, m, r), dtype=np.uint8)
    for t in range(k):
        acc = f.ADD[acc, f.MUL[a[:, :, t][:, :, None], b[:, t, :][:, None, :]]]
    return acc


class OrbitEngine:
    """Shared state for one (quiver, dim, field) enumeration problem."""

    def __init__(self, quiver, field, dim, budget=DEFAULT_BUDGET):
        self.quiver = quiver
        self.field = field
        self.dim = quiver.check_dim(dim)
        self.budget = budget
        idx = quiver.vertex_index
        self.shapes = [
            (self.dim[idx(a.target)], self.dim[idx(a.source)]) for a in quiver.arrows
        ]
        self.n_entries = sum(r * c for r, c in self.shapes)
        self.n_points = field.q**self.n_entries
        self.gl_total = gl_order(self.dim, field.q)
        # big-endian place values, entry 0 most significant
        q = field.q
        self.places = np.array(
            [q ** (self.n_entries - 1 - t) for t in range(self.n_entries)],
            dtype=np.int64,
        )
        self._group = None

    def scan_work(self):
        return 2 * self.n_points * max(self.n_entries, 1)

    def check_budget(self, work):
        if work > self.budget:
            raise BudgetError(work, self.budget)
        if self.n_points > _MAX_STATES:
            raise BudgetError(self.n_points, _MAX_STATES)

    def _build_group(self):
        """Per-arrow (g_target, g_source^{-1}) stacks over the product group."""
        if self._group is not None:
            return self._group
        per_vertex = [_gl_elements(self.field, n) for n in self.dim]
        sizes = [g.shape[0] for g, _ in per_vertex]
        grids = np.indices(sizes).reshape(len(sizes), -1)
        idx = self.quiver.vertex_index
        pairs = []
        for a in self.quiver.arrows:
            gt = per_vertex[idx(a.target)][0][grids[idx(a.target)]]
            gs_inv = per_vertex[idx(a.source)][1][grids[idx(a.source)]]
            pairs.append((gt, gs_inv))
        self._group = pairs
        return pairs

    def decode(self, code):
        """Integer code -> dict of arrow matrices."""
        mats = {}
        offset = 0
        for a, (r, c) in zip(self.quiver.arrows, self.shapes):
            block = np.zeros((r, c), dtype=np.uint8)
            for t in range(r * c):
                place = int(self.places[offset + t])
                block[t // c, t % c] = (code // place) % self.field.q
            mats[a.name] = block
            offset += r * c
        return mats

    def representation(self, code):
        return Representation(self.quiver, self.field, self.dim, self.decode(code))

    def encode(self, mats):
        flat = np.concatenate(
            [mats[a.name].reshape(-1) for a in self.quiver.arrows] or [np.zeros(0, np.uint8)]
        )
        return int(flat.astype(np.int64) @ self.places)

    def orbit_codes(self, mats):
        """Sorted codes of the full GL_v-orbit through the given point."""
        pairs = self._build_group()
        f = self.field
        n_g = pairs[0][0].shape[0] if pairs else self.gl_total
        parts = []
        for (gt, gs_inv), a, (r, c) in zip(pairs, self.quiver.arrows, self.shapes):
            m = np.broadcast_to(mats[a.name], (n_g, r, c))
            moved = _bmm(f, _bmm(f, gt, m), gs_inv)
            parts.append(moved.reshape(n_g, r * c))
        if parts:
            flat = np.concatenate(parts, axis=1)
            codes = flat.astype(np.int64) @ self.places
        else:
            codes = np.zeros(1, dtype=np.int64)
        return np.unique(codes)

    def scan(self):
        """All GL_v-orbits, each reported at its least element."""
        self.check_budget(self.scan_work())
        seen = np.zeros(self.n_points, dtype=bool)
        reports = []
        chunk = 1 << 15
        for base in range(0, self.n_points, chunk):
            for off in np.flatnonzero(~seen[base : base + chunk]):
                code = base + int(off)
                if seen[code]:
                    continue
                mats = self.decode(code)
                orbit = self.orbit_codes(mats)
                seen[orbit] = True
                size = int(orbit.shape[0])
                assert int(orbit[0]) == code, "sweep must meet orbits at their minimum"
                assert self.gl_total % size == 0
                reports.append(
                    ClassReport(
                        representative=Representation(
                            self.quiver, self.field, self.dim, mats
                        ),
                        orbit_size=size,
                        aut_order=self.gl_total // size,
                    )
                )
        assert sum(r.orbit_size for r in reports) == self.n_points
        return reports


def iso_classes(quiver, dim, field, budget=DEFAULT_BUDGET):
    """One ClassReport per GL_v-orbit on Rep_v(Q)(F_q)."""
    return OrbitEngine(quiver, field, dim, budget).scan()


def burnside_count(quiver, dim, field, budget=DEFAULT_BUDGET, threads=1):
    """#orbits = (1/#GL) * #{(y,g) : g y = y}, by the honest double loop.

    Deliberately shares nothing with the orbit sweep so the two can
    check each other.
    """
    engine = OrbitEngine(quiver, field, dim, budget)
    work = engine.n_points * engine.gl_total
    if work > budget:
        raise BudgetError(work, budget)
    if engine.n_points > _MAX_STATES:
        raise BudgetError(engine.n_points, _MAX_STATES)
    f = field
    q = f.q
    n_pts, n_ent = engine.n_points, engine.n_entries

    # decode every point once: per-arrow stacks of shape (n_pts, r, c)
    codes = np.arange(n_pts, dtype=np.int64)
    point_mats = []
    offset = 0
    for r, c in engine.shapes:
        block = np.zeros((n_pts, r, c), dtype=np.uint8)
        for t in range(r * c):
            place = int(engine.places[offset + t])
            block[:, t // c, t % c] = (codes // place) % q
        point_mats.append(block)
        offset += r * c

    per_vertex = [_gl_elements(f, n)[0] for n in engine.dim]
    per_vertex_inv = [_gl_elements(f, n)[1] for n in engine.dim]
    sizes = [g.shape[0] for g in per_vertex]
    grids = np.indices(sizes).reshape(len(sizes), -1) if sizes else np.zeros((0, 1), int)
    idx = quiver.vertex_index
    n_group = grids.shape[1] if sizes else 1

    def fixed_points_of(gi):
        mask = np.ones(n_pts, dtype=bool)
        for a, (r, c), pts in zip(quiver.arrows, engine.shapes, point_mats):
            gt = per_vertex[idx(a.target)][grids[idx(a.target), gi]]
            gs_inv = per_vertex_inv[idx(a.source)][grids[idx(a.source), gi]]
            gt_b = np.broadcast_to(gt, (n_pts, r, r))
            gs_b = np.broadcast_to(gs_inv, (n_pts, c, c))
            moved = _bmm(f, _bmm(f, gt_b, pts), gs_b)
            mask &= (moved == pts).reshape(n_pts, -1).all(axis=1)
        return int(mask.sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            total = sum(pool.map(fixed_points_of, range(n_group)))
    else:
        total = sum(fixed_points_of(gi) for gi in range(n_group))
    assert total % engine.gl_total == 0, "Burnside sum must divide evenly"
    return total // engine.gl_total


def exp_sum(quiver, dim, field, potential=None, mode="plain", budget=DEFAULT_BUDGET, reports=None):
    """Character sum over iso classes, plain or weighted by 1/#Aut.

    plain:  sum over classes of psi(phi(x)), a CycloInt;
    stacky: same with each term divided by #Aut(x), a CycloRational.
    With no potential the values are psi(0) = 1, so plain degenerates to
    the class count and stacky to the groupoid cardinality.
    """
    if mode not in ("plain", "stacky"):
        raise ValueError(f"unknown mode {mode!r}")
    if reports is None:
        reports = iso_classes(quiver, dim, field, budget)
    p = field.p
    if potential is None:
        potential = Potential.zero(quiver)
    if mode == "plain":
        total = CycloInt.zero(p)
        for rep in reports:
            total = total + additive_character(evaluate_potential(rep.representative, potential))
        return total
    total = CycloRational.zero(p)
    for rep in reports:
        val = additive_character(evaluate_potential(rep.representative, potential))
        total = total + val.to_rational() / rep.aut_order
    return total


# -- bundles and the disk cache -------------------------------------------------


def quiver_hash(quiver):
    blob = json.dumps(quiver.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _cache_path(cache_dir, quiver, dim, q):
    name = f"{quiver_hash(quiver)[:16]}_v{'-'.join(map(str, dim))}_q{q}.json"
    return os.path.join(cache_dir, name)


def bundle_to_json(bundle):
    return {
        "q": bundle.q,
        "v": list(bundle.v),
        "n_points": bundle.n_points,
        "n_iso": bundle.n_iso,
        "stacky": [bundle.stacky.numerator, bundle.stacky.denominator],
        "n_ai": bundle.n_ai,
        "reports": [
            {
                "rep": r.representative.to_json(),
                "orbit_size": r.orbit_size,
                "aut_order": r.aut_order,
                "tag": r.tag,
            }
            for r in bundle.reports
        ],
    }


def bundle_from_json(data, quiver, field):
    reports = []
    for row in data["reports"]:
        mats = {
            name: np.array(block, dtype=np.uint8).reshape(
                len(block), len(block[0]) if block else 0
            )
            for name, block in row["rep"]["mats"].items()
        }
        dim = tuple(row["rep"]["dim"])
        idx = quiver.vertex_index
        fixed = {
            a.name: mats[a.name].reshape(dim[idx(a.target)], dim[idx(a.source)])
            for a in quiver.arrows
        }
        reports.append(
            ClassReport(
                representative=Representation(quiver, field, dim, fixed),
                orbit_size=row["orbit_size"],
                aut_order=row["aut_order"],
                tag=row["tag"],
            )
        )
    return CountBundle(
        q=data["q"],
        v=tuple(data["v"]),
        n_points=data["n_points"],
        n_iso=data["n_iso"],
        stacky=Fraction(*data["stacky"]),
        n_ai=data["n_ai"],
        reports=reports,
    )


def count_bundle(
    quiver,
    dim,
    field,
    classify=True,
    budget=DEFAULT_BUDGET,
    cache_dir=None,
):
    """Full count data for one (quiver, v, q), optionally cached on disk."""
    dim = quiver.check_dim(dim)
    path = _cache_path(cache_dir, quiver, dim, field.q) if cache_dir else None
    if path and os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
        bundle = bundle_from_json(data, quiver, field)
        if not classify or bundle.n_ai is not None:
            return bundle
    else:
        reports = iso_classes(quiver, dim, field, budget)
        bundle = CountBundle(
            q=field.q,
            v=dim,
            n_points=count_points(quiver, dim, field),
            n_iso=len(reports),
            stacky=stacky_count(quiver, dim, field),
            n_ai=None,
            reports=reports,
        )
    if classify:
        from qcount import endo  # deferred: endo sits above this module

        n_ai = 0
        for r in bundle.reports:
            r.tag = endo.classify(r.representative)
            if r.tag == ABS_INDEC:
                n_ai += 1
            if r.tag == UNCLASSIFIED:
                n_ai = None
                break
        bundle.n_ai = n_ai
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(bundle_to_json(bundle), fh, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
    return bundle


def counts_over_extension(quiver, dim, base_field, n, classify=True, budget=DEFAULT_BUDGET, cache_dir=None):
    """CountBundle over F_{q^n}; n=1 is the base count itself."""
    if n < 1:
        raise ValueError("extension degree must be >= 1")
    field = base_field if n == 1 else extension_of(base_field, n)
    return count_bundle(quiver, dim, field, classify=classify, budget=budget, cache_dir=cache_dir)
