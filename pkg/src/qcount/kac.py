"""Kac polynomials by exact interpolation of AI counts over sample fields.

The AI count for a fixed dimension vector is a polynomial in the field
size; its degree is bounded by 1 - <v,v> in the Euler form, so counting
over enough sample fields pins the polynomial down exactly.  Everything
runs over Fraction, and a non-integer coefficient at the end is raised
as an error rather than rounded away.
"""

from dataclasses import dataclass
from fractions import Fraction

from qcount.endo import DEFAULT_END_CAP, EndCapError, hom_space
from qcount.ff import field_for_q
from qcount.orbits import DEFAULT_BUDGET, UNCLASSIFIED, count_bundle, quiver_hash
from qcount.pleth import Poly


def euler_form(quiver, v, w):
    """<v,w> = sum_i v_i w_i - sum_{a: i->j} v_i w_j."""
    idx = quiver.vertex_index
    total = sum(x * y for x, y in zip(v, w))
    for a in quiver.arrows:
        total -= v[idx(a.source)] * w[idx(a.target)]
    return total


def degree_bound(quiver, v):
    """Kac's bound: deg <= 1 - <v,v>, floored at 0 for the empty cases."""
    return max(1 - euler_form(quiver, v, v), 0)


@dataclass(frozen=True)
class KacPoly:
    quiver: str          # quiver hash, so the poly is self-describing
    v: tuple
    coeffs: tuple        # integers, low degree first
    samples: tuple       # prime powers the interpolation consumed

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def evaluate(self, q):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def to_json(self):
        return {
            "quiver": self.quiver,
            "v": list(self.v),
            "coeffs": list(self.coeffs),
            "samples": list(self.samples),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            quiver=data["quiver"],
            v=tuple(data["v"]),
            coeffs=tuple(data["coeffs"]),
            samples=tuple(data["samples"]),
        )


def _lagrange(points):
    total = Poly()
    for i, (xi, yi) in enumerate(points):
        term = Poly.const(Fraction(yi))
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            term = term * Poly([-xj, 1]) * Poly.const(Fraction(1, xi - xj))
        total = total + term
    return total


def kac_poly(quiver, v, samples, budget=DEFAULT_BUDGET, cache_dir=None):
    """Interpolate the AI count of Rep_v through the sample field sizes."""
    samples = tuple(samples)
    if len(set(samples)) != len(samples):
        raise ValueError("repeated sample points")
    bound = degree_bound(quiver, v)
    if len(samples) < bound + 1:
        raise ValueError(f"need at least {bound + 1} samples, got {len(samples)}")

    points = []
    for q in samples:
        field = field_for_q(q)
        bundle = count_bundle(quiver, v, field, budget=budget, cache_dir=cache_dir)
        if bundle.n_ai is None:
            bad = next(r for r in bundle.reports if r.tag == UNCLASSIFIED)
            end_dim = len(hom_space(bad.representative, bad.representative))
            raise EndCapError(q**end_dim, DEFAULT_END_CAP)
        points.append((Fraction(q), Fraction(bundle.n_ai)))

    poly = _lagrange(points)
    if poly.degree > bound:
        raise AssertionError(
            f"interpolant degree {poly.degree} exceeds the bound {bound}"
        )
    coeffs = []
    for c in poly.c:
        if c.denominator != 1:
            raise AssertionError(f"non-integer Kac coefficient {c}")
        coeffs.append(int(c))
    return KacPoly(
        quiver=quiver_hash(quiver), v=tuple(v), coeffs=tuple(coeffs), samples=samples
    )


def positivity_check(k):
    """(all coefficients >= 0, list of offending (power, coefficient))."""
    bad = [(i, c) for i, c in enumerate(k.coeffs) if c < 0]
    return (not bad, bad)
