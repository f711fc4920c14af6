"""Moment map, genericity, and the AI / fiber-count identity."""

import numpy as np
import pytest

from conftest import cm_double, cm_quiver, cyclic2f, jordan, kronecker, rep
from qcount import linalg
from qcount.ff import field_for_q
from qcount.moment import (
    CoadjointTarget,
    ai_vs_fiber_check,
    diamond_check,
    fiber_count,
    half_dim_mo,
    moment_map,
    scalar_target,
)
from qcount.orbits import BudgetError, OrbitEngine
from qcount.quiver import Representation, double_quiver

F2 = field_for_q(2)
F3 = field_for_q(3)
F5 = field_for_q(5)


def kron_double():
    return double_quiver(kronecker())


# ---------------------------------------------------------------- moment map


def test_zero_rep_maps_to_zero():
    dq = kron_double()
    x = rep(dq, F3, (1, 1), {n: [[0]] for n in ("a", "b", "a*", "b*")})
    mu = moment_map(x)
    assert all(not mu.blocks[v].any() for v in dq.vertices)


def test_kronecker_scalar_formula():
    dq = kron_double()
    x = rep(dq, F3, (1, 1), {"a": [[1]], "b": [[2]], "a*": [[2]], "b*": [[1]]})
    mu = moment_map(x)
    val = F3.add(F3.mul(1, 2), F3.mul(2, 1))
    assert mu.blocks["t"][0, 0] == val
    assert mu.blocks["s"][0, 0] == F3.neg(val)


def test_cm_commutator_convention():
    # (B1, B2, v, w) = (0, 0, 1, 1): loop block vw = 1, framing block -wv = -1
    x = rep(cm_double(), F3, (1, 1), {"l": [[0]], "l*": [[0]], "e": [[1]], "e*": [[1]]})
    mu = moment_map(x)
    assert mu.blocks["c"][0, 0] == 1
    assert mu.blocks["f"][0, 0] == F3.neg(1)


def test_moment_map_rejects_undoubled():
    x = rep(jordan(), F2, (1,), {"l": [[1]]})
    with pytest.raises(ValueError):
        moment_map(x)


def test_trace_constraint_everywhere():
    dq = double_quiver(jordan())
    engine = OrbitEngine(dq, F2, (2,))
    for code in range(engine.n_points):
        mu = moment_map(Representation(dq, F2, (2,), engine.decode(code)))
        total = 0
        for v in dq.vertices:
            total = F2.add(total, linalg.trace(F2, mu.blocks[v]))
        assert total == 0


def test_equivariance_exhaustive():
    # mu(g.x) = g mu(x) g^{-1} over every point and every group element
    dq = double_quiver(jordan())
    gls = [
        g
        for bits in range(16)
        for g in [np.array([[bits & 1, (bits >> 1) & 1], [(bits >> 2) & 1, (bits >> 3) & 1]], dtype=np.uint8)]
        if linalg.is_invertible(F2, g)
    ]
    assert len(gls) == 6
    engine = OrbitEngine(dq, F2, (2,))
    for code in range(engine.n_points):
        mats = engine.decode(code)
        mu = moment_map(Representation(dq, F2, (2,), mats))
        for g in gls:
            gi = linalg.mat_inv(F2, g)
            moved = {
                name: linalg.mat_mul(F2, g, linalg.mat_mul(F2, m, gi))
                for name, m in mats.items()
            }
            mu_g = moment_map(Representation(dq, F2, (2,), moved))
            want = linalg.mat_mul(F2, g, linalg.mat_mul(F2, mu.blocks["a"], gi))
            assert np.array_equal(mu_g.blocks["a"], want)


# ------------------------------------------------------------------- targets


def test_target_trace_validation():
    dq = kron_double()
    with pytest.raises(ValueError):
        scalar_target(dq, F3, (1, 1), (1, 1))  # 1 + 1 != 0 mod 3
    t = scalar_target(dq, F3, (1, 1), (-1, 1))
    assert t.blocks["s"][0, 0] == 2 and t.blocks["t"][0, 0] == 1


def test_target_shape_validation():
    dq = kron_double()
    good = {"s": np.zeros((1, 1), np.uint8), "t": np.zeros((1, 1), np.uint8)}
    CoadjointTarget(dq, F3, (1, 1), good)
    bad = {"s": np.zeros((2, 2), np.uint8), "t": np.zeros((1, 1), np.uint8)}
    with pytest.raises(ValueError):
        CoadjointTarget(dq, F3, (1, 1), bad)


def test_scalar_count_validation():
    with pytest.raises(ValueError):
        scalar_target(kron_double(), F3, (1, 1), (1,))


# ------------------------------------------------------------------- diamond


def test_diamond_examples():
    assert diamond_check(None, (1, -1), (1, 1)) is True
    assert diamond_check(F3, (0, 0), (1, 1)) is False
    assert diamond_check(F3, (1, 2), (2,)) is True
    assert diamond_check(F3, (1, 1), (2,)) is False  # repeat within a vertex
    assert diamond_check(F2, (0,), (1,)) is True  # single zero, vacuous
    assert diamond_check(F5, (0, 1, 4), (1, 1, 1)) is False  # {0} sums to zero


def test_diamond_rejects_bad_input():
    with pytest.raises(ValueError):
        diamond_check(F3, (1, 2, 0), (1, 1))
    with pytest.raises(ValueError):
        diamond_check(F3, (1, 7), (1, 1))  # 7 is not an F_3 code


def test_diamond_respects_scaling():
    z = (1, 2, 4, 3)  # sums to 10 = 0 mod 5
    base = diamond_check(F5, z, (2, 2))
    for c in range(1, 5):
        scaled = tuple(F5.mul(c, x) for x in z)
        assert diamond_check(F5, scaled, (2, 2)) == base


def test_diamond_group_permutation_invariance():
    assert diamond_check(F3, (1, 2), (2,)) == diamond_check(F3, (2, 1), (2,))
    assert diamond_check(F5, (1, 4), (1, 1)) == diamond_check(F5, (4, 1), (1, 1))


# -------------------------------------------------------------- fiber counts


def test_kronecker_fiber():
    dq = kron_double()
    t = scalar_target(dq, F3, (1, 1), (-1, 1))
    r = fiber_count(dq, (1, 1), F3, t)
    assert r.n_points == 24  # q^3 - q solutions of aa* + bb* = 1
    assert r.free
    assert r.m_o == 12


def test_cm_fiber():
    t = scalar_target(cm_double(), F2, (1, 1), (1, -1))
    r = fiber_count(cm_double(), (1, 1), F2, t)
    assert r.n_points == 4  # loop entries free, ee* = 1 forced
    assert r.free
    assert r.m_o == 4


def test_zero_eta_is_not_free():
    dq = kron_double()
    t = scalar_target(dq, F3, (1, 1), (0, 0))
    r = fiber_count(dq, (1, 1), F3, t)
    assert not r.free
    assert r.witness is not None
    # the witness really does have a bigger stabilizer than the torus
    engine = OrbitEngine(dq, F3, (1, 1))
    orbit = engine.orbit_codes(r.witness.mats)
    assert engine.gl_total // len(orbit) > F3.q - 1


def test_fiber_budget():
    dq = kron_double()
    t = scalar_target(dq, F3, (1, 1), (-1, 1))
    with pytest.raises(BudgetError):
        fiber_count(dq, (1, 1), F3, t, budget=10)


def test_fiber_rejects_empty_dim():
    dq = kron_double()
    t = scalar_target(dq, F3, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        fiber_count(dq, (0, 0), F3, t)


# ------------------------------------------------------------ the identity


def test_half_dim_examples():
    assert half_dim_mo(kronecker(), (1, 1)) == 1
    assert half_dim_mo(cm_quiver(), (1, 1)) == 1
    assert half_dim_mo(cm_quiver(), (2, 1)) == 2
    assert half_dim_mo(jordan(), (1,)) == 1
    with pytest.raises(ValueError):
        half_dim_mo(kron_double(), (1, 1))


def test_kronecker_identity_q3():
    r = ai_vs_fiber_check(kronecker(), (1, 1), F3, (-1, 1))
    assert r.n_ai == 4 and r.half_dim == 1
    assert r.m_o == 12 and r.passed


def test_cm_identity_q2():
    r = ai_vs_fiber_check(cm_quiver(), (1, 1), F2, (1, -1))
    assert r.n_ai == 2 and r.m_o == 4 and r.passed


def test_jordan_identity_degenerate():
    # eta = 0 passes genericity vacuously; fiber is the whole plane
    r = ai_vs_fiber_check(jordan(), (1,), F2, (0,))
    assert r.n_ai == 2 and r.fiber_points == 4 and r.m_o == 4 and r.passed


@pytest.mark.parametrize("q", [2, 3, 5])
def test_kronecker_identity_grid(q):
    r = ai_vs_fiber_check(kronecker(), (1, 1), field_for_q(q), (-1, 1))
    assert r.passed and r.m_o == q * (q + 1)


@pytest.mark.parametrize("q", [2, 3])
def test_cm_identity_grid(q):
    r = ai_vs_fiber_check(cm_quiver(), (1, 1), field_for_q(q), (1, -1))
    assert r.passed and r.m_o == q * q


def test_cyclic_framed_identity():
    # no diamond eta exists over F_2 here, so genericity is waived;
    # the identity still holds and the action is still free
    r = ai_vs_fiber_check(
        cyclic2f(), (1, 1, 1), F2, (0, 1, 1), require_diamond=False
    )
    assert not r.diamond
    assert r.n_ai == 3 and r.m_o == 6 and r.passed


def test_identity_rejects_non_generic_eta():
    with pytest.raises(ValueError):
        ai_vs_fiber_check(cyclic2f(), (1, 1, 1), F2, (0, 1, 1))


def test_identity_rejects_fat_dims():
    with pytest.raises(ValueError):
        ai_vs_fiber_check(jordan(), (2,), F2, (0,))
    with pytest.raises(ValueError):
        ai_vs_fiber_check(kronecker(), (0, 0), F2, (0, 0))
