"""Partition pairs, the framed-loop orbit census, fiber cells, and snakes."""

import numpy as np
import pytest

from qcount.cm import (
    bend,
    build_orbit_rep,
    classify_nil_orbits,
    colored_diagrams,
    framed_loop_quiver,
    frobenius_coords,
    frobenius_glue,
    glue_by_shifted_rows,
    in_sigma,
    jordan_type,
    m0_count,
    pair_rep,
    partition_count,
    partitions_of,
    sigma_set,
    snake_collections,
    snakes,
)
from qcount.endo import classify
from qcount.ff import field_for_q
from qcount.orbits import ABS_INDEC, BudgetError

F2 = field_for_q(2)
F3 = field_for_q(3)


# ----------------------------------------------------------------- partitions


def test_partition_counts():
    assert [partition_count(n) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert partition_count(30) == 5604


def test_partitions_of_agree_with_count():
    for n in range(9):
        assert len(partitions_of(n)) == partition_count(n)


def test_strict_partitions():
    assert partitions_of(4, strict=True) == [(4,), (3, 1)]
    assert partitions_of(6, strict=True) == [(6,), (5, 1), (4, 2), (3, 2, 1)]


# ---------------------------------------------------------------------- sigma


def test_sigma_small():
    assert sigma_set(1) == (((1,), ()),)
    assert sigma_set(2) == (((1,), (1,)), ((2,), ()))
    assert sigma_set(3) == (((1,), (2,)), ((2,), (1,)), ((3,), ()))


def test_sigma_size_is_partition_count():
    for n in range(1, 31):
        assert len(sigma_set(n)) == partition_count(n)


def test_in_sigma():
    assert in_sigma(((3, 1), (2,)))
    assert in_sigma(((2, 1), (2, 1)))
    assert not in_sigma(((1,), (1, 1)))  # length gap 2
    assert not in_sigma(((2, 2), ()))  # lambda not strict
    assert not in_sigma(((2,), (2, 1)))  # mu longer


# ----------------------------------------------------------------------- glue


def test_glue_examples():
    assert frobenius_glue(((2,), ())) == (2,)
    assert frobenius_glue(((1,), (1,))) == (1, 1)
    assert frobenius_glue(((3, 1), (2,))) == (3, 2, 1)


def test_glue_rejects_non_sigma():
    with pytest.raises(ValueError):
        frobenius_glue(((1,), (1, 1)))


def test_coords_examples():
    assert frobenius_coords((3, 2)) == ((3, 1), (1,))
    assert frobenius_coords((1, 1, 1)) == ((1,), (2,))


def test_coords_rejects_non_partition():
    with pytest.raises(ValueError):
        frobenius_coords((1, 2))


def test_glue_round_trips():
    # hook gluing, the row/column geometric picture, and splitting agree
    for n in range(1, 31):
        for pair in sigma_set(n):
            diagram = frobenius_glue(pair)
            assert sum(diagram) == n
            assert glue_by_shifted_rows(pair) == diagram
            assert frobenius_coords(diagram) == pair


def test_glue_is_onto():
    for n in range(1, 16):
        glued = {frobenius_glue(pair) for pair in sigma_set(n)}
        assert glued == set(partitions_of(n))


# ----------------------------------------------------------------- orbit reps


def test_build_orbit_rep_examples():
    u, vec = build_orbit_rep(((1,), ()), F2)
    assert u.tolist() == [[0]] and vec.tolist() == [[1]]

    u, vec = build_orbit_rep(((2,), ()), F2)
    assert u.tolist() == [[0, 1], [0, 0]] and vec.tolist() == [[0], [1]]

    u, vec = build_orbit_rep(((1,), (1,)), F2)
    assert u.tolist() == [[0, 1], [0, 0]] and vec.tolist() == [[1], [0]]

    u, vec = build_orbit_rep(((2,), (1,)), F3)
    assert u.tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    assert vec.tolist() == [[0], [1], [0]]


def test_pair_rep_jordan_type_is_componentwise_sum():
    from itertools import zip_longest

    for n in range(1, 7):
        for pair in sigma_set(n):
            lam, mu = pair
            nu = tuple(a + b for a, b in zip_longest(lam, mu, fillvalue=0))
            x = pair_rep(pair, F2)
            assert jordan_type(F2, x.mats["l"]) == nu


def test_indecomposable_iff_sigma():
    # classification over the framed loop picks out exactly the strict pairs
    for q in (2, 3):
        field = field_for_q(q)
        for n in (1, 2, 3):
            for a in range(n + 1):
                for lam in partitions_of(a):
                    for mu in partitions_of(n - a):
                        x = pair_rep((lam, mu), field)
                        got = classify(x) == ABS_INDEC
                        assert got == in_sigma((lam, mu))


def test_jordan_type():
    assert jordan_type(F2, np.array([[0, 1], [0, 0]], dtype=np.uint8)) == (2,)
    assert jordan_type(F2, np.zeros((3, 3), dtype=np.uint8)) == (1, 1, 1)
    with pytest.raises(ValueError):
        jordan_type(F2, np.eye(2, dtype=np.uint8))


# --------------------------------------------------------------- orbit census


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("n", [1, 2])
def test_nil_orbit_census_small(n, q):
    r = classify_nil_orbits(n, field_for_q(q))
    assert r.n_orbits == r.n_pairs == (2, 5)[n - 1]
    assert r.n_indec == r.sigma_size == n
    assert r.types_match
    assert r.passed


def test_nil_orbit_census_n3_q2():
    r = classify_nil_orbits(3, F2)
    assert r.n_orbits == r.n_pairs == 10
    assert r.n_indec == 3
    assert r.passed


@pytest.mark.slow
def test_nil_orbit_census_n3_q3():
    r = classify_nil_orbits(3, F3)
    assert r.n_orbits == r.n_pairs == 10
    assert r.n_indec == 3
    assert r.passed


def test_census_rejects_zero():
    with pytest.raises(ValueError):
        classify_nil_orbits(0, F2)


# ---------------------------------------------------------------- fiber cells


@pytest.mark.parametrize(
    "n, q, raw, indec",
    [(1, 2, 2, 2), (1, 3, 6, 6), (2, 2, 96, 48), (2, 3, 864, 864)],
)
def test_m0_cells(n, q, raw, indec):
    r = m0_count(n, field_for_q(q))
    assert r.n_points == raw
    assert r.indec_points == indec
    assert r.cells == r.expected == partition_count(n) * q**n


@pytest.mark.slow
def test_m0_cells_n3_q2():
    r = m0_count(3, F2)
    assert r.n_points == 6720
    assert r.indec_points == 4032
    assert r.cells == r.expected == partition_count(3) * 8


def test_m0_budget():
    with pytest.raises(BudgetError):
        m0_count(2, F2, budget=10)


def test_m0_rejects_zero():
    with pytest.raises(ValueError):
        m0_count(0, F2)


# --------------------------------------------------------------------- snakes


def test_snake_collections_two_colors():
    assert snake_collections(2, (1, 1)) == [((2, 1),), ((2, 2),)]
    assert snake_collections(2, (2, 1)) == [((3, 1),), ((3, 3),)]
    assert snake_collections(2, (0, 0)) == [()]


def test_colored_diagrams():
    assert colored_diagrams(2, (1, 1)) == [(2,), (1, 1)]
    assert colored_diagrams(2, (2, 1)) == [(3,), (1, 1, 1)]
    assert colored_diagrams(1, (3,)) == [(3,), (2, 1), (1, 1, 1)]
    assert colored_diagrams(2, (0, 0)) == [()]


def test_bend_examples():
    assert bend(()) == ()
    assert bend(((2, 1),)) == (2,)
    assert bend(((2, 2),)) == (1, 1)
    assert bend(((3, 2), (1, 1))) == (2, 2)


def test_snakes_two_color_examples():
    r = snakes(2, (1, 1))
    assert len(r.collections) == 2 and r.diagrams == [(2,), (1, 1)]
    assert r.passed
    assert snakes(2, (1, 0)).collections == [((1, 1),)]
    r = snakes(2, (0, 1))
    assert r.collections == [] and r.diagrams == []
    assert r.passed  # every snake and every diagram holds a color-0 box


def test_snakes_one_color_counts_partitions():
    for m in range(7):
        r = snakes(1, (m,))
        assert len(r.collections) == partition_count(m)
        assert r.passed


def test_snakes_grid():
    from itertools import product

    for n in (1, 2, 3):
        for v in product(range(5), repeat=n):
            if sum(v) > 4:
                continue
            r = snakes(n, v)
            assert r.passed
            assert len(r.collections) == len(r.diagrams)


def test_snakes_framing_rotates_colors():
    assert len(snakes(2, (2, 1), framed=1).collections) == len(
        snakes(2, (1, 2)).collections
    )
    assert snakes(2, (1, 1), framed=1).passed


def test_snakes_rejects_length_mismatch():
    with pytest.raises(ValueError):
        snakes(2, (1, 1, 1))


def test_framed_loop_quiver_shape():
    fl = framed_loop_quiver()
    assert fl.vertices == ("c", "f")
    assert [a.name for a in fl.arrows] == ["l", "e"]
