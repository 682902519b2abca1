import json

import pytest
from hypothesis import given, strategies as st

from laurent_mahler import LaurentPoly
from laurent_mahler import cluster as cl
from laurent_mahler.recurrence import builtin, iterate_symbolic


@st.composite
def skew_symmetrizable(draw, n_max=4, bound=3):
    n = draw(st.integers(2, n_max))
    d = [draw(st.integers(1, 3)) for _ in range(n)]
    # B = S D^{-1} with S skew-symmetric gives D B skew-symmetric; keep entries integral
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            s = draw(st.integers(-bound, bound)) * d[i] * d[j]
            rows[i][j] = s // d[i]
            rows[j][i] = -s // d[j]
    return rows


@given(skew_symmetrizable())
def test_matrix_mutation_is_an_involution(rows):
    B = cl.ExchangeMatrix(rows)
    for k in range(1, B.n + 1):
        M = cl.mutate_matrix(B, k)
        assert M.symmetrizer() is not None
        assert cl.mutate_matrix(M, k) == B


@given(skew_symmetrizable(n_max=3, bound=1))
def test_seed_mutation_is_an_involution(rows):
    seed = cl.Seed.initial(rows)
    for k in range(1, seed.n + 1):
        once = cl.mutate_cluster(seed, k)
        assert cl.mutate_cluster(once, k) == seed


def test_symmetrizer():
    assert cl.skew_symmetrizer([[0, 1], [-2, 0]]) == (2, 1)
    assert cl.skew_symmetrizer([[0, 2, -2], [-2, 0, 2], [2, -2, 0]]) == (1, 1, 1)
    with pytest.raises(ValueError):
        cl.ExchangeMatrix([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        # cyclic ratio inconsistency
        cl.ExchangeMatrix([[0, 1, -1], [-2, 0, 1], [1, -1, 0]])


def test_a2_pentagon():
    seed = cl.builtin_seed("a2")
    check = cl.check_period(seed, cl.MutationSequence([1, 2, 1, 2, 1]))
    assert check.periodic and not check.exact and check.relabelling == (2, 1)
    phi = cl.MutationSequence([1], [2, 1])
    s = seed
    for step in range(1, 6):
        s = cl.apply_sequence(s, phi)
        assert (s == seed) == (step == 5)


def test_rank2_seed_follows_the_recurrence():
    for r in (1, 2, 3):
        seed = cl.builtin_seed(f"rank2:{r}")
        phi = cl.MutationSequence([1], [2, 1])
        orbit = iterate_symbolic(builtin("rank2", r=r), 8)
        s = seed
        for n in range(1, 7):
            assert s.cluster == (orbit[n], orbit[n + 1])
            assert cl.matrix_period_check(s.matrix, [1, 2]) and abs(s.matrix[0, 1]) == r
            s = cl.apply_sequence(s, phi)


def test_markoff_matrix_and_seed():
    B = cl.ExchangeMatrix(cl.MARKOFF_MATRIX)
    assert cl.matrix_period_check(B, [1, 2])
    once = cl.mutate_matrix(B, 1).permuted([1, 2, 0])
    assert once == -B
    orbit = iterate_symbolic(builtin("markoff"), 8)
    s = cl.Seed.initial(B)
    phi = cl.MutationSequence([1], [2, 3, 1])
    for n in range(1, 6):
        assert s.cluster == (orbit[n], orbit[n + 1], orbit[n + 2])
        s = cl.apply_sequence(s, phi)


def test_somos_matrix_and_seed():
    B = cl.ExchangeMatrix(cl.SOMOS4_MATRIX)
    assert cl.matrix_period_check(B, [1], [2, 3, 4, 1])
    orbit = iterate_symbolic(builtin("somos4"), 9)
    s = cl.Seed.initial(B)
    phi = cl.MutationSequence([1], [2, 3, 4, 1])
    for n in range(1, 5):
        assert s.cluster == tuple(orbit[n + i] for i in range(4)) and s.matrix == B
        s = cl.apply_sequence(s, phi)
    full = cl.apply_sequence(cl.Seed.initial(B), cl.MutationSequence([1, 2, 3, 4]))
    assert full.cluster == tuple(orbit[n] for n in range(5, 9)) and full.matrix == B


def test_mutation_tree_degrees():
    assert cl.explore_mutation_tree(cl.builtin_seed("a2"), 6).max_degrees == [1, 2, 2, 1, 1, 1]
    rep = cl.explore_mutation_tree(cl.builtin_seed("rank2:3"), 6)
    assert rep.max_degrees == [3, 9, 24, 63, 165, 432]
    assert rep.seeds_per_depth == [2, 2, 2, 2, 2, 2]
    assert cl.explore_mutation_tree(cl.builtin_seed("markoff"), 4).max_degrees == [2, 4, 8, 14]


def test_mutation_tree_limits():
    rep = cl.explore_mutation_tree(cl.builtin_seed("somos4"), 6, max_seeds=20)
    assert rep.truncated and "seed limit" in rep.reason


def test_json_round_trip():
    seed = cl.apply_sequence(cl.builtin_seed("markoff"), cl.MutationSequence([1, 2]))
    data = json.loads(json.dumps(cl.seed_to_json(seed)))
    assert cl.seed_from_json(data) == seed
    plain = cl.seed_from_json({"n": 2, "matrix": [[0, 1], [-1, 0]]})
    assert plain == cl.builtin_seed("a2")
    with pytest.raises(ValueError):
        cl.seed_from_json({"n": 3, "matrix": [[0, 1], [-1, 0]]})


def test_bad_indices():
    seed = cl.builtin_seed("a2")
    with pytest.raises(IndexError):
        cl.mutate_cluster(seed, 3)
    with pytest.raises(ValueError):
        cl.MutationSequence([1], [1, 1])
