import cmath
import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from laurent_mahler import LaurentPoly, XArray, eval_complex
from laurent_mahler.exprparse import ParseError
from laurent_mahler.recurrence import (SingularOrbit, builtin, conserved_quantity, height,
                                       iterate_numeric, iterate_rational, iterate_reduced,
                                       iterate_symbolic, iterate_symbolic_backward, log_height,
                                       parse_recurrence, reverse, system_from_id)

MARKOFF_INTS = [1, 1, 1, 2, 5, 29, 433, 37666, 48928105]
SOMOS_INTS = [1, 1, 1, 1, 2, 3, 7, 23, 59, 314, 1529, 8209, 83313]


def test_integer_orbits():
    assert iterate_rational(builtin("markoff"), [1, 1, 1], 9) == MARKOFF_INTS
    assert iterate_rational(builtin("somos4"), [1, 1, 1, 1], 13) == SOMOS_INTS


def test_markoff_triples():
    # consecutive terms of the Markoff orbit are Markoff triples
    xs = iterate_rational(builtin("markoff"), [1, 1, 1], 20)
    for a, b, c in zip(xs, xs[1:], xs[2:]):
        assert a * a + b * b + c * c == 3 * a * b * c


def test_parse_and_print_round_trip():
    d = builtin("hv")
    assert d.order == 5 and d.denominator == (0, 2, 3, 0, 0) and d.params == ("a",)
    again = parse_recurrence(d.text(), name="hv")
    assert again == d


def test_parse_errors_point_at_the_problem():
    with pytest.raises(ParseError) as info:
        parse_recurrence("x[n+2]*x[n] = x[n+2] + 1")
    assert info.value.position == 14
    with pytest.raises(ParseError):
        parse_recurrence("x[n+2]*x[n] = x[n+1] + 1 = 2")
    with pytest.raises(ParseError):
        parse_recurrence("x[n+2] + x[n] = 1")
    with pytest.raises(ValueError):
        system_from_id("rank2:abc")
    with pytest.raises(ValueError):
        system_from_id("nonexistent")


def test_lyness_five_cycle():
    orbit = iterate_symbolic(builtin("lyness"), 12)
    x1, x2 = LaurentPoly.gens(2)
    assert orbit[6] == x1 and orbit[7] == x2
    for n in range(1, 8):
        assert orbit[n + 5] == orbit[n]


@pytest.mark.parametrize("name,n", [("rank2:1", 12), ("rank2:2", 15), ("rank2:3", 7),
                                    ("markoff", 10), ("somos4", 13), ("hv", 9)])
def test_iterates_are_laurent_polynomials(name, n):
    # iterate_symbolic raises NotLaurent on any failed exact division
    orbit = iterate_symbolic(system_from_id(name), n)
    assert not orbit.truncated and len(orbit) == n
    for p in orbit.values:
        assert all(isinstance(c, int) for c in p.coefficients())


def test_symbolic_and_rational_orbits_agree():
    d = builtin("hv")
    orbit = iterate_symbolic(d, 8)
    point = [Fraction(1), Fraction(2), Fraction(-1, 3), Fraction(5), Fraction(1, 2), Fraction(3)]
    exact = iterate_rational(d, point[:5], 8, {"a": 3})
    for p, v in zip(orbit.values, exact):
        assert p.eval_exact(point) == v


def _caldero_zelevinsky(n):
    """x_{n+3} for r = 2 in closed form (n >= 0)."""
    x1, x2 = LaurentPoly.gens(2)
    total = x2 ** (2 * n + 2)
    for q in range(n + 1):
        for r in range(n + 1 - q):
            c = comb(n - r, q) * comb(n + 1 - q, r)
            if c:
                total = total + c * x1 ** (2 * q) * x2 ** (2 * r)
    return total * x1 ** (-n - 1) * x2 ** (-n)


def test_rank2_r2_matches_closed_form():
    orbit = iterate_symbolic(builtin("rank2", r=2), 12)
    for n in range(0, 10):
        assert orbit[n + 3] == _caldero_zelevinsky(n)


def test_backward_iteration():
    d = builtin("rank2", r=3)
    back = iterate_symbolic_backward(d, 3)
    x1, x2 = LaurentPoly.gens(2)
    assert back[0] == (x1 ** 3 + LaurentPoly.constant(2, 1)) * x2 ** -1
    # running forward from (x_{-1}, x_0) recovers x_1
    orbit = iterate_symbolic(d, 4, initial=[back[1], back[0]])
    assert orbit[3] == x1 and orbit[4] == x2


def test_hv_reversal_undoes_a_forward_step():
    d = builtin("hv")
    point = [Fraction(2), Fraction(3), Fraction(-1, 2), Fraction(5, 7), Fraction(4)]
    fwd = iterate_rational(d, point, 9, {"a": 2})
    back = iterate_rational(reverse(d), fwd[-5:][::-1], 9, {"a": 2})
    assert back[::-1] == fwd


def test_singular_orbit_reports_step():
    with pytest.raises(SingularOrbit) as info:
        iterate_rational(builtin("rank2", r=2), [1, 0], 5)
    assert info.value.step == 4
    # x3 = (x2 + 1)/x1 vanishes numerically
    with pytest.raises(SingularOrbit) as info:
        iterate_numeric(builtin("rank2", r=1), [1.0, -1.0], 6)
    assert info.value.step == 3


def _naive_height(q: Fraction) -> int:
    if q == 0:
        return 1
    return max(abs(q.numerator), abs(q.denominator))


@settings(max_examples=1000)
@given(st.fractions(max_denominator=10 ** 30))
def test_height_matches_naive_definition(q):
    assert height(q) == _naive_height(q)
    assert math.isclose(log_height(q), math.log(_naive_height(q)), abs_tol=1e-12)


def test_height_of_zero():
    assert height(0) == 1 and log_height(0) == 0.0


def _torus_point(rng, k):
    return [cmath.exp(1j * t) for t in rng.uniform(-math.pi, math.pi, k)]


def test_conserved_quantities():
    rng = np.random.default_rng(3)
    x = iterate_numeric(builtin("rank2", r=2), _torus_point(rng, 2), 40)
    K0 = complex(conserved_quantity("rank2_K", [complex(x.scalar(1)), complex(x.scalar(2))]))
    for n in range(2, 39):
        K = complex(conserved_quantity("rank2_K", [complex(x.scalar(n)), complex(x.scalar(n + 1))]))
        assert abs(K - K0) <= 1e-9 * abs(K0)
    ms = iterate_rational(builtin("markoff"), [Fraction(2), Fraction(-1, 3), Fraction(5)], 10)
    Ks = {conserved_quantity("markoff_K", ms[i:i + 3]) for i in range(8)}
    assert len(Ks) == 1


def test_rank2_linear_relation():
    rng = np.random.default_rng(4)
    x = iterate_numeric(builtin("rank2", r=2), _torus_point(rng, 2), 40)
    v = [complex(x.scalar(n)) for n in range(1, 41)]
    K = v[0] / v[1] + v[1] / v[0] + 1 / (v[0] * v[1])
    for n in range(1, 39):
        assert abs(v[n + 1] + v[n - 1] - K * v[n]) <= 1e-9 * abs(v[n + 1])
    exact = iterate_rational(builtin("rank2", r=2), [Fraction(3, 2), Fraction(-2, 5)], 12)
    Kq = exact[0] / exact[1] + exact[1] / exact[0] + 1 / (exact[0] * exact[1])
    assert all(exact[n + 1] + exact[n - 1] == Kq * exact[n] for n in range(1, 11))


def test_markoff_reduction_is_consistent_with_the_orbit():
    rng = np.random.default_rng(5)
    y1, y2 = _torus_point(rng, 2)
    ys = iterate_reduced("markoff_y", y1, y2, 12)
    xs = iterate_numeric(builtin("markoff"), [1, y1, y1 * y2], 13)
    for n in range(1, 13):
        ratio = complex(xs.scalar(n + 1)) / complex(xs.scalar(n))
        assert abs(ratio - ys[n - 1]) <= 1e-9 * abs(ratio)


def test_somos_reduction_is_consistent_with_the_orbit():
    rng = np.random.default_rng(6)
    y1, y2 = _torus_point(rng, 2)
    ys = iterate_reduced("somos4_y", y1, y2, 12)
    xs = iterate_numeric(builtin("somos4"), [1, 1, y1, y1 * y1 * y2], 14)
    v = [complex(xs.scalar(n)) for n in range(1, 15)]
    for n in range(1, 13):
        y = v[n + 1] * v[n - 1] / v[n] ** 2
        assert abs(y - ys[n - 1]) <= 1e-9 * abs(y)


def test_numeric_orbit_batches_match_scalar_runs():
    rng = np.random.default_rng(7)
    pts = [_torus_point(rng, 2) for _ in range(5)]
    batch = iterate_numeric(builtin("rank2", r=3), [XArray(np.array([p[i] for p in pts])) for i in range(2)], 30)
    for j, p in enumerate(pts):
        single = iterate_numeric(builtin("rank2", r=3), p, 30)
        assert math.isclose(batch[30][j].log_abs(), single.scalar(30).log_abs(), rel_tol=1e-12)


def test_numeric_orbit_matches_symbolic_evaluation():
    orbit = iterate_symbolic(builtin("somos4"), 12)
    pt = [cmath.exp(1j * t) for t in (0.3, -1.2, 2.0, 0.7)]
    num = iterate_numeric(builtin("somos4"), pt, 12)
    for n in range(1, 13):
        want = complex(eval_complex(orbit[n], pt))
        assert abs(complex(num.scalar(n)) - want) <= 1e-10 * max(1, abs(want))
