import math

import numpy as np
import pytest

from laurent_mahler import degree_profile, dvector
from laurent_mahler import entropy as en
from laurent_mahler.mahler import SamplerConfig, orbit_mahler_sequence
from laurent_mahler.recurrence import SingularOrbit, builtin, iterate_symbolic

LOG_PHI = math.log((1 + math.sqrt(5)) / 2)
# symbolic iterates are affordable to these n; beyond them the tropical recursion stands in
SYMBOLIC_REACH = {1: 15, 2: 15, 3: 9, 4: 8, 5: 7}


def test_tropical_dvectors():
    d = en.tropical_dvectors(3, 5)
    assert d[:2] == [(-1, 0), (0, -1)]
    assert d[2:] == [(1, 0), (3, 1), (8, 3)]
    d2 = np.array(en.tropical_dvectors(2, 30))
    assert np.all(np.diff(d2[10:], n=2, axis=0) == 0)


@pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
def test_tropical_and_symbolic_agree(r):
    n = SYMBOLIC_REACH[r]
    orbit = iterate_symbolic(builtin("rank2", r=r), n)
    assert [dvector(p) for p in orbit.values] == en.tropical_dvectors(r, n)
    assert [degree_profile(p).rational_degree for p in orbit.values] == en.rank2_tropical_degrees(r, n)


def test_exact_rank2_entropies():
    assert en.rank2_entropy_exact(1) == en.rank2_entropy_exact(2) == 0.0
    assert en.rank2_entropy_exact(3) == pytest.approx(2 * LOG_PHI, abs=1e-15)
    assert en.rank2_entropy_exact(4) == pytest.approx(math.log(2 + math.sqrt(3)), abs=1e-15)
    # published decimal values, good to their last digit or so
    assert en.rank2_entropy_exact(3) == pytest.approx(0.9624236498, abs=1e-9)
    assert en.rank2_entropy_exact(4) == pytest.approx(1.316957897, abs=1e-9)
    assert en.rank2_entropy_exact(5) == pytest.approx(1.566799237, abs=1e-9)
    with pytest.raises(ValueError):
        en.rank2_entropy_exact(0)


def test_algebraic_fit_from_tropical_degrees():
    fit = en.algebraic_entropy_fit(en.rank2_tropical_degrees(3, 30))
    assert abs(fit.slope - en.rank2_entropy_exact(3)) < 1e-6
    assert fit.best_kind == "exponential"


def test_algebraic_fit_for_periodic_and_quadratic_growth():
    lyness = iterate_symbolic(builtin("lyness"), 20)
    fit = en.algebraic_entropy_fit([degree_profile(p).rational_degree for p in lyness.values])
    assert fit.slope == 0.0 and fit.entropy == 0.0
    somos = iterate_symbolic(builtin("somos4"), 18)
    fit = en.algebraic_entropy_fit([degree_profile(p).rational_degree for p in somos.values])
    assert fit.best_kind == "quadratic" and fit.entropy == 0.0
    with pytest.raises(en.InsufficientData):
        en.algebraic_entropy_fit([1, 2, 3])


def test_diophantine_fits():
    fit = en.diophantine_entropy_fit(builtin("markoff"), [1, 1, 1], 30)
    assert abs(fit.slope - LOG_PHI) < 1e-2
    somos = en.diophantine_entropy_fit(builtin("somos4"), [1, 1, 1, 1], 30)
    assert somos.best_kind == "quadratic" and somos.entropy == 0.0
    # heights along the Lyness orbit cycle through 1, 1, 2, 3, 2
    lyness = en.diophantine_entropy_fit(builtin("lyness"), [1, 1], 30)
    assert lyness.entropy == 0.0 and abs(lyness.slope) < 1e-12
    with pytest.raises(SingularOrbit) as info:
        en.diophantine_entropy_fit(builtin("rank2", r=2), [1, 0], 30)
    assert info.value.step == 4


def test_height_cap_truncates():
    orbit = en.rational_log_heights(builtin("rank2", r=5), [1, 1], 40, max_bits=10_000)
    assert orbit.truncated and len(orbit.log_heights) < 40


def test_fit_kinds_recover_known_growth():
    n = np.arange(1, 41)
    assert en.fit_growth(3 * n + 1.0, "linear").slope == pytest.approx(3)
    assert en.fit_growth(0.5 * n ** 2, "quadratic").slope == pytest.approx(0.5)
    assert en.fit_growth(np.exp(0.7 * n), "exponential").slope == pytest.approx(0.7)
    assert en.fit_growth(n ** 2.5, "loglog").slope == pytest.approx(2.5)
    assert en.select_growth_kind(5 * n ** 2 + n) == "quadratic"
    with pytest.raises(ValueError):
        en.fit_growth(n, "cubic")
    with pytest.raises(en.InsufficientData):
        en.fit_growth(n, "linear", window=(30, 50))


def test_mahler_fit_excludes_nonpositive_values():
    seq = orbit_mahler_sequence(builtin("lyness"), 30, SamplerConfig(sample_count=2000))
    fit = en.mahler_entropy_fit(seq)
    assert fit.excluded > 0 and "excluded" in fit.note
    assert fit.entropy == 0.0


@pytest.mark.parametrize("r,window,value", [(4, (16, 36), 1.316957896), (5, (16, 31), 1.566799237)])
def test_mahler_two_point_slopes(r, window, value):
    seq = orbit_mahler_sequence(builtin("rank2", r=r), window[1], SamplerConfig())
    fit = en.mahler_entropy_fit(seq, window)
    assert abs(fit.two_point - value) < 1e-3
    assert abs(fit.two_point - fit.slope) < 2e-3


def test_mahler_linear_slope_for_r2():
    seq = orbit_mahler_sequence(builtin("rank2", r=2), 100, SamplerConfig(rng_seed=7))
    fit = en.mahler_entropy_fit(seq, (50, 100), kind="linear")
    assert fit.best_kind == "linear" and fit.entropy == 0.0
    assert abs(fit.two_point - 0.4837566998) <= max(3 * fit.two_point_stderr, 1e-3)
    assert abs(fit.two_point - fit.slope) < 2e-3


def test_tropical_mahler_residuals():
    cfg = SamplerConfig(sample_count=4000)
    r3 = en.tropical_mahler_residuals(orbit_mahler_sequence(builtin("rank2", r=3), 45, cfg), 3)
    assert r3.bounded
    r1 = en.tropical_mahler_residuals(orbit_mahler_sequence(builtin("rank2", r=1), 40, cfg), 1)
    res = np.array(r1.residuals)
    assert np.allclose(res[5:], res[:-5], atol=1e-12)
    r2 = en.tropical_mahler_residuals(orbit_mahler_sequence(builtin("rank2", r=2), 80, cfg), 2)
    assert r2.bounded


def test_report_serialization():
    rep = en.compare_entropies("lyness")
    d = rep.to_dict()
    assert d["schema_version"] == 1 and d["estimates"]["mahler"] == 0.0
    assert "lyness" in rep.table()


def test_failures_are_recorded_per_field():
    rep = en.compare_entropies("x[n+2]*x[n] = x[n+1] - 1", en.EntropyBudgets(samples=500))
    assert rep.errors and rep.system == "custom"


@pytest.mark.slow
@pytest.mark.parametrize("system,target,tol", [("rank2:3", 0.9624236498, 1e-3),
                                               ("markoff", 0.4812118246, 1e-2)])
def test_compare_entropies_positive_entropy(system, target, tol):
    rep = en.compare_entropies(system)
    assert not rep.errors
    for name, value in rep.estimates().items():
        assert abs(value - target) < tol, name
    assert rep.ordering_ok


def test_compare_entropies_somos():
    rep = en.compare_entropies("somos4")
    assert rep.estimates() == {"algebraic": 0.0, "diophantine": 0.0, "mahler": 0.0}
    assert 0.02 <= rep.quadratic_coefficient <= 0.08
    assert rep.ordering_ok


@pytest.mark.slow
@pytest.mark.parametrize("system", ["lyness", "rank2:1", "rank2:2", "rank2:4", "rank2:5", "hv"])
def test_ordering_on_builtins(system):
    rep = en.compare_entropies(system)
    assert rep.ordering_ok, rep.table()
