"""Algebraic, Diophantine and Mahler entropies and their comparison."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import gmpy2
import numpy as np

from .laurent import degree_profile
from .mahler import (SCHEMA_VERSION, MahlerSequence, SamplerConfig, markoff_recursion_sequence,
                     orbit_mahler_sequence, somos4_recursion_sequence)
from .recurrence import RecurrenceDef, iterate_symbolic, log_height, rational_stream, system_from_id

KINDS = ("linear", "quadratic", "exponential", "loglog")
MIN_POINTS = 5


class InsufficientData(ValueError):
    pass


# ----------------------------------------------------------------------
# rank-2 exact data
# ----------------------------------------------------------------------
def tropical_dvectors(r: int, n_max: int) -> List[Tuple[int, int]]:
    """d_1..d_{n_max} from d_{n+2} + d_n = max(r d_{n+1}, 0), d_1 = (-1,0), d_2 = (0,-1)."""
    if n_max < 1:
        return []
    d = [(-1, 0), (0, -1)]
    while len(d) < n_max:
        a, b = d[-2], d[-1]
        d.append(tuple(max(r * y, 0) - x for x, y in zip(a, b)))
    return d[:n_max]


def rank2_tropical_degrees(r: int, n_max: int) -> List[int]:
    """Rational degrees of the rank-2 iterates without symbolic expansion.

    Positivity makes the top total degree h_n of the Laurent polynomial obey
    h_{n+2} = max(r h_{n+1}, 0) - h_n; adding the positive part of the
    d-vector gives the numerator degree.
    """
    dv = tropical_dvectors(r, n_max)
    h = [1, 1]
    while len(h) < n_max:
        h.append(max(r * h[-1], 0) - h[-2])
    out = []
    for hn, d in zip(h, dv):
        den = sum(max(v, 0) for v in d)
        out.append(max(hn + den, den))
    return out


def rank2_entropy_exact(r: int) -> float:
    if r < 1:
        raise ValueError("r must be a positive integer")
    if r <= 2:
        return 0.0
    return math.log((r + math.sqrt(r * r - 4)) / 2)


EXACT_REFERENCES = {
    "markoff": math.log((1 + math.sqrt(5)) / 2),
    "somos4": 0.0,
    "lyness": 0.0,
}


def exact_reference(name: str) -> Optional[float]:
    if name.startswith("rank2:"):
        return rank2_entropy_exact(int(name.split(":")[1]))
    return EXACT_REFERENCES.get(name)


# ----------------------------------------------------------------------
# fitting
# ----------------------------------------------------------------------
@dataclass
class SlopeFit:
    kind: str
    slope: float
    intercept: float
    window: Tuple[int, int]
    residual_rms: float
    two_point: Optional[float] = None
    two_point_stderr: Optional[float] = None
    points: int = 0
    excluded: int = 0
    best_kind: Optional[str] = None
    note: str = ""

    @property
    def entropy(self) -> float:
        """Exponential rate, or 0 when a polynomial growth kind fits better."""
        if self.best_kind is not None and self.best_kind != "exponential":
            return 0.0
        return self.slope

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["entropy"] = self.entropy
        return d


def _window(n_total: int, window: Optional[Tuple[int, int]]) -> Tuple[int, int]:
    if window is None:
        lo = n_total // 2 + 1
        return lo, n_total
    lo, hi = window
    if not 1 <= lo < hi <= n_total:
        raise InsufficientData(f"window {window} outside available data 1..{n_total}")
    return lo, hi


def fit_growth(values: Sequence[float], kind: str, window: Optional[Tuple[int, int]] = None,
               start: int = 1) -> SlopeFit:
    """Least-squares growth fit of values[n] (n = start, start+1, ...) over ``window``.

    ``residual_rms`` is the RMS relative residual in the original scale, so
    different kinds can be compared.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown fit kind {kind!r}")
    vals = np.asarray(values, dtype=np.float64)
    n_total = start + len(vals) - 1
    lo, hi = _window(n_total, window)
    ns = np.arange(lo, hi + 1, dtype=np.float64)
    S = vals[lo - start:hi - start + 1]
    excluded = 0
    if kind in ("exponential", "loglog"):
        keep = S > 0
        excluded = int((~keep).sum())
        ns, S = ns[keep], S[keep]
    if len(S) < MIN_POINTS:
        raise InsufficientData(f"{len(S)} usable points in window [{lo}, {hi}], need {MIN_POINTS}")
    if kind == "linear":
        X, Y = ns, S
    elif kind == "quadratic":
        X, Y = ns ** 2, S
    elif kind == "exponential":
        X, Y = ns, np.log(S)
    else:
        X, Y = np.log(ns), np.log(S)
    slope, intercept = np.polyfit(X, Y, 1)
    pred = slope * X + intercept
    if kind in ("exponential", "loglog"):
        pred = np.exp(pred)
    scale = np.where(np.abs(S) > 0, np.abs(S), 1.0)
    rms = float(np.sqrt(np.mean(((pred - S) / scale) ** 2)))
    a, b = S[0], S[-1]
    n0, n1 = ns[0], ns[-1]
    if kind == "linear":
        tp = (b - a) / (n1 - n0)
    elif kind == "quadratic":
        tp = (b - a) / (n1 ** 2 - n0 ** 2)
    elif kind == "exponential":
        tp = math.log(b / a) / (n1 - n0)
    else:
        tp = math.log(b / a) / math.log(n1 / n0)
    return SlopeFit(kind, float(slope), float(intercept), (int(n0), int(n1)), rms,
                    float(tp), None, len(S), excluded,
                    note="non-positive values excluded" if excluded else "")


def select_growth_kind(values: Sequence[float], window: Optional[Tuple[int, int]] = None,
                       start: int = 1) -> str:
    """Best of linear / quadratic / exponential by residual RMS."""
    best, best_rms = None, math.inf
    for kind in ("linear", "quadratic", "exponential"):
        try:
            f = fit_growth(values, kind, window, start)
        except InsufficientData:
            continue
        if f.excluded:
            # sign changes rule out exponential growth
            continue
        if f.residual_rms < best_rms - 1e-15:
            best, best_rms = kind, f.residual_rms
    if best is None:
        raise InsufficientData("no growth kind could be fitted")
    return best


def _exponential_with_kind(values, window, start, fit_values=None, note="") -> SlopeFit:
    """Exponential fit of ``fit_values`` (default ``values``) tagged with the best kind of ``values``."""
    target = values if fit_values is None else fit_values
    vals = np.asarray(target, dtype=np.float64)
    lo, hi = _window(start + len(values) - 1, window)
    seg = vals[lo - start:hi - start + 1]
    best = select_growth_kind(values, window, start)
    if np.all(seg == seg[0]):
        # bounded (constant) sequence: no growth at all
        return SlopeFit("exponential", 0.0, float(math.log(seg[0])) if seg[0] > 0 else 0.0,
                        (lo, hi), 0.0, 0.0, None, len(seg), 0, best,
                        (note + "; " if note else "") + "constant over the window")
    fit = fit_growth(target, "exponential", window, start)
    fit.best_kind = best
    fit.note = "; ".join(x for x in (note, fit.note) if x)
    return fit


def algebraic_entropy_fit(degrees: Sequence[int], window: Optional[Tuple[int, int]] = None,
                          differences: bool = True) -> SlopeFit:
    """Exponential fit of the degree envelope.

    The envelope is the running maximum of the degrees (periodic systems
    give slope 0).  With ``differences`` the fit uses its first differences,
    which removes the additive constants typical of degree sequences.
    """
    if len(degrees) < MIN_POINTS:
        raise InsufficientData(f"need at least {MIN_POINTS} degrees")
    env = np.maximum.accumulate(np.asarray(degrees, dtype=np.float64))
    if not differences:
        return _exponential_with_kind(env, window, 1)
    diff = np.diff(env)
    lo, hi = _window(len(env), window)
    lo = max(lo, 2)
    seg = diff[lo - 2:hi - 1]
    best = select_growth_kind(env, (lo, hi) if window is not None else None, 1)
    if np.all(seg == 0):
        return SlopeFit("exponential", 0.0, 0.0, (lo, hi), 0.0, 0.0, None, len(seg), 0, best,
                        "degree envelope constant over the window")
    fit = fit_growth(diff, "exponential", (lo, hi), start=2)
    fit.best_kind = best
    fit.note = "; ".join(x for x in ("fitted on first differences of the degree envelope", fit.note) if x)
    return fit


@dataclass
class HeightOrbit:
    log_heights: List[float]
    truncated: bool = False
    reason: str = ""


def rational_log_heights(defn: RecurrenceDef, init: Sequence, n_max: int,
                         param_values=None, max_bits: int = 1 << 26) -> HeightOrbit:
    """log H(x_n) along an exact orbit, stopping early past ``max_bits``."""
    stream = rational_stream(defn, init, param_values)
    out = [log_height(v) for v in init][:n_max]
    for n in range(defn.order + 1, n_max + 1):
        x = next(stream)
        out.append(log_height(x))
        bits = max(gmpy2.bit_length(x.numerator), gmpy2.bit_length(x.denominator))
        if bits > max_bits and n < n_max:
            return HeightOrbit(out, True, f"height cap of {max_bits} bits reached at n={n}")
    return HeightOrbit(out, False, "")


def diophantine_entropy_fit(defn: RecurrenceDef, init: Sequence, n_max: int,
                            window: Optional[Tuple[int, int]] = None, param_values=None,
                            max_bits: int = 1 << 26) -> SlopeFit:
    """Exponential fit of the logarithmic heights h(x_n) = log H(x_n)."""
    orbit = rational_log_heights(defn, init, n_max, param_values, max_bits)
    hs = orbit.log_heights
    if orbit.truncated and window is not None and window[1] > len(hs):
        window = None
    fit = _exponential_with_kind(hs, window, 1, note=orbit.reason)
    return fit


def mahler_entropy_fit(seq: MahlerSequence, window: Optional[Tuple[int, int]] = None,
                       kind: str = "exponential") -> SlopeFit:
    """Growth fit of S_n with the two-point estimate and its sampling error."""
    vals = seq.values()
    if kind == "exponential":
        fit = _exponential_with_kind(vals, window, 1)
    else:
        fit = fit_growth(vals, kind, window)
        fit.best_kind = select_growth_kind(vals, window)
    lo, hi = fit.window
    if seq.logs is not None and fit.two_point is not None:
        S_lo, S_hi = vals[lo - 1], vals[hi - 1]
        L_lo, L_hi = seq.logs[lo - 1], seq.logs[hi - 1]
        if kind == "exponential" and S_lo > 0 and S_hi > 0:
            # delta method for log(S_hi / S_lo)
            d = (L_hi / S_hi - L_lo / S_lo) / (hi - lo)
        elif kind == "linear":
            d = (L_hi - L_lo) / (hi - lo)
        elif kind == "quadratic":
            d = (L_hi - L_lo) / (hi ** 2 - lo ** 2)
        else:
            d = None
        if d is not None:
            ok = np.isfinite(d)
            if ok.sum() > 1 and seq.config.get("mode") != "lattice":
                fit.two_point_stderr = float(np.std(d[ok], ddof=1) / math.sqrt(ok.sum()))
            else:
                fit.two_point_stderr = 0.0
    return fit


def quadratic_coefficient(seq: MahlerSequence, window: Tuple[int, int]) -> float:
    """C in S_n ~ C n^2, from the slope of the first differences (which is 2C)."""
    vals = seq.values()
    lo, hi = window
    ns = np.arange(lo + 1, hi + 1, dtype=np.float64)
    diffs = vals[lo:hi] - vals[lo - 1:hi - 1]
    slope, _ = np.polyfit(ns, diffs, 1)
    return float(slope / 2)


# ----------------------------------------------------------------------
# diagnostics
# ----------------------------------------------------------------------
@dataclass
class ResidualReport:
    residuals: List[float]
    bounded: bool
    start: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


def tropical_mahler_residuals(seq: MahlerSequence, r: int,
                              window: Optional[Tuple[int, int]] = None) -> ResidualReport:
    """R_n = S_{n+2} + S_n - r S_{n+1}; bounded if the late half does not outgrow the early half."""
    v = seq.values()
    res = v[2:] + v[:-2] - r * v[1:-1]
    lo, hi = window if window is not None else (1, len(res))
    seg = np.abs(res[lo - 1:hi])
    half = len(seg) // 2
    if half == 0:
        bounded = True
    else:
        early = float(seg[:half].max())
        late = float(seg[half:].max())
        bounded = late <= 2.0 * early + 1e-9
    return ResidualReport([float(x) for x in res], bounded, 1)


# ----------------------------------------------------------------------
# comparison
# ----------------------------------------------------------------------
REFERENCE_WINDOWS = {
    "rank2:3": (25, 49),
    "rank2:4": (16, 36),
    "rank2:5": (16, 31),
    "markoff": (50, 97),
    "somos4": (50, 100),
}


@dataclass
class EntropyBudgets:
    symbolic_n: Optional[int] = None
    tropical_n: int = 30
    rational_n: int = 30
    height_bits: int = 1 << 26
    mahler_n: Optional[int] = None
    mahler_window: Optional[Tuple[int, int]] = None
    samples: int = 10_000
    seed: int = 0
    threads: Optional[int] = None


@dataclass
class EntropyReport:
    system: str
    algebraic: Optional[SlopeFit]
    diophantine: Optional[SlopeFit]
    mahler: Optional[SlopeFit]
    exact_reference: Optional[float] = None
    assumptions: List[str] = field(default_factory=list)
    errors: Dict[str, str] = field(default_factory=dict)
    ordering_ok: Optional[bool] = None
    quadratic_coefficient: Optional[float] = None

    def estimates(self) -> Dict[str, Optional[float]]:
        return {k: (getattr(self, k).entropy if getattr(self, k) is not None else None)
                for k in ("algebraic", "diophantine", "mahler")}

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "system": self.system,
            "exact_reference": self.exact_reference,
            "estimates": self.estimates(),
            "algebraic": self.algebraic.to_dict() if self.algebraic else None,
            "diophantine": self.diophantine.to_dict() if self.diophantine else None,
            "mahler": self.mahler.to_dict() if self.mahler else None,
            "assumptions": self.assumptions,
            "errors": self.errors,
            "ordering_ok": self.ordering_ok,
            "mahler_quadratic_coefficient": self.quadratic_coefficient,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [f"system: {self.system}"]
        if self.exact_reference is not None:
            rows.append(f"exact reference: {self.exact_reference:.10f}")
        rows.append(f"{'estimator':<12} {'entropy':>14} {'slope':>14} {'two-point':>14} "
                    f"{'window':>10} {'best kind':>12}")
        for name in ("algebraic", "diophantine", "mahler"):
            f = getattr(self, name)
            if f is None:
                rows.append(f"{name:<12} {'failed: ' + self.errors.get(name, ''):>14}")
                continue
            tp = f"{f.two_point:.10f}" if f.two_point is not None else "-"
            rows.append(f"{name:<12} {f.entropy:>14.10f} {f.slope:>14.10f} {tp:>14} "
                        f"{f'{f.window[0]}-{f.window[1]}':>10} {str(f.best_kind):>12}")
        for a in self.assumptions:
            rows.append(f"assumption: {a}")
        if self.quadratic_coefficient is not None:
            rows.append(f"mahler quadratic coefficient C: {self.quadratic_coefficient:.6f}")
        if self.ordering_ok is not None:
            rows.append(f"mahler <= diophantine + tolerance: {self.ordering_ok}")
        return "\n".join(rows)


_DEFAULT_SYMBOLIC_N = {"lyness": 20, "markoff": 14, "somos4": 18, "hv": 10, "rank2:1": 20, "rank2:2": 30}
ORDERING_TOLERANCE = 5e-3
# with a = 1 the all-ones HV orbit is a fixed point
HEIGHT_PARAMETER = 2


def compare_entropies(system: Union[str, RecurrenceDef],
                      budgets: Optional[EntropyBudgets] = None) -> EntropyReport:
    """All three entropy fits for one system; sub-estimator failures are recorded per field."""
    b = budgets or EntropyBudgets()
    defn = system_from_id(system) if isinstance(system, str) else system
    name = defn.name
    report = EntropyReport(name, None, None, None, exact_reference(name))
    rank2_r = int(name.split(":")[1]) if name.startswith("rank2:") else None
    fixed_params = {p: HEIGHT_PARAMETER for p in defn.params}
    if defn.params:
        report.assumptions.append(f"parameters kept symbolic for degrees, fixed to {HEIGHT_PARAMETER} "
                                  "for heights, sampled on an extra torus circle for the Mahler fit")

    # algebraic
    try:
        if rank2_r is not None and rank2_r >= 3:
            degrees = rank2_tropical_degrees(rank2_r, b.tropical_n)
            report.assumptions.append("degrees from the tropical recursion (positivity fixes the growth order)")
        else:
            n_sym = b.symbolic_n or _DEFAULT_SYMBOLIC_N.get(name, 12)
            orbit = iterate_symbolic(defn, n_sym)
            degrees = [degree_profile(p).rational_degree for p in orbit.values]
            if orbit.truncated:
                report.assumptions.append(f"symbolic degrees truncated: {orbit.reason}")
        report.algebraic = algebraic_entropy_fit(degrees)
    except Exception as exc:  # recorded, report still produced
        report.errors["algebraic"] = f"{type(exc).__name__}: {exc}"

    # diophantine
    try:
        report.diophantine = diophantine_entropy_fit(defn, [1] * defn.order, b.rational_n,
                                                     param_values=fixed_params,
                                                     max_bits=b.height_bits)
    except Exception as exc:
        report.errors["diophantine"] = f"{type(exc).__name__}: {exc}"

    # mahler
    try:
        window = b.mahler_window or REFERENCE_WINDOWS.get(name)
        n_m = b.mahler_n or (window[1] if window else 60)
        if window is not None and window[1] > n_m:
            window = None
        cfg = SamplerConfig(sample_count=b.samples, rng_seed=b.seed,
                            **({"threads": b.threads} if b.threads else {}))
        if name == "markoff":
            seq = markoff_recursion_sequence(n_m, cfg)
        elif name == "somos4":
            seq = somos4_recursion_sequence(n_m, cfg)
        else:
            seq = orbit_mahler_sequence(defn, n_m, cfg)
        report.mahler = mahler_entropy_fit(seq, window)
        if report.mahler.best_kind == "quadratic" and not report.mahler.excluded:
            lo, hi = report.mahler.window
            report.quadratic_coefficient = quadratic_coefficient(seq, (lo, hi))
    except Exception as exc:
        report.errors["mahler"] = f"{type(exc).__name__}: {exc}"

    if report.mahler is not None and report.diophantine is not None:
        report.ordering_ok = report.mahler.entropy <= report.diophantine.entropy + ORDERING_TOLERANCE
    return report
