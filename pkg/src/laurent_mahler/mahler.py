"""Mahler-measure estimators.

Torus sampling is split into fixed blocks.  Block ``b`` draws its angles
from ``SeedSequence(rng_seed, spawn_key=(b,))``, so the samples (and every
statistic computed from them) do not depend on how many workers run.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .extended import LOG2, XArray
from .laurent import LaurentPoly, substitute
from .recurrence import RecurrenceDef, iterate_reduced, numeric_stream

SCHEMA_VERSION = 1
GENERATOR = "numpy.random.PCG64(SeedSequence(rng_seed, spawn_key=(block,)))"
THREADS_ENV = "LAURENT_MAHLER_THREADS"
MAX_JENSEN_DEGREE = 10_000
COMPANION_MAX_DEGREE = 500


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class SamplerConfig:
    mode: str = "monte_carlo"
    sample_count: int = 10_000
    lattice_m: int = 100
    rng_seed: int = 0
    torus_dim: Optional[int] = None
    zero_threshold: float = 1e-300
    block_size: int = 2000
    threads: int = field(default_factory=default_threads)

    def __post_init__(self):
        if self.mode not in ("monte_carlo", "lattice"):
            raise ValueError("mode must be 'monte_carlo' or 'lattice'")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.lattice_m < 2:
            raise ValueError("lattice_m must be >= 2")
        if not self.zero_threshold > 0:
            raise ValueError("zero_threshold must be positive")
        if self.block_size < 1 or self.threads < 1:
            raise ValueError("block_size and threads must be positive")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    def snapshot(self) -> dict:
        d = asdict(self)
        d.pop("threads")  # results do not depend on it
        return d


@dataclass(frozen=True)
class MahlerEstimate:
    value: float
    stderr: float
    skipped: int
    samples_used: int
    unreliable: int = 0  # samples below the float64 rounding floor of the evaluation

    def within(self, target: float, absolute: float = 1e-3, k: float = 3.0) -> bool:
        return abs(self.value - target) <= max(k * self.stderr, absolute)


class AllSamplesSkipped(ArithmeticError):
    pass


class PrecisionWarning(RuntimeWarning):
    """Direct evaluation lost all significant digits at some samples."""


class RootFindingError(RuntimeError):
    def __init__(self, message: str, residuals=None):
        self.residuals = residuals
        super().__init__(message)


# ----------------------------------------------------------------------
# sample points
# ----------------------------------------------------------------------
def _block_angles(seed: int, block: int, count: int, dim: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    u = rng.random((count, dim))
    return math.pi - 2.0 * math.pi * u  # (-pi, pi]


def block_layout(total: int, block_size: int) -> List[Tuple[int, int]]:
    return [(b, min(block_size, total - start))
            for b, start in enumerate(range(0, total, block_size))]


def torus_angles(cfg: SamplerConfig, dim: int) -> np.ndarray:
    """All sample angles, shape (samples, dim), in block order."""
    if cfg.mode == "lattice":
        return lattice_angles(cfg.lattice_m, dim)
    blocks = block_layout(cfg.sample_count, cfg.block_size)
    return np.concatenate([_block_angles(cfg.rng_seed, b, c, dim) for b, c in blocks])


def lattice_indices(M: int, dim: int) -> np.ndarray:
    total = M ** dim
    idx = np.arange(total, dtype=np.int64)
    out = np.empty((total, dim), dtype=np.int64)
    for d in range(dim - 1, -1, -1):
        out[:, d] = idx % M
        idx //= M
    return out


def lattice_angles(M: int, dim: int) -> np.ndarray:
    return 2.0 * math.pi * lattice_indices(M, dim) / M


def _estimate(values: np.ndarray, deterministic: bool = False) -> MahlerEstimate:
    ok = np.isfinite(values)
    used = int(ok.sum())
    skipped = int(values.size - used)
    if used == 0:
        raise AllSamplesSkipped("every sample hit a zero or overflowed")
    v = values[ok]
    mean = float(np.mean(v))
    if deterministic or used < 2:
        err = 0.0
    else:
        err = float(np.std(v, ddof=1) / math.sqrt(used))
    return MahlerEstimate(mean, err, skipped, used)


# ----------------------------------------------------------------------
# evaluating a Laurent polynomial on the torus
# ----------------------------------------------------------------------
def _float_coefficients(p: LaurentPoly) -> Tuple[np.ndarray, np.ndarray, float]:
    """(exponents, float coefficients, log shift) with coefficient = float * 2^shift."""
    exps = np.array(list(p.terms.keys()), dtype=np.int64)
    coeffs = list(p.terms.values())
    bits = max(abs(c).bit_length() for c in coeffs)
    shift = max(bits - 900, 0)
    if shift:
        vals = np.array([float(c >> shift) if c > 0 else -float((-c) >> shift) for c in coeffs])
    else:
        vals = np.array([float(c) for c in coeffs])
    return exps, vals, shift * LOG2


def rounding_floor(p: LaurentPoly) -> float:
    """log of a bound on the float64 error of evaluating p on the torus.

    On |x_i| = 1 every term has modulus |c|, so the summation error is at
    most about len(p) * eps * sum|c|.  Values below this carry no digits.
    """
    exps, vals, log_shift = _float_coefficients(p)
    return math.log(16 * len(vals) * np.finfo(float).eps * float(np.sum(np.abs(vals)))) + log_shift


def _check_precision(est: MahlerEstimate, logs: np.ndarray, p: LaurentPoly) -> MahlerEstimate:
    floor = rounding_floor(p)
    with np.errstate(invalid="ignore"):
        bad = int(np.sum(logs < floor))
    if bad:
        warnings.warn(f"{bad} samples of a {len(p)}-term polynomial lie below the float64 "
                      "rounding floor; use the orbit-based estimators for large iterates",
                      PrecisionWarning, stacklevel=3)
    return replace(est, unreliable=bad)


def torus_log_abs(p: LaurentPoly, angles: np.ndarray, zero_threshold: float = 1e-300,
                  chunk: int = 4_000_000) -> np.ndarray:
    """log|p(e^{i angles})| per row; NaN marks zero hits."""
    exps, vals, log_shift = _float_coefficients(p)
    n = angles.shape[0]
    out = np.empty(n)
    step = max(1, chunk // max(len(vals), 1))
    for s in range(0, n, step):
        phase = angles[s:s + step] @ exps.T.astype(np.float64)
        z = np.exp(1j * phase) @ vals
        out[s:s + step] = _log_or_nan(z, zero_threshold)
    return out + log_shift


def lattice_log_abs(p: LaurentPoly, M: int, zero_threshold: float = 1e-300,
                    chunk: int = 4_000_000) -> np.ndarray:
    """log|p| on the M^k grid of roots of unity, with exact integer phases."""
    exps, vals, log_shift = _float_coefficients(p)
    table = np.exp(2j * math.pi * np.arange(M) / M)
    # exact values at 1, i, -1, -i so symmetric zeros are hit exactly
    for q, v in enumerate((1, 1j, -1, -1j)):
        if (q * M) % 4 == 0:
            table[q * M // 4] = v
    k = p.nvars
    total = M ** k
    out = np.empty(total)
    step = max(1, chunk // max(len(vals), 1))
    emod = exps % M
    for s in range(0, total, step):
        idx = np.arange(s, min(s + step, total), dtype=np.int64)
        grid = np.empty((idx.size, k), dtype=np.int64)
        for d in range(k - 1, -1, -1):
            grid[:, d] = idx % M
            idx = idx // M
        ph = (grid @ emod.T) % M
        z = table[ph] @ vals
        out[s:s + grid.shape[0]] = _log_or_nan(z, zero_threshold)
    return out + log_shift


def _log_or_nan(z: np.ndarray, zero_threshold: float) -> np.ndarray:
    a = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.log(a)
    la[~(np.isfinite(a) & (a >= zero_threshold))] = np.nan
    return la


def _monomial_estimate(p: LaurentPoly, count: int) -> Optional[MahlerEstimate]:
    if p.is_zero():
        raise ValueError("Mahler measure of the zero polynomial")
    if p.is_monomial():
        (c,) = p.coefficients()
        return MahlerEstimate(math.log(abs(c)), 0.0, 0, count)
    return None


def mc_estimate(p: LaurentPoly, cfg: Optional[SamplerConfig] = None) -> MahlerEstimate:
    """Monte-Carlo mean of log|p| over the torus."""
    cfg = cfg or SamplerConfig()
    mono = _monomial_estimate(p, cfg.sample_count)
    if mono is not None:
        return mono
    blocks = block_layout(cfg.sample_count, cfg.block_size)

    def work(bc):
        b, c = bc
        return torus_log_abs(p, _block_angles(cfg.rng_seed, b, c, p.nvars), cfg.zero_threshold)

    with ThreadPoolExecutor(cfg.threads) as ex:
        parts = list(ex.map(work, blocks))
    logs = np.concatenate(parts)
    return _check_precision(_estimate(logs), logs, p)


def lattice_estimate(p: LaurentPoly, cfg: Optional[SamplerConfig] = None) -> MahlerEstimate:
    """Mean of log|p| over the M^k grid of M-th roots of unity (stderr 0)."""
    cfg = cfg or SamplerConfig(mode="lattice")
    mono = _monomial_estimate(p, cfg.lattice_m ** p.nvars)
    if mono is not None:
        return mono
    logs = lattice_log_abs(p, cfg.lattice_m, cfg.zero_threshold)
    return _check_precision(_estimate(logs, deterministic=True), logs, p)


# ----------------------------------------------------------------------
# Jensen's formula
# ----------------------------------------------------------------------
def _dense_univariate(p: LaurentPoly) -> List[int]:
    """Coefficients high degree first, after removing the monomial factor."""
    if p.nvars != 1:
        raise ValueError("jensen_univariate needs a univariate polynomial")
    if p.is_zero():
        raise ValueError("Mahler measure of the zero polynomial")
    lo = p.min_exponents()[0]
    hi = p.max_exponents()[0]
    dense = [0] * (hi - lo + 1)
    for (e,), c in p.terms.items():
        dense[hi - e] = c
    return dense


def _scaled(coeffs: Sequence[int]) -> Tuple[np.ndarray, float]:
    bits = max(abs(c).bit_length() for c in coeffs)
    shift = max(bits - 900, 0)
    if shift:
        arr = np.array([float(c >> shift) if c >= 0 else -float((-c) >> shift) for c in coeffs])
    else:
        arr = np.array([float(c) for c in coeffs])
    return arr, shift * LOG2


def _horner_with_derivative(c: np.ndarray, z: np.ndarray):
    p = np.full(z.shape, c[0], dtype=np.complex128)
    dp = np.zeros(z.shape, dtype=np.complex128)
    for a in c[1:]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _newton_ratio(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """p(z)/p'(z), evaluated through the reversed polynomial when |z| > 1."""
    n = len(c) - 1
    out = np.empty(z.shape, dtype=np.complex128)
    inner = np.abs(z) <= 1
    with np.errstate(all="ignore"):
        if inner.any():
            p, dp = _horner_with_derivative(c, z[inner])
            out[inner] = p / dp
        if (~inner).any():
            zo = z[~inner]
            w = 1 / zo
            q, dq = _horner_with_derivative(c[::-1], w)
            # p'/p = n w - w^2 q'(w)/q(w)
            out[~inner] = 1 / (n * w - w * w * dq / q)
    return out


def relative_residuals(c: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """|p(a)| / sum |c_k| |a|^k, using the reversed form outside the unit disc."""
    res = np.empty(roots.shape)
    absc = np.abs(c)
    inner = np.abs(roots) <= 1
    with np.errstate(all="ignore"):
        if inner.any():
            z = roots[inner]
            p, _ = _horner_with_derivative(c, z)
            s, _ = _horner_with_derivative(absc, np.abs(z).astype(np.complex128))
            res[inner] = np.abs(p) / np.abs(s)
        if (~inner).any():
            w = 1 / roots[~inner]
            q, _ = _horner_with_derivative(c[::-1], w)
            s, _ = _horner_with_derivative(absc[::-1], np.abs(w).astype(np.complex128))
            res[~inner] = np.abs(q) / np.abs(s)
    return res


def polish_roots(c: np.ndarray, roots: np.ndarray, iterations: int = 8) -> np.ndarray:
    """Newton refinement, keeping a step only when it lowers the residual."""
    roots = roots.astype(np.complex128).copy()
    res = relative_residuals(c, roots)
    for _ in range(iterations):
        active = res > 1e-15
        if not active.any():
            break
        cand = roots[active] - _newton_ratio(c, roots[active])
        cand_res = relative_residuals(c, cand)
        better = np.isfinite(cand_res) & (cand_res < res[active])
        idx = np.flatnonzero(active)[better]
        roots[idx] = cand[better]
        res[idx] = cand_res[better]
        if not better.any():
            break
    return roots


def aberth_roots(c: np.ndarray, max_iter: int = 500, tol: float = 1e-14) -> np.ndarray:
    """All roots of the polynomial with coefficients ``c`` (high degree first)."""
    n = len(c) - 1
    if n < 1:
        return np.empty(0, dtype=np.complex128)
    # starting circle from the geometric mean of the root moduli
    radius = abs(c[-1] / c[0]) ** (1.0 / n) if c[-1] != 0 else 1.0
    angles = 2 * math.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)
    converged = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        ratio = _newton_ratio(c, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0  # remove the diagonal's 1/1
        with np.errstate(all="ignore"):
            w = ratio / (1 - ratio * s)
        w[converged] = 0
        w[~np.isfinite(w)] = 0
        z = z - w
        converged |= np.abs(w) <= tol * np.maximum(np.abs(z), 1e-300)
        if converged.all():
            break
    return z


def univariate_roots(coeffs: Sequence[float]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.float64)
    n = len(c) - 1
    if n <= COMPANION_MAX_DEGREE:
        roots = np.roots(c)
    else:
        roots = aberth_roots(c)
    return polish_roots(c, roots)


def jensen_univariate(p: LaurentPoly) -> float:
    """log|lead| + sum over roots of max(log|root|, 0)."""
    dense = _dense_univariate(p)
    degree = len(dense) - 1
    if degree > MAX_JENSEN_DEGREE:
        raise ValueError(f"degree {degree} exceeds the root-finder cap {MAX_JENSEN_DEGREE}")
    lead = abs(dense[0])
    log_lead = math.log(lead) if lead.bit_length() < 1000 else \
        math.log(lead >> (lead.bit_length() - 64)) + (lead.bit_length() - 64) * LOG2
    if degree == 0:
        return log_lead
    c, _ = _scaled(dense)
    roots = univariate_roots(c)
    res = relative_residuals(c, roots)
    bad = ~(res <= 1e-6)
    if bad.any():
        raise RootFindingError(
            f"{int(bad.sum())} of {degree} roots failed to converge (worst relative residual "
            f"{float(np.nanmax(res)):.3g})", residuals=res)
    return log_lead + float(np.sum(np.maximum(np.log(np.abs(roots)), 0.0)))


def lawton_check(p: LaurentPoly, exponents: Sequence[Sequence[int]]) -> List[Tuple[Tuple[int, ...], float]]:
    """Jensen values of p(x, x^k2, ..., x^kN) for each exponent tuple (k2, ..., kN)."""
    out = []
    x = LaurentPoly.var(1, 0)
    for ks in exponents:
        ks = tuple(int(k) for k in ks)
        full = ks if len(ks) == p.nvars else (1,) + ks
        if len(full) != p.nvars:
            raise ValueError(f"need {p.nvars - 1} exponents per tuple")
        collapsed = substitute(p, [x ** k for k in full])
        if collapsed.is_zero():
            raise ValueError(f"p collapses to zero under exponents {full}")
        out.append((ks, jensen_univariate(collapsed)))
    return out


# ----------------------------------------------------------------------
# sequences of estimates
# ----------------------------------------------------------------------
@dataclass
class MahlerSequence:
    system: str
    estimates: List[MahlerEstimate]
    config: dict
    truncated: bool = False
    reason: str = ""
    generator: str = GENERATOR
    method: str = "direct"
    logs: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.estimates)

    def __getitem__(self, n: int) -> MahlerEstimate:
        """1-based: seq[n] estimates m(x_n)."""
        if n < 1:
            raise IndexError("sequence indices start at 1")
        return self.estimates[n - 1]

    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    def stderrs(self) -> np.ndarray:
        return np.array([e.stderr for e in self.estimates])

    def difference_stats(self, n_lo: int, n_hi: int, scale: float = 1.0) -> MahlerEstimate:
        """Per-sample statistics of (L_hi - L_lo) * scale, L_n = log|x_n| at a sample."""
        if self.logs is None:
            raise ValueError("per-sample data was not kept")
        d = (self.logs[n_hi - 1] - self.logs[n_lo - 1]) * scale
        return _estimate(d, deterministic=self.config.get("mode") == "lattice")

    def window_max(self, width: int) -> np.ndarray:
        """max(S_n, ..., S_{n+width-1}): the componentwise-max variant."""
        v = self.values()
        return np.array([v[i:i + width].max() for i in range(len(v) - width + 1)])

    def metadata(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "system": self.system,
            "method": self.method,
            "config": self.config,
            "seed": self.config.get("rng_seed"),
            "generator": self.generator,
            "n_max": len(self.estimates),
            "truncated": self.truncated,
            "truncation_reason": self.reason,
            "zero_hit_policy": "skip and count; a sample stays excluded after its first invalid step",
            "tolerance_policy": "max(3*stderr, absolute)",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "stderr", "skipped", "samples_used"])
        for n, e in enumerate(self.estimates, start=1):
            w.writerow([n, repr(float(e.value)), repr(float(e.stderr)), e.skipped, e.samples_used])
        return buf.getvalue()

    def write(self, path: str) -> Tuple[str, str]:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
        meta_path = path + ".meta.json"
        with open(meta_path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path, meta_path


def _sequence_from_logs(system: str, logs: np.ndarray, cfg: SamplerConfig, method: str,
                        keep_samples: bool) -> MahlerSequence:
    deterministic = cfg.mode == "lattice"
    estimates = []
    truncated, reason = False, ""
    for n in range(logs.shape[0]):
        try:
            estimates.append(_estimate(logs[n], deterministic))
        except AllSamplesSkipped:
            truncated, reason = True, f"all samples invalid at n={n + 1}"
            break
    kept = logs[:len(estimates)] if keep_samples else None
    snap = cfg.snapshot()
    return MahlerSequence(system, estimates, snap, truncated, reason, GENERATOR, method, kept)


def _run_blocks(cfg: SamplerConfig, dim: int, kernel) -> np.ndarray:
    """Apply ``kernel(angles) -> (n_max, count)`` per block and join the columns."""
    if cfg.mode == "lattice":
        return kernel(lattice_angles(cfg.lattice_m, dim))
    blocks = block_layout(cfg.sample_count, cfg.block_size)

    def work(bc):
        b, c = bc
        return kernel(_block_angles(cfg.rng_seed, b, c, dim))

    with ThreadPoolExecutor(cfg.threads) as ex:
        parts = list(ex.map(work, blocks))
    return np.concatenate(parts, axis=1)


def _unit(angles: np.ndarray) -> XArray:
    return XArray(np.exp(1j * angles))


def _accumulate(rows: List[np.ndarray]) -> np.ndarray:
    logs = np.vstack(rows)
    # once a sample goes invalid it stays excluded
    bad = np.logical_or.accumulate(~np.isfinite(logs), axis=0)
    logs[bad] = np.nan
    return logs


def orbit_mahler_sequence(defn: RecurrenceDef, n_max: int, cfg: Optional[SamplerConfig] = None,
                          params: Optional[Mapping[str, object]] = None,
                          keep_samples: bool = True) -> MahlerSequence:
    """S_n ~ m(x_n), n = 1..n_max, from numeric orbits of sampled torus points.

    Each parameter is either ``"torus"`` (an extra sampled circle) or a fixed
    integer; unspecified parameters default to ``"torus"``.
    """
    cfg = cfg or SamplerConfig()
    params = dict(params or {})
    N = defn.order
    torus_params = [p for p in defn.params if params.get(p, "torus") == "torus"]
    dim = N + len(torus_params)
    if cfg.torus_dim is not None and cfg.torus_dim != dim:
        raise ValueError(f"torus_dim must be {dim} for {defn.name}")

    def kernel(angles: np.ndarray) -> np.ndarray:
        count = angles.shape[0]
        init = [_unit(angles[:, i]) for i in range(N)]
        pvals = []
        for p in defn.params:
            if p in torus_params:
                pvals.append(_unit(angles[:, N + torus_params.index(p)]))
            else:
                pvals.append(XArray.constant(int(params[p]), count))
        rows = [np.zeros(count) for _ in range(min(N, n_max))]
        stream = numeric_stream(defn, init, pvals)
        with np.errstate(all="ignore"):
            for _ in range(N, n_max):
                x = next(stream)
                la = x.log_abs()
                la[~x.valid(cfg.zero_threshold)] = np.nan
                rows.append(la)
        return _accumulate(rows)

    logs = _run_blocks(cfg, dim, kernel)
    cfg_snapshot = SamplerConfig(**{**asdict(cfg), "torus_dim": dim})
    seq = _sequence_from_logs(defn.name, logs, cfg_snapshot, "direct", keep_samples)
    seq.config["params"] = {p: params.get(p, "torus") for p in defn.params}
    return seq


def _reduced_logs(kind: str, angles: np.ndarray, n_max: int, zero_threshold: float) -> List[np.ndarray]:
    """log|y_n| for n = 1..n_max at sampled (y1, y2); first two are exactly 0."""
    count = angles.shape[0]
    ys = iterate_reduced(kind, _unit(angles[:, 0]), _unit(angles[:, 1]), n_max)
    out = []
    for i, y in enumerate(ys):
        if i < 2:
            out.append(np.zeros(count))
            continue
        la = y.log_abs()
        la[~y.valid(zero_threshold)] = np.nan
        out.append(la)
    return out


def markoff_recursion_sequence(n_max: int, cfg: Optional[SamplerConfig] = None,
                               keep_samples: bool = True) -> MahlerSequence:
    """m(x_{n+1}) = m(x_n) + m(y_n) with y from the reduced Markoff map."""
    cfg = cfg or SamplerConfig()
    if cfg.torus_dim not in (None, 2):
        raise ValueError("the reduced Markoff map lives on a 2-torus")

    def kernel(angles):
        ylog = _reduced_logs("markoff_y", angles, max(n_max - 1, 2), cfg.zero_threshold)
        rows = [np.zeros(angles.shape[0])]
        for n in range(1, n_max):
            rows.append(rows[-1] + ylog[n - 1])
        return _accumulate(rows[:n_max])

    logs = _run_blocks(cfg, 2, kernel)
    return _sequence_from_logs("markoff", logs, SamplerConfig(**{**asdict(cfg), "torus_dim": 2}),
                               "reduced", keep_samples)


def somos4_recursion_sequence(n_max: int, cfg: Optional[SamplerConfig] = None,
                              keep_samples: bool = True) -> MahlerSequence:
    """m(x_{n+2}) = 2 m(x_{n+1}) - m(x_n) + m(y_n) with y from the QRT map."""
    cfg = cfg or SamplerConfig()
    if cfg.torus_dim not in (None, 2):
        raise ValueError("the reduced Somos-4 map lives on a 2-torus")

    def kernel(angles):
        count = angles.shape[0]
        ylog = _reduced_logs("somos4_y", angles, max(n_max - 2, 2), cfg.zero_threshold)
        rows = [np.zeros(count) for _ in range(min(4, n_max))]
        for m in range(5, n_max + 1):
            # L_m = 2 L_{m-1} - L_{m-2} + log|y_{m-2}|
            rows.append(2 * rows[-1] - rows[-2] + ylog[m - 3])
        return _accumulate(rows[:n_max])

    logs = _run_blocks(cfg, 2, kernel)
    return _sequence_from_logs("somos4", logs, SamplerConfig(**{**asdict(cfg), "torus_dim": 2}),
                               "reduced", keep_samples)
