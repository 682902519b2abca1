"""Recurrences with the Laurent property and their orbits.

A :class:`RecurrenceDef` encodes

    x[n+N] * prod_i x[n+i]^den_i = F(x[n], ..., x[n+N-1], params)

Three orbit modes share one definition: symbolic (Laurent polynomials in
the initial variables), exact rational, and numeric (extended-range complex,
vectorized over samples).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import gmpy2
import numpy as np

from .exprparse import ParseError, parse_expression
from .extended import LOG2, ExtComplex, XArray
from .laurent import LaurentPoly, NotLaurent, ZeroCoordinate, div_exact, substitute

DEFAULT_TERM_BUDGET = 5_000_000
DEFAULT_WORK_BUDGET = 500_000_000


class SingularOrbit(ZeroDivisionError):
    """Division by zero while iterating; ``step`` is the index being computed."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"orbit hits zero division at n={step}")


def window_name(i: int) -> str:
    return "x[n]" if i == 0 else f"x[n+{i}]"


@dataclass(frozen=True)
class RecurrenceDef:
    """x[n+N] * prod x[n+i]^denominator[i] = rhs(x[n..n+N-1], params)."""

    name: str
    order: int
    rhs: LaurentPoly
    denominator: Tuple[int, ...]
    params: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be positive")
        if len(self.denominator) != self.order:
            raise ValueError("denominator pattern must have one exponent per window slot")
        if any(d < 0 for d in self.denominator):
            raise ValueError("denominator exponents must be nonnegative")
        if self.rhs.nvars != self.order + len(self.params):
            raise ValueError("rhs has the wrong number of variables")
        if self.rhs.is_zero():
            raise ValueError("rhs must be nonzero")
        if any(v < 0 for v in self.rhs.min_exponents()):
            raise ValueError("rhs must be a polynomial")

    @property
    def nvars(self) -> int:
        return self.rhs.nvars

    @property
    def is_standard(self) -> bool:
        """True for x[n+N] x[n] = F(x[n+1], ..., x[n+N-1])."""
        return (self.denominator == (1,) + (0,) * (self.order - 1)
                and all(e[0] == 0 for e in self.rhs.terms))

    def names(self) -> Tuple[str, ...]:
        return tuple(window_name(i) for i in range(self.order)) + self.params

    def text(self) -> str:
        lhs = [window_name(self.order)]
        # higher lags first, matching the usual way these relations are written
        for i in reversed(range(self.order)):
            d = self.denominator[i]
            if d == 1:
                lhs.append(window_name(i))
            elif d:
                lhs.append(f"{window_name(i)}^{d}")
        return "*".join(lhs) + " = " + self.rhs.to_text(self.names())

    def __str__(self) -> str:
        return self.text()


# ----------------------------------------------------------------------
# built-in systems
# ----------------------------------------------------------------------
BUILTIN_NAMES = ("lyness", "rank2", "markoff", "somos4", "hv")


def builtin(name: str, **params) -> RecurrenceDef:
    """Built-in systems: lyness, rank2 (r=...), markoff, somos4, hv."""
    if name == "lyness":
        return parse_recurrence("x[n+2]*x[n] = x[n+1] + 1", name="lyness")
    if name == "rank2":
        r = params.get("r")
        if not isinstance(r, int) or isinstance(r, bool) or r < 1:
            raise ValueError("rank2 needs an integer r >= 1")
        return parse_recurrence(f"x[n+2]*x[n] = x[n+1]^{r} + 1", name=f"rank2:{r}")
    if name == "markoff":
        return parse_recurrence("x[n+3]*x[n] = x[n+2]^2 + x[n+1]^2", name="markoff")
    if name == "somos4":
        return parse_recurrence("x[n+4]*x[n] = x[n+3]*x[n+1] + x[n+2]^2", name="somos4")
    if name == "hv":
        return parse_recurrence(
            "x[n+5]*x[n+2]^3*x[n+1]^2 = x[n+4]^3*x[n+1]^3 - x[n+4]^2*x[n+3]^3*x[n]"
            " + a*x[n+3]^6*x[n+2]^6", name="hv")
    raise ValueError(f"unknown system {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def system_from_id(system: str) -> RecurrenceDef:
    """Resolve ``lyness``, ``rank2:3``, ``markoff``, ``somos4``, ``hv`` or recurrence text."""
    if "=" in system:
        return parse_recurrence(system)
    base, _, arg = system.partition(":")
    if base == "rank2":
        if not arg.isdigit():
            raise ValueError("rank2 needs an integer parameter, e.g. rank2:3")
        return builtin("rank2", r=int(arg))
    if arg:
        raise ValueError(f"system {base!r} takes no parameter")
    return builtin(base)


# ----------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------
_LAG_RE = re.compile(r"^x\[\s*n\s*(?:\+\s*(\d+)\s*)?\]$")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*(?:\[[^\]]*\])?")


def _lag(name: str) -> Optional[int]:
    m = _LAG_RE.match(name)
    if not m:
        return None
    return int(m.group(1) or 0)


def parse_recurrence(text: str, name: str = "custom") -> RecurrenceDef:
    """Parse ``x[n+N]*<monomial> = <polynomial>``.

    The right side may use x[n]..x[n+N-1] and named parameters.
    """
    if text.count("=") != 1:
        raise ParseError("expected exactly one '='", text.find("=") if "=" in text else len(text), text)
    eq = text.index("=")
    lhs_text, rhs_text = text[:eq], text[eq + 1:]

    lags = []
    for m in _IDENT_RE.finditer(lhs_text):
        lag = _lag(m.group())
        if lag is None:
            raise ParseError(f"left side may only contain lags x[n+k], found {m.group()!r}",
                             m.start(), text)
        lags.append(lag)
    if not lags:
        raise ParseError("left side has no x[n+N] term", 0, text)
    order = max(lags)
    if order < 1:
        raise ParseError("order must be at least 1", 0, text)

    def lhs_resolve(tok: str, pos: int) -> int:
        return _lag(tok)

    lhs = parse_expression(lhs_text, lhs_resolve, order + 1)
    if not lhs.is_monomial():
        raise ParseError("left side must be a monomial", 0, text)
    (exps, coeff), = lhs.terms.items()
    if coeff != 1 or exps[order] != 1 or any(e < 0 for e in exps):
        raise ParseError("left side must be x[n+N] times a monomial in lower lags", 0, text)
    denominator = tuple(exps[:order])

    params: List[str] = []
    for m in _IDENT_RE.finditer(rhs_text):
        tok = m.group()
        if tok.startswith("x["):
            lag = _lag(tok)
            if lag is None or lag >= order:
                raise ParseError(f"out-of-window lag {tok!r} (allowed x[n]..x[n+{order - 1}])",
                                 eq + 1 + m.start(), text)
        elif tok not in params:
            params.append(tok)
    params.sort()
    index = {p: order + i for i, p in enumerate(params)}

    def rhs_resolve(tok: str, pos: int) -> int:
        lag = _lag(tok)
        return lag if lag is not None else index[tok]

    rhs = parse_expression(rhs_text, rhs_resolve, order + len(params))
    try:
        return RecurrenceDef(name, order, rhs, denominator, tuple(params))
    except ValueError as exc:
        raise ParseError(str(exc), eq + 1, text) from None


# ----------------------------------------------------------------------
# reversal
# ----------------------------------------------------------------------
def reverse(defn: RecurrenceDef) -> RecurrenceDef:
    """The same relation solved for its lowest lag.

    The reversed sequence is u_k = x_{N+1-k}.  Supported when the relation
    is standard (divides by x[n] only) or when the rhs is affine in x[n] with
    a unit-monomial coefficient.
    """
    N = defn.order
    P = len(defn.params)
    nv = defn.nvars

    def remap(e):
        # window i -> N - i for i >= 1; parameters keep their slots
        out = [0] * nv
        for i in range(1, N):
            out[N - i] = e[i]
        out[N:] = e[N:]
        return tuple(out)

    if defn.is_standard:
        rhs = LaurentPoly(nv, {remap(e): c for e, c in defn.rhs.terms.items()})
        return RecurrenceDef(f"{defn.name}~rev", N, rhs, defn.denominator, defn.params)
    if defn.denominator[0] != 0:
        raise ValueError("cannot reverse: lowest lag appears on both sides")
    linear, rest = {}, {}
    for e, c in defn.rhs.terms.items():
        if e[0] == 1:
            linear[e] = c
        elif e[0] == 0:
            rest[e] = c
        else:
            raise ValueError("cannot reverse: rhs is not affine in the lowest lag")
    if len(linear) != 1:
        raise ValueError("cannot reverse: coefficient of the lowest lag is not a monomial")
    (a_exp, a_coeff), = linear.items()
    if abs(a_coeff) != 1 or any(a_exp[N:]):
        raise ValueError("cannot reverse: coefficient of the lowest lag is not a unit window monomial")
    a_rev = remap((0,) + a_exp[1:])
    new_den = a_rev[:N]
    lead = [0] * nv
    lead[0] = 1
    for i in range(1, N):
        lead[N - i] += defn.denominator[i]
    terms: Dict[Tuple[int, ...], int] = {tuple(lead): a_coeff}
    for e, c in rest.items():
        k = remap(e)
        terms[k] = terms.get(k, 0) - a_coeff * c
    rhs = LaurentPoly(nv, terms)
    return RecurrenceDef(f"{defn.name}~rev", N, rhs, tuple(new_den), defn.params)


# ----------------------------------------------------------------------
# symbolic orbits
# ----------------------------------------------------------------------
@dataclass
class SymbolicOrbit:
    values: List[LaurentPoly]
    truncated: bool = False
    reason: str = ""
    variable_names: Tuple[str, ...] = ()

    def __getitem__(self, n: int) -> LaurentPoly:
        """1-based access: orbit[n] is x_n."""
        if n < 1:
            raise IndexError("orbit indices start at 1")
        return self.values[n - 1]

    def __len__(self) -> int:
        return len(self.values)


def initial_variable_names(defn: RecurrenceDef) -> Tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(defn.order)) + defn.params


def iterate_symbolic(defn: RecurrenceDef, n_max: int, *,
                     initial: Optional[Sequence[LaurentPoly]] = None,
                     param_values: Optional[Mapping[str, int]] = None,
                     term_budget: int = DEFAULT_TERM_BUDGET,
                     work_budget: int = DEFAULT_WORK_BUDGET) -> SymbolicOrbit:
    """x_1..x_{n_max} as Laurent polynomials in the initial variables.

    Parameters stay symbolic (extra variables after the initial ones) unless
    fixed by ``param_values``.  The run stops early, with ``truncated`` set,
    once the next iterate is predicted to exceed ``term_budget`` terms or the
    division work (quotient terms times divisor terms) exceeds ``work_budget``.
    """
    N = defn.order
    param_values = dict(param_values or {})
    free = [p for p in defn.params if p not in param_values]
    nv = N + len(free)
    if initial is None:
        window = [LaurentPoly.var(nv, i) for i in range(N)]
    else:
        window = list(initial)
        if len(window) != N:
            raise ValueError(f"need {N} initial values")
        nv = window[0].nvars
    param_images = []
    for p in defn.params:
        if p in param_values:
            param_images.append(LaurentPoly.constant(nv, int(param_values[p])))
        else:
            param_images.append(LaurentPoly.var(nv, N + free.index(p)))
    names = tuple(f"x{i + 1}" for i in range(N)) + tuple(free)
    values = list(window[:n_max])
    for n in range(N + 1, n_max + 1):
        prev_len = len(window[-1])
        prev2_len = len(window[-2]) if N >= 2 else prev_len
        predicted = prev_len * max(prev_len, 1) // max(prev2_len, 1)
        divisor_len = max((len(window[i]) for i in range(N) if defn.denominator[i]), default=1)
        if predicted > term_budget:
            return SymbolicOrbit(values, True, f"term budget: x_{n} predicted ~{predicted} terms", names)
        if predicted * divisor_len > work_budget:
            return SymbolicOrbit(values, True,
                                 f"work budget: x_{n} predicted ~{predicted}x{divisor_len} division work",
                                 names)
        num = substitute(defn.rhs, window + param_images)
        for i, d in enumerate(defn.denominator):
            for _ in range(d):
                try:
                    num = div_exact(num, window[i])
                except NotLaurent as exc:
                    raise NotLaurent(f"x_{n} of {defn.name} is not a Laurent polynomial") from exc
        if len(num) > term_budget:
            return SymbolicOrbit(values, True, f"term budget: x_{n} has {len(num)} terms", names)
        values.append(num)
        window = window[1:] + [num]
    return SymbolicOrbit(values, False, "", names)


def iterate_symbolic_backward(defn: RecurrenceDef, steps: int, **kwargs) -> List[LaurentPoly]:
    """x_0, x_{-1}, ..., x_{1-steps} in the same initial variables."""
    rev = reverse(defn)
    N = defn.order
    nv = N + len([p for p in defn.params if p not in (kwargs.get("param_values") or {})])
    gens = [LaurentPoly.var(nv, i) for i in range(N)]
    orbit = iterate_symbolic(rev, N + steps, initial=gens[::-1], **kwargs)
    if orbit.truncated:
        raise RuntimeError(orbit.reason)
    return orbit.values[N:]


def has_laurent_form(p: LaurentPoly) -> bool:
    """Integer coefficients over a monomial denominator (true of every LaurentPoly value)."""
    return all(isinstance(c, int) for c in p.coefficients())


# ----------------------------------------------------------------------
# exact rational orbits
# ----------------------------------------------------------------------
def _compile(poly: LaurentPoly):
    return [(e, c) for e, c in poly.items()]


def _to_mpq(v):
    if isinstance(v, Fraction):
        return gmpy2.mpq(v.numerator, v.denominator)
    if isinstance(v, str):
        return gmpy2.mpq(Fraction(v).numerator, Fraction(v).denominator)
    return gmpy2.mpq(v)


def rational_stream(defn: RecurrenceDef, init: Sequence,
                    param_values: Optional[Mapping[str, object]] = None) -> Iterator:
    """Exact iterates x_{N+1}, x_{N+2}, ... (gmpy2 rationals); raises SingularOrbit."""
    N = defn.order
    if len(init) != N:
        raise ValueError(f"need {N} initial values, got {len(init)}")
    param_values = dict(param_values or {})
    missing = [p for p in defn.params if p not in param_values]
    if missing:
        raise ValueError(f"rational orbit needs values for parameters {missing}")
    params = [_to_mpq(param_values[p]) for p in defn.params]
    terms = _compile(defn.rhs)
    window = [_to_mpq(v) for v in init]
    n = N
    while True:
        n += 1
        point = window + params
        total = gmpy2.mpq(0)
        for e, c in terms:
            t = gmpy2.mpq(c)
            for v, k in zip(point, e):
                if k:
                    t *= v ** k
            total += t
        den = gmpy2.mpq(1)
        for v, k in zip(window, defn.denominator):
            if k:
                den *= v ** k
        if den == 0:
            raise SingularOrbit(n)
        x = total / den
        yield x
        window = window[1:] + [x]


def iterate_rational(defn: RecurrenceDef, init: Sequence, n_max: int,
                     param_values: Optional[Mapping[str, object]] = None) -> list:
    """Exact orbit x_1..x_{n_max} (gmpy2 rationals) from rational initial data."""
    stream = rational_stream(defn, init, param_values)
    out = [_to_mpq(v) for v in init][:n_max]
    while len(out) < n_max:
        out.append(next(stream))
    return out


def log_abs_int(v) -> float:
    """Natural log of |v| for arbitrarily large integers (including mpz)."""
    v = abs(int(v)) if not isinstance(v, type(gmpy2.mpz(0))) else abs(v)
    if v == 0:
        return -math.inf
    b = int(gmpy2.bit_length(gmpy2.mpz(v)))
    if b < 1000:
        return math.log(int(v))
    shift = b - 64
    return math.log(int(v >> shift)) + shift * LOG2


def height(q) -> int:
    """H(p/q) = max(|p|, |q|) in lowest terms; H(0) = 1."""
    q = _to_mpq(q)
    if q == 0:
        return 1
    return int(max(abs(q.numerator), abs(q.denominator)))


def log_height(q) -> float:
    q = _to_mpq(q)
    if q == 0:
        return 0.0
    return max(log_abs_int(q.numerator), log_abs_int(q.denominator))


# ----------------------------------------------------------------------
# numeric orbits
# ----------------------------------------------------------------------
def _as_xarray(v, size: Optional[int] = None) -> XArray:
    if isinstance(v, XArray):
        return v
    if isinstance(v, ExtComplex):
        return XArray._raw(np.array([v.m]), np.array([v.e], dtype=np.int64))
    return XArray.constant(complex(v), size or 1)


def eval_terms(terms, point: Sequence[XArray]) -> XArray:
    """Sum of c * prod point_i^e_i over compiled terms, with power caching."""
    size = len(point[0])
    cache: Dict[Tuple[int, int], XArray] = {}
    total = None
    for e, c in terms:
        t = None
        for i, k in enumerate(e):
            if not k:
                continue
            key = (i, k)
            if key not in cache:
                cache[key] = point[i] ** k
            t = cache[key] if t is None else t * cache[key]
        if t is None:
            t = XArray.constant(c, size)
        elif c != 1:
            t = t * c
        total = t if total is None else total + t
    return total


def numeric_stream(defn: RecurrenceDef, init: Sequence, params: Sequence = ()) -> Iterator[XArray]:
    """Yield x_{N+1}, x_{N+2}, ... for batched initial data (no stopping)."""
    N = defn.order
    size = max((len(v) for v in list(init) + list(params) if isinstance(v, XArray)), default=1)
    window = [_as_xarray(v, size) for v in init]
    pvals = [_as_xarray(v, size) for v in params]
    if len(window) != N or len(pvals) != len(defn.params):
        raise ValueError("initial data or parameters have the wrong length")
    terms = _compile(defn.rhs)
    den_slots = [(i, k) for i, k in enumerate(defn.denominator) if k]
    while True:
        num = eval_terms(terms, window + pvals)
        for i, k in den_slots:
            num = num / (window[i] ** k)
        yield num
        window = window[1:] + [num]


@dataclass
class NumericOrbit:
    values: List[XArray]
    valid: List[np.ndarray] = field(default_factory=list)

    def __getitem__(self, n: int) -> XArray:
        return self.values[n - 1]

    def scalar(self, n: int, sample: int = 0) -> ExtComplex:
        return self.values[n - 1][sample]

    def __len__(self) -> int:
        return len(self.values)


def iterate_numeric(defn: RecurrenceDef, init: Sequence, n_max: int,
                    params: Sequence = (), zero_threshold: float = 1e-300,
                    strict: Optional[bool] = None) -> NumericOrbit:
    """Numeric orbit x_1..x_{n_max} at one point or a batch of points.

    With ``strict`` (the default for scalar input) a zero hit raises
    :class:`SingularOrbit`; otherwise invalid samples are flagged per step.
    """
    batched = any(isinstance(v, XArray) for v in list(init) + list(params))
    if strict is None:
        strict = not batched
    size = max((len(v) for v in list(init) + list(params) if isinstance(v, XArray)), default=1)
    start = [_as_xarray(v, size) for v in init]
    for v in start:
        if not v.valid(zero_threshold).all() and strict:
            raise ZeroCoordinate("initial point has a zero coordinate")
    values = start[:n_max]
    valid = [v.valid(zero_threshold) for v in values]
    alive = np.logical_and.reduce(valid) if valid else np.ones(size, bool)
    stream = numeric_stream(defn, start, params)
    with np.errstate(all="ignore"):
        for n in range(defn.order + 1, n_max + 1):
            x = next(stream)
            ok = x.valid(zero_threshold)
            if strict and not ok.all():
                raise SingularOrbit(n)
            alive = alive & ok
            values.append(x)
            valid.append(alive.copy())
    return NumericOrbit(values, valid)


# ----------------------------------------------------------------------
# reduced maps
# ----------------------------------------------------------------------
REDUCED_KINDS = ("markoff_y", "somos4_y")


@dataclass(frozen=True)
class ReducedMap:
    kind: str
    window: Tuple[object, object]

    def __post_init__(self):
        if self.kind not in REDUCED_KINDS:
            raise ValueError(f"unknown reduced map {self.kind!r}")
        if len(self.window) != 2:
            raise ValueError("reduced maps have a window of two values")


def _one_like(y):
    if isinstance(y, XArray):
        return XArray.constant(1, len(y))
    if isinstance(y, ExtComplex):
        return ExtComplex(1.0)
    return 1


def _check_nonzero(y):
    if isinstance(y, XArray):
        return
    if (y.is_zero() if isinstance(y, ExtComplex) else y == 0):
        raise ZeroDivisionError("reduced map window contains zero")


def reduced_step(rmap: ReducedMap) -> ReducedMap:
    """One step: markoff_y y'' = y (y' + 1/y'); somos4_y y'' = (y' + 1)/(y y'^2)."""
    y0, y1 = rmap.window
    _check_nonzero(y0)
    _check_nonzero(y1)
    one = _one_like(y1)
    if rmap.kind == "markoff_y":
        y2 = y0 * (y1 + one / y1)
    else:
        y2 = (y1 + one) / (y0 * (y1 * y1))
    return ReducedMap(rmap.kind, (y1, y2))


def iterate_reduced(kind: str, y1, y2, n_max: int) -> list:
    """y_1..y_{n_max} of a reduced map (scalars or XArrays)."""
    out = [y1, y2][:n_max]
    state = ReducedMap(kind, (y1, y2))
    with np.errstate(all="ignore"):
        for _ in range(2, n_max):
            state = reduced_step(state)
            out.append(state.window[1])
    return out


# ----------------------------------------------------------------------
# conserved quantities
# ----------------------------------------------------------------------
def _nonzero(point):
    for v in point:
        if isinstance(v, ExtComplex):
            if v.is_zero():
                raise ZeroCoordinate("zero coordinate")
        elif np.any(np.asarray(v) == 0):
            raise ZeroCoordinate("zero coordinate")


def conserved_quantity(name: str, point: Sequence):
    """rank2_K = x1/x2 + x2/x1 + 1/(x1 x2); markoff_K = (x1^2+x2^2+x3^2)/(x1 x2 x3)."""
    _nonzero(point)
    if name == "rank2_K":
        x1, x2 = point
        return x1 / x2 + x2 / x1 + 1 / (x1 * x2)
    if name == "markoff_K":
        x1, x2, x3 = point
        return (x1 * x1 + x2 * x2 + x3 * x3) / (x1 * x2 * x3)
    raise ValueError(f"unknown conserved quantity {name!r}")
