"""Sparse multivariate Laurent polynomials over the integers.

A :class:`LaurentPoly` is an immutable map from integer exponent vectors
(negative entries allowed) to nonzero Python integers.  Small products and
quotients are done with dictionaries; large ones are handed to FLINT's
``fmpz_mpoly`` after clearing the monomial denominators.
"""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple

try:  # optional fast backend
    import flint
except ImportError:  # pragma: no cover
    flint = None

from .extended import ExtComplex

Exponent = Tuple[int, ...]

# products/quotients whose term-count product exceeds this go through FLINT
FLINT_THRESHOLD = 4000


class NotLaurent(ArithmeticError):
    """An exact Laurent-polynomial quotient does not exist."""


class ZeroCoordinate(ValueError):
    """A Laurent polynomial was evaluated where some coordinate vanishes."""


@lru_cache(maxsize=None)
def _ctx(nvars: int):
    return flint.fmpz_mpoly_ctx.get(tuple(f"v{i}" for i in range(nvars)), "lex")


def _default_names(nvars: int) -> Tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(nvars))


class LaurentPoly:
    """Immutable sparse Laurent polynomial with integer coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, int] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean: Dict[Exponent, int] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(v) for v in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has length {len(e)}, expected {nvars}")
                c = int(c)
                if c:
                    clean[e] = clean.get(e, 0) + c
            clean = {e: c for e, c in clean.items() if c}
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    # -- construction ---------------------------------------------------
    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exponent, int]) -> "LaurentPoly":
        # trusted path: terms already canonical
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, nvars: int, c: int) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exps: Sequence[int], c: int = 1) -> "LaurentPoly":
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def var(cls, nvars: int, i: int, power: int = 1) -> "LaurentPoly":
        """The variable ``x_{i+1}`` (0-based ``i``) raised to ``power``."""
        e = [0] * nvars
        e[i] = power
        return cls.monomial(e)

    @classmethod
    def gens(cls, nvars: int) -> Tuple["LaurentPoly", ...]:
        return tuple(cls.var(nvars, i) for i in range(nvars))

    # -- basic protocol -------------------------------------------------
    @property
    def terms(self) -> Dict[Exponent, int]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical (descending lexicographic) order."""
        return sorted(self._terms.items(), reverse=True)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.constant(self.nvars, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"LaurentPoly({self.nvars}, {self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def _check(self, other: "LaurentPoly") -> "LaurentPoly":
        if isinstance(other, int):
            return LaurentPoly.constant(self.nvars, other)
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")
        if other.nvars != self.nvars:
            raise ValueError(f"dimension mismatch: {self.nvars} vs {other.nvars} variables")
        return other

    # -- ring operations ------------------------------------------------
    def __add__(self, other) -> "LaurentPoly":
        return add(self, self._check(other))

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return add(self, -self._check(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return add(-self, self._check(other))

    def __mul__(self, other) -> "LaurentPoly":
        return mul(self, self._check(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if not self.is_monomial():
                raise NotLaurent("negative power of a non-monomial")
            (e, c), = self._terms.items()
            if abs(c) != 1:
                raise NotLaurent("negative power of a non-unit monomial")
            return LaurentPoly._raw(self.nvars, {tuple(k * v for v in e): c ** (-k)})
        if self.is_monomial():
            (e, c), = self._terms.items()
            return LaurentPoly._raw(self.nvars, {tuple(k * v for v in e): c ** k})
        if len(self) * len(self) > FLINT_THRESHOLD and flint is not None:
            P, shift = _to_flint(self)
            return _from_flint(P ** k, self.nvars, tuple(k * s for s in shift))
        result = LaurentPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other) -> "LaurentPoly":
        return div_exact(self, self._check(other))

    # -- structure ------------------------------------------------------
    def min_exponents(self) -> Exponent:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(min(col) for col in zip(*self._terms))

    def max_exponents(self) -> Exponent:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(max(col) for col in zip(*self._terms))

    def numerator(self) -> Tuple["LaurentPoly", Exponent]:
        """Split ``p = P / x^d`` with ``P`` a polynomial not divisible by any variable."""
        lo = self.min_exponents()
        P = {tuple(a - b for a, b in zip(e, lo)): c for e, c in self._terms.items()}
        return LaurentPoly._raw(self.nvars, P), tuple(-v for v in lo)

    def coefficients(self) -> Iterable[int]:
        return self._terms.values()

    def length(self) -> int:
        return sum(abs(c) for c in self._terms.values())

    def is_positive(self) -> bool:
        return bool(self._terms) and all(c > 0 for c in self._terms.values())

    # -- evaluation -----------------------------------------------------
    def __call__(self, *point):
        return eval_complex(self, point)

    def eval_exact(self, point: Sequence) -> object:
        """Evaluate at exact values (ints, Fractions, gmpy2 rationals)."""
        if len(point) != self.nvars:
            raise ValueError("point has wrong length")
        if any(v == 0 for v in point):
            raise ZeroCoordinate("zero coordinate")
        total = 0
        for e, c in self._terms.items():
            term = c
            for v, k in zip(point, e):
                if k > 0:
                    term = term * v ** k
                elif k < 0:
                    term = term / v ** (-k)
            total = total + term
        return total

    # -- text -----------------------------------------------------------
    def to_text(self, names: Sequence[str] | None = None) -> str:
        return format_poly(self, names)

    @classmethod
    def from_text(cls, text: str, names: Sequence[str] | None = None,
                  nvars: int | None = None) -> "LaurentPoly":
        return parse_poly(text, names, nvars)


# ----------------------------------------------------------------------
# FLINT bridge
# ----------------------------------------------------------------------
def _to_flint(p: LaurentPoly):
    lo = p.min_exponents()
    d = {tuple(a - b for a, b in zip(e, lo)): c for e, c in p._terms.items()}
    return _ctx(p.nvars).from_dict(d), lo


def _from_flint(P, nvars: int, shift: Exponent) -> LaurentPoly:
    terms = {}
    for m, c in zip(P.monoms(), P.coeffs()):
        terms[tuple(int(a) + b for a, b in zip(m, shift))] = int(c)
    return LaurentPoly._raw(nvars, terms)


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------
def _same_dims(p: LaurentPoly, q: LaurentPoly) -> None:
    if p.nvars != q.nvars:
        raise ValueError(f"dimension mismatch: {p.nvars} vs {q.nvars} variables")


def add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    _same_dims(p, q)
    if len(p) < len(q):
        p, q = q, p
    out = dict(p._terms)
    for e, c in q._terms.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return LaurentPoly._raw(p.nvars, out)


def mul(p: LaurentPoly, q: LaurentPoly, backend: str = "auto") -> LaurentPoly:
    """Product of two Laurent polynomials.

    ``backend`` is ``"auto"``, ``"python"`` or ``"flint"``.
    """
    _same_dims(p, q)
    if p.is_zero() or q.is_zero():
        return LaurentPoly(p.nvars)
    use_flint = backend == "flint" or (
        backend == "auto" and flint is not None and len(p) * len(q) > FLINT_THRESHOLD)
    if use_flint:
        P, sp = _to_flint(p)
        Q, sq = _to_flint(q)
        return _from_flint(P * Q, p.nvars, tuple(a + b for a, b in zip(sp, sq)))
    if len(p) < len(q):
        p, q = q, p
    out: Dict[Exponent, int] = {}
    qi = list(q._terms.items())
    for e1, c1 in p._terms.items():
        for e2, c2 in qi:
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return LaurentPoly._raw(p.nvars, {e: c for e, c in out.items() if c})


def _poly_divide_python(P: Dict[Exponent, int], Q: Dict[Exponent, int]) -> Dict[Exponent, int]:
    """Exact division of polynomials (nonnegative exponents) in lex order."""
    lead_q = max(Q)
    lc_q = Q[lead_q]
    rest_q = [(e, c) for e, c in Q.items() if e != lead_q]
    rem = dict(P)
    heap = [tuple(-v for v in e) for e in rem]
    heapq.heapify(heap)
    quot: Dict[Exponent, int] = {}
    while heap:
        key = heapq.heappop(heap)
        e = tuple(-v for v in key)
        c = rem.get(e)
        if not c:
            continue
        shift = tuple(a - b for a, b in zip(e, lead_q))
        if min(shift) < 0:
            raise NotLaurent("leading term not divisible by divisor's leading term")
        qc, r = divmod(c, lc_q)
        if r:
            raise NotLaurent("coefficient not divisible")
        quot[shift] = qc
        del rem[e]
        for e2, c2 in rest_q:
            t = tuple(a + b for a, b in zip(shift, e2))
            old = rem.get(t)
            if old is None:
                rem[t] = -qc * c2
                heapq.heappush(heap, tuple(-v for v in t))
            else:
                new = old - qc * c2
                if new:
                    rem[t] = new
                else:
                    del rem[t]
    return quot


def div_exact(p: LaurentPoly, q: LaurentPoly, backend: str = "auto") -> LaurentPoly:
    """Return ``r`` with ``r * q == p``; raise :class:`NotLaurent` if none exists."""
    _same_dims(p, q)
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return LaurentPoly(p.nvars)
    if q.is_monomial():
        (eq, cq), = q._terms.items()
        out = {}
        for e, c in p._terms.items():
            qc, r = divmod(c, cq)
            if r:
                raise NotLaurent(f"coefficient {c} not divisible by {cq}")
            out[tuple(a - b for a, b in zip(e, eq))] = qc
        return LaurentPoly._raw(p.nvars, out)
    P, dp = p.numerator()
    Q, dq = q.numerator()
    shift = tuple(b - a for a, b in zip(dp, dq))  # x^{dq - dp}
    use_flint = backend == "flint" or (
        backend == "auto" and flint is not None and len(P) * len(Q) > FLINT_THRESHOLD)
    if use_flint:
        FP, _ = _to_flint(P)
        FQ, _ = _to_flint(Q)
        quot, rem = divmod(FP, FQ)
        if not rem.is_zero():
            raise NotLaurent("nonzero remainder")
        return _from_flint(quot, p.nvars, shift)
    quot = _poly_divide_python(P._terms, Q._terms)
    return LaurentPoly._raw(p.nvars, {tuple(a + b for a, b in zip(e, shift)): c
                                      for e, c in quot.items()})


def substitute(p: LaurentPoly, images: Sequence[LaurentPoly]) -> LaurentPoly:
    """Replace variable ``i`` of ``p`` by ``images[i]``.

    Images may live in a different number of variables.  Negative powers of
    non-monomial images are handled by one exact division at the end.
    """
    if len(images) != p.nvars:
        raise ValueError(f"need {p.nvars} images, got {len(images)}")
    m = images[0].nvars
    if any(im.nvars != m for im in images):
        raise ValueError("images must share a variable count")
    if p.is_zero():
        return LaurentPoly(m)
    lo = p.min_exponents()
    # clear negative powers of non-invertible images
    clear = [(-v if (v < 0 and not _is_unit_monomial(im)) else 0) for v, im in zip(lo, images)]
    cache: Dict[Tuple[int, int], LaurentPoly] = {}

    def power(i: int, k: int) -> LaurentPoly:
        key = (i, k)
        if key not in cache:
            cache[key] = images[i] ** k
        return cache[key]

    total = LaurentPoly(m)
    for e, c in p._terms.items():
        term = LaurentPoly.constant(m, c)
        for i, k in enumerate(e):
            k += clear[i]
            if k:
                term = term * power(i, k)
        total = total + term
    if any(clear):
        den = LaurentPoly.constant(m, 1)
        for i, k in enumerate(clear):
            if k:
                den = den * power(i, k)
        total = div_exact(total, den)
    return total


def _is_unit_monomial(p: LaurentPoly) -> bool:
    return p.is_monomial() and abs(next(iter(p._terms.values()))) == 1


def eval_complex(p: LaurentPoly, point: Sequence) -> ExtComplex:
    """Evaluate ``p`` at a point of nonzero complex (or extended-range) numbers."""
    if len(point) != p.nvars:
        raise ValueError(f"point has length {len(point)}, expected {p.nvars}")
    pts = [v if isinstance(v, ExtComplex) else ExtComplex.from_complex(complex(v)) for v in point]
    if any(v.is_zero() for v in pts):
        raise ZeroCoordinate("evaluation point has a zero coordinate")
    powers: Dict[Tuple[int, int], ExtComplex] = {}
    total = ExtComplex.zero()
    for e, c in p._terms.items():
        term = ExtComplex.from_int(c)
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in powers:
                    powers[key] = pts[i] ** k
                term = term * powers[key]
        total = total + term
    return total


# ----------------------------------------------------------------------
# degree metrics
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DegreeProfile:
    rational_degree: int
    sdeg: int
    length: int


def dvector(p: LaurentPoly) -> Tuple[int, ...]:
    """Exponents of the denominator monomial in the canonical form ``P / x^d``."""
    if p.is_zero():
        raise ValueError("d-vector of the zero polynomial")
    return tuple(-v for v in p.min_exponents())


def degree_profile(p: LaurentPoly) -> DegreeProfile:
    """Degrees of ``p`` written as a reduced fraction N / x^e with e = [d]_+.

    Initial variables have negative d-vector entries, so they land in the
    numerator: ``x2`` has rational degree 1, not 0.
    """
    if p.is_zero():
        raise ValueError("degree profile of the zero polynomial")
    den = tuple(max(-v, 0) for v in p.min_exponents())
    shifted = [tuple(a + b for a, b in zip(e, den)) for e in p._terms]
    num_deg = max(sum(e) for e in shifted)
    sdeg = sum(max(col) for col in zip(*shifted))
    return DegreeProfile(max(num_deg, sum(den)), sdeg, p.length())


# ----------------------------------------------------------------------
# text form
# ----------------------------------------------------------------------
def _fmt_monomial(e: Exponent, names: Sequence[str]) -> str:
    parts = []
    for name, k in zip(names, e):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def format_poly(p: LaurentPoly, names: Sequence[str] | None = None) -> str:
    """Canonical text: terms in descending lex order, e.g. ``3*x1^2*x2^-1 + 1``."""
    names = tuple(names) if names is not None else _default_names(p.nvars)
    if p.is_zero():
        return "0"
    out = []
    for i, (e, c) in enumerate(p.items()):
        mono = _fmt_monomial(e, names)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if i == 0:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def parse_poly(text: str, names: Sequence[str] | None = None,
               nvars: int | None = None) -> LaurentPoly:
    """Parse the canonical text form (and simple variants with parentheses)."""
    from .exprparse import parse_expression

    if names is None:
        if nvars is None:
            found = [int(m) for m in re.findall(r"x(\d+)", text)]
            nvars = max(found) if found else 1
        names = _default_names(nvars)
    return parse_expression(text, {name: i for i, name in enumerate(names)}, len(names))
