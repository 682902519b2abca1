"""Extended-range complex numbers.

A value is stored as ``mantissa * 2**exponent`` with ``1 <= |mantissa| < 2``
(or mantissa 0), renormalized after every operation.  Orbits of the
recurrences grow doubly exponentially, so the exponent is an integer that
can exceed the range of a float by many orders of magnitude.

:class:`ExtComplex` is a scalar; :class:`XArray` holds one value per sample
and is what the torus estimators iterate.  XArray exponents start as int64
and are promoted to Python integers (object arrays) before they can overflow.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

LOG2 = math.log(2.0)
# largest exponent magnitude kept in int64 mode
_INT64_SAFE = 1 << 61
# shifts beyond this underflow a double mantissa to zero
_MAX_SHIFT = 1100


def _split(z: complex):
    """Return (mantissa, exponent) with 1 <= |mantissa| < 2."""
    a = abs(z)
    if a == 0.0 or not math.isfinite(a):
        return z, 0
    _, e = math.frexp(a)
    e -= 1
    return complex(math.ldexp(z.real, -e), math.ldexp(z.imag, -e)), e


class ExtComplex:
    """Scalar extended-range complex number."""

    __slots__ = ("m", "e")

    def __init__(self, m: complex, e: int = 0):
        m, de = _split(complex(m))
        self.m = m
        self.e = int(e) + de

    @classmethod
    def from_complex(cls, z: complex) -> "ExtComplex":
        return cls(z, 0)

    @classmethod
    def from_int(cls, c: int) -> "ExtComplex":
        c = int(c)
        b = abs(c).bit_length()
        if b <= 60:
            return cls(complex(c), 0)
        shift = b - 60
        return cls(complex(c >> shift if c > 0 else -((-c) >> shift)), shift)

    @classmethod
    def zero(cls) -> "ExtComplex":
        return cls(0j, 0)

    def is_zero(self) -> bool:
        return self.m == 0

    def is_finite(self) -> bool:
        return cmath.isfinite(self.m)

    def __mul__(self, other) -> "ExtComplex":
        other = _as_ext(other)
        return ExtComplex(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtComplex":
        other = _as_ext(other)
        if other.is_zero():
            raise ZeroDivisionError("division by extended zero")
        return ExtComplex(self.m / other.m, self.e - other.e)

    def __rtruediv__(self, other) -> "ExtComplex":
        return _as_ext(other) / self

    def __neg__(self) -> "ExtComplex":
        return ExtComplex(-self.m, self.e)

    def __add__(self, other) -> "ExtComplex":
        other = _as_ext(other)
        if self.is_zero():
            return ExtComplex(other.m, other.e)
        if other.is_zero():
            return ExtComplex(self.m, self.e)
        e = max(self.e, other.e)
        d1 = max(self.e - e, -_MAX_SHIFT)
        d2 = max(other.e - e, -_MAX_SHIFT)
        m = complex(math.ldexp(self.m.real, d1), math.ldexp(self.m.imag, d1)) + \
            complex(math.ldexp(other.m.real, d2), math.ldexp(other.m.imag, d2))
        return ExtComplex(m, e)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtComplex":
        return self + (-_as_ext(other))

    def __rsub__(self, other) -> "ExtComplex":
        return _as_ext(other) - self

    def __pow__(self, k: int) -> "ExtComplex":
        if k < 0:
            return ExtComplex(1.0) / (self ** (-k))
        result = ExtComplex(1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def log_abs(self) -> float:
        """Natural log of the modulus; ``-inf`` for zero."""
        if self.m == 0:
            return -math.inf
        return math.log(abs(self.m)) + self.e * LOG2

    def to_complex(self) -> complex:
        """Convert to a native complex (may overflow to inf or underflow to 0)."""
        if self.e > 1100:
            return complex(math.copysign(math.inf, self.m.real), math.copysign(math.inf, self.m.imag))
        if self.e < -1100:
            return 0j
        return complex(math.ldexp(self.m.real, self.e), math.ldexp(self.m.imag, self.e))

    def __complex__(self) -> complex:
        return self.to_complex()

    def __repr__(self) -> str:
        return f"ExtComplex({self.m!r}, {self.e})"


def _as_ext(v) -> ExtComplex:
    if isinstance(v, ExtComplex):
        return v
    if isinstance(v, int):
        return ExtComplex.from_int(v)
    return ExtComplex(complex(v), 0)


# ----------------------------------------------------------------------
# vectorized
# ----------------------------------------------------------------------
def _normalize(m: np.ndarray, e: np.ndarray):
    a = np.abs(m)
    with np.errstate(invalid="ignore"):
        _, de = np.frexp(a)
    de = de.astype(np.int64) - 1
    ok = (a != 0) & np.isfinite(a)
    de = np.where(ok, de, 0)
    m = np.ldexp(m.real, -de) + 1j * np.ldexp(m.imag, -de)
    if e.dtype == object:
        e = e + de.astype(object)
    else:
        e = e + de
    return m, e


def _promote(e: np.ndarray) -> np.ndarray:
    if e.dtype == object:
        return e
    return np.array([int(v) for v in e], dtype=object)


def _needs_promotion(e: np.ndarray, factor: int = 1) -> bool:
    if e.dtype == object or e.size == 0:
        return False
    return int(np.abs(e).max()) * max(abs(factor), 1) >= _INT64_SAFE


def _shift(d: np.ndarray) -> np.ndarray:
    """Exponent differences (<= 0) clipped into a safe int64 ldexp range."""
    if d.dtype == object:
        d = np.array([max(int(v), -_MAX_SHIFT) for v in d], dtype=np.int64)
    return np.maximum(d, -_MAX_SHIFT)


class XArray:
    """Vector of extended-range complex values (one per sample)."""

    __slots__ = ("m", "e")

    def __init__(self, m: np.ndarray, e: np.ndarray | None = None):
        m = np.asarray(m, dtype=np.complex128)
        if e is None:
            e = np.zeros(m.shape, dtype=np.int64)
        self.m, self.e = _normalize(m, e)

    @classmethod
    def _raw(cls, m, e) -> "XArray":
        obj = cls.__new__(cls)
        obj.m = m
        obj.e = e
        return obj

    @classmethod
    def constant(cls, c, size: int) -> "XArray":
        s = _as_ext(c)
        e = np.full(size, s.e, dtype=np.int64) if abs(s.e) < _INT64_SAFE else \
            np.array([s.e] * size, dtype=object)
        return cls._raw(np.full(size, s.m, dtype=np.complex128), e)

    def __len__(self) -> int:
        return self.m.shape[0]

    def _pair(self, other: "XArray"):
        e1, e2 = self.e, other.e
        if e1.dtype == object or e2.dtype == object or _needs_promotion(e1) or _needs_promotion(e2):
            e1, e2 = _promote(e1), _promote(e2)
        return e1, e2

    def __mul__(self, other: "XArray") -> "XArray":
        if not isinstance(other, XArray):
            other = XArray.constant(other, len(self))
        e1, e2 = self._pair(other)
        m, e = _normalize(self.m * other.m, e1 + e2)
        return XArray._raw(m, e)

    def __truediv__(self, other: "XArray") -> "XArray":
        if not isinstance(other, XArray):
            other = XArray.constant(other, len(self))
        e1, e2 = self._pair(other)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = self.m / other.m
        m, e = _normalize(q, e1 - e2)
        return XArray._raw(m, e)

    def __neg__(self) -> "XArray":
        return XArray._raw(-self.m, self.e)

    def __add__(self, other: "XArray") -> "XArray":
        if not isinstance(other, XArray):
            other = XArray.constant(other, len(self))
        e1, e2 = self._pair(other)
        z1 = self.m == 0
        z2 = other.m == 0
        if e1.dtype == object:
            e = np.array([b if za else (a if zb else max(a, b))
                          for a, b, za, zb in zip(e1, e2, z1, z2)], dtype=object)
        else:
            e = np.where(z1, e2, np.where(z2, e1, np.maximum(e1, e2)))
        d1 = _shift(e1 - e)
        d2 = _shift(e2 - e)
        d1 = np.where(z1, 0, d1)
        d2 = np.where(z2, 0, d2)
        m = (np.ldexp(self.m.real, d1) + 1j * np.ldexp(self.m.imag, d1)
             + np.ldexp(other.m.real, d2) + 1j * np.ldexp(other.m.imag, d2))
        m, e = _normalize(m, e)
        return XArray._raw(m, e)

    __radd__ = __add__

    def __sub__(self, other: "XArray") -> "XArray":
        if not isinstance(other, XArray):
            other = XArray.constant(other, len(self))
        return self + (-other)

    def __pow__(self, k: int) -> "XArray":
        if k < 0:
            return XArray.constant(1, len(self)) / (self ** (-k))
        if k == 0:
            return XArray.constant(1, len(self))
        if k == 1:
            return self
        e = self.e
        if _needs_promotion(e, k):
            e = _promote(e)
        m = self.m
        result_m = np.ones_like(m)
        result_e = np.zeros(m.shape, dtype=e.dtype) if e.dtype != object else \
            np.array([0] * m.shape[0], dtype=object)
        base_m, base_e = m, e
        while k:
            if k & 1:
                result_m, result_e = _normalize(result_m * base_m, result_e + base_e)
            k >>= 1
            if k:
                base_m, base_e = _normalize(base_m * base_m, base_e + base_e)
        return XArray._raw(result_m, result_e)

    def log_abs(self) -> np.ndarray:
        """Natural log of |value| per sample (``-inf`` at zeros, ``nan`` if invalid)."""
        a = np.abs(self.m)
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.log(a)
        if self.e.dtype == object:
            ef = np.array([float(v) for v in self.e])
        else:
            ef = self.e.astype(np.float64)
        return la + ef * LOG2

    def valid(self, zero_threshold: float = 1e-300) -> np.ndarray:
        """Mask of samples that are finite with modulus at least ``zero_threshold``."""
        a = np.abs(self.m)
        ok = np.isfinite(a) & (a > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return ok & (self.log_abs() >= math.log(zero_threshold))

    def to_complex(self) -> np.ndarray:
        e = self.e
        if e.dtype == object:
            e = np.array([max(min(int(v), 2000), -2000) for v in e], dtype=np.int64)
        e = np.clip(e, -2000, 2000)
        with np.errstate(over="ignore"):
            return np.ldexp(self.m.real, e) + 1j * np.ldexp(self.m.imag, e)

    def __getitem__(self, idx) -> ExtComplex:
        s = ExtComplex.__new__(ExtComplex)
        s.m = complex(self.m[idx])
        s.e = int(self.e[idx])
        return s

    @property
    def promoted(self) -> bool:
        return self.e.dtype == object
