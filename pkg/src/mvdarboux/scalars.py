"""Scalar plumbing shared by polynomials and matrices.

Two arithmetic modes exist.  ``"rational"`` keeps everything exact: integers,
:class:`fractions.Fraction` and :class:`GaussianRational` (complex numbers with
rational parts).  ``"float"`` uses Python/numpy ``float`` and ``complex``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Any, Union

import numpy as np

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)


class GaussianRational:
    """Exact complex number ``real + imag*i`` with rational parts.

    Arithmetic results with a vanishing imaginary part collapse to
    :class:`~fractions.Fraction`, so real computations stay real.
    """

    __slots__ = ("real", "imag")

    def __init__(self, real: Any = 0, imag: Any = 0):
        self.real = Fraction(real)
        self.imag = Fraction(imag)

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussianRational):
            return x.real, x.imag
        if isinstance(x, (int, Fraction)):
            return Fraction(x), Fraction(0)
        return None

    def __repr__(self) -> str:
        return f"GaussianRational({self.real!r}, {self.imag!r})"

    def __str__(self) -> str:
        return format_scalar(self)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_complex(self.real + o[0], self.imag + o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_complex(self.real - o[0], self.imag - o[1])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_complex(o[0] - self.real, o[1] - self.imag)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.real, self.imag
        c, d = o
        return make_complex(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        c, d = o
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        a, b = self.real, self.imag
        return make_complex((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(*o) / self

    def __neg__(self):
        return GaussianRational(-self.real, -self.imag)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** -n)
        result: Any = Fraction(1)
        base: Any = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.real == o[0] and self.imag == o[1]

    def __hash__(self) -> int:
        if self.imag == 0:
            return hash(self.real)
        return hash((self.real, self.imag))

    def __bool__(self) -> bool:
        return bool(self.real) or bool(self.imag)

    def __complex__(self) -> complex:
        return complex(float(self.real), float(self.imag))

    def __abs__(self) -> float:
        return abs(complex(self))

    def conjugate(self):
        return make_complex(self.real, -self.imag)


def make_complex(real: Fraction, imag: Fraction):
    if imag == 0:
        return real
    return GaussianRational(real, imag)


Scalar = Union[int, Fraction, GaussianRational, float, complex]


def is_exact(x: Any) -> bool:
    return isinstance(x, (int, Rational, GaussianRational)) and not isinstance(x, bool)


def is_zero(x: Any, tol: float = 0.0) -> bool:
    """Exact test for exact scalars, ``|x| <= tol`` otherwise."""
    if is_exact(x):
        return x == 0
    return abs(x) <= tol


def magnitude(x: Any) -> float:
    return float(abs(complex(x))) if isinstance(x, GaussianRational) else float(abs(x))


def to_float(x: Any):
    """Convert any scalar to ``float`` (or ``complex`` if it has an imaginary part)."""
    if isinstance(x, GaussianRational):
        return complex(x)
    if isinstance(x, complex):
        return x
    return float(x)


def real_part(x: Any):
    if isinstance(x, (GaussianRational, complex)):
        return x.real
    return x


def imag_part(x: Any):
    if isinstance(x, (GaussianRational, complex)):
        return x.imag
    return 0


def convert(x: Any, mode: str):
    """Bring a scalar into the arithmetic of ``mode``."""
    if mode == RATIONAL:
        if isinstance(x, (float, complex)):
            raise TypeError(f"inexact value {x!r} in rational mode")
        if isinstance(x, GaussianRational):
            return x
        return Fraction(x)
    if mode == FLOAT:
        return to_float(x)
    raise ValueError(f"unknown scalar mode {mode!r}")


_REAL_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?$")


def _split_complex(text: str) -> tuple[str, str | None]:
    """Split ``"a+bi"`` into ``("a", "+b")``; imaginary part is None for reals."""
    if not text or text[-1] not in "ij":
        return text, None
    body = text[:-1]
    for idx in range(len(body) - 1, 0, -1):
        if body[idx] in "+-" and body[idx - 1] not in "eE":
            return body[:idx], body[idx:]
    return "", body


def _parse_real(text: str, mode: str):
    if mode == RATIONAL:
        return Fraction(text)
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_scalar(value: Any, mode: str = RATIONAL):
    """Parse a scalar literal.

    Accepts JSON numbers and strings such as ``"3"``, ``"-2/7"``, ``"0.25"``,
    ``"1/2-3/4i"``, ``"i"``.  In rational mode a JSON float is refused
    (decimal *strings* are read exactly).
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value) if mode == RATIONAL else float(value)
    if isinstance(value, float):
        if mode == RATIONAL:
            raise TypeError(f"float literal {value!r} not allowed in rational mode; quote it as a string")
        return value
    if not isinstance(value, str):
        raise TypeError(f"cannot parse scalar from {value!r}")
    text = value.strip().replace(" ", "")
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    if text in ("nan", "inf", "-inf") and mode == FLOAT:
        return float(text)
    re_txt, im_txt = _split_complex(text)
    if im_txt is None:
        if not _REAL_RE.match(re_txt):
            raise ValueError(f"malformed scalar literal {value!r}")
        return _parse_real(re_txt, mode)
    if im_txt in ("", "+"):
        im_txt = "1"
    elif im_txt == "-":
        im_txt = "-1"
    if (re_txt and not _REAL_RE.match(re_txt)) or not _REAL_RE.match(im_txt):
        raise ValueError(f"malformed scalar literal {value!r}")
    re_val = _parse_real(re_txt, mode) if re_txt else _parse_real("0", mode)
    im_val = _parse_real(im_txt, mode)
    if mode == RATIONAL:
        return make_complex(re_val, im_val)
    return complex(re_val, im_val) if im_val != 0 else re_val


def _format_real(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_scalar(x: Any) -> str:
    """Inverse of :func:`parse_scalar` (round-trips exactly)."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, np.generic):
        return format_scalar(x.item())
    if isinstance(x, (GaussianRational, complex)):
        re_s = _format_real(x.real)
        im = x.imag
        sign = "-" if (im < 0 or (isinstance(im, float) and str(im).startswith("-"))) else "+"
        return f"{re_s}{sign}{_format_real(abs(im))}i"
    if isinstance(x, float):
        return repr(x)
    return _format_real(x)


def infer_mode(values) -> str:
    """``"rational"`` when every value is exact, else ``"float"``."""
    return RATIONAL if all(is_exact(v) for v in values) else FLOAT
