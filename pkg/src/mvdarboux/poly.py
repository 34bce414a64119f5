"""Sparse multivariate polynomials over a pluggable scalar.

Coefficients may be any scalar from :mod:`mvdarboux.scalars`; exact
coefficients give exact arithmetic.  The text format is a sum of terms
``coeff*x1^a1*...*xD^aD`` (rationals written ``p/q``, complex coefficients in
parentheses) and round-trips through :func:`parse_poly` / :func:`format_poly`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Any, Iterable, Mapping, Sequence

from .graded_basis import GradedBasis, MultiIndex, block_size, homogeneous_indices, sort_key
from .scalars import RATIONAL, GaussianRational, format_scalar, is_exact, is_zero, magnitude, parse_scalar


class InexactDivision(ArithmeticError):
    """Polynomial division left a nonzero remainder."""


def falling(n: int, k: int) -> int:
    """Falling factorial ``n (n-1) ... (n-k+1)``; zero when ``k > n``."""
    if k > n:
        return 0
    return prod(range(n - k + 1, n + 1))


class MPoly:
    """Polynomial in ``dim`` variables stored as ``{exponent tuple: coefficient}``.

    Zero coefficients are never stored.  Iteration over :attr:`terms` follows
    the graded package ordering.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Sequence[int], Any] | None = None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        clean: dict[MultiIndex, Any] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent {alpha} for dimension {dim}")
            if c == 0:
                continue
            clean[alpha] = clean.get(alpha, 0) + c
        self.terms = {a: clean[a] for a in sorted(clean, key=sort_key) if clean[a] != 0}

    # construction helpers

    @classmethod
    def constant(cls, dim: int, c: Any) -> MPoly:
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def monomial(cls, alpha: Sequence[int], c: Any = 1) -> MPoly:
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def variable(cls, dim: int, axis: int, c: Any = 1) -> MPoly:
        return cls(dim, {tuple(int(i == axis) for i in range(dim)): c})

    @classmethod
    def from_vector(cls, basis: GradedBasis, coeffs: Sequence[Any]) -> MPoly:
        """Polynomial whose coefficient on ``basis.multiindex_at[i]`` is ``coeffs[i]``."""
        return cls(basis.dim, {basis.multiindex_at[i]: c for i, c in enumerate(coeffs) if c != 0})

    def to_vector(self, basis: GradedBasis, zero: Any = 0) -> list:
        out = [zero] * len(basis)
        for alpha, c in self.terms.items():
            out[basis.position(alpha)] = c
        return out

    # basic queries

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` stands for the zero polynomial."""
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, alpha: Sequence[int]) -> Any:
        return self.terms.get(tuple(alpha), 0)

    def homogeneous_part(self, k: int) -> MPoly:
        return MPoly(self.dim, {a: c for a, c in self.terms.items() if sum(a) == k})

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    def __repr__(self) -> str:
        return f"MPoly({self.dim}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, MPoly):
            return self.dim == other.dim and self.terms == other.terms
        if isinstance(other, (int, Fraction, float, complex)):
            return self == MPoly.constant(self.dim, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.dim, tuple(self.terms.items())))

    # arithmetic

    def _lift(self, other: Any) -> MPoly:
        if isinstance(other, MPoly):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return MPoly.constant(self.dim, other)

    def __add__(self, other: Any) -> MPoly:
        other = self._lift(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0) + c
        return MPoly(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> MPoly:
        return MPoly(self.dim, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: Any) -> MPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> MPoly:
        return self._lift(other) - self

    def __mul__(self, other: Any) -> MPoly:
        if not isinstance(other, MPoly):
            return MPoly(self.dim, {a: c * other for a, c in self.terms.items()})
        other = self._lift(other)
        out: dict[MultiIndex, Any] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + c * d
        return MPoly(self.dim, out)

    def __rmul__(self, other: Any) -> MPoly:
        return MPoly(self.dim, {a: other * c for a, c in self.terms.items()})

    def __pow__(self, n: int) -> MPoly:
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        result = MPoly.constant(self.dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def map_coefficients(self, fn) -> MPoly:
        return MPoly(self.dim, {a: fn(c) for a, c in self.terms.items()})

    def chop(self, tol: float) -> MPoly:
        """Drop coefficients with magnitude ``<= tol`` (no-op for exact ones)."""
        return MPoly(self.dim, {a: c for a, c in self.terms.items() if not is_zero(c, tol)})

    # evaluation and calculus

    def __call__(self, point: Sequence[Any]) -> Any:
        return evaluate(self, point)

    def partial(self, alpha: Sequence[int]) -> MPoly:
        """Plain repeated partial derivative ``d^|alpha| / dx^alpha``."""
        alpha = tuple(alpha)
        out = {}
        for beta, c in self.terms.items():
            factor = prod(falling(b, a) for b, a in zip(beta, alpha))
            if factor:
                out[tuple(b - a for b, a in zip(beta, alpha))] = c * factor
        return MPoly(self.dim, out)


def evaluate(p: MPoly, point: Sequence[Any]) -> Any:
    """``sum_alpha c_alpha x^alpha`` at ``point`` (exact for exact inputs)."""
    if len(point) != p.dim:
        raise ValueError(f"point of dimension {len(point)} for polynomial in {p.dim} variables")
    total: Any = 0
    for alpha, c in p.terms.items():
        term = c
        for x, a in zip(point, alpha):
            if a:
                term = term * x ** a
        total = total + term
    return total


def mul(p: MPoly, q: MPoly) -> MPoly:
    return p * q


@dataclass(frozen=True)
class Direction:
    """Homogeneous differential operator ``sum_{|alpha|=j} n_alpha d^j/dx^alpha``.

    ``coefficients`` follow the package ordering of the degree-``j`` block.
    Order 0 is plain evaluation.
    """

    dim: int
    order: int
    coefficients: tuple

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("direction order must be >= 0")
        expected = block_size(self.dim, self.order)
        if len(self.coefficients) != expected:
            raise ValueError(
                f"order-{self.order} direction in {self.dim} variables needs {expected} coefficients, "
                f"got {len(self.coefficients)}"
            )
        if all(c == 0 for c in self.coefficients):
            raise ValueError("direction has no nonzero coefficient")

    @classmethod
    def evaluation(cls, dim: int) -> Direction:
        return cls(dim, 0, (1,))

    @classmethod
    def partial(cls, dim: int, axis: int, order: int = 1) -> Direction:
        """``d^order / dx_axis^order`` (axis is 0-based)."""
        target = tuple(order if i == axis else 0 for i in range(dim))
        return cls.from_terms(dim, order, {target: 1})

    @classmethod
    def from_terms(cls, dim: int, order: int, terms: Mapping[Sequence[int], Any]) -> Direction:
        block = list(homogeneous_indices(dim, order))
        index = {a: i for i, a in enumerate(block)}
        coeffs: list[Any] = [0] * len(block)
        for alpha, c in terms.items():
            coeffs[index[tuple(alpha)]] = c
        return cls(dim, order, tuple(coeffs))

    def items(self) -> Iterable[tuple[MultiIndex, Any]]:
        for alpha, c in zip(homogeneous_indices(self.dim, self.order), self.coefficients):
            if c != 0:
                yield alpha, c

    def is_evaluation(self) -> bool:
        return self.order == 0


def directional_derivative(p: MPoly, n: Direction) -> MPoly:
    """Apply ``sum n_alpha d^j/dx^alpha`` to ``p`` (no multinomial normalisation)."""
    if n.dim != p.dim:
        raise ValueError("direction and polynomial dimensions differ")
    if n.order == 0:
        return p * n.coefficients[0] if n.coefficients[0] != 1 else p
    out = MPoly(p.dim)
    for alpha, c in n.items():
        out = out + p.partial(alpha) * c
    return out


def expand_factored(factors: Sequence[tuple[MPoly, int]]) -> MPoly:
    """Expand ``prod R_a^{d_a}``; the degree is checked against ``sum deg(R_a) d_a``."""
    if not factors:
        raise ValueError("need at least one factor")
    dim = factors[0][0].dim
    out = MPoly.constant(dim, 1)
    expected = 0
    for r, d in factors:
        if r.dim != dim:
            raise ValueError("factors have different dimensions")
        if d < 1:
            raise ValueError(f"factor multiplicity must be >= 1, got {d}")
        out = out * r ** d
        expected += r.degree * d
    if out.degree != expected:
        raise ArithmeticError(f"expanded degree {out.degree} differs from {expected}")
    return out


def _leading(p: MPoly) -> tuple[MultiIndex, Any]:
    # graded lex with x1 > x2 > ...: a monomial order, so exact division works term by term
    alpha = max(p.terms, key=lambda a: (sum(a), a))
    return alpha, p.terms[alpha]


def divide_exact(f: MPoly, q: MPoly, tol: float | None = None) -> MPoly:
    """Quotient ``f / q`` when ``q`` divides ``f``.

    The quotient coefficients are solved for one leading monomial at a time
    (a triangular system in graded order).  For float coefficients, terms
    below ``tol`` times the largest coefficient of ``f`` count as zero.

    Raises
    ------
    InexactDivision
        if a nonzero remainder is met.
    """
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if f.dim != q.dim:
        raise ValueError("dimension mismatch")
    exact = f.is_exact() and q.is_exact()
    if tol is None:
        tol = 0.0 if exact else 1e-9
    scale = max((magnitude(c) for c in f.terms.values()), default=0.0)
    cut = tol * max(scale, 1.0) if not exact else 0.0
    lead_q, lead_c = _leading(q)
    quotient: dict[MultiIndex, Any] = {}
    rest = f.chop(cut) if cut else f
    while not rest.is_zero():
        alpha, c = _leading(rest)
        shift = tuple(a - b for a, b in zip(alpha, lead_q))
        if any(s < 0 for s in shift):
            raise InexactDivision(f"leading term {format_poly(MPoly(f.dim, {alpha: c}))} not divisible by "
                                  f"{format_poly(MPoly(f.dim, {lead_q: lead_c}))}")
        t = c / lead_c
        quotient[shift] = quotient.get(shift, 0) + t
        rest = rest - MPoly.monomial(shift, t) * q
        if cut:
            rest = rest.chop(cut)
    return MPoly(f.dim, quotient)


def divides(q: MPoly, f: MPoly, tol: float | None = None) -> bool:
    try:
        divide_exact(f, q, tol)
    except InexactDivision:
        return False
    return True


# text format

_VAR_ALIASES = {"x": 0, "y": 1, "z": 2, "w": 3}
_FACTOR_VAR = re.compile(r"^([a-z])(\d*)(?:(?:\^|\*\*)(\d+))?$")
_GROUP = re.compile(r"^\((.*)\)(?:(?:\^|\*\*)(\d+))?$")


def format_poly(p: MPoly) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for alpha, c in p.terms.items():
        mono = "*".join(
            f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(alpha) if a
        )
        negative = False
        if isinstance(c, (complex, GaussianRational)):
            coeff = f"({format_scalar(c)})"
        else:
            negative = c < 0
            coeff = format_scalar(-c if negative else c)
        if mono:
            body = mono if coeff in ("1", "1.0") else f"{coeff}*{mono}"
        else:
            body = coeff
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)


def _split_top(text: str, seps: str) -> list[tuple[str, str]]:
    """Split at top-level separator characters, keeping each separator."""
    parts: list[tuple[str, str]] = []
    depth, start, sign = 0, 0, "+"
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in seps and i > 0:
            prev = text[i - 1]
            if ch in "+-" and (prev in "eE" and i > 1 and (text[i - 2].isdigit() or text[i - 2] == ".")):
                continue  # exponent of a float literal
            if ch in "+-" and prev in "*^(":
                continue
            if ch == "*" and (prev == "*" or text[i + 1:i + 2] == "*"):
                continue
            parts.append((sign, text[start:i]))
            sign, start = ch, i + 1
    parts.append((sign, text[start:]))
    return parts


def parse_poly(text: str, dim: int, mode: str = RATIONAL) -> MPoly:
    """Parse ``"4 - 2*x1 - 2*x2 + x1*x2"``-style text.

    Variables are ``x1 .. xD``; for ``D <= 4`` the aliases ``x, y, z, w`` are
    accepted too.  Parenthesised sub-polynomials such as ``(2 - x)^2`` may
    appear as factors.
    """
    compact = text.replace(" ", "")
    if not compact:
        raise ValueError("empty polynomial text")
    if compact[0] in "+-":
        compact = "0" + compact
    out = MPoly(dim)
    for sign, term in _split_top(compact, "+-"):
        if term == "":
            if sign == "+" and out.is_zero():
                continue
            raise ValueError(f"malformed polynomial {text!r}")
        coeff: Any = parse_scalar(1, mode)
        exps = [0] * dim
        extra = MPoly.constant(dim, 1)
        for _, factor in _split_top(term, "*"):
            factor = factor.lstrip("*")
            m = _FACTOR_VAR.match(factor) if factor not in ("i", "j") else None
            group = _GROUP.match(factor)
            if m:
                name, idx, power = m.groups()
                if name == "x" and idx:
                    axis = int(idx) - 1
                elif not idx and name in _VAR_ALIASES:
                    axis = _VAR_ALIASES[name]
                else:
                    raise ValueError(f"unknown variable {factor!r}")
                if not 0 <= axis < dim:
                    raise ValueError(f"variable {factor!r} outside dimension {dim}")
                exps[axis] += int(power) if power else 1
            elif group:
                inner, power = group.groups()
                try:
                    value = parse_scalar(f"({inner})", mode)
                except ValueError:
                    extra = extra * parse_poly(inner, dim, mode) ** (int(power) if power else 1)
                else:
                    coeff = coeff * value ** (int(power) if power else 1)
            else:
                coeff = coeff * parse_scalar(factor, mode)
        if sign == "-":
            coeff = -coeff
        out = out + MPoly(dim, {tuple(exps): coeff}) * extra
    return out
