"""Moment functionals with closed-form moments.

A measure enters the package only through ``alpha -> integral of x^alpha``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from fractions import Fraction
from functools import lru_cache
from math import prod
from typing import Any, Sequence

from .poly import MPoly
from .scalars import FLOAT, RATIONAL, convert, is_exact


class MomentFunctional(ABC):
    """Linear functional ``x^alpha -> moment(alpha)`` in ``dim`` variables."""

    dim: int

    @abstractmethod
    def moment(self, alpha: Sequence[int]) -> Any:
        ...

    @property
    def mode(self) -> str:
        """Scalar mode of the moments (rational when exact)."""
        return RATIONAL

    def integrate(self, p: MPoly) -> Any:
        total: Any = 0
        for alpha, c in p.terms.items():
            total = total + c * self.moment(alpha)
        return total


class BoxMeasure(MomentFunctional):
    """Lebesgue measure on a box times a polynomial weight.

    Parameters
    ----------
    bounds : sequence of (a, b)
        One interval per axis.
    weight : MPoly, optional
        Polynomial density; defaults to 1.
    """

    def __init__(self, bounds: Sequence[tuple[Any, Any]], weight: MPoly | None = None):
        self.dim = len(bounds)
        if self.dim < 1:
            raise ValueError("box needs at least one interval")
        self.bounds = tuple((a, b) for a, b in bounds)
        self.weight = weight if weight is not None else MPoly.constant(self.dim, 1)
        if self.weight.dim != self.dim:
            raise ValueError("weight dimension differs from box dimension")
        exact = all(is_exact(v) for ab in self.bounds for v in ab) and self.weight.is_exact()
        self._mode = RATIONAL if exact else FLOAT
        if exact:
            self.bounds = tuple((Fraction(a), Fraction(b)) for a, b in self.bounds)
        self._cached = lru_cache(maxsize=None)(self._moment)

    @property
    def mode(self) -> str:
        return self._mode

    def __repr__(self) -> str:
        return f"BoxMeasure({self.bounds!r}, weight={self.weight})"

    def _axis_integral(self, axis: int, e: int):
        a, b = self.bounds[axis]
        return (b ** (e + 1) - a ** (e + 1)) / (e + 1)

    def _moment(self, alpha: tuple[int, ...]):
        total: Any = 0
        for beta, c in self.weight.terms.items():
            total = total + c * prod(
                (self._axis_integral(i, a + b) for i, (a, b) in enumerate(zip(alpha, beta))), start=1
            )
        return total

    def moment(self, alpha: Sequence[int]) -> Any:
        return self._cached(tuple(alpha))


class DiscreteMeasure(MomentFunctional):
    """Finite sum of weighted point masses."""

    def __init__(self, points: Sequence[Sequence[Any]], weights: Sequence[Any]):
        if len(points) != len(weights) or not points:
            raise ValueError("need matching, non-empty points and weights")
        self.dim = len(points[0])
        if any(len(p) != self.dim for p in points):
            raise ValueError("points have inconsistent dimensions")
        self.points = [tuple(p) for p in points]
        self.weights = list(weights)
        values = [v for p in self.points for v in p] + self.weights
        self._mode = RATIONAL if all(is_exact(v) for v in values) else FLOAT
        self._cached = lru_cache(maxsize=None)(self._moment)

    @property
    def mode(self) -> str:
        return self._mode

    def __repr__(self) -> str:
        return f"DiscreteMeasure({len(self.points)} points)"

    def _moment(self, alpha: tuple[int, ...]):
        total: Any = 0
        for p, w in zip(self.points, self.weights):
            total = total + w * prod((x ** a for x, a in zip(p, alpha)), start=1)
        return total

    def moment(self, alpha: Sequence[int]) -> Any:
        return self._cached(tuple(alpha))


class PerturbedMeasure(MomentFunctional):
    """``Q(x) dmu(x)`` for a polynomial ``Q``: moments are shifted combinations of the base."""

    def __init__(self, base: MomentFunctional, perturbation: MPoly):
        if perturbation.dim != base.dim:
            raise ValueError("perturbation and base measure dimensions differ")
        self.base = base
        self.perturbation = perturbation
        self.dim = base.dim

    @property
    def mode(self) -> str:
        return RATIONAL if self.base.mode == RATIONAL and self.perturbation.is_exact() else FLOAT

    def __repr__(self) -> str:
        return f"PerturbedMeasure({self.base!r}, Q={self.perturbation})"

    def moment(self, alpha: Sequence[int]) -> Any:
        total: Any = 0
        for beta, c in self.perturbation.terms.items():
            total = total + c * self.base.moment(tuple(a + b for a, b in zip(alpha, beta)))
        return total


def perturb(base: MomentFunctional, q: MPoly) -> MomentFunctional:
    """Measure ``Q dmu``; the identity perturbation returns ``base`` itself."""
    if q == MPoly.constant(base.dim, 1):
        return base
    return PerturbedMeasure(base, q)


def moment(m: MomentFunctional, alpha: Sequence[int], mode: str | None = None) -> Any:
    value = m.moment(alpha)
    return convert(value, mode) if mode else value
