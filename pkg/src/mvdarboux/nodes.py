"""Points on algebraic hypersurfaces and randomized search for poised node sets."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Sequence

import numpy as np

from .darboux import (
    DEFAULT_POISED_TOL,
    DarbouxSpec,
    NodeEntry,
    NodeSet,
    NotPoised,
    build_sample_matrices,
    is_forbidden_direction,
    poisedness,
)
from .graded_basis import window_size
from .mvopr import MVOPRFamily
from .poly import Direction, MPoly, directional_derivative, format_poly
from .scalars import format_scalar, is_exact, magnitude

HYPERPLANE = "hyperplane"
LINE = "line"
USER = "user"
STRATEGIES = (HYPERPLANE, LINE, USER)

ROOT_TOL = 1e-12


class BudgetExhausted(RuntimeError):
    """No poised configuration found within the attempt budget."""

    def __init__(self, message: str, best: NodeSet | None = None, certificate: Any = None,
                 history: list | None = None):
        super().__init__(message)
        self.best = best
        self.certificate = certificate
        self.history = history or []


class RootFindingError(RuntimeError):
    """Line restriction produced no acceptable roots after the retry limit."""


def small_rational(rng: random.Random, max_den: int = 7, span: int = 3) -> Fraction:
    """Random rational in ``[-span, span]`` with denominator at most ``max_den``."""
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(-span * den, span * den), den)


def restrict_to_line(r: MPoly, base: Sequence[Any], direction: Sequence[Any]) -> list:
    """Coefficients ``g_0, g_1, ...`` of ``g(t) = R(base + t*direction)``."""
    line = [MPoly(1, {(0,): b, (1,): v}) for b, v in zip(base, direction)]
    g = MPoly(1)
    for alpha, c in r.terms.items():
        term = MPoly.constant(1, c)
        for lin, a in zip(line, alpha):
            if a:
                term = term * lin ** a
        g = g + term
    return [g.coefficient((i,)) for i in range(max(g.degree, 0) + 1)]


def _horner(coeffs: Sequence[Any], t: complex) -> complex:
    v = 0j
    for c in reversed(coeffs):
        v = v * t + complex(c)
    return v


def _newton(coeffs: Sequence[Any], t: complex, steps: int = 8) -> complex:
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    for _ in range(steps):
        d = _horner(deriv, t)
        if d == 0:
            break
        step = _horner(coeffs, t) / d
        t -= step
        if abs(step) < 1e-16 * max(1.0, abs(t)):
            break
    return t


def _clean(z: complex, tol: float = 1e-13) -> Any:
    return z.real if abs(z.imag) <= tol * max(1.0, abs(z)) else z


@dataclass
class HypersurfaceSampler:
    """Draws points on ``Z(R)``.

    ``hyperplane`` solves a degree-one ``R`` for one coordinate (exact);
    ``line`` intersects ``Z(R)`` with random rational lines.  With an exact
    ``anchor`` on a quadric the line runs through the anchor and the second
    intersection is exact; otherwise roots come from the companion matrix
    with Newton refinement and are float.  ``user`` draws from ``points``.
    """

    factor: MPoly
    strategy: str | None = None
    points: list | None = None
    anchor: tuple | None = None
    max_denominator: int = 7
    span: int = 3
    max_retries: int = 200
    tol: float = ROOT_TOL

    def __post_init__(self):
        if self.factor.degree < 1:
            raise ValueError("sampler needs a factor of degree >= 1")
        if self.strategy is None:
            if self.points is not None:
                self.strategy = USER
            elif self.factor.degree == 1:
                self.strategy = HYPERPLANE
            else:
                self.strategy = LINE
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == USER:
            if not self.points:
                raise ValueError("user strategy needs points")
            self.points = [tuple(p) for p in self.points]
            for p in self.points:
                if not self.on_variety(p):
                    raise ValueError(f"supplied point {p} is not on Z({format_poly(self.factor)})")
        if self.anchor is not None:
            self.anchor = tuple(self.anchor)
            if not (all(is_exact(v) for v in self.anchor) and self.factor(self.anchor) == 0):
                raise ValueError("anchor must be an exact point on the hypersurface")
            if self.factor.degree != 2:
                raise ValueError("anchored sampling needs a quadric")

    @property
    def dim(self) -> int:
        return self.factor.dim

    @property
    def exact(self) -> bool:
        if self.strategy == USER:
            return all(is_exact(v) for p in self.points for v in p)
        return self.factor.is_exact() and (self.strategy == HYPERPLANE or self.anchor is not None)

    def on_variety(self, p: Sequence[Any]) -> bool:
        value = self.factor(p)
        if all(is_exact(v) for v in p) and self.factor.is_exact():
            return value == 0
        scale = max(1.0, max(magnitude(c) for c in self.factor.terms.values()))
        return magnitude(value) <= 1e3 * self.tol * scale * max(1.0, max(magnitude(v) for v in p)) ** self.factor.degree

    def _hyperplane_point(self, rng: random.Random) -> tuple:
        lin = self.factor
        axes = [a for a in range(self.dim) if lin.coefficient(tuple(int(i == a) for i in range(self.dim))) != 0]
        pivot = axes[0]
        point: list[Any] = [small_rational(rng, self.max_denominator, self.span) for _ in range(self.dim)]
        point[pivot] = 0
        rest = lin(point)
        c = lin.coefficient(tuple(int(i == pivot) for i in range(self.dim)))
        point[pivot] = -rest / c
        if not is_exact(point[pivot]):
            point = [float(v) if is_exact(v) else v for v in point]
        return tuple(point)

    def _random_direction(self, rng: random.Random) -> list:
        while True:
            v = [small_rational(rng, self.max_denominator, self.span) for _ in range(self.dim)]
            if any(v):
                return v

    def _anchored_point(self, rng: random.Random) -> tuple | None:
        v = self._random_direction(rng)
        g = restrict_to_line(self.factor, self.anchor, v)
        if len(g) < 3 or g[2] == 0:
            return None
        t = -g[1] / g[2]
        if t == 0:
            return None
        return tuple(a + t * d for a, d in zip(self.anchor, v))

    def _line_points(self, rng: random.Random) -> list[tuple]:
        base = [small_rational(rng, self.max_denominator, self.span) for _ in range(self.dim)]
        v = self._random_direction(rng)
        g = restrict_to_line(self.factor, base, v)
        if len(g) < 2 or g[-1] == 0:
            return []
        roots = np.roots([complex(c) for c in reversed(g)])
        out = []
        for t in roots:
            t = _clean(_newton(g, complex(t)))
            p = tuple(_clean(complex(b) + t * complex(d)) for b, d in zip(base, v))
            if self.on_variety(p):
                out.append(p)
        return out

    def sample(self, count: int, rng: random.Random) -> list[tuple]:
        """``count`` distinct points on ``Z(R)``."""
        if count < 0:
            raise ValueError("count must be >= 0")
        if self.strategy == USER:
            if count > len(self.points):
                raise ValueError(f"asked for {count} points, only {len(self.points)} supplied")
            return rng.sample(self.points, count)
        out: list[tuple] = []
        seen: set = set()
        retries = 0
        while len(out) < count:
            if retries > self.max_retries:
                raise RootFindingError(f"could not find {count} points on Z({format_poly(self.factor)})")
            retries += 1
            if self.strategy == HYPERPLANE:
                fresh = [self._hyperplane_point(rng)]
            elif self.anchor is not None:
                p = self._anchored_point(rng)
                fresh = [p] if p is not None else []
            else:
                fresh = self._line_points(rng)
            for p in fresh:
                key = p if all(is_exact(v) for v in p) else tuple(complex(v) for v in np.round(
                    np.array(p, dtype=complex), 9))
                if key not in seen and len(out) < count:
                    seen.add(key)
                    out.append(p)
        return out


def sample_points(sampler: HypersurfaceSampler, count: int, seed: int) -> list[tuple]:
    if count < 1:
        raise ValueError("count must be >= 1")
    return sampler.sample(count, random.Random(seed))


def default_directions(r: MPoly, order: int) -> list[Direction]:
    """Coordinate directions ``d^j/dx_a^j`` that are not forbidden on ``Z(R)``."""
    out = []
    for a in range(r.dim):
        n = Direction.partial(r.dim, a, order)
        if not is_forbidden_direction(r, n):
            out.append(n)
    return out


# slot = (factor, order, direction); an assignment gives a count per slot


@dataclass(frozen=True)
class Slot:
    factor: int
    direction: Direction
    upper: int

    @property
    def order(self) -> int:
        return self.direction.order


def _slots(spec: DarbouxSpec, k: int, plain_only: bool,
           directions: dict[tuple[int, int], list[Direction]] | None) -> list[list[Slot]]:
    """Per factor, the slots nodes may go to, with their count upper bounds."""
    D, m = spec.dim, spec.m
    out = []
    for a, (r, d) in enumerate(spec.factors):
        na = r.degree
        slots = [Slot(a, Direction.evaluation(D), window_size(D, k + m - na, na))]
        if not plain_only:
            for j in range(1, d):
                dirs = (directions or {}).get((a, j)) or default_directions(r, j)
                for n in dirs:
                    di = directional_derivative(r ** d, n).degree
                    upper = window_size(D, k + m - di, di) if 0 <= di <= k + m else 0
                    slots.append(Slot(a, n, upper))
        out.append(slots)
    return out


def _compositions(total: int, uppers: Sequence[int]):
    """All count vectors summing to ``total`` with entry ``i`` at most ``uppers[i]``."""
    if not uppers:
        if total == 0:
            yield ()
        return
    for c in range(min(total, uppers[0]), -1, -1):
        for rest in _compositions(total - c, uppers[1:]):
            yield (c,) + rest


def candidate_assignments(spec: DarbouxSpec, k: int, plain_only: bool = False,
                          directions: dict | None = None, limit: int = 10_000,
                          enforce_bounds: bool = True) -> list[list[tuple[Slot, int]]]:
    """Node distributions over (factor, order, direction) meeting the necessary count bounds.

    With ``enforce_bounds=False`` every distribution is listed; this is only
    useful for producing certificates of non-poisedness.
    """
    D, m = spec.dim, spec.m
    total = window_size(D, k, m)
    factor_slots = _slots(spec, k, plain_only, directions)
    if not enforce_bounds:
        factor_slots = [[Slot(s.factor, s.direction, total) for s in slots] for slots in factor_slots]
    out: list[list[tuple[Slot, int]]] = []
    for a_counts in _compositions(total, [sum(s.upper for s in slots) for slots in factor_slots]):
        ok = True
        for (r, d), c in zip(spec.factors, a_counts if enforce_bounds else ()):
            na = r.degree
            lo = k + na if d == 1 else ceil(k / d) + na
            if c < lo or (d == 1 and c > window_size(D, k + m - na, na)):
                ok = False
        if not ok:
            continue
        per_factor = [list(_compositions(c, [s.upper for s in slots]))
                      for c, slots in zip(a_counts, factor_slots)]
        for combo in itertools.product(*per_factor):
            assignment = [(s, c) for slots, counts in zip(factor_slots, combo)
                          for s, c in zip(slots, counts) if c]
            out.append(assignment)
            if len(out) >= limit:
                return out
    return out


@dataclass
class SearchResult:
    nodes: NodeSet
    certificate: Any
    attempts: int
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        cert = format_scalar(self.certificate) if is_exact(self.certificate) else float(self.certificate)
        return {"attempts": self.attempts, "certificate": cert, **self.nodes.to_dict()}


def draw_nodes(spec: DarbouxSpec, assignment: list[tuple[Slot, int]], samplers: Sequence[HypersurfaceSampler],
               rng: random.Random) -> NodeSet:
    entries = []
    for slot, count in assignment:
        for p in samplers[slot.factor].sample(count, rng):
            entries.append(NodeEntry(p, slot.factor, slot.direction))
    return NodeSet(entries)


def search_poised(fam: MVOPRFamily, spec: DarbouxSpec, k: int, budget: int, seed: int,
                  samplers: Sequence[HypersurfaceSampler] | None = None, plain_only: bool = False,
                  directions: dict | None = None, tol: float = DEFAULT_POISED_TOL,
                  enforce_bounds: bool = True) -> SearchResult:
    """Draw node sets honouring the count bounds until one is poised.

    Attempt ``i`` uses candidate distribution ``i mod (number of candidates)``
    with freshly sampled points, so every admissible split gets tried.

    Raises
    ------
    BudgetExhausted
        with the configuration of largest certificate seen.
    """
    rng = random.Random(seed)
    samplers = samplers or [HypersurfaceSampler(r) for r, _ in spec.factors]
    history: list = []
    best: NodeSet | None = None
    best_cert: Any = None
    repeated = [a for a, (_, d) in enumerate(spec.factors) if d > 1]
    why = ""
    if plain_only and repeated:
        why = ("; every factor with power > 1 is sampled by plain evaluations only;"
               " such node sets are never poised")
    if budget < 1:
        raise BudgetExhausted("budget exhausted before any attempt" + why, history=history)
    assignments = candidate_assignments(spec, k, plain_only, directions, enforce_bounds=enforce_bounds)
    if not assignments:
        raise BudgetExhausted("no node distribution satisfies the count bounds" + why, history=history)
    for attempt in range(budget):
        assignment = assignments[attempt % len(assignments)]
        nodes = draw_nodes(spec, assignment, samplers, rng)
        sm = build_sample_matrices(fam, spec, nodes, k)
        pz = poisedness(sm.sigma, tol)
        split = [(s.factor, s.order, c) for s, c in assignment]
        history.append({"split": split, "certificate": pz.certificate, "poised": pz.poised})
        if best_cert is None or magnitude(pz.certificate) > magnitude(best_cert):
            best, best_cert = nodes, pz.certificate
        if pz.poised:
            return SearchResult(nodes, pz.certificate, attempt + 1, history)
    raise BudgetExhausted(f"no poised node set in {budget} attempts" + why, best, best_cert, history)


__all__ = [
    "BudgetExhausted",
    "HypersurfaceSampler",
    "NotPoised",
    "RootFindingError",
    "SearchResult",
    "candidate_assignments",
    "default_directions",
    "draw_nodes",
    "restrict_to_line",
    "sample_points",
    "search_poised",
    "small_rational",
]
