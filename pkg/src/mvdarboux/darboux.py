"""Christoffel transforms of orthogonal polynomial families.

Multiplying a measure by a polynomial ``Q`` changes the family ``P`` into
``TP``.  Two independent routes are provided:

* the *oracle*: block Cholesky of the perturbed moment matrix, which also
  yields the resolvent ``omega = TS Q(Lambda) S^{-1}`` and its adjoint
  ``M = S TS^{-1}``;
* the *node formula*: ``TP`` from the old family alone, using values (and
  directional derivatives, for repeated factors) of ``P`` at nodes on the
  zero set of ``Q``.

Both produce polynomial coefficient vectors, so agreement is checked exactly
on rational data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Iterable, Sequence

import numpy as np

from .block_linalg import (
    DEFAULT_SINGULAR_TOL,
    BlockMatrix,
    block_diagonal,
    det,
    inverse,
    is_exact_array,
    max_abs,
    rank,
    singular_values,
    slice_S,
    solve,
    zeros,
)
from .graded_basis import GradedBasis, cumulative_dim, window_size
from .measures import perturb
from .mvopr import (
    MVOPRFamily,
    apply_poly_to_shift,
    build_family,
    build_jacobi,
    build_shift,
    monomial_derivative_vector,
    monomial_vector,
)
from .poly import (
    Direction,
    InexactDivision,
    MPoly,
    directional_derivative,
    divide_exact,
    divides,
    expand_factored,
    format_poly,
    parse_poly,
)
from .scalars import FLOAT, RATIONAL, convert, format_scalar, is_exact, magnitude, parse_scalar

DEFAULT_POISED_TOL = 1e-8
DEFAULT_VARIETY_TOL = 1e-9


class NotPoised(ArithmeticError):
    """Sample matrix is singular, so the node formula does not apply."""

    def __init__(self, message: str, certificate: Any = None):
        super().__init__(message)
        self.certificate = certificate


class OffVarietyError(ValueError):
    """A node does not lie on the zero set of its factor."""


class TruncationTooSmall(ValueError):
    """Requested transform needs a larger truncation degree."""

    def __init__(self, needed: int, have: int):
        self.needed = needed
        super().__init__(f"truncation degree {have} too small; need L >= {needed}")


# specification of the perturbation and of the nodes


@dataclass(frozen=True)
class DarbouxSpec:
    """Perturbation ``Q = prod R_a^{d_a}`` kept in factored form."""

    dim: int
    factors: tuple[tuple[MPoly, int], ...]
    Q: MPoly = field(init=False, compare=False)

    def __post_init__(self):
        for r, d in self.factors:
            if r.dim != self.dim:
                raise ValueError("factor dimension differs from the declared dimension")
            if r.degree < 1:
                raise ValueError("factors must have degree >= 1")
            if d < 1:
                raise ValueError("factor powers must be >= 1")
        q = expand_factored(self.factors) if self.factors else MPoly.constant(self.dim, 1)
        object.__setattr__(self, "Q", q)

    @classmethod
    def from_factors(cls, factors: Iterable[tuple[MPoly, int]]) -> DarbouxSpec:
        factors = tuple((r, int(d)) for r, d in factors)
        if not factors:
            raise ValueError("use DarbouxSpec.identity for Q = 1")
        return cls(factors[0][0].dim, factors)

    @classmethod
    def identity(cls, dim: int) -> DarbouxSpec:
        return cls(dim, ())

    @property
    def m(self) -> int:
        return max(self.Q.degree, 0)

    def factor_degree(self, a: int) -> int:
        return self.factors[a][0].degree

    def power(self, a: int) -> int:
        return self.factors[a][1]

    @property
    def mode(self) -> str:
        return RATIONAL if self.Q.is_exact() and all(r.is_exact() for r, _ in self.factors) else FLOAT

    def to_dict(self) -> dict:
        return {"factors": [{"poly": format_poly(r), "power": d} for r, d in self.factors]}

    @classmethod
    def from_dict(cls, doc: dict, dim: int, mode: str = RATIONAL) -> DarbouxSpec:
        factors = [(parse_poly(f["poly"], dim, mode), int(f.get("power", 1))) for f in doc.get("factors", [])]
        return cls(dim, tuple(factors))


@dataclass(frozen=True)
class NodeEntry:
    """A point on ``Z(R_factor)`` tagged with a derivative order and direction."""

    point: tuple
    factor: int
    direction: Direction

    @property
    def order(self) -> int:
        return self.direction.order

    @classmethod
    def plain(cls, point: Sequence[Any], factor: int) -> NodeEntry:
        return cls(tuple(point), factor, Direction.evaluation(len(point)))

    def to_dict(self) -> dict:
        doc = {"point": [format_scalar(v) for v in self.point], "factor": self.factor, "order": self.order}
        if self.order > 0 or self.direction.coefficients[0] != 1:
            doc["direction"] = [format_scalar(convert(c, RATIONAL) if is_exact(c) else c)
                                for c in self.direction.coefficients]
        return doc

    @classmethod
    def from_dict(cls, doc: dict, dim: int, mode: str = RATIONAL) -> NodeEntry:
        point = tuple(parse_scalar(v, mode) for v in doc["point"])
        if len(point) != dim:
            raise ValueError(f"node {doc['point']} has dimension {len(point)}, expected {dim}")
        order = int(doc.get("order", 0))
        if "direction" in doc:
            coeffs = tuple(parse_scalar(c, mode) for c in doc["direction"])
        elif order == 0:
            coeffs = (1,)
        else:
            raise ValueError("nodes of order >= 1 need an explicit direction")
        return cls(point, int(doc["factor"]), Direction(dim, order, coeffs))


@dataclass
class NodeSet:
    entries: list[NodeEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def mode(self) -> str:
        exact = all(is_exact(v) for e in self.entries for v in e.point) and all(
            is_exact(c) for e in self.entries for c in e.direction.coefficients)
        return RATIONAL if exact else FLOAT

    def counts(self) -> dict[int, int]:
        """Nodes per factor."""
        out: dict[int, int] = {}
        for e in self.entries:
            out[e.factor] = out.get(e.factor, 0) + 1
        return out

    def order_counts(self) -> dict[tuple[int, int], int]:
        """Nodes per ``(factor, order)``."""
        out: dict[tuple[int, int], int] = {}
        for e in self.entries:
            out[e.factor, e.order] = out.get((e.factor, e.order), 0) + 1
        return out

    def direction_groups(self) -> dict[tuple[int, int], dict[tuple, int]]:
        """Per ``(factor, order)``: node count for each distinct direction."""
        out: dict[tuple[int, int], dict[tuple, int]] = {}
        for e in self.entries:
            grp = out.setdefault((e.factor, e.order), {})
            grp[e.direction.coefficients] = grp.get(e.direction.coefficients, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {"nodes": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, doc: dict, dim: int, mode: str = RATIONAL) -> NodeSet:
        return cls([NodeEntry.from_dict(d, dim, mode) for d in doc["nodes"]])


def required_degree(k: int, m: int) -> int:
    return k + m


def _check_truncation(fam: MVOPRFamily, k: int, m: int) -> None:
    if k < 0:
        raise ValueError("transform degree must be >= 0")
    if k + m > fam.degree:
        raise TruncationTooSmall(k + m, fam.degree)


def validate_nodes(spec: DarbouxSpec, nodes: NodeSet, tol: float = DEFAULT_VARIETY_TOL) -> None:
    """Raise :class:`OffVarietyError` or ``ValueError`` for malformed node sets."""
    for i, e in enumerate(nodes):
        if not 0 <= e.factor < len(spec.factors):
            raise ValueError(f"node {i}: factor index {e.factor} outside 0..{len(spec.factors) - 1}")
        if len(e.point) != spec.dim:
            raise ValueError(f"node {i}: point has wrong dimension")
        r, d = spec.factors[e.factor]
        if e.order >= d:
            raise ValueError(f"node {i}: derivative order {e.order} needs factor power > {e.order}, have {d}")
        value = r(e.point)
        off = value != 0 if all(is_exact(v) for v in e.point) and r.is_exact() else magnitude(value) > tol
        if off:
            raise OffVarietyError(f"node {i} at {[format_scalar(v) for v in e.point]} is not on "
                                  f"Z({format_poly(r)}): value {format_scalar(value)}")
    for (a, j), grp in nodes.direction_groups().items():
        if j == 0 or len(grp) < 2:
            continue
        dirs = list(grp)
        mode = RATIONAL if all(is_exact(c) for d in dirs for c in d) else FLOAT
        mat = np.array([[convert(c, mode) for c in d] for d in dirs], dtype=object if mode == RATIONAL else complex)
        if rank(mat) < len(dirs):
            raise ValueError(f"directions of order {j} on factor {a} are linearly dependent")


# resolvent and the oracle family


@dataclass
class Resolvent:
    """``omega = TS Q(Lambda) S^{-1}`` and ``M = S TS^{-1}`` with the oracle family."""

    omega: BlockMatrix
    M: BlockMatrix
    Q_Lambda: BlockMatrix
    fam: MVOPRFamily
    tfam: MVOPRFamily
    Q: MPoly

    @property
    def m(self) -> int:
        return max(self.Q.degree, 0)


def oracle_family(fam: MVOPRFamily, q: MPoly, tol: float = DEFAULT_SINGULAR_TOL) -> MVOPRFamily:
    """Family of ``Q dmu`` by direct block Cholesky of its moment matrix."""
    if fam.measure is None:
        raise ValueError("family carries no measure; the oracle needs moments")
    return build_family(perturb(fam.measure, q), fam.degree, fam.mode, tol)


def resolvent_via_two_choleskys(fam: MVOPRFamily, q: MPoly, tfam: MVOPRFamily | None = None,
                                tol: float = DEFAULT_SINGULAR_TOL) -> Resolvent:
    tfam = tfam if tfam is not None else oracle_family(fam, q, tol)
    shifts = build_shift(fam.basis, fam.mode)
    QL = apply_poly_to_shift(q, shifts)
    omega = tfam.S @ QL @ fam.chol.S_inv
    M = fam.S @ tfam.chol.S_inv
    return Resolvent(omega, M, QL, fam, tfam, q)


def _row_difference(A: BlockMatrix, B: np.ndarray, upto: int) -> Any:
    if upto < 0:
        return 0
    n = A.basis.block_offsets[upto + 1]
    return max_abs(A.data[:n] - B[:n])


def _relative(x: Any, ref: Any) -> Any:
    if is_exact(x) and is_exact(ref):
        return x
    return magnitude(x) / max(magnitude(ref), 1.0)


def resolvent_band_identities(res: Resolvent) -> dict:
    """Check the structural identities of the resolvent on its valid rows.

    Each entry is a maximum violation (exactly zero on rational data):
    band outside diagonals ``0..m``, top band against ``Q(Lambda)``, diagonal
    against ``TH H^{-1}``, ``omega = TH M^T H^{-1}``, ``Q(J) = M omega``,
    ``Q(TJ) = omega M`` and ``det Q(J)^{[k]} = prod det TH / det H``.
    """
    fam, tfam, omega, M, q = res.fam, res.tfam, res.omega, res.M, res.Q
    basis = fam.basis
    L = fam.degree
    m = res.m
    valid = omega.valid_degree
    out: dict[str, Any] = {"valid_degree": valid, "m": m}
    out["band"] = omega.block_band_violation(0, m, valid)

    top: Any = 0
    diag: Any = 0
    for k in range(valid + 1):
        if k + m <= L:
            v = max_abs(omega.block(k, k + m) - res.Q_Lambda.block(k, k + m))
            top = max(top, v)
        v = max_abs(omega.block(k, k) - tfam.H[k].dot(inverse(fam.H[k])))
        diag = max(diag, v)
    out["top_band"] = top
    out["diagonal"] = diag

    H_inv = block_diagonal([inverse(h) for h in fam.H], basis)
    adj = tfam.chol.H_matrix() @ M.T @ H_inv
    out["adjoint_form"] = _row_difference(omega, adj.data, valid)

    J = build_jacobi(fam)
    TJ = build_jacobi(tfam)
    QJ = apply_poly_to_shift(q, J)
    QTJ = apply_poly_to_shift(q, TJ)
    Mw = M @ omega
    wM = omega @ M
    out["lu"] = _row_difference(QJ, Mw.data, min(QJ.valid_degree, Mw.valid_degree))
    out["ul"] = _row_difference(QTJ, wM.data, min(QTJ.valid_degree, wM.valid_degree))

    det_checks = []
    worst: Any = 0
    prod_ratio: Any = convert(1, fam.mode)
    for k in range(1, QJ.valid_degree + 2):
        prod_ratio = prod_ratio * det(tfam.H[k - 1]) / det(fam.H[k - 1])
        lhs = det(QJ.truncation(k))
        dev = _relative(lhs - prod_ratio, prod_ratio)
        worst = max(worst, dev)
        det_checks.append({"k": k, "det": lhs, "product": prod_ratio})
    out["determinant"] = worst
    out["determinant_checks"] = det_checks
    out["determinant_max_k"] = QJ.valid_degree + 1
    out["max_violation"] = max(out[key] for key in
                               ("band", "top_band", "diagonal", "adjoint_form", "lu", "ul", "determinant"))
    return out


def kernel_check(res: Resolvent, spec: DarbouxSpec, nodes: NodeSet, tol: float = DEFAULT_VARIETY_TOL) -> Any:
    """Largest ``|sum_j omega_{[k],[k+j]} (d^j P_{[k+j]}/dn)(p)|`` over valid rows and nodes."""
    validate_nodes(spec, nodes, tol)
    fam = res.fam
    valid = res.omega.valid_degree
    if valid < 0:
        return 0
    n = fam.basis.block_offsets[valid + 1]
    worst: Any = 0
    for e in nodes:
        stack = fam.derivative_stack(e.point, e.direction, 0, fam.degree)
        worst = max(worst, max_abs(res.omega.data[:n].dot(stack)))
    return worst


# sample matrices and the node formula


@dataclass
class SampleMatrices:
    """``sigma`` is square (degrees ``k..k+m-1``); ``sigma_top`` holds degree ``k+m``."""

    sigma: np.ndarray
    sigma_top: np.ndarray
    k: int
    m: int


def _derivative_polys(polys: Sequence[MPoly], n: Direction, cache: dict) -> list[MPoly]:
    key = (n.order, n.coefficients)
    if key not in cache:
        cache[key] = [directional_derivative(p, n) for p in polys]
    return cache[key]


def _matrix(columns: list[list[Any]], mode: str, rows: int) -> np.ndarray:
    out = zeros((rows, len(columns)), mode)
    if mode == FLOAT and any(isinstance(v, complex) for col in columns for v in col):
        out = out.astype(complex)
    for c, col in enumerate(columns):
        for r, v in enumerate(col):
            out[r, c] = convert(v, mode)
    return out


def build_sample_matrices(fam: MVOPRFamily, spec: DarbouxSpec, nodes: NodeSet, k: int,
                          tol: float = DEFAULT_VARIETY_TOL) -> SampleMatrices:
    """Column ``c`` holds ``(d^j P_[k..k+m] / dn)(p)`` for node entry ``c``.

    Derivatives are taken symbolically on the polynomials, independently of
    the monomial-derivative path used by :func:`vandermonde`.
    """
    m = spec.m
    _check_truncation(fam, k, m)
    r = window_size(spec.dim, k, m)
    if len(nodes) != r:
        raise ValueError(f"degree-{k} transform with deg Q = {m} needs {r} nodes, got {len(nodes)}")
    validate_nodes(spec, nodes, tol)
    polys = fam.polynomials(k, k + m)
    cache: dict = {}
    columns = [[p(e.point) for p in _derivative_polys(polys, e.direction, cache)] for e in nodes]
    full = _matrix(columns, fam.mode, len(polys))
    return SampleMatrices(full[:r], full[r:], k, m)


@dataclass
class Poisedness:
    poised: bool
    certificate: Any
    kind: str  # "det" or "sigma_min"

    def to_dict(self) -> dict:
        cert = format_scalar(self.certificate) if is_exact(self.certificate) else float(self.certificate)
        return {"poised": self.poised, "certificate_kind": self.kind, "certificate": cert}


def poisedness(sigma: np.ndarray, tol: float = DEFAULT_POISED_TOL) -> Poisedness:
    """Exact determinant test, or ``sigma_min >= tol * ||sigma||`` for floats."""
    if sigma.shape[0] != sigma.shape[1]:
        raise ValueError("sample matrix must be square")
    if sigma.shape[0] == 0:
        return Poisedness(True, 1, "det")
    if is_exact_array(sigma):
        d = det(sigma)
        return Poisedness(d != 0, d, "det")
    sv = singular_values(sigma)
    return Poisedness(bool(sv[-1] >= tol * sv[0]), float(sv[-1]), "sigma_min")


def _realify(p: MPoly, tol: float) -> MPoly:
    """Drop negligible imaginary parts left by complex nodes in float runs."""
    if not any(isinstance(c, complex) for c in p.terms.values()):
        return p
    scale = max((abs(c) for c in p.terms.values()), default=1.0)
    if all(abs(complex(c).imag) <= tol * max(scale, 1.0) for c in p.terms.values()):
        return p.map_coefficients(lambda c: complex(c).real)
    return p


def christoffel_transform(fam: MVOPRFamily, spec: DarbouxSpec, nodes: NodeSet, k: int,
                          poised_tol: float = DEFAULT_POISED_TOL,
                          division_tol: float | None = None) -> list[MPoly]:
    """``TP_[k]`` from the original family and a poised node set.

    ``TP_[k] = Q(Lambda)_{[k],[k+m]} (P_[k+m] - Sigma_top Sigma^{-1} P_[k..k+m-1]) / Q``,
    with the bracket built as polynomials and the division carried out
    exactly.

    Raises
    ------
    NotPoised
        if the sample matrix is singular.
    InexactDivision
        if ``Q`` does not divide the numerator.
    TruncationTooSmall
        if ``L < k + m``.
    """
    m = spec.m
    if m == 0:
        return fam.polynomial_block(k)
    _check_truncation(fam, k, m)
    sm = build_sample_matrices(fam, spec, nodes, k)
    pz = poisedness(sm.sigma, poised_tol)
    if not pz.poised:
        raise NotPoised(f"node set is not poised at degree {k} ({pz.kind} = {format_scalar(pz.certificate)})",
                        pz.certificate)
    # W = Sigma_top Sigma^{-1}, from Sigma^T W^T = Sigma_top^T
    W = solve(sm.sigma.T, sm.sigma_top.T).T
    low = fam.polynomials(k, k + m - 1)
    top = fam.polynomial_block(k + m)
    bracket = []
    for i, p in enumerate(top):
        acc = p
        for c, pc in enumerate(low):
            if W[i, c] != 0:
                acc = acc - pc * W[i, c]
        bracket.append(acc)
    QL = apply_poly_to_shift(spec.Q, build_shift(fam.basis, fam.mode))
    coupling = QL.block(k, k + m)
    tol = division_tol if fam.mode == FLOAT else None
    if fam.mode == FLOAT and tol is None:
        tol = 1e-9
    out = []
    for row in coupling:
        num = MPoly(spec.dim)
        for c, b in zip(row, bracket):
            if c != 0:
                num = num + b * c
        quotient = divide_exact(num, spec.Q, tol)
        out.append(_realify(quotient, tol) if tol else quotient)
    return out


def coefficient_deviation(a: Sequence[MPoly], b: Sequence[MPoly]) -> Any:
    """Largest coefficient difference between two lists of polynomials."""
    if len(a) != len(b):
        raise ValueError("polynomial lists have different lengths")
    worst: Any = 0
    for p, q in zip(a, b):
        diff = p - q
        for c in diff.terms.values():
            v = abs(c) if isinstance(c, (int, Fraction)) else magnitude(c)
            if v > worst:
                worst = v
    return worst


def verify_against_oracle(fam: MVOPRFamily, spec: DarbouxSpec, nodes: NodeSet, k: int,
                          tfam: MVOPRFamily | None = None, **kwargs) -> dict:
    """Node formula versus direct Cholesky of ``Q dmu``."""
    tfam = tfam if tfam is not None else oracle_family(fam, spec.Q)
    tp = christoffel_transform(fam, spec, nodes, k, **kwargs)
    oracle = tfam.polynomial_block(k)
    return {"k": k, "deviation": coefficient_deviation(tp, oracle), "transformed": tp, "oracle": oracle}


# Vandermonde matrices and the truncated ideal


def vandermonde(basis: GradedBasis, nodes: NodeSet, k: int, m: int, mode: str = RATIONAL) -> np.ndarray:
    """Columns ``(d^j chi / dn)(p)`` truncated to degrees ``< k+m`` (``N_{k+m-1}`` rows)."""
    if k + m > basis.max_degree + 1:
        raise TruncationTooSmall(k + m - 1, basis.max_degree)
    rows = cumulative_dim(basis.dim, k + m - 1)
    cols = []
    for e in nodes:
        if e.direction.is_evaluation():
            v = monomial_vector(basis, e.point, mode) * convert(e.direction.coefficients[0], mode)
        else:
            v = monomial_derivative_vector(basis, e.point, e.direction, mode)
        cols.append(list(v[:rows]))
    return _matrix(cols, mode, rows)


def sigma_factorization_check(fam: MVOPRFamily, spec: DarbouxSpec, nodes: NodeSet, k: int) -> Any:
    """Largest entry of ``Sigma - S_k^m V``."""
    m = spec.m
    sm = build_sample_matrices(fam, spec, nodes, k)
    V = vandermonde(fam.basis, nodes, k, m, fam.mode)
    return max_abs(sm.sigma - slice_S(fam.chol, k, m).dot(V))


def ideal_truncation_basis(spec: DarbouxSpec, k: int, mode: str = RATIONAL) -> np.ndarray:
    """Coefficient rows of ``x^beta Q`` for ``|beta| <= k-1`` over monomials of degree ``< k+m``.

    These are the rows of ``Q(Lambda)`` restricted to the leading ``N_{k-1}``
    rows and ``N_{k+m-1}`` columns; they span the truncated ideal.
    """
    if k < 1:
        raise ValueError("the truncated ideal needs k >= 1")
    m = spec.m
    basis = GradedBasis(spec.dim, k + m - 1)
    rows = []
    for beta in basis.multiindex_at[: cumulative_dim(spec.dim, k - 1)]:
        rows.append((MPoly.monomial(beta) * spec.Q).to_vector(basis))
    out = zeros((len(rows), len(basis)), mode)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = convert(v, mode)
    return out


def ideal_vandermonde_rank(spec: DarbouxSpec, nodes: NodeSet, k: int, mode: str = RATIONAL) -> dict:
    """Rank data tying the truncated ideal to the Vandermonde matrix.

    ``ideal @ V`` vanishes for nodes on ``Z(Q)``; the node set is poised
    exactly when ``V`` has full column rank, i.e. when the stacked matrix
    ``[ideal; V^T]`` has rank ``N_{k+m-1}``.
    """
    m = spec.m
    basis = GradedBasis(spec.dim, k + m - 1)
    V = vandermonde(basis, nodes, k, m, mode)
    out = {"rows": cumulative_dim(spec.dim, k + m - 1), "vandermonde_rank": rank(V)}
    if k >= 1:
        I = ideal_truncation_basis(spec, k, mode)
        out["ideal_rank"] = rank(I)
        out["annihilation"] = max_abs(I.dot(V))
        out["stacked_rank"] = rank(np.concatenate([I, V.T], axis=0))
    else:
        out["ideal_rank"] = 0
        out["annihilation"] = 0
        out["stacked_rank"] = out["vandermonde_rank"]
    return out


# counting bounds and forbidden directions


def is_forbidden_direction(r: MPoly, n: Direction) -> bool:
    """``n`` of order ``j`` is useless on ``Z(R)`` when ``R`` divides ``d^j(R^j)/dn``.

    Then every order-``j`` derivative along ``n`` of a polynomial in the
    ideal of ``R^{j+1}``-type products vanishes on ``Z(R)`` and the sample
    matrix loses rank.
    """
    if n.order == 0:
        return False
    d = directional_derivative(r ** n.order, n)
    if d.is_zero():
        return True
    return divides(r, d, None if d.is_exact() and r.is_exact() else 1e-9)


def node_count_diagnostics(spec: DarbouxSpec, nodes: NodeSet, k: int) -> dict:
    """Necessary count conditions on a node split; violations are warnings only."""
    D, m = spec.dim, spec.m
    r_total = window_size(D, k, m)
    N = len(spec.factors)
    counts = nodes.counts()
    order_counts = nodes.order_counts()
    groups = nodes.direction_groups()
    warnings: list[str] = []
    factors = []
    for a, (ra, da) in enumerate(spec.factors):
        na = ra.degree
        ca = counts.get(a, 0)
        info: dict[str, Any] = {"factor": a, "degree": na, "power": da, "count": ca}
        if da == 1:
            lo = k + na
            hi = window_size(D, k + m - na, na)
            info.update(lower=lo, upper=hi)
            if ca < lo:
                warnings.append(f"factor {a}: {ca} nodes < lower bound {lo}")
            if ca > hi:
                warnings.append(f"factor {a}: {ca} nodes > upper bound {hi}")
        else:
            lo = ceil(k / da) + na
            hi0 = window_size(D, k + m - na, na)
            c0 = order_counts.get((a, 0), 0)
            info.update(lower=lo, plain_count=c0, plain_upper=hi0)
            if ca < lo:
                warnings.append(f"factor {a}: {ca} nodes < lower bound {lo}")
            if c0 > hi0:
                warnings.append(f"factor {a}: {c0} plain nodes > upper bound {hi0}")
            if ca and all(j == 0 for (b, j) in order_counts if b == a):
                warnings.append(f"factor {a} has power {da} but only plain evaluations; "
                                "poised sets cannot exist without derivative nodes on a repeated factor")
            per_dir = []
            for (b, j), grp in sorted(groups.items()):
                if b != a or j == 0:
                    continue
                for coeffs, cnt in grp.items():
                    n = Direction(D, j, coeffs)
                    di = directional_derivative(ra ** da, n).degree
                    hi_i = window_size(D, k + m - di, di) if 0 <= di <= k + m else 0
                    per_dir.append({"order": j, "count": cnt, "derived_degree": di, "upper": hi_i})
                    if cnt > hi_i:
                        warnings.append(f"factor {a}, order {j}: {cnt} nodes in one direction > bound {hi_i}")
                    if is_forbidden_direction(ra, n):
                        warnings.append(f"factor {a}, order {j}: forbidden direction {list(map(str, coeffs))}")
            info["directions"] = per_dir
        factors.append(info)
    if len(nodes) != r_total:
        warnings.append(f"{len(nodes)} nodes but degree {k} needs {r_total}")
    return {
        "k": k,
        "m": m,
        "required": r_total,
        "linear_bound": N * k + m,
        "exceeds_linear_bound": r_total > N * k + m,
        "factors": factors,
        "warnings": warnings,
        "ok": not warnings,
    }


def split_satisfies_bounds(spec: DarbouxSpec, split: Sequence[int], k: int) -> bool:
    """Simple-factor count bounds for a per-factor split of plain nodes."""
    D, m = spec.dim, spec.m
    if sum(split) != window_size(D, k, m):
        return False
    for (r, d), c in zip(spec.factors, split):
        na = r.degree
        if d == 1 and not k + na <= c <= window_size(D, k + m - na, na):
            return False
        if d > 1 and c < ceil(k / d) + na:
            return False
    return True
