"""Orthogonal polynomial families read off a block Cholesky factorisation.

``P = S chi``: row ``alpha`` of ``S`` holds the coefficients of ``P_alpha``
in the monomial basis.  Shift matrices realise multiplication by a coordinate
on ``chi`` and Jacobi matrices ``J_a = S Lambda_a S^{-1}`` realise it on ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .block_linalg import (
    DEFAULT_SINGULAR_TOL,
    BlockMatrix,
    CholeskyResult,
    block_cholesky,
    build_moment_matrix,
    cholesky_to_dict,
    identity_matrix,
    is_exact_array,
    max_abs,
    zeros,
)
from .graded_basis import GradedBasis
from .measures import MomentFunctional
from .poly import Direction, MPoly, directional_derivative, format_poly
from .scalars import RATIONAL, convert


def monomial_vector(basis: GradedBasis, x: Sequence[Any], mode: str = RATIONAL) -> np.ndarray:
    """Truncated ``chi(x)``: all monomials of degree ``<= L`` at ``x`` in basis order."""
    values = []
    for alpha in basis.multiindex_at:
        v: Any = 1
        for xi, a in zip(x, alpha):
            if a:
                v = v * xi ** a
        values.append(v)
    return _vector(values, mode)


def monomial_derivative_vector(basis: GradedBasis, x: Sequence[Any], n: Direction,
                               mode: str = RATIONAL) -> np.ndarray:
    """``(d^j chi / dn)(x)`` from the closed form of monomial derivatives."""
    values = []
    for alpha in basis.multiindex_at:
        total: Any = 0
        for gamma, c in n.items():
            if any(a < g for a, g in zip(alpha, gamma)):
                continue
            term: Any = c
            for xi, a, g in zip(x, alpha, gamma):
                for t in range(a - g + 1, a + 1):
                    term = term * t
                if a - g:
                    term = term * xi ** (a - g)
            total = total + term
        values.append(total)
    return _vector(values, mode)


def _vector(values: list, mode: str) -> np.ndarray:
    if mode == RATIONAL:
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = convert(v, RATIONAL)
        return out
    values = [convert(v, mode) for v in values]
    return np.array(values, dtype=complex if any(isinstance(v, complex) for v in values) else float)


@dataclass
class MVOPRFamily:
    """Monic-by-blocks orthogonal polynomials of a moment functional up to degree ``L``."""

    measure: MomentFunctional | None
    chol: CholeskyResult
    G: BlockMatrix | None = None

    @property
    def basis(self) -> GradedBasis:
        return self.chol.basis

    @property
    def degree(self) -> int:
        return self.basis.max_degree

    @property
    def mode(self) -> str:
        return self.chol.mode

    @property
    def S(self) -> BlockMatrix:
        return self.chol.S

    @property
    def H(self) -> list[np.ndarray]:
        return self.chol.H

    def polynomial_block(self, k: int) -> list[MPoly]:
        """The ``|[k]|`` polynomials ``P_[k]``, each monic in its own leading monomial."""
        if not 0 <= k <= self.degree:
            raise IndexError(f"degree {k} outside 0..{self.degree}")
        basis = self.basis
        upto = basis.block_offsets[k + 1]
        rows = self.S.data[basis.block_slice(k), :upto]
        return [MPoly(basis.dim, {basis.multiindex_at[j]: row[j] for j in range(upto)}) for row in rows]

    def polynomials(self, k_lo: int = 0, k_hi: int | None = None) -> list[MPoly]:
        k_hi = self.degree if k_hi is None else k_hi
        return [p for k in range(k_lo, k_hi + 1) for p in self.polynomial_block(k)]

    def eval_stack(self, x: Sequence[Any], k_lo: int, k_hi: int) -> np.ndarray:
        """``(P_[k_lo](x), ..., P_[k_hi](x))`` concatenated."""
        return self._stack(monomial_vector(self.basis, x, self.mode), k_lo, k_hi)

    def derivative_stack(self, x: Sequence[Any], n: Direction, k_lo: int, k_hi: int) -> np.ndarray:
        """``(d^j P_[k_lo..k_hi] / dn)(x)``; order 0 reduces to :meth:`eval_stack`."""
        if n.is_evaluation():
            return self.eval_stack(x, k_lo, k_hi) * convert(n.coefficients[0], self.mode)
        chi = monomial_derivative_vector(self.basis, x, n, self.mode)
        return self._stack(chi, k_lo, k_hi)

    def _stack(self, chi: np.ndarray, k_lo: int, k_hi: int) -> np.ndarray:
        if k_hi > self.degree:
            raise IndexError(f"degree {k_hi} exceeds truncation degree {self.degree}")
        rows = self.basis.range_slice(k_lo, k_hi)
        upto = self.basis.block_offsets[k_hi + 1]
        return self.S.data[rows, :upto].dot(chi[:upto])

    def listing(self) -> list[str]:
        """Human-readable ``P_alpha = ...`` lines."""
        out = []
        for k in range(self.degree + 1):
            for alpha, p in zip(self.basis.block(k), self.polynomial_block(k)):
                out.append(f"P{list(alpha)} = {format_poly(p)}")
        return out

    def to_dict(self) -> dict:
        doc = cholesky_to_dict(self.chol)
        doc["polynomials"] = self.listing()
        return doc


def build_family(measure: MomentFunctional, L: int, mode: str | None = None,
                 tol: float = DEFAULT_SINGULAR_TOL) -> MVOPRFamily:
    """Moment matrix, block Cholesky and family in one step (raises ``SingularBlock``)."""
    G = build_moment_matrix(measure, L, mode)
    return MVOPRFamily(measure, block_cholesky(G, tol), G)


def polynomial_derivative_stack(polys: Sequence[MPoly], x: Sequence[Any], n: Direction) -> list:
    """Reference path: differentiate each polynomial symbolically, then evaluate."""
    return [directional_derivative(p, n)(x) for p in polys]


# shift and Jacobi matrices


def build_shift(basis: GradedBasis, mode: str = RATIONAL) -> list[BlockMatrix]:
    """``Lambda_1 .. Lambda_D``: entry ``(beta, beta + e_a)`` is one.

    Rows of degree ``L`` would need degree ``L+1`` columns, so the valid
    range stops at ``L-1``.
    """
    L = basis.max_degree
    one = convert(1, mode)
    out = []
    for a in range(basis.dim):
        data = zeros((len(basis), len(basis)), mode)
        for i, beta in enumerate(basis.multiindex_at):
            if sum(beta) < L:
                data[i, basis.shifted_position(beta, a)] = one
        out.append(BlockMatrix(data, basis, (1, 1), L - 1))
    return out


def apply_poly_to_shift(q: MPoly, shifts: Sequence[BlockMatrix]) -> BlockMatrix:
    """``Q(Lambda) = sum c_alpha Lambda_1^alpha_1 ... Lambda_D^alpha_D``; valid for rows ``<= L - deg Q``."""
    if not shifts:
        raise ValueError("need at least one shift matrix")
    basis = shifts[0].basis
    if q.dim != len(shifts):
        raise ValueError("polynomial dimension differs from number of shift matrices")
    if q.degree > basis.max_degree:
        raise IndexError(f"deg Q = {q.degree} exceeds truncation degree {basis.max_degree}")
    mode = shifts[0].mode
    powers: dict[tuple[int, int], BlockMatrix] = {}

    def power(a: int, e: int) -> BlockMatrix:
        if e == 0:
            return identity_matrix(basis, mode)
        if (a, e) not in powers:
            powers[a, e] = shifts[a] if e == 1 else power(a, e - 1) @ shifts[a]
        return powers[a, e]

    total: BlockMatrix | None = None
    for alpha, c in q.terms.items():
        term = identity_matrix(basis, mode)
        for a, e in enumerate(alpha):
            if e:
                term = term @ power(a, e)
        term = term.scale(convert(c, mode))
        total = term if total is None else total + term
    if total is None:
        total = identity_matrix(basis, mode).scale(convert(0, mode))
    return total


def build_jacobi(fam: MVOPRFamily, shifts: Sequence[BlockMatrix] | None = None) -> list[BlockMatrix]:
    """``J_a = S Lambda_a S^{-1}``, valid for rows of degree ``<= L-1``."""
    shifts = shifts if shifts is not None else build_shift(fam.basis, fam.mode)
    return [fam.S @ lam @ fam.chol.S_inv for lam in shifts]


def poly_of_matrices(q: MPoly, mats: Sequence[BlockMatrix]) -> BlockMatrix:
    """``Q(A_1, ..., A_D)`` for commuting block matrices (e.g. ``Q(J)``)."""
    return apply_poly_to_shift(q, mats)


# structural checks, each returning the largest violation (exact zero on rationals)


def valid_block_difference(A: BlockMatrix, B: np.ndarray, upto: int) -> Any:
    """Max entry of ``A - B`` over blocks with row and column degree ``<= upto``."""
    n = A.basis.block_offsets[upto + 1] if upto >= 0 else 0
    return max_abs(A.data[:n, :n] - B[:n, :n])


def symmetry_violation(J: BlockMatrix, H: BlockMatrix) -> Any:
    """``J H - H J^T`` on blocks whose rows and columns lie in ``J``'s valid range."""
    upto = J.valid_degree
    return valid_block_difference(J @ H, H.data.dot(J.data.T), upto)


def tridiagonal_violation(J: BlockMatrix) -> Any:
    return J.block_band_violation(-1, 1)


def orthogonality_violation(fam: MVOPRFamily) -> Any:
    """``(S G)_{[k],[l]}`` must vanish for ``l < k`` and equal ``H_[k]`` for ``l = k``."""
    G = fam.G if fam.G is not None else build_moment_matrix(fam.measure, fam.degree, fam.mode)
    SG = fam.S.data.dot(G.data)
    worst: Any = 0
    basis = fam.basis
    for k in range(fam.degree + 1):
        for l in range(k + 1):
            blk = SG[basis.block_slice(k), basis.block_slice(l)]
            diff = blk - fam.H[k] if l == k else blk
            v = max_abs(diff)
            if v > worst:
                worst = v
    return worst


def shift_symmetry_violation(lam: BlockMatrix, G: BlockMatrix) -> Any:
    """``Lambda_a G = G Lambda_a^T`` on in-range blocks."""
    upto = lam.valid_degree
    return valid_block_difference(lam @ G, G.data.dot(lam.data.T), upto)


def commutator_violation(A: BlockMatrix, B: BlockMatrix) -> Any:
    AB = A @ B
    BA = B @ A
    upto = min(AB.valid_degree, BA.valid_degree)
    return valid_block_difference(AB, BA.data, upto)


def is_exact_family(fam: MVOPRFamily) -> bool:
    return is_exact_array(fam.S.data)
