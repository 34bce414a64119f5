"""Degree-blocked matrices and block Cholesky factorisation of moment matrices.

Matrices are dense numpy arrays.  Exact matrices use ``dtype=object`` holding
``int``/``Fraction``/``GaussianRational`` entries and are handled by the
Gauss-Jordan routines below; float matrices go through :mod:`numpy.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .graded_basis import ORDERING_TAG, GradedBasis
from .measures import MomentFunctional
from .scalars import FLOAT, RATIONAL, convert, format_scalar, is_exact, magnitude, parse_scalar

DEFAULT_SINGULAR_TOL = 1e-10


class SingularBlock(ArithmeticError):
    """A diagonal block ``H_[k]`` of the Cholesky factorisation is singular."""

    def __init__(self, degree: int, detail: str = ""):
        self.degree = degree
        super().__init__(f"singular block at degree {degree}" + (f" ({detail})" if detail else ""))


class SingularMatrix(ArithmeticError):
    """Matrix could not be inverted."""


class SingularLeadingBlock(SingularMatrix):
    """Leading block of a quasi-determinant is singular."""


# dense helpers


def is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def zeros(shape, mode: str = RATIONAL, complex_: bool = False) -> np.ndarray:
    if mode == RATIONAL:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape, dtype=complex if complex_ else float)


def identity(n: int, mode: str = RATIONAL) -> np.ndarray:
    out = zeros((n, n), mode)
    for i in range(n):
        out[i, i] = Fraction(1) if mode == RATIONAL else 1.0
    return out


def as_mode(a: np.ndarray, mode: str) -> np.ndarray:
    """Copy ``a`` into the storage of ``mode`` (object for rational, float/complex otherwise)."""
    a = np.asarray(a)
    if mode == RATIONAL:
        out = np.empty(a.shape, dtype=object)
        flat = out.reshape(-1)
        for i, v in enumerate(a.reshape(-1)):
            flat[i] = convert(v, RATIONAL)
        return out
    values = [convert(v, FLOAT) for v in a.reshape(-1)]
    dtype = complex if any(isinstance(v, complex) for v in values) else float
    return np.array(values, dtype=dtype).reshape(a.shape)


def max_abs(a: np.ndarray):
    """Largest entry magnitude; exact (a Fraction) for exact real arrays."""
    if a.size == 0:
        return 0
    if is_exact_array(a):
        return max((abs(x) if isinstance(x, (int, Fraction)) else magnitude(x)) for x in a.reshape(-1))
    return float(np.max(np.abs(a)))


def _gauss_jordan(a: np.ndarray, b: np.ndarray | None = None):
    """Exact row reduction of ``[a | b]``; returns (reduced matrix, pivot columns, det of a)."""
    rows, cols = a.shape
    width = cols + (b.shape[1] if b is not None else 0)
    m = np.empty((rows, width), dtype=object)
    m[:, :cols] = a
    if b is not None:
        m[:, cols:] = b
    pivots: list[int] = []
    det: Any = Fraction(1)
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i, c] != 0), None)
        if pivot is None:
            det = Fraction(0)
            continue
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
            det = -det
        pv = m[r, c]
        det = det * pv
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                f = m[i, c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if rows != cols or len(pivots) < cols:
        det = Fraction(0)
    return m, pivots, det


def det(a: np.ndarray):
    a = np.asarray(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("determinant of a non-square matrix")
    if a.shape[0] == 0:
        return Fraction(1) if is_exact_array(a) else 1.0
    if is_exact_array(a):
        return _gauss_jordan(a)[2]
    return np.linalg.det(a)


def rank(a: np.ndarray, tol: float | None = None) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if is_exact_array(a):
        return len(_gauss_jordan(a)[1])
    return int(np.linalg.matrix_rank(a, tol=tol))


def singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if is_exact_array(a):
        a = as_mode(a, FLOAT)
    return np.linalg.svd(a, compute_uv=False)


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for square nonsingular ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    if n == 0:
        out = b.copy()
    elif is_exact_array(a) or is_exact_array(b):
        if not (is_exact_array(a) and is_exact_array(b)):
            raise TypeError("mixing exact and float matrices")
        m, pivots, _ = _gauss_jordan(a, b)
        if len(pivots) < n:
            raise SingularMatrix("exactly singular matrix")
        out = m[:, n:]
    else:
        try:
            out = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(str(exc)) from exc
    return out.reshape(-1) if vector else out


def inverse(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    n = a.shape[0]
    mode = RATIONAL if is_exact_array(a) else FLOAT
    eye = identity(n, mode)
    return solve(a, eye)


def last_quasi_determinant(m: np.ndarray, lead: int) -> np.ndarray:
    """Schur complement ``D - C A^{-1} B`` of the leading ``lead x lead`` block of ``m``.

    With ``m = [[A, B], [C, D]]`` this is the last quasi-determinant of the
    2x2 partition.
    """
    m = np.asarray(m)
    a, b = m[:lead, :lead], m[:lead, lead:]
    c, d = m[lead:, :lead], m[lead:, lead:]
    if lead == 0:
        return d.copy()
    try:
        x = solve(a, b)
    except SingularMatrix as exc:
        raise SingularLeadingBlock(str(exc)) from exc
    return d - c.dot(x)


def is_singular(a: np.ndarray, tol: float, scale: float | None = None) -> bool:
    """Exact zero-determinant test, or smallest singular value below ``tol * scale``."""
    if a.size == 0:
        return False
    if is_exact_array(a):
        return det(a) == 0
    sv = singular_values(a)
    ref = scale if scale is not None else float(sv[0])
    return float(sv[-1]) <= tol * ref


@dataclass
class BlockMatrix:
    """Square matrix laid out over a :class:`GradedBasis`.

    Parameters
    ----------
    data : numpy.ndarray
        ``N_L x N_L`` entries.
    basis : GradedBasis
    band : (int, int)
        Block diagonals ``l - k`` that may be nonzero, as an inclusive range.
        Blocks outside it are exactly zero.
    valid_degree : int
        Highest row degree whose entries equal those of the semi-infinite
        matrix; rows above it are truncation artefacts.
    """

    data: np.ndarray
    basis: GradedBasis
    band: tuple[int, int] = None  # type: ignore[assignment]
    valid_degree: int = None  # type: ignore[assignment]

    def __post_init__(self):
        n = len(self.basis)
        if self.data.shape != (n, n):
            raise ValueError(f"data shape {self.data.shape} does not match basis size {n}")
        L = self.basis.max_degree
        if self.band is None:
            self.band = (-L, L)
        if self.valid_degree is None:
            self.valid_degree = L

    @property
    def L(self) -> int:
        return self.basis.max_degree

    @property
    def exact(self) -> bool:
        return is_exact_array(self.data)

    @property
    def mode(self) -> str:
        return RATIONAL if self.exact else FLOAT

    def block(self, k: int, l: int) -> np.ndarray:
        return self.data[self.basis.block_slice(k), self.basis.block_slice(l)]

    def set_block(self, k: int, l: int, value) -> None:
        self.data[self.basis.block_slice(k), self.basis.block_slice(l)] = value

    def truncation(self, k: int) -> np.ndarray:
        """Leading blocks of degrees ``0 .. k-1``."""
        n = self.basis.block_offsets[k]
        return self.data[:n, :n]

    def rows(self, k_lo: int, k_hi: int) -> np.ndarray:
        return self.data[self.basis.range_slice(k_lo, k_hi), :]

    def __matmul__(self, other: BlockMatrix) -> BlockMatrix:
        if self.basis != other.basis:
            raise ValueError("block layouts differ")
        L = self.L
        hi = max(self.band[1], 0)
        valid = min(self.valid_degree, other.valid_degree - hi)
        band = (max(self.band[0] + other.band[0], -L), min(self.band[1] + other.band[1], L))
        return BlockMatrix(self.data.dot(other.data), self.basis, band, valid)

    def __add__(self, other: BlockMatrix) -> BlockMatrix:
        band = (min(self.band[0], other.band[0]), max(self.band[1], other.band[1]))
        return BlockMatrix(self.data + other.data, self.basis, band,
                           min(self.valid_degree, other.valid_degree))

    def __sub__(self, other: BlockMatrix) -> BlockMatrix:
        band = (min(self.band[0], other.band[0]), max(self.band[1], other.band[1]))
        return BlockMatrix(self.data - other.data, self.basis, band,
                           min(self.valid_degree, other.valid_degree))

    def scale(self, c) -> BlockMatrix:
        return BlockMatrix(self.data * c, self.basis, self.band, self.valid_degree)

    @property
    def T(self) -> BlockMatrix:
        valid = self.L if self.valid_degree >= self.L else self.valid_degree + self.band[0]
        return BlockMatrix(self.data.T.copy(), self.basis, (-self.band[1], -self.band[0]), valid)

    def block_band_violation(self, lo: int, hi: int, upto: int | None = None):
        """Largest entry in blocks ``(k, l)`` with ``l - k`` outside ``[lo, hi]`` (rows ``<= upto``)."""
        upto = self.valid_degree if upto is None else upto
        worst: Any = 0
        for k in range(upto + 1):
            for l in range(self.L + 1):
                if not lo <= l - k <= hi:
                    v = max_abs(self.block(k, l))
                    if v > worst:
                        worst = v
        return worst


def block_diagonal(blocks: Sequence[np.ndarray], basis: GradedBasis) -> BlockMatrix:
    mode = RATIONAL if is_exact_array(np.asarray(blocks[0])) else FLOAT
    out = BlockMatrix(zeros((len(basis), len(basis)), mode), basis, (0, 0))
    if mode == FLOAT and any(np.iscomplexobj(b) for b in blocks):
        out.data = out.data.astype(complex)
    for k, b in enumerate(blocks):
        out.set_block(k, k, b)
    return out


def identity_matrix(basis: GradedBasis, mode: str = RATIONAL) -> BlockMatrix:
    return BlockMatrix(identity(len(basis), mode), basis, (0, 0))


def build_moment_matrix(m: MomentFunctional, L: int, mode: str | None = None) -> BlockMatrix:
    """Truncated moment matrix ``G_{alpha,beta} = moment(alpha + beta)`` for degrees ``<= L``."""
    basis = GradedBasis(m.dim, L)
    mode = mode or m.mode
    n = len(basis)
    data = zeros((n, n), mode)
    idx = basis.multiindex_at
    for i in range(n):
        for j in range(i, n):
            v = convert(m.moment(tuple(a + b for a, b in zip(idx[i], idx[j]))), mode)
            data[i, j] = v
            data[j, i] = v
    return BlockMatrix(data, basis)


@dataclass
class CholeskyResult:
    """``G = S^{-1} H S^{-T}`` with ``S`` block lower-unitriangular and ``H`` block diagonal."""

    S: BlockMatrix
    S_inv: BlockMatrix
    H: list[np.ndarray]
    basis: GradedBasis = field(init=False)

    def __post_init__(self):
        self.basis = self.S.basis

    @property
    def degree(self) -> int:
        return self.basis.max_degree

    @property
    def mode(self) -> str:
        return self.S.mode

    def H_matrix(self) -> BlockMatrix:
        return block_diagonal(self.H, self.basis)

    def reconstruct(self) -> np.ndarray:
        return self.S_inv.data.dot(self.H_matrix().data).dot(self.S_inv.data.T)


def block_cholesky(G: BlockMatrix, tol: float = DEFAULT_SINGULAR_TOL) -> CholeskyResult:
    """Block LDL^T of a symmetric moment matrix by degree-``k`` Schur complements.

    ``H_[k]`` is the Schur complement of ``G^{[k]}`` in ``G^{[k+1]}`` and is
    checked for singularity as soon as it is formed.

    Raises
    ------
    SingularBlock
        when some ``H_[k]`` is singular (exactly, or with smallest singular
        value below ``tol`` times the norm of ``G^{[k+1]}`` in float mode).
    """
    basis = G.basis
    L = basis.max_degree
    mode = G.mode
    exact = G.exact
    low: dict[tuple[int, int], np.ndarray] = {}  # blocks of S^{-1}
    H: list[np.ndarray] = []
    H_inv: list[np.ndarray] = []
    for k in range(L + 1):
        for l in range(k):
            acc = G.block(k, l).copy()
            for c in range(l):
                acc = acc - low[k, c].dot(H[c]).dot(low[l, c].T)
            low[k, l] = acc.dot(H_inv[l])
        hk = G.block(k, k).copy()
        for c in range(k):
            hk = hk - low[k, c].dot(H[c]).dot(low[k, c].T)
        if exact:
            singular = det(hk) == 0
        else:
            norm = float(singular_values(G.truncation(k + 1))[0])
            singular = is_singular(hk, tol, norm)
        if singular:
            raise SingularBlock(k)
        H.append(hk)
        H_inv.append(inverse(hk))
    S_inv = identity_matrix(basis, mode)
    S_inv.band = (-L, 0)
    for (k, l), blk in low.items():
        S_inv.set_block(k, l, blk)
    S = invert_unitriangular(S_inv)
    return CholeskyResult(S, S_inv, H)


def invert_unitriangular(S: BlockMatrix) -> BlockMatrix:
    """Inverse of a block lower-unitriangular matrix by forward substitution."""
    basis = S.basis
    L = basis.max_degree
    mode = S.mode
    for k in range(L + 1):
        d = S.block(k, k)
        if not np.array_equal(d, identity(d.shape[0], mode)) if S.exact else not np.allclose(d, np.eye(d.shape[0])):
            raise ValueError(f"diagonal block {k} is not the identity")
        for l in range(k + 1, L + 1):
            if max_abs(S.block(k, l)) != 0:
                raise ValueError("matrix is not block lower triangular")
    X = identity_matrix(basis, mode)
    if not S.exact and np.iscomplexobj(S.data):
        X.data = X.data.astype(complex)
    X.band = (-L, 0)
    for k in range(1, L + 1):
        for l in range(k - 1, -1, -1):
            acc = -S.block(k, l)
            for c in range(l + 1, k):
                acc = acc - S.block(k, c).dot(X.block(c, l))
            X.set_block(k, l, acc)
    return X


def slice_S(chol: CholeskyResult, k: int, m: int) -> np.ndarray:
    """Rows of ``S`` for degrees ``k .. k+m-1`` and columns for degrees ``0 .. k+m-1``."""
    L = chol.degree
    if k < 0 or m < 0 or k + m > L + 1:
        raise IndexError(f"slice k={k}, m={m} exceeds truncation degree {L}")
    basis = chol.basis
    rows = basis.range_slice(k, k + m - 1)
    cols = slice(0, basis.block_offsets[k + m])
    return chol.S.data[rows, cols]


# serialisation


def _encode(a: np.ndarray) -> list:
    return [[format_scalar(x) for x in row] for row in np.asarray(a)]


def _decode(rows: list, mode: str) -> np.ndarray:
    if not rows:
        return zeros((0, 0), mode)
    values = [[parse_scalar(x, mode) for x in row] for row in rows]
    if mode == RATIONAL:
        out = np.empty((len(values), len(values[0])), dtype=object)
        for i, row in enumerate(values):
            for j, v in enumerate(row):
                out[i, j] = v
        return out
    return np.array(values, dtype=complex if any(isinstance(v, complex) for r in values for v in r) else float)


def cholesky_to_dict(chol: CholeskyResult) -> dict:
    """Stable JSON-ready form: D, L, ordering tag, H blocks and S row blocks."""
    basis = chol.basis
    return {
        "format": "mvdarboux.family/1",
        "dimension": basis.dim,
        "degree": basis.max_degree,
        "ordering": ORDERING_TAG,
        "scalar": chol.mode,
        "H": [_encode(h) for h in chol.H],
        "S": [_encode(chol.S.data[basis.block_slice(k), : basis.block_offsets[k + 1]])
              for k in range(basis.max_degree + 1)],
    }


def cholesky_from_dict(doc: dict) -> CholeskyResult:
    if doc.get("ordering") != ORDERING_TAG:
        raise ValueError(f"unsupported ordering {doc.get('ordering')!r}")
    basis = GradedBasis(int(doc["dimension"]), int(doc["degree"]))
    mode = doc["scalar"]
    H = [_decode(h, mode) for h in doc["H"]]
    S = identity_matrix(basis, mode)
    S.band = (-basis.max_degree, 0)
    for k, rows in enumerate(doc["S"]):
        blk = _decode(rows, mode)
        S.data[basis.block_slice(k), : basis.block_offsets[k + 1]] = blk
    return CholeskyResult(S, invert_unitriangular(S), H)


def is_exact_value(x: Any) -> bool:
    return is_exact(x)
