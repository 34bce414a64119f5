"""Multi-indices ordered by total degree.

Every matrix in the package is laid out over a :class:`GradedBasis`: rows and
columns are monomials ``x^alpha`` sorted by total degree ``|alpha|``, and
inside one degree block by lexicographically *decreasing* exponent vector
(``x^2, x*y, y^2`` for two variables).  This module is the single source of
truth for that convention.
"""

from __future__ import annotations

from math import comb
from typing import Iterator, Sequence

MultiIndex = tuple[int, ...]

ORDERING_TAG = "graded-lex-desc"

# positions beyond this are refused rather than exhausting memory
MAX_BASIS_SIZE = 2_000_000


class CapacityError(ValueError):
    """Requested basis is larger than the package is willing to allocate."""


def block_size(dim: int, k: int) -> int:
    """Number of monomials of total degree ``k`` in ``dim`` variables."""
    if dim < 1 or k < 0:
        raise ValueError(f"block_size needs dim >= 1 and k >= 0, got ({dim}, {k})")
    return comb(dim + k - 1, k)


def cumulative_dim(dim: int, k: int) -> int:
    """Number of monomials of total degree ``<= k``; zero for ``k = -1``."""
    if dim < 1 or k < -1:
        raise ValueError(f"cumulative_dim needs dim >= 1 and k >= -1, got ({dim}, {k})")
    return comb(dim + k, dim)


def window_size(dim: int, k: int, m: int) -> int:
    """Monomials with degree in ``k .. k+m-1``.

    This is the node count of a degree-``k`` Christoffel transform for a
    perturbation of degree ``m``.
    """
    if k < 0 or m < 0:
        raise ValueError(f"window_size needs k >= 0 and m >= 0, got ({k}, {m})")
    return cumulative_dim(dim, k + m - 1) - cumulative_dim(dim, k - 1)


def degree(alpha: Sequence[int]) -> int:
    return sum(alpha)


def sort_key(alpha: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Key realising the package ordering; ascending key = ascending position."""
    return (sum(alpha), tuple(-a for a in alpha))


def compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Three-way comparison in the package ordering (-1, 0 or 1)."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    ka, kb = sort_key(a), sort_key(b)
    return (ka > kb) - (ka < kb)


def homogeneous_indices(dim: int, k: int) -> Iterator[MultiIndex]:
    """Multi-indices of degree ``k`` in package order (first exponent largest first)."""
    if dim == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in homogeneous_indices(dim - 1, k - first):
            yield (first,) + rest


def unit(dim: int, axis: int) -> MultiIndex:
    return tuple(1 if i == axis else 0 for i in range(dim))


class GradedBasis:
    """Position <-> multi-index bijection for all monomials of degree ``<= max_degree``.

    Parameters
    ----------
    dim : int
        Number of variables ``D``.
    max_degree : int
        Truncation degree ``L``.
    """

    def __init__(self, dim: int, max_degree: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        size = cumulative_dim(dim, max_degree)
        if size > MAX_BASIS_SIZE:
            raise CapacityError(f"basis with D={dim}, L={max_degree} has {size} monomials")
        self.dim = dim
        self.max_degree = max_degree
        self.multiindex_at: list[MultiIndex] = []
        # block_offsets[k] = N_{k-1}; block_offsets[L+1] = N_L
        self.block_offsets: list[int] = [0]
        for k in range(max_degree + 1):
            self.multiindex_at.extend(homogeneous_indices(dim, k))
            self.block_offsets.append(len(self.multiindex_at))
        self.index_of: dict[MultiIndex, int] = {a: i for i, a in enumerate(self.multiindex_at)}

    def __repr__(self) -> str:
        return f"GradedBasis(dim={self.dim}, max_degree={self.max_degree})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedBasis):
            return NotImplemented
        return self.dim == other.dim and self.max_degree == other.max_degree

    def __hash__(self) -> int:
        return hash((self.dim, self.max_degree))

    def __len__(self) -> int:
        return len(self.multiindex_at)

    def block_slice(self, k: int) -> slice:
        """Positions of degree block ``[k]``."""
        if not 0 <= k <= self.max_degree:
            raise IndexError(f"degree {k} outside 0..{self.max_degree}")
        return slice(self.block_offsets[k], self.block_offsets[k + 1])

    def range_slice(self, k_lo: int, k_hi: int) -> slice:
        """Positions of all blocks with degree in ``k_lo .. k_hi`` (inclusive)."""
        if k_hi < k_lo:
            return slice(0, 0)
        if k_lo < 0 or k_hi > self.max_degree:
            raise IndexError(f"degrees {k_lo}..{k_hi} outside 0..{self.max_degree}")
        return slice(self.block_offsets[k_lo], self.block_offsets[k_hi + 1])

    def block(self, k: int) -> list[MultiIndex]:
        return self.multiindex_at[self.block_slice(k)]

    def size_upto(self, k: int) -> int:
        """``N_k`` restricted to this basis."""
        return self.block_offsets[k + 1]

    def position(self, alpha: Sequence[int]) -> int:
        alpha = tuple(alpha)
        if len(alpha) != self.dim:
            raise ValueError(f"multi-index {alpha} has wrong dimension for D={self.dim}")
        try:
            return self.index_of[alpha]
        except KeyError:
            raise IndexError(f"{alpha} exceeds truncation degree {self.max_degree}") from None

    def shifted_position(self, alpha: Sequence[int], axis: int) -> int:
        """Position of ``alpha + e_axis`` (axis is 0-based)."""
        alpha = tuple(alpha)
        if not 0 <= axis < self.dim:
            raise IndexError(f"axis {axis} outside 0..{self.dim - 1}")
        if sum(alpha) + 1 > self.max_degree:
            raise IndexError(f"shifting {alpha} overflows truncation degree {self.max_degree}")
        shifted = tuple(a + (i == axis) for i, a in enumerate(alpha))
        return self.index_of[shifted]

    def degree_at(self, pos: int) -> int:
        return sum(self.multiindex_at[pos])
