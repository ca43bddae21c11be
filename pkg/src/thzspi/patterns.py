"""Hadamard illumination patterns for single-pixel acquisition.

The sensing matrix is a Sylvester-Hadamard matrix whose rows, reshaped
row-major to n x n, are the spatial patterns. Rows can be reordered so the
low spatial-frequency patterns come first, which is what makes truncated
(compressive) acquisitions useful.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_LOG2_N = 16
ORDERINGS = ("natural", "sequency2d")


@dataclass(frozen=True, eq=False)
class HadamardBasis:
    """Ordered set of +/-1 patterns forming the sensing matrix.

    ``rows[k]`` is the pattern measured at acquisition position ``k``; it
    equals row ``ordering[k]`` of the natural Sylvester matrix.
    """

    n: int
    rows: np.ndarray
    ordering: np.ndarray
    ordering_name: str = "natural"

    @property
    def N(self) -> int:
        return self.n * self.n

    def pattern(self, k: int) -> np.ndarray:
        """Ordered pattern ``k`` as an n x n array of +/-1."""
        return self.rows[k].reshape(self.n, self.n)


@dataclass(frozen=True, eq=False)
class Mask2D:
    n: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class BinaryMaskSet:
    """Physical amplitude masks realised from a Hadamard basis.

    Open regions (+1 entries) transmit the full field; blocked regions (-1
    entries) transmit ``a_block = sqrt(1 - modulation_depth)`` because the
    modulation depth is quoted as a fraction of beam energy.
    """

    basis: HadamardBasis
    modulation_depth: float
    masks: list = field(repr=False)

    @property
    def a_block(self) -> float:
        return block_amplitude(self.modulation_depth)

    def matrix(self, m: int | None = None) -> np.ndarray:
        """First ``m`` masks flattened row-major into an m x N array."""
        rows = self.basis.rows if m is None else self.basis.rows[:m]
        return np.where(rows > 0, 1.0, self.a_block)


def block_amplitude(modulation_depth: float) -> float:
    if not 0.0 < modulation_depth <= 1.0:
        raise ValueError(
            f"modulation depth must be in (0, 1], got {modulation_depth}")
    return float(np.sqrt(1.0 - modulation_depth))


def sylvester_hadamard(log2_N: int) -> HadamardBasis:
    """Natural-order Sylvester-Hadamard basis with N = 2**log2_N patterns.

    ``log2_N`` must be even so the patterns tile a square n x n grid.
    """
    log2_N = int(log2_N)
    if log2_N < 0:
        raise ValueError("log2_N must be non-negative")
    if log2_N % 2:
        raise ValueError(
            f"log2_N={log2_N} is odd: N=2**{log2_N} is not a square pixel count")
    if log2_N > MAX_LOG2_N:
        raise ValueError(f"log2_N={log2_N} exceeds the limit of {MAX_LOG2_N}")

    H = np.ones((1, 1), dtype=np.int8)
    for _ in range(log2_N):
        H = np.block([[H, H], [H, -H]])
    N = H.shape[0]
    n = 1 << (log2_N // 2)
    return HadamardBasis(n=n, rows=H, ordering=np.arange(N), ordering_name="natural")


def transition_count(mask_pattern) -> int:
    """Number of sign flips between horizontal and vertical neighbours."""
    p = np.asarray(mask_pattern)
    if p.ndim != 2:
        raise ValueError("pattern must be 2-D")
    horizontal = np.count_nonzero(p[:, 1:] != p[:, :-1])
    vertical = np.count_nonzero(p[1:, :] != p[:-1, :])
    return int(horizontal + vertical)


def order_sequency2d(basis: HadamardBasis) -> HadamardBasis:
    """Reorder patterns by ascending 2-D sequency (total transition count).

    Ties are broken by the natural Sylvester index, so the result does not
    depend on the incoming order and the operation is idempotent.
    """
    counts = np.array([transition_count(basis.pattern(k)) for k in range(basis.N)])
    # lexsort: last key is primary
    perm = np.lexsort((basis.ordering, counts))
    return HadamardBasis(
        n=basis.n,
        rows=basis.rows[perm],
        ordering=basis.ordering[perm],
        ordering_name="sequency2d",
    )


def make_basis(n: int, ordering: str = "sequency2d") -> HadamardBasis:
    """Basis for an n x n grid (n a power of two) in the named ordering."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"n must be a power of 2, got {n}")
    basis = sylvester_hadamard(2 * (n.bit_length() - 1))
    if ordering == "natural":
        return basis
    if ordering == "sequency2d":
        return order_sequency2d(basis)
    raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")


def mask_from_row(basis: HadamardBasis, ordered_index: int,
                  modulation_depth: float) -> Mask2D:
    if not 0 <= ordered_index < basis.N:
        raise IndexError(
            f"ordered_index {ordered_index} out of range for N={basis.N}")
    a = block_amplitude(modulation_depth)
    values = np.where(basis.pattern(ordered_index) > 0, 1.0, a)
    return Mask2D(n=basis.n, values=values)


def binary_masks(basis: HadamardBasis, modulation_depth: float) -> BinaryMaskSet:
    masks = [mask_from_row(basis, k, modulation_depth) for k in range(basis.N)]
    return BinaryMaskSet(basis=basis, modulation_depth=float(modulation_depth),
                         masks=masks)
