"""Recover per-pixel waveforms from single-pixel records."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patterns import HadamardBasis, block_amplitude, make_basis
from .simulator import DataCube, MeasurementSet, TimeGrid


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Hadamard-domain coefficients ``(H S)(t)`` for the first m ordered rows."""

    N: int
    ordering_name: str
    grid: TimeGrid
    coeffs: np.ndarray

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]


def debias(meas: MeasurementSet) -> CoefficientSet:
    """Turn lossy binary-mask records into +/-1 Hadamard coefficients.

    A mask with blocked amplitude ``a`` equals ``(1+a)/2 + (1-a)/2 * h`` for
    the +/-1 row ``h``, so subtracting ``(1+a)/2`` times the all-open record
    and rescaling by ``2/(1-a)`` isolates ``h . S``.
    """
    if meas.modulation_depth == 0:
        raise ValueError("modulation depth 0: masks carry no pattern information")
    a = block_amplitude(meas.modulation_depth)
    rec = meas.records
    coeffs = np.empty_like(rec)
    coeffs[0] = rec[0]
    coeffs[1:] = (2.0 / (1.0 - a)) * (rec[1:] - 0.5 * (1.0 + a) * rec[0])
    return CoefficientSet(N=meas.N, ordering_name=meas.ordering_name,
                          grid=meas.grid, coeffs=coeffs)


def _basis_for(coeffs: CoefficientSet, basis: HadamardBasis | None) -> HadamardBasis:
    if basis is None:
        n = int(round(np.sqrt(coeffs.N)))
        basis = make_basis(n, coeffs.ordering_name)
    if basis.N != coeffs.N or basis.ordering_name != coeffs.ordering_name:
        raise ValueError(f"basis (N={basis.N}, {basis.ordering_name}) does not match "
                         f"coefficients (N={coeffs.N}, {coeffs.ordering_name})")
    return basis


def _adjoint(basis: HadamardBasis, coeffs: np.ndarray, grid: TimeGrid) -> DataCube:
    m = coeffs.shape[0]
    # zero-filling rows >= m is the same as using only the first m rows
    H = basis.rows[:m].astype(float)
    fields = H.T @ coeffs / basis.N
    return DataCube(n=basis.n, grid=grid, fields=fields)


def invert_full(coeffs: CoefficientSet, basis: HadamardBasis | None = None) -> DataCube:
    """Exact inversion ``S = H^T W / N`` from the complete coefficient set."""
    if coeffs.m != coeffs.N:
        raise ValueError(f"invert_full needs all {coeffs.N} coefficients, got "
                         f"{coeffs.m}; use invert_compressive")
    basis = _basis_for(coeffs, basis)
    return _adjoint(basis, coeffs.coeffs, coeffs.grid)


def invert_compressive(coeffs: CoefficientSet, basis: HadamardBasis | None = None,
                       m: int | None = None) -> DataCube:
    """Truncated orthogonal reconstruction from the first ``m`` coefficients.

    Missing coefficients are taken as zero. ``m`` defaults to all the
    coefficients present and must be below N.
    """
    if m is None:
        m = coeffs.m
    if not 1 <= m < coeffs.N:
        raise ValueError(f"compressive inversion needs 1 <= m < {coeffs.N}, got {m}")
    if m > coeffs.m:
        raise ValueError(f"only {coeffs.m} coefficients available, asked for {m}")
    basis = _basis_for(coeffs, basis)
    return _adjoint(basis, coeffs.coeffs[:m], coeffs.grid)


def count_for_ratio(cr: float, N: int) -> int:
    """Number of patterns for compression ratio ``cr`` (round half up)."""
    if not 0 < cr <= 1:
        raise ValueError(f"compression ratio must be in (0, 1], got {cr}")
    m = int(np.floor(cr * N + 0.5))
    if m < 1:
        raise ValueError(f"compression ratio {cr} gives no patterns for N={N}")
    return m


def reconstruct(meas: MeasurementSet, cr: float = 1.0,
                basis: HadamardBasis | None = None) -> DataCube:
    """Debias and invert, using ``round(cr * N)`` leading patterns."""
    m = count_for_ratio(cr, meas.N)
    if m > meas.m:
        raise ValueError(f"ratio {cr} needs {m} records, measurement has {meas.m}")
    coeffs = debias(meas)
    if m == meas.N:
        return invert_full(coeffs, basis)
    return invert_compressive(coeffs, basis, m)
