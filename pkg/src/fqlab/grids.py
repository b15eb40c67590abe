"""Real-space simulation grid and its centered Fourier dual.

A grid is a cubic cell of volume ``cell_volume`` sampled with
``points_per_axis`` points per axis. Integer axis indices run over a
window centered on zero: for odd m the window is [-(m-1)/2, (m-1)/2],
which makes the index set exactly symmetric (k_{-p} = -k_p); even m is
also accepted, with the standard FFT window [-m/2, m/2-1], for classical
baselines that ask for power-of-two grids.

Positions are r_p = p * L / m and frequencies k_p = 2*pi*p / L with
L = cell_volume**(1/dim), componentwise over the same index window.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class GridSpec:
    """Cubic simulation grid in ``dim`` dimensions."""

    dim: int
    points_per_axis: int
    cell_volume: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValidationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.points_per_axis < 1:
            raise ValidationError("points_per_axis must be positive")
        if not (self.cell_volume > 0 and math.isfinite(self.cell_volume)):
            raise ValidationError("cell_volume must be positive and finite")

    @property
    def total_points(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def length(self) -> float:
        """Edge length L of the cell."""
        return self.cell_volume ** (1.0 / self.dim)

    @property
    def spacing(self) -> float:
        """Grid spacing delta = L / points_per_axis."""
        return self.length / self.points_per_axis

    @property
    def qubits_per_register(self) -> int:
        return max(1, math.ceil(math.log2(self.total_points)))

    @cached_property
    def axis_window(self) -> np.ndarray:
        """Centered integer indices for one axis, ascending."""
        m = self.points_per_axis
        lo = -(m - 1) // 2 if m % 2 == 1 else -m // 2
        return np.arange(lo, lo + m, dtype=np.int64)

    @cached_property
    def index_points(self) -> np.ndarray:
        """Integer lattice points p for every flat grid index, shape (N, dim).

        Flat index order is row-major over the axes, axis 0 most significant.
        """
        axes = [self.axis_window] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def positions(self) -> np.ndarray:
        """Real-space points r_p, shape (N, dim)."""
        return self.index_points * (self.length / self.points_per_axis)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Dual frequencies k_p, shape (N, dim)."""
        return self.index_points * (2.0 * np.pi / self.length)

    def flat_index(self, point) -> int:
        """Flat grid index of an integer lattice point."""
        m = self.points_per_axis
        lo = int(self.axis_window[0])
        idx = 0
        for comp in np.atleast_1d(np.asarray(point, dtype=np.int64)):
            t = int(comp) - lo
            if not 0 <= t < m:
                raise ValidationError(f"lattice point {point} outside grid window")
            idx = idx * m + t
        return idx


def centered_dft_matrix(m: int) -> np.ndarray:
    """Unitary one-axis DFT with both indices in the centered window.

    Entry (nu, p) is exp(-2i*pi*nu*p/m)/sqrt(m), nu and p running over the
    same centered window as :meth:`GridSpec.axis_window`.
    """
    lo = -(m - 1) // 2 if m % 2 == 1 else -m // 2
    w = np.arange(lo, lo + m)
    return np.exp(-2j * np.pi * np.outer(w, w) / m) / np.sqrt(m)


def grid_dft_matrix(grid: GridSpec) -> np.ndarray:
    """Position-to-frequency unitary over all N grid points (kron over axes)."""
    axis = centered_dft_matrix(grid.points_per_axis)
    full = np.array([[1.0 + 0j]])
    for _ in range(grid.dim):
        full = np.kron(full, axis)
    return full


def centered_dft(arr: np.ndarray, axis: int, inverse: bool = False) -> np.ndarray:
    """Apply the centered one-axis DFT along ``axis`` via twiddled FFT.

    Equivalent to contracting with :func:`centered_dft_matrix` (or its
    adjoint) but O(m log m) per slice.
    """
    m = arr.shape[axis]
    lo = -(m - 1) // 2 if m % 2 == 1 else -m // 2
    a = np.arange(m)
    sign = 1j if inverse else -1j
    pre = np.exp(sign * 2 * np.pi * lo * a / m)
    corner = np.exp(sign * 2 * np.pi * lo * lo / m)
    shape = [1] * arr.ndim
    shape[axis] = m
    tw = pre.reshape(shape)
    if inverse:
        out = np.fft.ifft(arr * tw, axis=axis) * tw * (corner * np.sqrt(m))
    else:
        out = np.fft.fft(arr * tw, axis=axis) * tw * (corner / np.sqrt(m))
    return out
