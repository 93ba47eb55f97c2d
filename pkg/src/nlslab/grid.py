"""Periodic torus grids and their frequency lattices.

A grid discretizes the torus [0, L)^dim with M points per axis.  The
frequency lattice is (2*pi/L) * k for integer k in [-M/2, M/2), stored in
FFT ordering throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Immutable periodic grid.  Use make_grid() for the validated entry point.

    make_grid enforces power-of-two resolutions; rescaled grids (integer
    multiples of a power of two) are also representable here, which rescale()
    relies on.
    """

    dim: int
    points_per_axis: int
    box_length: float

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.points_per_axis < 8 or self.points_per_axis % 2 != 0:
            raise ValueError(
                f"points_per_axis must be an even integer >= 8, got {self.points_per_axis}"
            )
        if not (self.box_length > 0 and np.isfinite(self.box_length)):
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    # -- basic geometry -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def n_points(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def quad_weight(self) -> float:
        """Quadrature weight of one grid cell, (L/M)^dim."""
        return self.spacing**self.dim

    # -- frequency lattice ----------------------------------------------
    @cached_property
    def freq_1d(self) -> np.ndarray:
        """One-axis frequencies (2*pi/L)*k in FFT ordering."""
        f = 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)
        f.flags.writeable = False
        return f

    @cached_property
    def k_sq(self) -> np.ndarray:
        """|xi|^2 on the full lattice, shape == self.shape."""
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = self.points_per_axis
            out += (self.freq_1d**2).reshape(sh)
        out.flags.writeable = False
        return out

    @cached_property
    def k_abs(self) -> np.ndarray:
        out = np.sqrt(self.k_sq)
        out.flags.writeable = False
        return out

    @property
    def max_abs_freq(self) -> float:
        """Largest |xi| on the lattice (corner mode)."""
        return float(np.sqrt(self.dim) * np.max(np.abs(self.freq_1d)))

    # -- two-thirds dealiasing -------------------------------------------
    @property
    def dealias_index_cutoff(self) -> int:
        """Largest per-axis integer index kept by the two-thirds rule."""
        return self.points_per_axis // 3

    @cached_property
    def dealias_keep(self) -> np.ndarray:
        """uint8 mask, 1 where every axis index satisfies |k| <= M//3."""
        cutoff = self.dealias_index_cutoff * (2.0 * np.pi / self.box_length)
        keep = np.ones(self.shape, dtype=bool)
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = self.points_per_axis
            keep &= (np.abs(self.freq_1d) <= cutoff * (1 + 1e-12)).reshape(sh)
        out = keep.astype(np.uint8)
        out.flags.writeable = False
        return out

    def max_kept_abs_freq(self) -> float:
        """Largest |xi| surviving the two-thirds projection."""
        return float(
            np.sqrt(self.dim) * self.dealias_index_cutoff * 2.0 * np.pi / self.box_length
        )

    def grid_id(self) -> str:
        return f"{self.dim}d-{self.points_per_axis}-L{self.box_length:.17g}"


def make_grid(dim: int, points_per_axis: int, box_length: float) -> Grid:
    """Validated grid constructor: dim in {2,3}, power-of-two resolution >= 8."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if not isinstance(points_per_axis, (int, np.integer)) or not _is_power_of_two(
        int(points_per_axis)
    ):
        raise ValueError(
            f"points_per_axis must be a power of two, got {points_per_axis}"
        )
    if points_per_axis < 8:
        raise ValueError(f"points_per_axis must be >= 8, got {points_per_axis}")
    return Grid(int(dim), int(points_per_axis), float(box_length))
