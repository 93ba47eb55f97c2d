"""Complex fields on a Grid, the unitary transform, rescaling, snapshot IO.

Transform convention: orthonormal DFT (norm="ortho"), so the discrete L2
norm with quadrature weight (L/M)^dim is identical in physical and spectral
tags.  A plane wave A*exp(i k.x) has the single spectral coefficient
A * M^(dim/2).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import Grid

PHYSICAL = "physical"
SPECTRAL = "spectral"

_WORKERS = os.cpu_count() or 1

DEFAULT_POINT_CAP = 2**24


@dataclass(frozen=True)
class Field:
    """A complex-valued state on a grid.  Treat values as immutable."""

    grid: Grid
    values: np.ndarray
    space_tag: str

    def __post_init__(self) -> None:
        if self.space_tag not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"space_tag must be physical or spectral, got {self.space_tag!r}")
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.values.dtype != np.complex128:
            object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.complex128))


def fftn_ortho(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, norm="ortho", workers=_WORKERS)


def ifftn_ortho(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values, norm="ortho", workers=_WORKERS)


def transform(field: Field, target_tag: str) -> Field:
    """Unitary DFT between tags; identity when the tag already matches."""
    if target_tag not in (PHYSICAL, SPECTRAL):
        raise ValueError(f"unknown target tag {target_tag!r}")
    if field.space_tag == target_tag:
        return field
    if target_tag == SPECTRAL:
        return Field(field.grid, fftn_ortho(field.values), SPECTRAL)
    return Field(field.grid, ifftn_ortho(field.values), PHYSICAL)


def to_spectral(field: Field) -> Field:
    return transform(field, SPECTRAL)


def to_physical(field: Field) -> Field:
    return transform(field, PHYSICAL)


def zero_field(grid: Grid, space_tag: str = SPECTRAL) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.complex128), space_tag)


def rescale(field: Field, lam: int, point_cap: int = DEFAULT_POINT_CAP) -> Field:
    """Spatial part of the scaling map phi -> (1/lam) phi(x/lam).

    Spectral coefficients relocate without interpolation: the output lives
    on a grid with lam*M points per axis and box length lam*L, and the
    input's orthonormal coefficients are embedded at the same integer
    indices, scaled by lam^(dim/2 - 1).  Exact for every representable field.
    """
    if isinstance(lam, float):
        if not lam.is_integer():
            raise ValueError(f"rescale requires an integer factor, got {lam}")
        lam = int(lam)
    if not isinstance(lam, (int, np.integer)) or lam < 1:
        raise ValueError(f"rescale requires a positive integer factor, got {lam}")
    lam = int(lam)

    g = field.grid
    if lam == 1:
        return Field(g, field.values.copy(), field.space_tag)

    new_m = lam * g.points_per_axis
    if new_m**g.dim > point_cap:
        raise ValueError(
            f"rescaled grid {new_m}^{g.dim} exceeds the point cap {point_cap}"
        )
    new_grid = Grid(g.dim, new_m, lam * g.box_length)

    spec = to_spectral(field).values
    scale = float(lam) ** (g.dim / 2.0 - 1.0)
    big = np.zeros(new_grid.shape, dtype=np.complex128)
    centered = np.fft.fftshift(spec)
    m = g.points_per_axis
    start = new_m // 2 - m // 2
    block = tuple(slice(start, start + m) for _ in range(g.dim))
    big_sh = np.fft.fftshift(big)
    big_sh[block] = centered * scale
    big = np.fft.ifftshift(big_sh)

    out = Field(new_grid, big, SPECTRAL)
    return transform(out, field.space_tag)


def change_resolution(field: Field, new_points: int) -> Field:
    """Spectral resampling to new_points per axis on the same torus.

    Extension is always exact; truncation is exact iff the field carries no
    content at the dropped indices (the caller's obligation).
    """
    g = field.grid
    m = g.points_per_axis
    if new_points == m:
        return field
    if new_points < 8 or new_points % 2 != 0:
        raise ValueError("new_points must be an even integer >= 8")
    spec = to_spectral(field).values
    scale = (new_points / m) ** (g.dim / 2.0)
    out = np.zeros((new_points,) * g.dim, dtype=np.complex128)
    if new_points > m:
        src = np.fft.fftfreq(m, 1.0 / m).astype(int)
        sel = [np.where(src >= 0, src, src + new_points)]
        out[np.ix_(*(sel * g.dim))] = spec * scale
    else:
        tgt = np.fft.fftfreq(new_points, 1.0 / new_points).astype(int)
        sel = [np.where(tgt >= 0, tgt, tgt + m)]
        out[...] = spec[np.ix_(*(sel * g.dim))] * scale
    new_grid = Grid(g.dim, new_points, g.box_length)
    return transform(Field(new_grid, out, SPECTRAL), field.space_tag)


def save_field(path, field: Field) -> None:
    """Snapshot container: npz with dim, points_per_axis, box_length,
    space_tag, and the complex array in row-major order (axes x1..xdim)."""
    np.savez(
        path,
        dim=np.int64(field.grid.dim),
        points_per_axis=np.int64(field.grid.points_per_axis),
        box_length=np.float64(field.grid.box_length),
        space_tag=np.str_(field.space_tag),
        values=field.values,
    )


def load_field(path) -> Field:
    with np.load(path) as data:
        grid = Grid(
            int(data["dim"]), int(data["points_per_axis"]), float(data["box_length"])
        )
        return Field(grid, np.ascontiguousarray(data["values"]), str(data["space_tag"]))
