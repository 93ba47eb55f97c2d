"""Reproducible initial data.

rough_random draws seeded complex Gaussians with the spectral profile
<xi>^-(s + dim/2) — the profile whose continuum H^s integral is
log-divergent, i.e. the boundary case of "data in H^s" — and normalizes the
discrete H^s norm to the requested target exactly.  Fields are genuinely
complex; no Hermitian symmetry is imposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .field import PHYSICAL, SPECTRAL, Field, fftn_ortho, to_spectral
from .grid import Grid
from .multipliers import DyadicShell, symbol_on_grid
from .functionals import sobolev_norm, mass


@dataclass(frozen=True)
class RoughRandom:
    s: float
    target_hs_norm: float
    seed: int

    def __post_init__(self) -> None:
        if not self.target_hs_norm > 0:
            raise ValueError("target_hs_norm must be positive")


@dataclass(frozen=True)
class GaussianBump:
    width: float
    amplitude: float
    center: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")


@dataclass(frozen=True)
class PlaneWave:
    k: tuple[int, ...]
    amplitude: complex


@dataclass(frozen=True)
class ShellPacket:
    """Localized Gaussian wave packet with carrier on dyadic shell shell_k.

    Seeded random center and carrier direction; the spectrum is clipped to
    the shell by the shell projector, then L2-normalized.  Localization (as
    opposed to homogeneous random shell data) is what makes frequency-
    separated products decay: a delocalized high shell overlaps a low one
    at a rate independent of the separation.  center and width override the
    seeded placement and the default width recipe (used by experiments that
    co-locate packet pairs).
    """

    shell_k: int
    target_l2: float
    seed: int
    center: tuple[float, ...] | None = None
    width: float | None = None

    def __post_init__(self) -> None:
        if self.shell_k < 0:
            raise ValueError("shell_k must be >= 0")
        if not self.target_l2 > 0:
            raise ValueError("target_l2 must be positive")
        if self.width is not None and not self.width > 0:
            raise ValueError("width must be positive")


DataSpec = Union[RoughRandom, GaussianBump, PlaneWave, ShellPacket]


def _axes(grid: Grid) -> list[np.ndarray]:
    x = np.arange(grid.points_per_axis) * grid.spacing
    return [x] * grid.dim


def _min_image(delta: np.ndarray, box: float) -> np.ndarray:
    return delta - box * np.round(delta / box)


def generate(grid: Grid, spec: DataSpec) -> Field:
    """Deterministic field construction; pure in (grid, spec)."""
    if isinstance(spec, RoughRandom):
        return _rough_random(grid, spec)
    if isinstance(spec, GaussianBump):
        return _gaussian_bump(grid, spec)
    if isinstance(spec, PlaneWave):
        return _plane_wave(grid, spec)
    if isinstance(spec, ShellPacket):
        return _shell_packet(grid, spec)
    raise TypeError(f"unknown data spec {spec!r}")


def _rough_random(grid: Grid, spec: RoughRandom) -> Field:
    rng = np.random.default_rng(spec.seed)
    g = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    profile = (1.0 + grid.k_sq) ** (-(spec.s + grid.dim / 2.0) / 2.0)
    values = profile * g
    out = Field(grid, values, SPECTRAL)
    norm = sobolev_norm(out, spec.s)
    return Field(grid, values * (spec.target_hs_norm / norm), SPECTRAL)


def _gaussian_bump(grid: Grid, spec: GaussianBump) -> Field:
    center = spec.center
    if center is None:
        center = (grid.box_length / 2.0,) * grid.dim
    if len(center) != grid.dim:
        raise ValueError("center must have one coordinate per dimension")
    x = _axes(grid)
    r_sq = np.zeros(grid.shape)
    for ax in range(grid.dim):
        sh = [1] * grid.dim
        sh[ax] = grid.points_per_axis
        d = _min_image(x[ax] - center[ax], grid.box_length)
        r_sq = r_sq + (d**2).reshape(sh)
    values = spec.amplitude * np.exp(-r_sq / (2.0 * spec.width**2)) + 0j
    return Field(grid, values, PHYSICAL)


def _plane_wave(grid: Grid, spec: PlaneWave) -> Field:
    if len(spec.k) != grid.dim:
        raise ValueError("wave vector must have one component per dimension")
    m = grid.points_per_axis
    for ki in spec.k:
        if not -m // 2 <= int(ki) < m // 2:
            raise ValueError(f"wave index {ki} not representable on the lattice")
    values = np.zeros(grid.shape, dtype=np.complex128)
    idx = tuple(int(ki) % m for ki in spec.k)
    values[idx] = spec.amplitude * m ** (grid.dim / 2.0)
    return Field(grid, values, SPECTRAL)


def packet_width(shell_k: int, box_length: float) -> float:
    """Envelope width for shell packets: narrow enough to localize, wide
    enough that the spectral blob sits inside the dyadic shell."""
    return min(8.0 * 2.0 ** (-shell_k), box_length / 24.0)


def _shell_packet(grid: Grid, spec: ShellPacket) -> Field:
    rng = np.random.default_rng(spec.seed)
    L = grid.box_length
    center = np.asarray(spec.center, float) if spec.center is not None else rng.uniform(0.0, L, size=grid.dim)
    if center.shape != (grid.dim,):
        raise ValueError("center must have one coordinate per dimension")
    direction = rng.standard_normal(grid.dim)
    direction /= np.linalg.norm(direction)

    bracket_target = 1.5 * 2.0**spec.shell_k
    carrier_mag = math.sqrt(max(bracket_target**2 - 1.0, 0.0))
    carrier = carrier_mag * direction
    sigma = spec.width if spec.width is not None else packet_width(spec.shell_k, L)
    sigma = max(sigma, 3.0 * grid.spacing)

    x = _axes(grid)
    phase = np.zeros(grid.shape)
    r_sq = np.zeros(grid.shape)
    for ax in range(grid.dim):
        sh = [1] * grid.dim
        sh[ax] = grid.points_per_axis
        d = _min_image(x[ax] - center[ax], L)
        r_sq = r_sq + (d**2).reshape(sh)
        phase = phase + (carrier[ax] * x[ax]).reshape(sh)
    values = np.exp(-r_sq / (2.0 * sigma**2)) * np.exp(1j * phase)

    spec_values = fftn_ortho(values) * symbol_on_grid(grid, DyadicShell(spec.shell_k))
    out = Field(grid, spec_values, SPECTRAL)
    norm = mass(out)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError(f"dyadic shell {spec.shell_k} has no support on this grid")
    return Field(grid, spec_values * (spec.target_l2 / norm), SPECTRAL)


def spectral_slope(field: Field, fit_range: tuple[float, float]) -> float:
    """Least-squares slope of log(shell-averaged |phi_hat|) vs log<xi>."""
    lo, hi = fit_range
    if not 0 <= lo < hi:
        raise ValueError("fit_range must satisfy 0 <= lo < hi")
    g = field.grid
    spec = to_spectral(field)
    unit = 2.0 * np.pi / g.box_length
    ridx = np.rint(g.k_abs / unit).astype(np.intp).reshape(-1)
    amp = np.abs(spec.values).reshape(-1)

    n_bins = int(ridx.max()) + 1
    sums = np.bincount(ridx, weights=amp, minlength=n_bins)
    counts = np.bincount(ridx, minlength=n_bins)
    radii = np.arange(n_bins) * unit
    ok = (counts > 0) & (radii >= lo) & (radii <= hi) & (sums > 0)
    if np.count_nonzero(ok) < 2:
        raise ValueError("fit_range contains fewer than two populated shells")
    xs = np.log(np.sqrt(1.0 + radii[ok] ** 2))
    ys = np.log(sums[ok] / counts[ok])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)
