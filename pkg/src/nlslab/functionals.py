"""Scalar diagnostics of a field or a sampled trajectory.

Conventions: all spectral sums and physical quadratures carry the cell
weight (L/M)^dim, so continuum functionals are reproduced exactly for
band-limited integrands.  The quartic term |phi|^4 is integrated on a
zero-padded grid large enough that its quadrature is exact for the field's
guaranteed spectral band (2x padding for full-band fields).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
import scipy.fft as sfft

from . import kernels
from .field import SPECTRAL, Field, ifftn_ortho, to_physical, to_spectral
from .grid import Grid
from .multipliers import SmoothingMultiplier, smoothstep, symbol_on_grid

# Constant of the two-sided H^s / smoothed-energy comparison; adequate for
# every lattice since <xi>^(2s) <= 2 max(1, |xi|^(2s)) and the multiplier
# obeys m(r) >= 2^(s-1) (N/r)^(1-s) for r >= N.
HS_COMPARISON_CONSTANT = 16.0

# Quartic side of the forward energy bound: (1/4)||I phi||_L4^4 <= C4 ||phi||_L4^4.
# Frozen after the brute-force maximization in scripts/calibrate_constants.py
# (observed suprema stay below 0.26; margin ~2x).
QUARTIC_COMPARISON_CONSTANT = 0.5

_BUDGET_LIMIT = 1e12


def _flat(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a).reshape(-1)


# ---------------------------------------------------------------------------
# basic norms
# ---------------------------------------------------------------------------

def mass(field: Field) -> float:
    """Discrete L2 norm; identical in either space tag."""
    return math.sqrt(kernels.abs2_sum(_flat(field.values)) * field.grid.quad_weight)


@lru_cache(maxsize=256)
def _sobolev_weight(grid: Grid, s: float, homogeneous: bool) -> np.ndarray:
    if homogeneous:
        k_sq = grid.k_sq.copy()
        zero = k_sq == 0.0
        k_sq[zero] = 1.0
        w = k_sq**s
        w[zero] = 0.0
    else:
        w = (1.0 + grid.k_sq) ** s
    w = _flat(w)
    w.flags.writeable = False
    return w


def sobolev_norm(field: Field, s: float, homogeneous: bool = False) -> float:
    """(sum w(xi)^(2s) |phi_hat|^2)^(1/2), w = <xi> or |xi| (zero mode dropped)."""
    spec = to_spectral(field)
    w = _sobolev_weight(field.grid, float(s), bool(homogeneous))
    return math.sqrt(
        kernels.weighted_abs2_sum(_flat(spec.values), w) * field.grid.quad_weight
    )


def lp_norm(field: Field, p: float) -> float:
    """Physical-space quadrature of |phi|^p; p = inf returns the max modulus."""
    if not (p >= 1):
        raise ValueError(f"p must be in [1, inf], got {p}")
    phys = to_physical(field)
    a = np.abs(phys.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 2:
        return mass(field)
    return float((np.sum(a**p) * field.grid.quad_weight) ** (1.0 / p))


# ---------------------------------------------------------------------------
# energy and the smoothed energy
# ---------------------------------------------------------------------------

class _QuarticQuadrature:
    """Exact integral of |phi|^4 via zero-padding to pad_points per axis.

    Exact whenever 4 * (per-axis spectral band of phi) < pad_points; the
    default 2M covers every field representable on the grid.
    """

    def __init__(self, grid: Grid, pad_points: int):
        if pad_points < grid.points_per_axis:
            raise ValueError("pad_points must be >= the grid resolution")
        self.grid = grid
        self.pad_points = int(pad_points)
        m, p = grid.points_per_axis, self.pad_points
        idx = np.fft.fftfreq(m, 1.0 / m).astype(np.intp)  # signed indices
        self.index_1d = np.where(idx >= 0, idx, idx + p)
        self.scale = (p / m) ** (grid.dim / 2.0)
        self.weight = (grid.box_length / p) ** grid.dim

    def integral_abs4(self, spec_values: np.ndarray) -> float:
        g = self.grid
        if self.pad_points == g.points_per_axis:
            phys = ifftn_ortho(spec_values)
            return kernels.abs4_sum(_flat(phys)) * g.quad_weight
        buf = np.zeros((self.pad_points,) * g.dim, dtype=np.complex128)
        buf[np.ix_(*([self.index_1d] * g.dim))] = spec_values * self.scale
        phys = ifftn_ortho(buf)
        return kernels.abs4_sum(_flat(phys)) * self.weight


@lru_cache(maxsize=32)
def _quartic_quadrature(grid: Grid, pad_points: int) -> _QuarticQuadrature:
    return _QuarticQuadrature(grid, pad_points)


def quartic_pad_points(grid: Grid, band_index: int | None = None) -> int:
    """Smallest fast FFT length giving exact |phi|^4 quadrature for fields
    whose per-axis index magnitude is bounded by band_index (full band: 2M)."""
    if band_index is None:
        return 2 * grid.points_per_axis
    return int(sfft.next_fast_len(max(4 * int(band_index) + 1, grid.points_per_axis)))


def kinetic_energy(field: Field) -> float:
    """(1/2) integral |grad phi|^2, computed spectrally."""
    spec = to_spectral(field)
    return 0.5 * kernels.weighted_abs2_sum(
        _flat(spec.values), _flat(field.grid.k_sq)
    ) * field.grid.quad_weight


def potential_energy(field: Field, pad_points: int | None = None) -> float:
    """(1/4) integral |phi|^4 on the zero-padded quadrature grid."""
    spec = to_spectral(field)
    pad = quartic_pad_points(field.grid) if pad_points is None else pad_points
    return 0.25 * _quartic_quadrature(field.grid, pad).integral_abs4(spec.values)


def energy(field: Field, pad_points: int | None = None) -> float:
    """integral (1/2)|grad phi|^2 + (1/4)|phi|^4."""
    return kinetic_energy(field) + potential_energy(field, pad_points)


def modified_energy(field: Field, N: float, s: float, pad_points: int | None = None) -> float:
    """Energy of the smoothed field: energy(I_N phi) with the (N, s) multiplier."""
    spec = to_spectral(field)
    g = field.grid
    m = symbol_on_grid(g, SmoothingMultiplier(float(N), float(s)))
    smoothed = spec.values * m
    kin = 0.5 * kernels.weighted_abs2_sum(_flat(smoothed), _flat(g.k_sq)) * g.quad_weight
    pad = quartic_pad_points(g) if pad_points is None else pad_points
    pot = 0.25 * _quartic_quadrature(g, pad).integral_abs4(smoothed)
    return kin + pot


def modified_energy_upper_bound(field: Field, N: float, s: float) -> float:
    """2 (N^(1-s) ||phi||_{Hdot^s})^2 + C4 ||phi||_L4^4, the forward comparison."""
    hdot = sobolev_norm(field, s, homogeneous=True)
    return 2.0 * (float(N) ** (1.0 - s) * hdot) ** 2 + QUARTIC_COMPARISON_CONSTANT * lp_norm(field, 4) ** 4


class ComparisonResult(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def hs_energy_comparison(field: Field, N: float, s: float) -> ComparisonResult:
    """||phi||_{H^s}^2 against C (E(I_N phi) + mass^2), C = HS_COMPARISON_CONSTANT."""
    lhs = sobolev_norm(field, s) ** 2
    rhs = HS_COMPARISON_CONSTANT * (modified_energy(field, N, s) + mass(field) ** 2)
    if rhs == 0.0:
        return ComparisonResult(lhs, rhs, 0.0 if lhs == 0.0 else math.inf)
    return ComparisonResult(lhs, rhs, lhs / rhs)


# ---------------------------------------------------------------------------
# mixed space-time norms
# ---------------------------------------------------------------------------

def _check_uniform_times(times: np.ndarray) -> float:
    if len(times) < 2:
        raise ValueError("need at least 2 snapshots")
    dt = np.diff(times)
    if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-8 * max(abs(dt[0]), 1e-300):
        raise ValueError("snapshots must be at uniform, increasing time spacing")
    return float(dt[0])


def mixed_norm(snapshots: Sequence[tuple[float, Field]], q: float, r: float) -> float:
    """L^q in time of the spatial L^r norm, trapezoid rule in t."""
    if not (q >= 1 and r >= 1):
        raise ValueError("q and r must lie in [1, inf]")
    times = np.array([t for t, _ in snapshots], dtype=float)
    _check_uniform_times(times)
    g = np.array([lp_norm(f, r) for _, f in snapshots])
    if np.isinf(q):
        return float(g.max())
    return float(np.trapezoid(g**q, times) ** (1.0 / q))


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponent pair (q, r) with 1/q + dim/(2r) = dim/4, excluding (dim,q)=(2,2)."""

    q: float
    r: float
    dim: int

    def __post_init__(self) -> None:
        if self.q < 2 or self.r < 2:
            raise ValueError(f"admissible pairs need q, r >= 2, got ({self.q}, {self.r})")
        if self.dim == 2 and self.q == 2:
            raise ValueError("(dim, q) = (2, 2) is excluded")
        lhs = 1.0 / self.q + self.dim / (2.0 * self.r)
        if abs(lhs - self.dim / 4.0) > 1e-12:
            raise ValueError(
                f"1/q + dim/(2r) = {lhs} differs from dim/4 = {self.dim / 4.0}"
            )


def check_admissible(q: float, r: float, dim: int) -> bool:
    try:
        AdmissiblePair(float(q), float(r), int(dim))
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# approximate dispersive space-time norm
# ---------------------------------------------------------------------------

def bump_window(n: int, flat_fraction: float = 0.6) -> np.ndarray:
    """Smooth bump on n uniform samples: quintic-smoothstep rise/fall, flat
    on the middle flat_fraction of the interval, zero at both endpoints."""
    if n < 4:
        raise ValueError("window needs at least 4 samples")
    if not 0.0 < flat_fraction < 1.0:
        raise ValueError("flat_fraction must lie in (0, 1)")
    edge = 0.5 * (1.0 - flat_fraction)
    u = np.linspace(0.0, 1.0, n)
    return smoothstep(u / edge) * smoothstep((1.0 - u) / edge)


def _xsb_accumulate(
    snapshots: Sequence[tuple[float, Field]],
    spatial_weight: np.ndarray,
    b: float,
    window: np.ndarray,
) -> float:
    times = np.array([t for t, _ in snapshots], dtype=float)
    dt = _check_uniform_times(times)
    grid = snapshots[0][1].grid
    for _, f in snapshots:
        if f.grid != grid:
            raise ValueError("all snapshots must share one grid")
    if grid.max_abs_freq**2 * dt > np.pi:
        raise ValueError(
            "temporal aliasing: max |xi|^2 * snapshot spacing exceeds pi; "
            "sample the trajectory more densely"
        )
    n_t = len(snapshots)
    if window.shape != (n_t,):
        raise ValueError("window must have one value per snapshot")
    if window[0] != 0.0 or window[-1] != 0.0:
        raise ValueError("window must vanish at the interval endpoints")

    cube = np.empty((n_t,) + grid.shape, dtype=np.complex128)
    for i, (_, f) in enumerate(snapshots):
        cube[i] = to_spectral(f).values * window[i]
    cube = sfft.fft(cube, axis=0, norm="ortho", workers=-1)

    # Temporal analysis kernel exp(-i tau t): free modes exp(-i|xi|^2 t) land
    # at tau = -|xi|^2, so the modulation weight is <tau + |xi|^2>.
    tau = 2.0 * np.pi * np.fft.fftfreq(n_t, d=dt)
    mod = tau.reshape((n_t,) + (1,) * grid.dim) + grid.k_sq
    weight = spatial_weight * (1.0 + mod * mod) ** b
    total = float(np.sum(weight * (cube.real**2 + cube.imag**2)))
    return math.sqrt(total * grid.quad_weight * dt)


def xsb_norm(
    snapshots: Sequence[tuple[float, Field]],
    s: float,
    b: float,
    time_window: np.ndarray | None = None,
) -> float:
    """Windowed space-time norm with weight <xi>^s <tau + |xi|^2>^b.

    Upper-bounds the interval-restricted norm via one explicit smooth window
    extension.  The modulation sign is fixed so that free solutions of this
    solver sit at weight ~1; see xsb_norm_info for the emitted convention.
    """
    grid = snapshots[0][1].grid
    window = bump_window(len(snapshots)) if time_window is None else np.asarray(time_window, float)
    spatial = (1.0 + grid.k_sq) ** s
    return _xsb_accumulate(snapshots, spatial, b, window)


def xsb_gradient_norm(
    snapshots: Sequence[tuple[float, Field]],
    b: float,
    time_window: np.ndarray | None = None,
) -> float:
    """Same construction with spatial weight |xi|^2: the norm of grad(phi)
    at spatial regularity zero."""
    grid = snapshots[0][1].grid
    window = bump_window(len(snapshots)) if time_window is None else np.asarray(time_window, float)
    return _xsb_accumulate(snapshots, grid.k_sq, b, window)


def xsb_norm_info(snapshots: Sequence[tuple[float, Field]], s: float, b: float) -> dict:
    """Sidecar metadata describing the windowed-norm conventions."""
    times = np.array([t for t, _ in snapshots], dtype=float)
    dt = _check_uniform_times(times)
    return {
        "window": "quintic-smoothstep bump, flat on middle 60% of interval",
        "transform_sign": "temporal kernel exp(-i tau t); modulation weight <tau + |xi|^2>",
        "snapshot_spacing": dt,
        "n_snapshots": len(snapshots),
        "s": float(s),
        "b": float(b),
    }


# ---------------------------------------------------------------------------
# observers for the time stepper
# ---------------------------------------------------------------------------

def build_observers(
    grid: Grid,
    *,
    N: float | None = None,
    s: float | None = None,
    hs_s: float | None = None,
    band_index: int | None = None,
    include_energy: bool = True,
) -> dict[str, Callable[[Field], float]]:
    """Named functionals precompiled against one grid.

    band_index bounds the per-axis spectral support guaranteed by the caller
    (the dealias cutoff during dealiased evolution); it only shrinks the
    quartic quadrature grid, never changes any value.
    """
    obs: dict[str, Callable[[Field], float]] = {}
    w_cell = grid.quad_weight
    k_sq_flat = _flat(grid.k_sq)
    pad = quartic_pad_points(grid, band_index)
    quartic = _quartic_quadrature(grid, pad)

    def _mass(f: Field) -> float:
        return math.sqrt(kernels.abs2_sum(_flat(f.values)) * w_cell)

    obs["mass"] = _mass

    if include_energy:

        def _energy(f: Field) -> float:
            spec = to_spectral(f).values
            kin = 0.5 * kernels.weighted_abs2_sum(_flat(spec), k_sq_flat) * w_cell
            return kin + 0.25 * quartic.integral_abs4(spec)

        obs["energy"] = _energy

    if N is not None:
        if s is None:
            raise ValueError("modified-energy observer needs both N and s")
        m = symbol_on_grid(grid, SmoothingMultiplier(float(N), float(s)))

        def _modified(f: Field) -> float:
            spec = to_spectral(f).values * m
            kin = 0.5 * kernels.weighted_abs2_sum(_flat(spec), k_sq_flat) * w_cell
            return kin + 0.25 * quartic.integral_abs4(spec)

        obs["modified_energy"] = _modified

    if hs_s is not None:
        w_hs = _sobolev_weight(grid, float(hs_s), False)

        def _hs(f: Field) -> float:
            spec = to_spectral(f).values
            return math.sqrt(kernels.weighted_abs2_sum(_flat(spec), w_hs) * w_cell)

        obs["hs_norm"] = _hs

    return obs
