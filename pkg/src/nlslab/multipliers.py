"""Radial Fourier multipliers: the smoothing operator, dyadic shells, weights.

The smoothing multiplier is 1 up to its cutoff N, follows (N/r)^(1-s) from
2N on, and blends between with a quintic-smoothstep profile in
u = log2(r/N), which keeps it C^2, monotone, and exact at both plateaus.
Dyadic shells form an exact smooth partition of unity in log2<xi>, with
<A> = (1 + A^2)^(1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import SPECTRAL, Field, to_spectral, transform
from .grid import Grid

_LOG2 = math.log(2.0)


def smoothstep(u):
    """Clamped quintic smoothstep: 0 below 0, 1 above 1, 6u^5-15u^4+10u^3 between."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


class RadialSymbol:
    """Base type: a nonnegative radial profile evaluated at |xi|."""

    def profile(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class SmoothingMultiplier(RadialSymbol):
    """1 on [0, N], (N/r)^(1-s) on [2N, inf), smooth monotone blend between."""

    N: float
    s: float

    def __post_init__(self) -> None:
        if not self.N > 0:
            raise ValueError(f"cutoff N must be positive, got {self.N}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        high = r >= 2.0 * self.N
        out[high] = (self.N / r[high]) ** (1.0 - self.s)
        mid = (r > self.N) & ~high
        if np.any(mid):
            u = np.log2(r[mid] / self.N)
            out[mid] = np.exp((self.s - 1.0) * _LOG2 * smoothstep(u))
        return out


@dataclass(frozen=True)
class DyadicShell(RadialSymbol):
    """Member k of a partition of unity in t = log2<xi>.

    Shell 0 is 1 - S(t); shell k >= 1 is S(t-(k-1)) - S(t-k).  Each shell is
    supported where <xi> lies in [2^(k-1), 2^(k+1)], and any initial run of
    shells telescopes to 1 wherever the last one has turned fully on.
    """

    k: int

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"shell index must be >= 0, got {self.k}")

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        t = 0.5 * np.log2(1.0 + r * r)
        if self.k == 0:
            return 1.0 - smoothstep(t)
        return smoothstep(t - (self.k - 1)) - smoothstep(t - self.k)


@dataclass(frozen=True)
class BracketPower(RadialSymbol):
    """<xi>^p."""

    p: float

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return (1.0 + r * r) ** (self.p / 2.0)


@dataclass(frozen=True)
class GradientWeight(RadialSymbol):
    """|xi|."""

    def profile(self, r: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class TabulatedRadial(RadialSymbol):
    """Custom profile given by linear interpolation of (radius, value) pairs."""

    radii: tuple[float, ...]
    values: tuple[float, ...]

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.radii, self.values)


def smoothing_multiplier(N: float, s: float) -> SmoothingMultiplier:
    return SmoothingMultiplier(float(N), float(s))


def symbol_value(symbol: RadialSymbol, radius):
    """Evaluate the radial profile at one radius or an array of radii."""
    r = np.asarray(radius, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = symbol.profile(r)
    if np.isscalar(radius) or np.ndim(radius) == 0:
        return float(out)
    return out


@lru_cache(maxsize=128)
def symbol_on_grid(grid: Grid, symbol: RadialSymbol) -> np.ndarray:
    """Symbol evaluated on the grid's |xi| lattice; cached and read-only."""
    out = symbol.profile(grid.k_abs)
    out.flags.writeable = False
    return out


def apply_symbol(field: Field, symbol: RadialSymbol, target_tag: str | None = None) -> Field:
    """Multiply the spectrum pointwise by the symbol; return in target_tag
    (default: the input field's tag)."""
    tag = field.space_tag if target_tag is None else target_tag
    spec = to_spectral(field)
    out = Field(field.grid, spec.values * symbol_on_grid(field.grid, symbol), SPECTRAL)
    return transform(out, tag)


def dyadic_shell_range(grid: Grid) -> range:
    """Shell indices needed to reconstruct any field on this grid exactly."""
    t_max = 0.5 * math.log2(1.0 + grid.max_abs_freq**2)
    return range(0, int(math.floor(t_max)) + 2)


def dyadic_project(field: Field, k: int) -> Field:
    """Restrict (smoothly) to the k-th dyadic shell in <xi>."""
    if k not in dyadic_shell_range(field.grid):
        raise ValueError(
            f"shell {k} is outside the representable range {dyadic_shell_range(field.grid)}"
        )
    return apply_symbol(field, DyadicShell(k))
