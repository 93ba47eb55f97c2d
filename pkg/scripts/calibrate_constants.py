"""Brute-force validation pass behind the frozen comparison constants.

Maximizes the relevant ratios over randomized fields (rough profiles, white
spectra, transition-band-concentrated spectra, physical spikes) for
s in {0.6, 0.7, 0.9} and cutoffs 4..64, in 2D and 3D:

  * quartic side:      (1/4) ||I phi||_L4^4 / ||phi||_L4^4   -> C4
  * two-sided bound:   ||phi||_{H^s}^2 / (16 (E(I phi) + mass^2))  <= 1
  * gradient bound:    |xi| m(xi) / (2 N^(1-s) <xi>^s)  <= 1 on dense radii

Run:  python scripts/calibrate_constants.py [--trials 40]
The frozen values live in nlslab.functionals (QUARTIC_COMPARISON_CONSTANT,
HS_COMPARISON_CONSTANT).
"""

from __future__ import annotations

import argparse

import numpy as np

from nlslab import Field, RoughRandom, generate, hs_energy_comparison, lp_norm, make_grid
from nlslab.functionals import modified_energy, modified_energy_upper_bound
from nlslab.multipliers import apply_symbol, smoothing_multiplier, symbol_value


def random_field(grid, kind, s, N, rng):
    if kind == 0:
        return generate(grid, RoughRandom(s, 1.0, int(rng.integers(1e9))))
    if kind == 1:  # white spectrum
        v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        return Field(grid, v, "spectral")
    if kind == 2:  # concentrated near the multiplier transition band
        v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        v = v * ((grid.k_abs > 0.5 * N) & (grid.k_abs < 4 * N))
        return Field(grid, v, "spectral") if np.any(np.abs(v) > 0) else None
    v = np.zeros(grid.shape, dtype=np.complex128)  # physical spikes
    flat = v.reshape(-1)
    idx = rng.integers(0, flat.size, 5)
    flat[idx] = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    return Field(grid, v, "physical")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=40)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    grids = [make_grid(2, 32, 2 * np.pi), make_grid(3, 16, 2 * np.pi)]
    worst_c4 = worst_two_sided = worst_forward = 0.0
    cases = 0
    for grid in grids:
        for s in (0.6, 0.7, 0.9):
            for N in (4.0, 8.0, 16.0, 32.0, 64.0):
                for trial in range(args.trials):
                    f = random_field(grid, trial % 4, s, N, rng)
                    if f is None:
                        continue
                    l4 = lp_norm(f, 4)
                    if l4 == 0:
                        continue
                    smoothed = apply_symbol(f, smoothing_multiplier(N, s))
                    worst_c4 = max(worst_c4, 0.25 * lp_norm(smoothed, 4) ** 4 / l4**4)
                    worst_two_sided = max(worst_two_sided, hs_energy_comparison(f, N, s).ratio)
                    worst_forward = max(
                        worst_forward,
                        modified_energy(f, N, s) / modified_energy_upper_bound(f, N, s),
                    )
                    cases += 1

    radii = np.linspace(0.0, 400.0, 200001)
    worst_grad = 0.0
    for s in (0.6, 0.7, 0.9):
        for N in (4.0, 8.0, 16.0, 32.0, 64.0):
            m = symbol_value(smoothing_multiplier(N, s), radii)
            worst_grad = max(
                worst_grad,
                float(np.max(radii * m / (2.0 * N ** (1 - s) * (1 + radii**2) ** (s / 2)))),
            )

    print(f"cases examined: {cases}")
    print(f"sup (1/4)||I phi||_4^4 / ||phi||_4^4     = {worst_c4:.4f}  (frozen C4 = 0.5)")
    print(f"sup ||phi||_Hs^2 / (16 (E(I phi)+m^2))   = {worst_two_sided:.4f}  (must be <= 1)")
    print(f"sup E(I phi) / forward bound             = {worst_forward:.4f}  (must be <= 1)")
    print(f"sup |xi| m / (2 N^(1-s) <xi>^s)          = {worst_grad:.4f}  (must be <= 1)")


if __name__ == "__main__":
    main()
