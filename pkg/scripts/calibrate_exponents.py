"""Oracle calibration runs behind the frozen exponent thresholds.

The acceptance gates (2D sweep slope <= -1.0, 3D slope <= -0.5, product
decay slope <= -0.25) are torus desk-scale figures, not the continuum rates
(-3/2, -1, -1/2).  This script reproduces the calibration that froze them:

  * increment sweeps at the acceptance configuration plus a dt/2 twin per N
    (the refinement gate oracle: integrator error must move increments by
    far less than the measured effect);
  * the product-decay measurement at the acceptance configuration plus a
    denser-snapshot twin (time-quadrature oracle).

Run:  python scripts/calibrate_exponents.py [--quick]
(--quick shrinks grids/trials ~8x for a smoke pass; the frozen thresholds
come from the full configuration.)
"""

from __future__ import annotations

import argparse

import numpy as np

from nlslab import RoughRandom, almost_conservation_sweep, bilinear_strichartz, make_grid


def sweep_report(title, grid, spec, s, delta, n_list):
    result = almost_conservation_sweep(grid, spec, s, delta, n_list, refine_check=True)
    print(f"\n== {title} ==")
    for row in result.rows:
        change = result.refinement[row.N]
        print(
            f"  N={row.N:6.1f}  increment={row.increment:.6e}  "
            f"dt/2 change={change:+.2%}"
        )
    print(f"  fitted slope {result.fit.slope:.4f}  r^2 {result.fit.r_squared:.4f}")
    return result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    if args.quick:
        g2, n2 = make_grid(2, 128, 2 * np.pi), [4.0, 8.0, 16.0]
        g3, n3 = make_grid(3, 32, np.pi), [4.0, 8.0]
        gb, trials = make_grid(2, 512, 8 * np.pi), 4
        k2_list = [2, 4]
    else:
        g2, n2 = make_grid(2, 256, 2 * np.pi), [4.0, 8.0, 16.0, 32.0]
        g3, n3 = make_grid(3, 64, np.pi), [4.0, 8.0, 16.0]
        gb, trials = make_grid(2, 1024, 8 * np.pi), 20
        k2_list = [2, 4, 6]

    sweep_report(
        "2D increment sweep (continuum reference -1.5; frozen gate -1.0)",
        g2, RoughRandom(0.7, 5.0, 7), 0.7, 0.1, n2,
    )
    if len(n3) >= 3 or args.quick:
        try:
            sweep_report(
                "3D increment sweep (continuum reference -1.0; frozen gate -0.5)",
                g3, RoughRandom(0.9, 5.0, 11), 0.9, 0.1, n3,
            )
        except ValueError as exc:
            print(f"\n3D sweep skipped: {exc}")

    print("\n== product decay under the free flow "
          "(continuum reference -0.5; frozen gate -0.25) ==")
    for n_snapshots in (25, 49):
        result = bilinear_strichartz(
            gb, 0, k2_list, 0.1, trials=trials, seed=7, n_snapshots=n_snapshots
        )
        print(
            f"  snapshots={n_snapshots}: slope {result.fit.slope:.4f}  "
            f"conjugated {result.fit_conj.slope:.4f}"
        )


if __name__ == "__main__":
    main()
