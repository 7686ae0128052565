#!/usr/bin/env python3
"""Print the one-off calibrations the models rely on.

* time scale of the closed-form trap fidelity against the determinant result
* the LMG field-sign convention and the crossing counts it implies
* cutoff sensitivity of the delta-impurity spectrum and orthogonality exponent
"""
import math

from quenchqsl import fermi, lmg


def main():
    print("trap closed-form time scale (candidates 1 and eta):")
    for eta in (0.5, 1.2, 1.5, 2.0, 4.0):
        c, dev = fermi.calibrate_time_scale(eta)
        print(f"  eta={eta:<4} picks c={c:<4} max |dF| = {dev:.1e}")

    conv = lmg.frozen_convention()
    print(f"\nLMG sign convention: bath field {conv.bath_field:+d}, impurity field {conv.impurity_field:+d}")
    for N in (10, 100, 1000):
        sweep = lmg.spectrum_sweep(N, [1.0, 2.0])
        j2 = lmg.ground_info(2.0, N).j_crossings
        print(f"  N={N:<5} crossings in (1, 2]: {len(sweep.crossings):4d}  first at {sweep.crossings[0]:.6f}"
              f"  j(lambda=2) = {j2}")
    for N in (10, 100):
        j_big = lmg.ground_info(1e6, N).j_crossings
        print(f"  N={N:<5} j at lambda=1e6: {j_big} (N/2 = {N // 2})")

    print("\ndelta impurity, kappa=0.5:")
    for N in (10, 30, 60):
        drifts = [fermi.delta_cutoff_drift(0.5, N, m * N) for m in (4, 8, 16)]
        print(f"  N={N:<3} level drift under M -> 2M for M = 4N, 8N, 16N: "
              + ", ".join(f"{d:.1e}" for d in drifts))
    Ns = list(range(10, 61, 10))
    for renorm in (False, True):
        a = fermi.anderson_alpha(0.5, Ns, renormalize=renorm).slope
        b = fermi.anderson_alpha(0.5, Ns, cutoff_factor=2, renormalize=renorm).slope
        label = "renormalized" if renorm else "bare        "
        print(f"  {label} slope {a:.4f} -> {b:.4f} on doubling ({abs(b / a - 1):.1%})")
    print(f"\nlarge-N t_min at eta=1.5, theta=1e-2, in units of pi/eta: "
          f"{fermi.t_min(1.5, 1000, 1e-2).large_n * 1000 / (math.pi / 1.5):.4f} / N")


if __name__ == "__main__":
    main()
