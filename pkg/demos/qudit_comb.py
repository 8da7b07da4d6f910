"""Frequency-bin entanglement from a comb-filtered input.

Filters a broad pulse with a frequency comb, scatters it, and sweeps the
coupling width relative to the comb peak width.
"""

import argparse

from frengate.entanglement import qudit_regime, qudit_sweep
from frengate.scattering import CombFilter
from frengate.spectral import PhysicalParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fsr", type=float, default=1e-5, help="comb line spacing")
    ap.add_argument("--peak-width", type=float, default=1e-6)
    ap.add_argument("--alpha", type=float, default=2e-5)
    ap.add_argument("--gamma", type=float, default=2e-4)
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.1, 0.5, 1, 3, 10, 20, 45])
    ap.add_argument("-n", type=int, default=1024)
    args = ap.parse_args()

    filt = CombFilter(args.fsr, args.peak_width)
    table = qudit_sweep(args.ratios, PhysicalParams(Gamma=args.gamma), args.alpha, filt, n=args.n)
    print(f"{'beta/dw':>8} {'regime':>14} {'P_success':>10} {'K':>8}")
    for row in table.rows:
        if row["status"] != "ok":
            print(f"{row['ratio']:>8g}  failed: {row['error']}")
            continue
        regime = qudit_regime(row["ratio"] * args.peak_width, args.peak_width, args.alpha)
        print(f"{row['ratio']:>8g} {regime:>14} {row['p_success']:>10.4f} {row['schmidt_number']:>8.3f}")


if __name__ == "__main__":
    main()
