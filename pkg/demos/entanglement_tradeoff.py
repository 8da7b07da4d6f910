"""Trade entanglement against success probability by widening the coupling.

Sweeps r = beta / alpha and prints the Schmidt number and entropy of the
generated state next to the success probability.
"""

import argparse

from frengate.entanglement import tradeoff_sweep
from frengate.spectral import PhysicalParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1e-6)
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.25, 0.5, 1, 2, 4, 10])
    ap.add_argument("-n", type=int, default=384)
    ap.add_argument("--count", type=int, default=60, help="Hermite-Gauss modes per photon")
    args = ap.parse_args()

    table = tradeoff_sweep(args.ratios, PhysicalParams(), args.alpha, n=args.n, count=args.count)
    print(f"{'r':>6} {'P_success':>10} {'analytic':>10} {'K':>8} {'S [nats]':>9}")
    for row in table.rows:
        if row["status"] != "ok":
            print(f"{row['ratio']:>6g}  failed: {row['error']}")
            continue
        print(f"{row['ratio']:>6g} {row['p_success']:>10.4f} {row['p_analytic']:>10.4f} "
              f"{row['schmidt_number']:>8.3f} {row['entropy_nats']:>9.3f}")


if __name__ == "__main__":
    main()
