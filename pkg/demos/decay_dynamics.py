"""Time evolution of a doubly excited emitter into two photons.

Runs a decay preset, prints the intermediate-state population over time and
the fitted decay rate.
"""

import argparse

import numpy as np

from frengate.dynamics import PRESETS, evolve, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset", choices=PRESETS, nargs="?", default="adiabatic")
    ap.add_argument("--n-freq", type=int, default=400, help="frequency samples per photon; the run must end before the grid recurrence time")
    args = ap.parse_args()

    cfg = preset(args.preset, n_freq=args.n_freq)
    print(f"{args.preset}: g0 = {cfg.coupling.g0:g}, {cfg.n_steps} steps, "
          f"state dimension {cfg.state_dimension}")
    traj = evolve(cfg)
    for k in np.linspace(0, len(traj.times) - 1, 11).astype(int):
        print(f"  t = {traj.times[k]:10.4g}  P_2X = {traj.p2x[k]:.4f}  P_X = {traj.px[k]:.4f}")
    fit = traj.fit()
    print(f"max P_X {traj.max_px:.4f}, late P_X {traj.plateau_px():.4f}, "
          f"fitted rate {fit.gamma:.3e}, norm drift {traj.norm_drift:.1e}")


if __name__ == "__main__":
    main()
