"""How fast the agent loop drives system degeneracy down.

Prints snapshots of the median degeneracy trajectory for growing user
counts. Light loads start feasible or get there almost immediately;
eight users on eight antennas keep negotiating for a few dozen
iterations before the allocation settles.
"""

import argparse

from rsmapc.config import SystemConfig
from rsmapc.experiments import convergence_profile


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    checkpoints = (0, 1, 2, 3, 5, 10, 20, 40)
    print("median system degeneracy by iteration (gradient agents, SNR 15 dB):")
    print("  K   " + "".join(f"it{c:<5d}" for c in checkpoints) + "last")
    for k in (2, 4, 8):
        cfg = SystemConfig(
            K=k, M_t=8, M_r=2, snr_db=15.0, impairment="ideal",
            trials=args.trials, seed=args.seed,
        )
        rows = convergence_profile(cfg, schemes=("abm_gradient",))
        medians = [r["dsys_median"] for r in rows]
        cells = "".join(
            f"{medians[min(c, len(medians) - 1)]:<7.3f}" for c in checkpoints
        )
        print(f"  {k}   {cells}{medians[-1]:.3f}  ({len(medians) - 1} iters)")


if __name__ == "__main__":
    main()
