"""Throughput versus user count up to the antenna limit.

With ten transmit antennas the system gains from extra users until the
spatial degrees of freedom run out; loading the tenth user collapses the
zero-forcing geometry and throughput drops sharply.
"""

import argparse

from rsmapc.config import SystemConfig
from rsmapc.experiments import sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=150)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    cfg = SystemConfig(
        K=2, M_t=10, M_r=2, snr_db=22.0, impairment="ideal",
        trials=args.trials, seed=args.seed,
    )
    schemes = ("abm_gradient", "minimax_oracle")
    rows = sweep(cfg, "users", list(range(2, 11)), schemes=schemes)

    print(f"M_t=10, SNR 22 dB, {args.trials} trials per point")
    by_scheme = {s: {} for s in schemes}
    for row in rows:
        by_scheme[row.scheme][int(row.axis_value)] = row.eff_throughput
    header = "  ".join(f"K={k:<2d}" for k in range(2, 11))
    print(f"  {'scheme':18s} {header}")
    for scheme, vals in by_scheme.items():
        cells = "  ".join(f"{vals[k]:4.1f}" for k in range(2, 11))
        print(f"  {scheme:18s} {cells}")


if __name__ == "__main__":
    main()
