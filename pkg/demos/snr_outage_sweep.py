"""Outage and effective throughput against transmit SNR.

Runs paired trials for the agent loop and the minimax benchmark at two
loads. Outage falls monotonically with SNR, channel-estimation error
costs extra outage, and the eight-user system is always worse off than
the two-user one. The union-bound column upper-bounds the system outage
by construction.
"""

import argparse

from rsmapc.config import SystemConfig
from rsmapc.experiments import sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    snrs = (0.0, 5.0, 10.0, 15.0, 20.0)
    for k in (2, 8):
        for impairment in ("ideal", "practical"):
            cfg = SystemConfig(
                K=k, M_t=8, M_r=2, impairment=impairment,
                trials=args.trials, seed=args.seed,
            )
            rows = sweep(cfg, "snr_db", snrs,
                         schemes=("abm_gradient", "minimax_oracle"))
            print(f"\nK={k}, {impairment} estimation, {args.trials} trials:")
            print(f"  {'scheme':18s} {'snr':>4s} {'outage':>7s} {'union':>7s} "
                  f"{'effT':>7s}")
            for row in rows:
                print(f"  {row.scheme:18s} {row.axis_value:4.0f} "
                      f"{row.outage_sys:7.3f} {row.union_bound:7.3f} "
                      f"{row.eff_throughput:7.3f}")


if __name__ == "__main__":
    main()
