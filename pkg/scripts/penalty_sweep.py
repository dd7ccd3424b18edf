"""Sweep the penalty distance normaliser and report how often the high-SD
row of the second experiment spreads its routes wider than the low-SD row.
"""

import argparse

from divroute.experiments import ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description="penalty normaliser sweep")
    ap.add_argument("--normalizers", type=float, nargs="+",
                    default=[1, 30, 100, 300, 1e3, 2e3, 5e3, 2e4, 1e5, 1e6])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    print("normalizer  standard  verbatim")
    for norm in args.normalizers:
        out = []
        for exponent in ("standard", "verbatim"):
            spec = ExperimentSpec(2, tuple(range(args.seeds)),
                                  {"distance_normalizer": norm, "penalty_exponent": exponent},
                                  render=False)
            out.append(run_experiment(spec).summary["high_gt_low_frac"])
        print(f"{norm:10g}  {out[0]:8.2f}  {out[1]:8.2f}")


if __name__ == "__main__":
    main()
