"""Run all three experiments with their default seed sets and print summaries.

    python3 scripts/run_experiments.py --out results
"""

import argparse
import json
import time
from pathlib import Path

from divroute.experiments import ExperimentSpec, run_experiment

SEEDS = {1: range(20), 2: range(20), 3: range(50)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", type=int, choices=[1, 2, 3], nargs="+", default=[1, 2, 3])
    ap.add_argument("--no-render", action="store_true")
    args = ap.parse_args()
    for n in args.only:
        t0 = time.perf_counter()
        res = run_experiment(ExperimentSpec(n, tuple(SEEDS[n]), out_dir=args.out / f"exp{n}",
                                            render=not args.no_render))
        print(f"exp{n} ({time.perf_counter() - t0:.1f}s): {json.dumps(res.summary, sort_keys=True)}")


if __name__ == "__main__":
    main()
