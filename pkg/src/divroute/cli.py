"""Command-line entry point: ``divroute {plan,mission,exp1,exp2,exp3,replay}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from divroute.config import SimConfig, load_config
from divroute.errors import ConfigError
from divroute.experiments import ExperimentSpec, mission_once, plan_once, replay, run_experiment

log = logging.getLogger("divroute")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--variance-mode", choices=["incremental", "exact"])
    p.add_argument("--penalty-exponent", choices=["standard", "verbatim"])
    p.add_argument("--penalty-distance", choices=["normalized", "raw"])


def _overrides(args) -> dict:
    out = {}
    if args.config:
        out.update({k: v for k, v in load_config(args.config).to_dict().items()
                    if v != getattr(SimConfig(), k)})
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    for flag, key in (("variance_mode", "variance_mode"), ("penalty_exponent", "penalty_exponent"),
                      ("penalty_distance", "penalty_distance")):
        if getattr(args, flag):
            out[key] = getattr(args, flag)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="divroute", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("plan", help="one-shot diverse planning on a generated world")
    _common(p)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mission", help="run the survey mission loop")
    _common(p)
    p.add_argument("--seed", type=int, default=0)

    for n in (1, 2, 3):
        p = sub.add_parser(f"exp{n}", help=f"experiment {n} driver")
        _common(p)
        p.add_argument("--seeds", type=int, nargs="+", default=list(range(20 if n < 3 else 50)))
        p.add_argument("--no-render", action="store_true", help="skip SVG output")
        if n == 1:
            p.add_argument("--penalize", action="store_true",
                           help="penalise later gain rows against earlier routes")

    p = sub.add_parser("replay", help="rerun an experiment from its manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.cmd == "replay":
            res = replay(args.manifest, args.out)
            print(json.dumps(res.summary, sort_keys=True))
            return 0
        overrides = _overrides(args)
        if args.cmd in ("plan", "mission"):
            cfg = SimConfig().replace(**overrides)
            if args.cmd == "plan":
                routes = plan_once(cfg, args.seed, args.out)
                for i, r in enumerate(routes):
                    print(f"route {i + 1}: edges={r.edge_count} length={r.total_length:.1f} "
                          f"base_cost={r.base_total_cost:.1f} cost={r.total_cost:.1f}")
            else:
                res, final = mission_once(cfg, args.seed, args.out)
                print(f"ticks={res.ticks} surveyed={res.estimate.surveyed.mean():.3f} "
                      f"final_cost={final.total_cost:.1f}")
            return 0
        n = int(args.cmd[-1])
        spec = ExperimentSpec(n, tuple(args.seeds), overrides, out_dir=args.out,
                              exp1_penalize=getattr(args, "penalize", False),
                              render=not args.no_render)
        res = run_experiment(spec)
        print(json.dumps(res.summary, sort_keys=True))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
