"""Command line entry point: ``kacpp <experiment> --config <file> [overrides]``."""
from __future__ import annotations

import argparse
from dataclasses import asdict
import json
import logging
import os
import sys

from .experiments import KINDS, SIGNS, ConfigError, ExperimentConfig, RunAborted, run, write_outputs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kacpp", description="Point-process experiments for Kac polynomial roots.")
    p.add_argument("experiment", choices=KINDS)
    p.add_argument("--config", help="YAML file of config keys")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int, dest="M")
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--law")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--plots", help="directory for SVG plots")
    p.add_argument("--sign-convention", choices=sorted(SIGNS), dest="sign_convention")
    p.add_argument("--N", dest="N_override", help="grid size, or 'desk'")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    d = asdict(base)
    d["kind"] = args.experiment
    if "KACPP_WORKERS" in os.environ and not args.workers:
        d["workers"] = int(os.environ["KACPP_WORKERS"])
    for key in ("n", "M", "master_seed", "law", "workers", "out", "csv", "plots", "sign_convention"):
        v = getattr(args, key)
        if v is not None:
            d[key] = v
    if args.N_override is not None:
        d["N_override"] = args.N_override if args.N_override == "desk" else int(args.N_override)
    return ExperimentConfig.from_dict(d)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args).validate()
        res, outputs = run(cfg)
        write_outputs(cfg, res, outputs)
    except (ConfigError, ValueError) as e:
        print(f"kacpp: config error: {e}", file=sys.stderr)
        return 2
    except RunAborted as e:
        print(f"kacpp: aborted: {e}", file=sys.stderr)
        return 3
    if not cfg.out:
        print(res.to_json())
    else:
        print(json.dumps(res.aggregates, indent=1, default=str)[:4000])
    return 0


if __name__ == "__main__":
    sys.exit(main())
