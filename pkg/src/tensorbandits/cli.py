"""Command line entry point: ``simulate``, ``gen-instance`` and ``validate``."""

from __future__ import annotations

import argparse
import sys

from .environment import generate_synthetic_instance, save_instance
from .glm import LinkFamily
from .harness import ConfigError, ExperimentConfig, run_experiment
from .tensor_algebra import TransformSpec


def _simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.out is not None:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.base_seed = args.seed
    summary = run_experiment(cfg, threads=args.threads)
    print(summary.final_table())
    print(f"wrote {cfg.output_dir}")
    return 1 if any(summary.failures.values()) else 0


def _gen_instance(args) -> int:
    inst = generate_synthetic_instance(
        args.d1, args.d2, args.d3, args.r, args.arms,
        LinkFamily(args.family, noise_sigma=args.noise_sigma, eta_clip=args.eta_clip),
        TransformSpec.from_name(args.transform, args.d3, seed=args.transform_seed),
        seed=args.seed,
        normalize=not args.raw,
    )
    save_instance(inst, args.out)
    print(f"wrote {args.out}: {inst.n_arms} arms, omega_min={inst.omega_min:.6g}")
    return 0


def _validate(args) -> int:
    ExperimentConfig.load(args.config).validate()
    print(f"{args.config}: ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tensorbandits", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a replicated regret experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (overrides output_dir)")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--seed", type=int, help="overrides base_seed")
    s.set_defaults(func=_simulate)

    g = sub.add_parser("gen-instance", help="write a synthetic instance as JSON")
    g.add_argument("--d1", type=int, required=True)
    g.add_argument("--d2", type=int, required=True)
    g.add_argument("--d3", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--arms", type=int, required=True)
    g.add_argument("--family", choices=["linear", "logistic", "poisson"], required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--transform", choices=["identity", "dct", "random_orthogonal"], default="dct")
    g.add_argument("--transform-seed", type=int, default=0)
    g.add_argument("--noise-sigma", type=float, default=0.01)
    g.add_argument("--eta-clip", type=float, default=3.0)
    g.add_argument("--raw", action="store_true", help="keep the unnormalized parameter tensor")
    g.set_defaults(func=_gen_instance)

    v = sub.add_parser("validate", help="check a config file without running it")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
