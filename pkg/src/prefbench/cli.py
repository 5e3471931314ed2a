"""Command-line benchmark harness.

Subcommands: gen-data, train, arch-sweep, noise-sweep, diagnose-margin,
graph-spectrum, export-hist.  Global flags (--config, --out-dir, --jobs,
--seed) go before the subcommand; sweep configs are JSON documents
mirroring SweepConfig field names in lower_snake_case.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .comparison import ComparisonModel, ModelKind
from .data import corrupt_dataset, generate_dataset, load_dataset_csv, save_dataset_csv
from .graphs import GraphDesign
from .harness import (
    SweepConfig,
    export_probability_histogram,
    mix64,
    run_arch_sweep,
    run_graph_spectrum,
    run_noise_sweep,
    sweep_config_from_json,
    write_graph_csv,
    write_histogram_csv,
)
from .margin import MarginKind, margin_cdf
from .network import MLPArchitecture, save_checkpoint
from .rewards import GroundTruthReward, RewardFamily, sample_states
from .training import TrainingConfig, train_mle

MARGIN_SCHEMA = "# prefbench-margin-v1"

_MODEL_CHOICES = [k.value for k in ModelKind]
_FAMILY_CHOICES = [f.value for f in RewardFamily]
_DESIGN_CHOICES = [g.value for g in GraphDesign]


def _model_from_args(args) -> ComparisonModel:
    return ComparisonModel(kind=ModelKind(args.model), tie_param=args.tie_param)


def _out_path(args, filename: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, filename)


def _cmd_gen_data(args) -> int:
    rng = np.random.default_rng(mix64(args.seed, 1))
    gt = GroundTruthReward.sample(RewardFamily(args.reward_family), args.d, rng)
    ds = generate_dataset(gt, _model_from_args(args), args.n, seed=mix64(args.seed, 2))
    if args.corruption > 0.0:
        ds = corrupt_dataset(ds, args.corruption, seed=mix64(args.seed, 3))
    save_dataset_csv(ds, args.out)
    print(f"wrote {len(ds)} comparisons to {args.out}")
    return 0


def _cmd_train(args) -> int:
    model = _model_from_args(args)
    train_ds = load_dataset_csv(args.data, model_kind=model.kind)
    eval_ds = load_dataset_csv(args.eval_data, model_kind=model.kind)
    arch = MLPArchitecture.rectangular(train_ds.d, args.width, args.depth, actions=2)
    cfg = TrainingConfig(
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        learning_rate=args.lr,
        early_stop_patience=args.patience,
        seed=args.seed if args.seed is not None else 0,
    )
    params, history = train_mle(train_ds, eval_ds, arch, model, cfg)
    if args.out_checkpoint:
        save_checkpoint(params, args.out_checkpoint)
    if args.history_csv:
        with open(args.history_csv, "w", encoding="ascii", newline="\n") as fh:
            fh.write("epoch,train_nll,eval_nll\n")
            for epoch, (tr, ev) in enumerate(zip(history.train_nll, history.eval_nll)):
                fh.write(f"{epoch},{tr:.17g},{ev:.17g}\n")
    print(
        f"trained {args.width}x{args.depth} for {history.epochs_run} epochs; "
        f"best eval nll {min(history.eval_nll):.6f} at epoch {history.best_epoch}"
    )
    return 0


def _sweep_config(args) -> SweepConfig:
    cfg = sweep_config_from_json(args.config) if args.config else SweepConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    return cfg


def _cmd_arch_sweep(args) -> int:
    cfg = _sweep_config(args)
    out_csv = args.out_csv or _out_path(args, "arch_sweep.csv")
    rows = run_arch_sweep(cfg, out_csv=out_csv, jobs=args.jobs)
    failed = sum(1 for r in rows if r.note)
    print(f"arch sweep: {len(rows)} cells ({failed} failed) -> {out_csv}")
    return 0


def _cmd_noise_sweep(args) -> int:
    cfg = _sweep_config(args)
    out_csv = args.out_csv or _out_path(args, "noise_sweep.csv")
    rows = run_noise_sweep(cfg, width=args.width, depth=args.depth, out_csv=out_csv, jobs=args.jobs)
    failed = sum(1 for r in rows if r.note)
    print(f"noise sweep: {len(rows)} cells ({failed} failed) -> {out_csv}")
    return 0


def _cmd_diagnose_margin(args) -> int:
    seed = args.seed if args.seed is not None else 0
    gt = GroundTruthReward.sample(
        RewardFamily(args.reward_family), args.d, np.random.default_rng(mix64(seed, 1))
    )
    model = _model_from_args(args)
    states = sample_states(args.n_states, gt.d, np.random.default_rng(mix64(seed, 2)))
    grid = np.linspace(args.t_min, args.t_max, args.t_points)
    prob_curve = margin_cdf(gt, model, states, grid, MarginKind.PROBABILITY_GAP)
    reward_curve = margin_cdf(gt, model, states, grid, MarginKind.REWARD_GAP)
    with open(args.out_csv, "w", encoding="ascii", newline="\n") as fh:
        fh.write(MARGIN_SCHEMA + "\n")
        fh.write("t,cdf_prob_gap,cdf_reward_gap\n")
        for t, p, r in zip(grid, prob_curve.cdf_values, reward_curve.cdf_values):
            fh.write(f"{t:.17g},{p:.17g},{r:.17g}\n")
    print(f"margin curves over {args.n_states} states -> {args.out_csv}")
    return 0


def _cmd_graph_spectrum(args) -> int:
    designs = [GraphDesign(name) for name in args.designs.split(",")]
    counts = [int(x) for x in args.action_counts.split(",")]
    rows = run_graph_spectrum(designs, counts, args.n)
    out_csv = args.out_csv or _out_path(args, "graph_spectrum.csv")
    write_graph_csv(out_csv, rows)
    print(f"{len(rows)} spectral gaps -> {out_csv}")
    return 0


def _cmd_export_hist(args) -> int:
    ds = load_dataset_csv(args.data)
    rows = export_probability_histogram(ds, args.bins)
    write_histogram_csv(args.out_csv, rows)
    print(f"histogram of {len(ds)} probabilities in {args.bins} bins -> {args.out_csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefbench", description=__doc__)
    parser.add_argument("--config", default=None, help="JSON sweep config")
    parser.add_argument("--out-dir", default=".", help="directory for default outputs")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    parser.add_argument("--seed", type=int, default=None, help="base seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic comparison dataset CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--reward-family", choices=_FAMILY_CHOICES, default="sinusoidal")
    p.add_argument("--model", choices=_MODEL_CHOICES, default="bt")
    p.add_argument("--tie-param", type=float, default=2.0)
    p.add_argument("--corruption", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train a reward network on dataset CSVs")
    p.add_argument("--data", required=True)
    p.add_argument("--eval-data", required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--model", choices=_MODEL_CHOICES, default="bt")
    p.add_argument("--tie-param", type=float, default=2.0)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-checkpoint", default=None)
    p.add_argument("--history-csv", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("arch-sweep", help="regret over a width x depth grid")
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=_cmd_arch_sweep)

    p = sub.add_parser("noise-sweep", help="regret across label-noise levels")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=_cmd_noise_sweep)

    p = sub.add_parser("diagnose-margin", help="empirical margin CDFs")
    p.add_argument("--reward-family", choices=_FAMILY_CHOICES, default="sinusoidal")
    p.add_argument("--model", choices=_MODEL_CHOICES, default="bt")
    p.add_argument("--tie-param", type=float, default=2.0)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--n-states", type=int, default=10**5)
    p.add_argument("--t-min", type=float, default=0.005)
    p.add_argument("--t-max", type=float, default=0.45)
    p.add_argument("--t-points", type=int, default=90)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=_cmd_diagnose_margin)

    p = sub.add_parser("graph-spectrum", help="lambda_2 per comparison design")
    p.add_argument("--designs", default="complete,star,path,cycle")
    p.add_argument("--action-counts", default="4,8,16")
    p.add_argument("--n", type=int, default=13440)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=_cmd_graph_spectrum)

    p = sub.add_parser("export-hist", help="histogram of recorded win probabilities")
    p.add_argument("--data", required=True)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=_cmd_export_hist)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
