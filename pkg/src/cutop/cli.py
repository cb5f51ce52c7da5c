"""Command-line entry point for the pipeline stages.

Every run writes a config-echo JSON next to its outputs capturing the fully
resolved settings, so any stage can be rerun exactly. Exit codes: 0 on
success, 1 on user error, 2 on internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .arraystore import emit_csv, save_arrays
from .bench import resolution_sweep, run_benchmark
from .config import default_config
from .errors import ConfigError, CutopError, UsageError
from .extraction import (
    DiscontinuitySet,
    SmearMask,
    extract_jumps,
    extract_sharp_transition,
    filter_smeared,
)
from .lifting import build_disc_dataset, build_lifted_dataset
from .metrics import SWEEP_HEADER, report_rows
from .operators import baseline_predict, cut_predict
from .store import (
    load_dataset,
    load_disc,
    load_lifted,
    load_model,
    save_dataset,
    save_disc,
    save_lifted,
    save_model,
)
from .training import TrainConfig, train_baseline, train_cutnet, train_operator


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def _echo(out_dir: str, name: str, payload: dict):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)


def _ns_dict(ns) -> dict:
    return {k: v for k, v in vars(ns).items() if k != "func"}


def _train_cfg_from_args(args) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                       lr=args.lr, points_per_sample=args.budget,
                       seed=args.seed, loss=args.loss)


def _add_train_flags(p, epochs: int):
    p.add_argument("--epochs", type=int, default=epochs)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--budget", type=int, default=None,
                   help="points per sample per epoch (default: all)")
    p.add_argument("--loss", choices=("mse", "l1"), default="mse")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", default="64,64,64",
                   help="comma-separated hidden widths")
    p.add_argument("--latent", type=int, default=32)


def _hidden(args):
    return tuple(int(w) for w in args.hidden.split(","))


def cmd_gen_data(args) -> int:
    from .problems import generate_dataset

    ds = generate_dataset(args.problem, args.n, args.seed, nx=args.nx,
                          nt=args.nt, dt=args.dt, m=args.m)
    os.makedirs(args.out, exist_ok=True)
    save_dataset(ds, os.path.join(args.out, "dataset.json"))
    _echo(args.out, "config_echo.json", _ns_dict(args))
    return 0


def cmd_extract(args) -> int:
    ds = load_dataset(os.path.join(args.data, "dataset.json"))
    os.makedirs(args.out, exist_ok=True)
    if ds.problem == "parsimonious":
        locs = []
        for fld in ds.fields:
            disc = extract_sharp_transition(fld, args.slope_floor, args.w_stable)
            locs.append(disc.locations)
        arrays = {"locations": np.stack(locs)}
        meta = {"kind": "extract", "disc_kind": "sharp_transition",
                "dis_n": 2, "band_cells": 0}
    else:
        locs, gaps, masks = [], [], []
        for fld in ds.fields:
            disc = extract_jumps(fld, args.dis_n, args.rel_threshold)
            locs.append(disc.locations)
            gaps.append(disc.jump_gaps)
            masks.append(filter_smeared(fld, disc, args.band_cells).mask)
        arrays = {"locations": np.stack(locs), "gaps": np.stack(gaps),
                  "masks": np.stack(masks).astype(float)}
        meta = {"kind": "extract", "disc_kind": "jump", "dis_n": args.dis_n,
                "band_cells": args.band_cells}
    save_arrays(os.path.join(args.out, "extract.json"), arrays, meta)
    _echo(args.out, "config_echo.json", _ns_dict(args))
    return 0


def _load_extract(path: str):
    from .arraystore import load_arrays

    arrays, meta = load_arrays(os.path.join(path, "extract.json"))
    return arrays, meta


def _discs_masks(ds, arrays, meta, indices):
    discs, masks = [], []
    for i in indices:
        if meta["disc_kind"] == "sharp_transition":
            discs.append(DiscontinuitySet("sharp_transition",
                                          arrays["locations"][i]))
            masks = None
        else:
            discs.append(DiscontinuitySet("jump", arrays["locations"][i],
                                          arrays["gaps"][i]))
    if meta["disc_kind"] == "jump":
        masks = [SmearMask(arrays["masks"][i].astype(bool)) for i in indices]
    return discs, masks


def cmd_lift(args) -> int:
    ds = load_dataset(os.path.join(args.data, "dataset.json"))
    arrays, meta = _load_extract(args.extract)
    idx = ds.splits["train"]
    fields = [ds.fields[i] for i in idx]
    discs, masks = _discs_masks(ds, arrays, meta, idx)
    lifted = build_lifted_dataset(fields, discs, masks)
    disc_ds = build_disc_dataset(fields, discs)
    os.makedirs(args.out, exist_ok=True)
    save_lifted(lifted, os.path.join(args.out, "lifted.json"))
    save_disc(disc_ds, os.path.join(args.out, "disc.json"))
    _echo(args.out, "config_echo.json", _ns_dict(args))
    return 0


def cmd_train_cutnet(args) -> int:
    disc = load_disc(os.path.join(args.lifted, "disc.json"))
    cnet, report = train_cutnet(disc, _train_cfg_from_args(args),
                                hidden=_hidden(args))
    os.makedirs(args.out, exist_ok=True)
    save_model(cnet, os.path.join(args.out, "cutnet.json"))
    _echo(args.out, "config_echo.json", _ns_dict(args))
    _echo(args.out, "train_report.json",
          {"train_losses": report.train_losses,
           "val_losses": report.val_losses,
           "wall_clock": report.wall_clock})
    return 0


def cmd_train_operator(args) -> int:
    lifted = load_lifted(os.path.join(args.lifted, "lifted.json"))
    model, report = train_operator(lifted, _train_cfg_from_args(args),
                                   latent=args.latent, hidden=_hidden(args))
    os.makedirs(args.out, exist_ok=True)
    save_model(model, os.path.join(args.out, "operator.json"))
    _echo(args.out, "config_echo.json", _ns_dict(args))
    _echo(args.out, "train_report.json",
          {"train_losses": report.train_losses,
           "val_losses": report.val_losses,
           "wall_clock": report.wall_clock})
    return 0


def cmd_train_baseline(args) -> int:
    ds = load_dataset(os.path.join(args.data, "dataset.json"))
    fields = ds.subset("train")
    model, report = train_baseline(fields, _train_cfg_from_args(args),
                                   latent=args.latent, hidden=_hidden(args))
    os.makedirs(args.out, exist_ok=True)
    save_model(model, os.path.join(args.out, "baseline.json"))
    _echo(args.out, "config_echo.json", _ns_dict(args))
    _echo(args.out, "train_report.json",
          {"train_losses": report.train_losses,
           "val_losses": report.val_losses,
           "wall_clock": report.wall_clock})
    return 0


def cmd_predict(args) -> int:
    ds = load_dataset(os.path.join(args.data, "dataset.json"))
    operator = load_model(args.operator)
    idx = ds.splits[args.split]
    preds = []
    if operator.mode == "lifted":
        if args.cutnet is None:
            raise UsageError("lifted operator needs --cutnet")
        cnet = load_model(args.cutnet)
        for i in idx:
            fld = ds.fields[i]
            sol = cut_predict(operator, cnet, fld.sensors, fld.x, fld.t)
            preds.append(sol.values)
    else:
        for i in idx:
            fld = ds.fields[i]
            preds.append(baseline_predict(operator, fld.sensors, fld.x, fld.t))
    os.makedirs(args.out, exist_ok=True)
    save_arrays(os.path.join(args.out, "predictions.json"),
                {"predictions": np.stack(preds),
                 "indices": np.asarray(idx, dtype=float)},
                {"kind": "predictions", "split": args.split,
                 "mode": operator.mode})
    _echo(args.out, "config_echo.json", _ns_dict(args))
    return 0


def cmd_evaluate(args) -> int:
    cfg = default_config(args.problem, args.profile, seed=args.seed)
    if args.epochs is not None:
        cfg.epochs = args.epochs
        cfg.cutnet_epochs = args.epochs
    models = tuple(args.models.split(","))
    reports = run_benchmark(cfg, models)
    out_dir = os.path.dirname(os.path.abspath(args.out)) or "."
    emit_csv(SWEEP_HEADER, report_rows(reports), args.out)
    _echo(out_dir, "config_echo.json",
          {**_ns_dict(args), "resolved": json.loads(cfg.to_json())})
    return 0


def cmd_sweep(args) -> int:
    cfg = default_config(args.problem, args.profile, seed=args.seed)
    if args.epochs is not None:
        cfg.epochs = args.epochs
        cfg.cutnet_epochs = args.epochs
    resolutions = tuple(int(r) for r in args.resolutions.split(","))
    reports = resolution_sweep(cfg, resolutions)
    out_dir = os.path.dirname(os.path.abspath(args.out)) or "."
    emit_csv(SWEEP_HEADER, report_rows(reports), args.out)
    _echo(out_dir, "config_echo.json",
          {**_ns_dict(args), "resolved": json.loads(cfg.to_json())})
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="cutop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a benchmark dataset")
    p.add_argument("--problem", required=True,
                   choices=("advection", "burgers_exact", "burgers_godunov",
                            "parsimonious"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nx", type=int, default=500)
    p.add_argument("--nt", type=int, default=200)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("extract", help="extract discontinuity locations")
    p.add_argument("--data", required=True)
    p.add_argument("--dis-n", type=int, default=1)
    p.add_argument("--rel-threshold", type=float, default=0.5)
    p.add_argument("--band-cells", type=int, default=3)
    p.add_argument("--slope-floor", type=float, default=1.0)
    p.add_argument("--w-stable", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("lift", help="build lifted and discontinuity datasets")
    p.add_argument("--data", required=True)
    p.add_argument("--extract", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("train-cutnet", help="stage 1: fit front locations")
    p.add_argument("--lifted", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p, epochs=1500)
    p.set_defaults(func=cmd_train_cutnet)

    p = sub.add_parser("train-operator", help="stage 2: fit the lifted operator")
    p.add_argument("--lifted", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p, epochs=400)
    p.set_defaults(func=cmd_train_operator)

    p = sub.add_parser("train-baseline", help="fit a vanilla DeepONet")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p, epochs=400)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("predict", help="predict solutions for a split")
    p.add_argument("--data", required=True)
    p.add_argument("--operator", required=True)
    p.add_argument("--cutnet", default=None)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="train and score models on a problem")
    p.add_argument("--problem", required=True,
                   choices=("advection", "burgers", "parsimonious"))
    p.add_argument("--profile", default="desk", choices=("desk", "full"))
    p.add_argument("--models", default="cut,baseline")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="resolution-robustness sweep")
    p.add_argument("--problem", default="advection",
                   choices=("advection", "burgers"))
    p.add_argument("--profile", default="desk", choices=("desk", "full"))
    p.add_argument("--resolutions", default="125,250,500,1000")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CutopError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
