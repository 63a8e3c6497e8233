"""Command-line entry point: simulate, train, eval, ablate, decode, gradcheck, serve.

Every subcommand prints its effective configuration (all defaults
materialized) to stderr and appends one structured record to a runs log,
so any result can be reproduced from the printed block alone.  Input
files are never modified.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import standard_benchmark
from .checkpoint import load_checkpoint, save_checkpoint
from .data import read_dataset, split_dataset, write_dataset
from .gradcheck import grad_check
from .metrics import evaluate
from .model import ModelConfig, NeuralDecoder, VARIANTS, VARIANT_DND, config_to_dict
from .simulate import SimConfig, augment_offsets, bundled_corpus_path, generate_dataset, load_corpus
from .train import (
    DEFAULT_MATRIX,
    TrainConfig,
    ablation_csv,
    cell_label,
    fit,
    run_ablation,
)

DEFAULT_RUNS_LOG = "ghosttype-runs.ldjson"


def _echo_config(name: str, cfg: dict) -> None:
    print(f"[{name}] effective config: {json.dumps(cfg, sort_keys=True)}", file=sys.stderr)


def _append_run(path: str, record: dict) -> None:
    try:
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    except OSError as e:
        print(f"warning: could not append to runs log {path}: {e}", file=sys.stderr)


def _model_config_from_args(args) -> ModelConfig:
    aux = getattr(args, "aux", True)
    return ModelConfig(
        variant=args.variant,
        dec_stacks=args.stacks,
        units=args.units,
        window=args.window,
        aux_loss_weight=1.0 if (aux and args.variant == VARIANT_DND) else 0.0,
    )


def _load_split(args):
    ds = read_dataset(args.dataset)
    if args.split == "all":
        return ds
    train, val, test = split_dataset(ds, seed=args.split_seed)
    return {"train": train, "val": val, "test": test}[args.split]


# ----------------------------------------------------------- subcommands

def cmd_simulate(args) -> int:
    corpus = args.corpus or bundled_corpus_path()
    cfg = SimConfig(n_users=args.users, phrases_per_user=args.phrases_per_user,
                    pair_fraction=args.pair_fraction, seed=args.seed)
    _echo_config("simulate", {"corpus": str(corpus), "out": str(args.out),
                              "n_users": cfg.n_users, "phrases_per_user": cfg.phrases_per_user,
                              "pair_fraction": cfg.pair_fraction, "seed": cfg.seed,
                              "tap_sigma_mm": cfg.tap_sigma_mm, "drift_step_mm": cfg.drift_step_mm,
                              "rotation_range_deg": cfg.rotation_range_deg})
    phrases = load_corpus(corpus)
    ds = generate_dataset(cfg, phrases)
    write_dataset(ds, args.out)
    print(f"wrote {args.out}: {len(ds.users())} users, {len(ds)} phrases, "
          f"{ds.keystrokes()} keystrokes")
    return 0


def cmd_train(args) -> int:
    mc = _model_config_from_args(args)
    tc = TrainConfig(model=mc, max_epochs=args.epochs, batch_size=args.batch_size,
                     seed=args.seed)
    _echo_config("train", {"dataset": str(args.dataset), "out": str(args.out),
                           "log": args.log and str(args.log), "augment": args.augment,
                           "split_seed": args.split_seed, "model": config_to_dict(mc),
                           "max_epochs": tc.max_epochs, "batch_size": tc.batch_size,
                           "initial_lr": tc.initial_lr, "lr_rate": tc.lr_rate,
                           "patience": tc.patience, "clip_norm": tc.clip_norm,
                           "seed": tc.seed})
    ds = read_dataset(args.dataset)
    train_ds, val_ds, test_ds = split_dataset(ds, seed=args.split_seed)
    if args.augment > 0:
        train_ds = augment_offsets(train_ds, copies=args.augment,
                                   rng=np.random.default_rng(args.split_seed + 1))
    log_stream = open(args.log, "w", encoding="utf-8") if args.log else None
    try:
        model, log = fit(train_ds, val_ds, tc, checkpoint_path=args.out,
                         log_stream=log_stream)
    finally:
        if log_stream:
            log_stream.close()
    best = min(log, key=lambda r: r["val_loss"])
    print(f"wrote {args.out}: best val_loss {best['val_loss']:.4f} at epoch "
          f"{best['epoch']} of {len(log)}")
    report = evaluate(model, test_ds)
    print(f"held-out test: {report.format_text()}")
    return 0


def cmd_eval(args) -> int:
    _echo_config("eval", {"dataset": str(args.dataset), "checkpoint": str(args.checkpoint),
                          "split": args.split, "split_seed": args.split_seed,
                          "json": args.json})
    model, _ = load_checkpoint(args.checkpoint)
    ds = _load_split(args)
    report = evaluate(model, ds)
    print(report.to_json() if args.json else report.format_text())
    return 0


def _parse_cells(arg: str):
    cells = []
    for part in arg.split(","):
        fields = part.strip().split(":")
        if len(fields) not in (3, 4):
            raise ValueError(f"bad cell {part!r}, expected variant:stacks:units[:au]")
        variant, stacks, units = fields[0], int(fields[1]), int(fields[2])
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        aux = len(fields) == 4 and fields[3] == "au"
        cells.append((variant, stacks, units, aux))
    return cells


def cmd_ablate(args) -> int:
    cells = _parse_cells(args.cells) if args.cells else list(DEFAULT_MATRIX)
    _echo_config("ablate", {"dataset": args.dataset and str(args.dataset),
                            "out": str(args.out), "epochs": args.epochs,
                            "seed": args.seed, "split_seed": args.split_seed,
                            "cells": [cell_label(*c) for c in cells]})
    if args.dataset:
        ds = read_dataset(args.dataset)
        train_ds, val_ds, test_ds = split_dataset(ds, seed=args.split_seed)
        train_ds = augment_offsets(train_ds, copies=5,
                                   rng=np.random.default_rng(args.split_seed + 1))
    else:
        print("no --dataset given; building the standard synthetic benchmark",
              file=sys.stderr)
        train_ds, val_ds, test_ds = standard_benchmark()
    rows = run_ablation(cells, train_ds, val_ds, test_ds, seed=args.seed,
                        max_epochs=args.epochs, window=args.window,
                        progress=lambda m: print(m, file=sys.stderr))
    csv = ablation_csv(rows)
    Path(args.out).write_text(csv, encoding="utf-8")
    print(csv, end="")
    return 0


def cmd_decode(args) -> int:
    _echo_config("decode", {"checkpoint": str(args.checkpoint),
                            "touches": str(args.touches), "json": args.json})
    model, _ = load_checkpoint(args.checkpoint)
    raw = sys.stdin.read() if args.touches == "-" else Path(args.touches).read_text()
    try:
        points = np.asarray(json.loads(raw), dtype=np.float64)
    except (json.JSONDecodeError, ValueError) as e:
        raise ValueError(f"touches file must be a JSON [[x, y], ...] array: {e}") from e
    text = model.decode_text(points)
    print(json.dumps({"text": text}) if args.json else text)
    return 0


def cmd_gradcheck(args) -> int:
    cfg = ModelConfig(variant=VARIANT_DND, dec_stacks=args.stacks, units=args.units,
                      window=max(args.window, 1))
    _echo_config("gradcheck", {"stacks": args.stacks, "units": args.units,
                               "window": args.window, "seed": args.seed,
                               "samples_per_tensor": args.samples, "threshold": args.threshold})
    model = NeuralDecoder(cfg, seed=args.seed, dtype=np.float64)
    rng = np.random.default_rng(args.seed + 1)
    xs = rng.uniform(0.0, 1.0, size=(args.window, 1, 2))
    labels = rng.integers(0, cfg.dict_size - 1, size=(args.window, 1))
    err = grad_check(
        lambda: model.loss_and_grads(xs, labels, None)[0],
        model.parameters(),
        loss_only=lambda: model.loss_value(xs, labels, None),
        max_entries_per_param=args.samples,
        seed=args.seed,
    )
    ok = err < args.threshold
    print(f"gradcheck s{args.stacks}u{args.units}: max rel. error {err:.3e} "
          f"({'ok' if ok else 'FAIL'}, threshold {args.threshold:g})")
    return 0 if ok else 1


def cmd_serve(args) -> int:
    from .service import run_server

    _echo_config("serve", {"checkpoint": str(args.checkpoint), "host": args.host,
                           "port": args.port})
    model, header = load_checkpoint(args.checkpoint)
    print(f"serving window={model.config.window} checkpoint epoch={header.get('epoch')} "
          f"on ws://{args.host}:{args.port}/ws", file=sys.stderr)
    run_server(model, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghosttype",
                                     description="invisible-keyboard touch decoding toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--runs-log", default=DEFAULT_RUNS_LOG,
                        help="ldjson file every run appends a record to")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic typing dataset")
    p.add_argument("--corpus", help="sentence corpus, one per line (default: bundled)")
    p.add_argument("--out", required=True, help="output dataset path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=12)
    p.add_argument("--phrases-per-user", type=int, default=150)
    p.add_argument("--pair-fraction", type=float, default=0.3)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("train", help="train a decoder on a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--log", help="training log output (ldjson)")
    p.add_argument("--variant", choices=[v for v in VARIANTS if v != "gaussian-baseline"],
                   default=VARIANT_DND)
    p.add_argument("--stacks", type=int, default=2)
    p.add_argument("--units", type=int, default=64)
    p.add_argument("--aux", action=argparse.BooleanOptionalAction, default=True,
                   help="auxiliary intermediate loss (dnd only)")
    p.add_argument("--window", type=int, default=64)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--augment", type=int, default=5,
                   help="offset-augmentation copies for the train split (0 disables)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed for the user-level train/val/test split")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=["all", "train", "val", "test"], default="all")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="train and evaluate a matrix of variants")
    p.add_argument("--dataset", help="dataset file (default: standard synthetic benchmark)")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--cells", help="comma list variant:stacks:units[:au]")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--window", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("decode", help="decode a JSON file of touch points")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--touches", required=True, help="JSON [[x, y], ...] file, or - for stdin")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model")
    p.add_argument("--stacks", type=int, default=2)
    p.add_argument("--units", type=int, default=64)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--samples", type=int, default=200,
                   help="entries checked per tensor (seeded sample)")
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("serve", help="run the live websocket decode service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    status, code = "ok", 0
    try:
        code = args.fn(args)
        if code != 0:
            status = f"failed with exit code {code}"
    except (OSError, ValueError, KeyError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        status, code = f"error: {e}", 1
    _append_run(args.runs_log, {
        "cmd": args.cmd,
        "argv": sys.argv[1:] if argv is None else list(argv),
        "status": status,
        "elapsed_s": round(time.time() - started, 3),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    })
    return code


if __name__ == "__main__":
    sys.exit(main())
