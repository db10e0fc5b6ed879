"""Command line entry point: ``centrality-gnn {generate,train,eval,ingest-real,pca}``.

Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from pathlib import Path

import numpy as np

from . import datasets as dsets
from .checkpoint import checkpoint_load, checkpoint_save
from .config import load_config
from .errors import (
    CheckpointError,
    ConfigError,
    ConvergenceError,
    GenerationError,
    InputError,
    NumericError,
    UsageError,
)
from .gnn import message_passing_run
from .graph import format_for_path, read_graph
from .metrics import pca_1d
from .oracles import MEASURES, centrality
from .training import evaluate, sizes_csv, sizes_sweep, train_model


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _say(msg: str = "") -> None:
    print(msg, flush=True)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr, flush=True)


# -- generate --------------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    section = cfg.dataset
    preset = section.get("preset", "custom")
    seed = args.seed if args.seed is not None else section.get("seed", 0)
    if preset == "custom":
        specs = cfg.generators
        if not specs:
            raise ConfigError("custom dataset needs at least one [generator.<label>] section")
    else:
        specs = dsets.preset_specs(preset, seed, section.get("count"))
    out = Path(args.out_dir) if args.out_dir else section.get("out")
    if out is None:
        raise ConfigError("[dataset] needs 'out' (or pass --out-dir)")
    name = section.get("name", preset)
    try:
        ds = dsets.generate_dataset(specs, name, workers=args.threads)
    except GenerationError as exc:
        raise _Exit(1, f"generation failed: {exc}") from None
    dsets.save_dataset(ds, out)
    for spec in specs:
        part = dsets.Dataset(spec.family, [i for i in ds if i.source.startswith(spec.family + "#")])
        _say("  " + dsets.summarize(part))
    _say(dsets.summarize(ds))
    _say(f"wrote {out}")
    return 0


# -- train -----------------------------------------------------------------------


def _log_header(centralities) -> list[str]:
    return ["epoch", *[f"loss_{c}" for c in centralities], "probe_accuracy"]


def _log_row(log, centralities) -> list[str]:
    acc = "" if log.probe_accuracy is None else f"{log.probe_accuracy:.6f}"
    return [str(log.epoch), *[f"{log.loss[c]:.10g}" for c in centralities], acc]


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if not cfg.train:
        raise ConfigError("config has no [train] section")
    config = cfg.train_config(seed=args.seed)
    data_dir = cfg.train.get("dataset")
    if data_dir is None:
        raise ConfigError("[train] needs 'dataset'")
    out = Path(args.out_dir) if args.out_dir else cfg.train.get("out")
    if out is None:
        raise ConfigError("[train] needs 'out' (or pass --out-dir)")
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "model.ckpt"
    log_path = out / "train_log.csv"

    dataset = dsets.load_dataset(data_dir)
    probe = dsets.load_dataset(cfg.train["probe"]) if cfg.train.get("probe") else None

    model = None
    if args.resume and ckpt.exists():
        model = checkpoint_load(ckpt)
        if model.config.to_json() != config.to_json():
            raise ConfigError("checkpoint was trained with a different configuration")
        _say(f"resuming from epoch {model.epochs_done}")
        rows = list(csv.reader(log_path.open())) if log_path.exists() else [_log_header(config.centralities)]
        rows = rows[: model.epochs_done + 1]
    else:
        rows = [_log_header(config.centralities)]

    def on_epoch(m, log):
        rows.append(_log_row(log, config.centralities))
        checkpoint_save(m, ckpt)
        _write_csv(log_path, rows)
        losses = " ".join(f"{c}={log.loss[c]:.4f}" for c in config.centralities)
        acc = "" if log.probe_accuracy is None else f" probe_acc={log.probe_accuracy:.4f}"
        _say(f"epoch {log.epoch:3d} {losses}{acc} ({log.seconds:.1f}s)")

    try:
        model, logs = train_model(config, dataset, probe, model, on_epoch)
    except NumericError as exc:
        raise _Exit(1, f"training aborted: {exc}") from None
    checkpoint_save(model, ckpt)
    _write_csv(log_path, rows)
    if probe is not None:
        report = evaluate(model.gnn, model.head, probe.subset(range(min(32, len(probe)))), config.ties)
        _say(f"final probe accuracy: {report.mean_accuracy():.4f}")
    _say(f"wrote {ckpt}")
    return 0


def _write_csv(path: Path, rows) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    path.write_text(buf.getvalue())


# -- eval ------------------------------------------------------------------------


def _load_checkpoint(path) -> "Model":  # noqa: F821
    if not Path(path).exists():
        raise _Exit(2, f"checkpoint {path} not found")
    try:
        return checkpoint_load(path)
    except CheckpointError as exc:
        raise _Exit(2, f"cannot load checkpoint: {exc}") from None


def cmd_eval(args) -> int:
    model = _load_checkpoint(args.checkpoint)
    cfg = model.config
    if args.d is not None and args.d != cfg.d:
        raise ConfigError(f"--d {args.d} does not match checkpoint d={cfg.d}")
    if args.t_max is not None and args.t_max != cfg.t_max:
        raise ConfigError(f"--t-max {args.t_max} does not match checkpoint t_max={cfg.t_max}")
    dataset = dsets.load_dataset(args.dataset)
    ties = args.ties or cfg.ties
    out = Path(args.out_dir) if args.out_dir else Path(args.dataset)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluate(model.gnn, model.head, dataset, ties)
    table = report.to_table()
    _say(table)
    (out / "metrics.txt").write_text(table)
    (out / "metrics.jsonl").write_text(report.to_jsonl())
    if args.sizes:
        rows = sizes_sweep(model.gnn, model.head, dataset, ties)
        (out / "sizes.csv").write_text(sizes_csv(rows, model.head.centralities))
        _say(f"wrote {out / 'sizes.csv'} ({len(rows)} size buckets)")
    return 0


# -- ingest-real -----------------------------------------------------------------


def cmd_ingest_real(args) -> int:
    path = Path(args.file)
    fmt = args.format or format_for_path(path)
    if fmt is None:
        raise UsageError(f"cannot infer the format of {path.name!r}; pass --format snap-edgelist|matrix-market")
    g = read_graph(path, fmt)
    values = {}
    for m in MEASURES:
        t0 = time.perf_counter()
        try:
            values[m] = centrality(g, m).values
        except (ConvergenceError, InputError) as exc:
            _warn(f"{m} centrality unavailable for {path.name}: {exc}")
            continue
        _say(f"{m:<12} {time.perf_counter() - t0:8.3f}s")
    out = Path(args.out_dir) if args.out_dir else Path("real")
    stem = dsets.append_instance(out, dsets.Instance(g, values, source=path.name), name="real")
    _say(f"{path.name}: n={g.n} m={g.m} -> {out / stem}")
    return 0


# -- pca -------------------------------------------------------------------------


def cmd_pca(args) -> int:
    model = _load_checkpoint(args.checkpoint)
    g = read_graph(args.graph, args.format)
    values = {}
    for m in MEASURES:
        try:
            values[m] = centrality(g, m).values
        except (ConvergenceError, InputError):
            values[m] = np.full(g.n, np.nan)
    if g.n < 2:
        _warn("single-vertex graph: every projection is degenerate")
    reference = values.get(args.reference)
    if reference is not None and not np.all(np.isfinite(reference)):
        reference = None
    _, history = message_passing_run(g.sparse_adjacency(), model.gnn, record=True)
    rows = [["step", "vertex", "projection", *MEASURES]]
    for step, V in enumerate(history):
        proj = pca_1d(V, reference)
        if proj.degenerate:
            _warn(f"step {step}: degenerate projection (all embeddings equal)")
        for v in range(g.n):
            rows.append([str(step), str(v), f"{proj.values[v]:.10g}", *[f"{values[m][v]:.17g}" for m in MEASURES]])
    out = Path(args.out_dir) if args.out_dir else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    target = out / (Path(args.graph).stem + "_pca.csv")
    _write_csv(target, rows)
    _say(f"wrote {target} ({len(history)} steps)")
    return 0


# -- entry -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="worker processes (1 = deterministic serial)")
    common.add_argument("--out-dir", default=None, help="output directory")

    p = argparse.ArgumentParser(prog="centrality-gnn", description="Rank graph vertices by centrality with message-passing networks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate a labelled dataset")
    g.add_argument("config")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", parents=[common], help="train a model")
    t.add_argument("config")
    t.add_argument("--resume", action="store_true", help="continue from OUT/model.ckpt if present")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint on a dataset")
    e.add_argument("checkpoint")
    e.add_argument("dataset")
    e.add_argument("--sizes", action="store_true", help="also write per-size accuracies (sizes.csv)")
    e.add_argument("--d", type=int, default=None)
    e.add_argument("--t-max", type=int, default=None)
    e.add_argument("--ties", choices=("strict", "index"), default=None)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("ingest-real", parents=[common], help="add a real network to a dataset")
    r.add_argument("file")
    r.add_argument("--format", choices=("snap-edgelist", "matrix-market"), default=None)
    r.set_defaults(func=cmd_ingest_real)

    c = sub.add_parser("pca", parents=[common], help="1-D PCA of embeddings at every step")
    c.add_argument("checkpoint")
    c.add_argument("graph")
    c.add_argument("--format", choices=("graph", "snap-edgelist", "matrix-market"), default=None)
    c.add_argument("--reference", choices=MEASURES, default="eigenvector")
    c.set_defaults(func=cmd_pca)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, UsageError, InputError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, GenerationError, ConvergenceError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
