"""``wl-embed`` command line entry point."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import analysis, theory
from .errors import WLEmbedError
from .experiments import ExperimentConfig, run_figure3
from .graph import DatasetRecord, read_jsonl, record_to_json
from .nn import ModelSpec, TrainConfig, train
from .persist import load_model, save_model
from .smiles import parse_smiles
from .synthetic import GeneratorSpec, generate_dataset
from .wl import LabelRegistry, wl_refine_many

log = logging.getLogger("wlembed")


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _layer_range(text: str) -> tuple[int, ...]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(","))


# ---- subcommands ----

def cmd_gen(args) -> int:
    spec = GeneratorSpec(task=args.task, seed=args.seed or 0)
    with _output(args.out) as fh:
        for rec in generate_dataset(spec, args.index):
            fh.write(record_to_json(rec) + "\n")
    return 0


def cmd_parse(args) -> int:
    if (args.smiles is None) == (args.file is None):
        raise WLEmbedError("give exactly one of --smiles or --file")
    if args.smiles is not None:
        items = [(args.smiles, 0)]
    else:
        items = []
        with open(args.file) as fh:
            for line in fh:
                parts = line.split()
                if parts:
                    items.append((parts[0], float(parts[1]) if len(parts) > 1 else 0))
    with _output(args.out) as fh:
        for text, target in items:
            fh.write(record_to_json(DatasetRecord(parse_smiles(text), target)) + "\n")
    return 0


def cmd_expand(args) -> int:
    graphs = [r.graph for r in read_jsonl(args.input)]
    registry = LabelRegistry()
    _, counts = wl_refine_many(graphs, args.iters, registry)
    with _output(args.out) as fh:
        fh.write("iteration\tJ\n")
        for t, J in enumerate(counts):
            fh.write(f"{t}\t{J}\n")
        fh.write(registry.dump() + "\n")
    return 0


def _task_of(records, requested: str | None) -> str:
    if requested:
        return requested
    targets = {r.target for r in records}
    return "classification" if targets <= {0, 1} else "regression"


def cmd_train(args) -> int:
    records = read_jsonl(args.data)
    if args.out is None:
        raise WLEmbedError("train needs --out for the model checkpoint")
    spec = ModelSpec(embedding=args.embedding, layers=args.layers, dim=args.dim,
                     task=_task_of(records, args.task), T=args.iters)
    config = TrainConfig(alpha=args.alpha, epochs=args.epochs, batch_size=args.batch_size,
                         seed=args.seed or 0)
    result = train(spec, records, config)
    save_model(args.out, result.model, {"history": result.history})
    with _output(args.history) as fh:
        w = csv.writer(fh)
        w.writerow(("epoch", "loss"))
        for epoch, loss in enumerate(result.history, start=1):
            w.writerow((epoch, repr(loss)))
    return 0


def cmd_eval(args) -> int:
    model, _ = load_model(args.model)
    records = read_jsonl(args.data, K=model.encoder.K)
    metric = "roc_auc" if model.spec.task == "classification" else "mae"
    with _output(args.out) as fh:
        w = csv.writer(fh)
        if args.shuffle:
            rng = np.random.default_rng(args.seed or 0)
            res = analysis.shuffle_importance(model, records, args.shuffle, rng)
            w.writerow(("metric", "mode", "base", "shuffled", "delta"))
            w.writerow((metric, res.mode, res.base, res.shuffled, res.delta))
        else:
            w.writerow(("metric", "value", "n"))
            w.writerow((metric, analysis.evaluate(model, records), len(records)))
    return 0


def cmd_inspect(args) -> int:
    model, _ = load_model(args.model)
    report = analysis.cwl_weight_magnitudes(model)
    with _output(args.out) as fh:
        w = csv.writer(fh)
        d1 = report.d1
        d2 = report.magnitude.shape[1] - d1
        w.writerow([f"l{j}" for j in range(d1)] + [f"m{j}" for j in range(d2)])
        for row in report.magnitude:
            w.writerow([repr(float(x)) for x in row])
    print(f"left_mean={report.left_mean:.6g} right_mean={report.right_mean:.6g}", file=sys.stderr)
    return 0


def verify_rows(kmax: int, mmax: int):
    for K in range(1, kmax + 1):
        for M in range(1, mmax + 1):
            bound = theory.capacity_bound(K, M)
            _, rank = theory.construction_rank(K, M)
            norm = theory.bias_norm(K, M)
            yield K, M, bound, rank, "pass" if rank == bound else "fail", norm, norm / M ** (1.5 * K)


def cmd_verify(args) -> int:
    failed = False
    with _output(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(("K", "M", "bound", "rank", "result", "b_norm", "ratio"))
        for row in verify_rows(args.kmax, args.mmax):
            failed |= row[4] == "fail"
            w.writerow(row[:5] + (f"{row[5]:.6f}", f"{row[6]:.6f}"))
    return 1 if failed else 0


def cmd_figure3(args) -> int:
    config = ExperimentConfig(task=args.task, layers=_layer_range(args.layers),
                              seeds_per_cell=args.seeds_per_cell, data_seed=args.seed or 0,
                              dim=args.dim, epochs=args.epochs, alpha=args.alpha,
                              out_dir=args.out, cache_dir=args.cache_dir, threads=args.threads,
                              evaluate_on="heldout" if args.heldout else "train")
    if args.embeddings:
        config.embeddings = tuple(args.embeddings.split(","))
        config.__post_init__()
    rows = run_figure3(config)
    if args.out is None:
        w = csv.writer(sys.stdout)
        w.writerow(("task", "embedding", "L", "mean", "std"))
        w.writerows(rows)
    return 0


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes for experiment grids")

    p = argparse.ArgumentParser(prog="wl-embed", description="WL node embeddings for GNNs.")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset")
    s.add_argument("--task", choices=("counting", "detection"), required=True)
    s.add_argument("--index", type=int, default=0, help="dataset index within the seed")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("parse", parents=[common], help="SMILES to JSONL graphs")
    s.add_argument("--smiles")
    s.add_argument("--file", help="one SMILES per line, optional target after whitespace")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("expand", parents=[common], help="iterative WL label expansion")
    s.add_argument("--input", required=True)
    s.add_argument("--iters", type=int, default=1)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("train", parents=[common], help="train a GCN model")
    s.add_argument("--data", required=True)
    s.add_argument("--embedding", choices=("atomic", "wl", "cwl", "gwl"), default="wl")
    s.add_argument("--layers", type=int, default=2)
    s.add_argument("--dim", type=int, default=32)
    s.add_argument("--alpha", type=float, default=1e-3)
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--iters", type=int, default=1, help="WL expansion depth T")
    s.add_argument("--task", choices=("classification", "regression"))
    s.add_argument("--history", help="loss CSV path (default stdout)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--shuffle", choices=("atom", "nl"))
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("inspect-weights", parents=[common], help="C-WL weight magnitudes")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("verify-theorem", parents=[common], help="rank and norm checks")
    s.add_argument("--kmax", type=int, default=3)
    s.add_argument("--mmax", type=int, default=3)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("figure3", parents=[common], help="metric vs depth grid")
    s.add_argument("--task", choices=("counting", "detection"), required=True)
    s.add_argument("--layers", default="1-6")
    s.add_argument("--embeddings", help="comma-separated subset of atomic,wl,cwl,gwl")
    s.add_argument("--seeds-per-cell", type=int, default=15)
    s.add_argument("--dim", type=int, default=32)
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--alpha", type=float, default=1e-2)
    s.add_argument("--cache-dir", default=None)
    s.add_argument("--heldout", action="store_true",
                   help="score on a 20%% held-out split instead of the training graphs")
    s.set_defaults(func=cmd_figure3)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except WLEmbedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 10


if __name__ == "__main__":
    sys.exit(main())
