"""Synthetic-task experiment grid (metric vs. depth per embedding) and the hardness check."""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import Metrics, evaluate
from .embedding import VARIANTS
from .errors import WLEmbedError
from .graph import DatasetRecord, read_jsonl, write_jsonl
from .nn import ModelSpec, TrainConfig, train
from .synthetic import GeneratorSpec, generate_dataset

log = logging.getLogger(__name__)

CSV_HEADER = ("task", "embedding", "L", "mean", "std")


@dataclass
class ExperimentConfig:
    task: str = "detection"
    embeddings: tuple[str, ...] = VARIANTS
    layers: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    seeds_per_cell: int = 15
    num_datasets: int = 3
    data_seed: int = 0
    dim: int = 32
    epochs: int = 100
    alpha: float = 1e-2
    batch_size: int = 32
    evaluate_on: str = "train"
    test_fraction: float = 0.2
    out_dir: str | None = None
    cache_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.task not in ("counting", "detection"):
            raise WLEmbedError(f"unknown task {self.task!r}")
        if any(L < 1 or L > 6 for L in self.layers):
            raise WLEmbedError("layer counts must lie in 1..6")
        bad = set(self.embeddings) - set(VARIANTS)
        if bad:
            raise WLEmbedError(f"unknown embeddings {sorted(bad)}")
        if self.seeds_per_cell < 1 or self.num_datasets < 1:
            raise WLEmbedError("need at least one dataset and one seed per cell")
        if self.evaluate_on not in ("train", "heldout"):
            raise WLEmbedError("evaluate_on must be 'train' or 'heldout'")
        if not 0 < self.test_fraction < 1:
            raise WLEmbedError("test_fraction must lie strictly between 0 and 1")

    @property
    def runs_per_dataset(self) -> int:
        return -(-self.seeds_per_cell // self.num_datasets)

    def trials(self) -> list[tuple[int, int]]:
        """(dataset, run) pairs, dataset-major, truncated to seeds_per_cell."""
        pairs = [(i, r) for i in range(self.num_datasets) for r in range(self.runs_per_dataset)]
        return pairs[:self.seeds_per_cell]


# ---- datasets ----

def load_or_generate(task: str, seed: int, index: int, cache_dir=None) -> list[DatasetRecord]:
    """Dataset ``index`` of a task, read from ``cache_dir`` when already there."""
    spec = GeneratorSpec(task=task, seed=seed)
    if cache_dir is None:
        return generate_dataset(spec, index)
    path = Path(cache_dir) / f"{task}-seed{seed}-ds{index}.jsonl"
    if path.exists():
        return read_jsonl(path, K=spec.label_alphabet_size)
    records = generate_dataset(spec, index)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    write_jsonl(tmp, records)
    os.replace(tmp, path)
    return records


def split(records: Sequence[DatasetRecord], test_fraction: float, seed) -> tuple[list, list]:
    order = np.random.default_rng(seed).permutation(len(records))
    n_test = int(round(test_fraction * len(records)))
    return [records[i] for i in order[n_test:]], [records[i] for i in order[:n_test]]


# ---- the grid ----

def run_trial(config: ExperimentConfig, embedding: str, L: int, records, dataset: int, run: int) -> float:
    task = "classification" if config.task == "detection" else "regression"
    if config.evaluate_on == "heldout":
        train_set, test_set = split(records, config.test_fraction, [config.data_seed, dataset])
    else:
        train_set = test_set = list(records)
    spec = ModelSpec(embedding=embedding, layers=L, dim=config.dim, task=task)
    tc = TrainConfig(alpha=config.alpha, epochs=config.epochs, batch_size=config.batch_size,
                     seed=1000 * dataset + run)
    model = train(spec, train_set, tc).model
    return evaluate(model, test_set)


def run_cell(config: ExperimentConfig, embedding: str, L: int, datasets) -> Metrics:
    values = [run_trial(config, embedding, L, datasets[i], i, r) for i, r in config.trials()]
    return Metrics("classification" if config.task == "detection" else "regression", values)


def _cell_job(args):
    config, embedding, L = args
    datasets = {i: load_or_generate(config.task, config.data_seed, i, config.cache_dir)
                for i in sorted({i for i, _ in config.trials()})}
    return run_cell(config, embedding, L, datasets)


def run_figure3(config: ExperimentConfig) -> list[tuple]:
    """Metric mean and std per (embedding, L) cell over the trial grid.

    Every embedding sees the same datasets and the same train/test
    splits. Rows go to ``out_dir/figure3-<task>.csv`` as each cell finishes.
    """
    cells = [(e, L) for e in config.embeddings for L in config.layers]
    writer = fh = None
    if config.out_dir is not None:
        Path(config.out_dir).mkdir(parents=True, exist_ok=True)
        fh = open(Path(config.out_dir) / f"figure3-{config.task}.csv", "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
    rows = []
    try:
        if config.threads > 1:
            # generate once up front so workers only read the cache
            if config.cache_dir is not None:
                for i in sorted({i for i, _ in config.trials()}):
                    load_or_generate(config.task, config.data_seed, i, config.cache_dir)
            pool = ProcessPoolExecutor(config.threads)
            results = pool.map(_cell_job, [(config, e, L) for e, L in cells])
        else:
            datasets = {i: load_or_generate(config.task, config.data_seed, i, config.cache_dir)
                        for i in sorted({i for i, _ in config.trials()})}
            results = (run_cell(config, e, L, datasets) for e, L in cells)
        for (e, L), m in zip(cells, results):
            row = (config.task, e, L, m.mean, m.std)
            log.info("%s %s L=%d mean=%.4f std=%.4f", *row)
            rows.append(row)
            if writer is not None:
                writer.writerow(row)
                fh.flush()
        if config.threads > 1:
            pool.shutdown()
    finally:
        if fh is not None:
            fh.close()
    return rows


def figure3_table(rows) -> dict[tuple[str, int], float]:
    return {(r[1], r[2]): r[3] for r in rows}


# ---- single-layer hardness ----

def hardness_losses(records: Sequence[DatasetRecord], dim: int, epochs: int = 500,
                    alpha: float = 1e-3, seed: int = 0, batch_size: int = 32) -> dict[str, float]:
    """Final training loss of atomic + one GCN layer and of naive WL + readout only."""
    tc = TrainConfig(alpha=alpha, epochs=epochs, batch_size=batch_size, seed=seed)
    out = {}
    for name, spec in (("atomic_L1", ModelSpec("atomic", 1, dim, "classification")),
                       ("wl_L0", ModelSpec("wl", 0, dim, "classification"))):
        out[name] = train(spec, list(records), tc).history[-1]
    return out


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
