"""Loading the miner's dataset CSV and committer-time sidecar.

The dataset file carries ``commit,label_bug,label_fix,ft1..ft16`` rows
sorted by committer time ascending; the sidecar carries
``commit,committer_time`` in the same order. These two files are the only
contract with the mining side.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FEATURE_NAMES = tuple(f"ft{i}" for i in range(1, 17))
DATASET_HEADER = ["commit", "label_bug", "label_fix", *FEATURE_NAMES]
SIDECAR_HEADER = ["commit", "committer_time"]


class DatasetError(ValueError):
    """Dataset or sidecar file does not match the documented schema."""


@dataclass
class Dataset:
    commits: list[str]
    X: np.ndarray          # (n, 16) float
    y: np.ndarray          # (n,) int, the bug-introducing label
    fix: np.ndarray        # (n,) int


def load_dataset(path: str | Path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATASET_HEADER:
            raise DatasetError(f"{path}: unexpected header {header!r}")
        commits: list[str] = []
        rows: list[list[float]] = []
        labels: list[int] = []
        fixes: list[int] = []
        for i, row in enumerate(reader):
            if len(row) != len(DATASET_HEADER):
                raise DatasetError(f"{path}: row {i + 1} has {len(row)} columns")
            commits.append(row[0])
            labels.append(int(row[1]))
            fixes.append(int(row[2]))
            rows.append([float(v) for v in row[3:]])
    return Dataset(
        commits=commits,
        X=np.asarray(rows, dtype=np.float64),
        y=np.asarray(labels, dtype=np.int64),
        fix=np.asarray(fixes, dtype=np.int64),
    )


def load_timestamps(path: str | Path, commits: list[str] | None = None) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SIDECAR_HEADER:
            raise DatasetError(f"{path}: unexpected header {header!r}")
        ids: list[str] = []
        times: list[int] = []
        for row in reader:
            ids.append(row[0])
            times.append(int(row[1]))
    if commits is not None and ids != commits:
        raise DatasetError(f"{path}: sidecar commits disagree with the dataset")
    ts = np.asarray(times, dtype=np.int64)
    if np.any(np.diff(ts) < 0):
        raise DatasetError(f"{path}: timestamps are not sorted ascending")
    return ts
