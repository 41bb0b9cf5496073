"""Fold construction: stratified 10-fold CV and time-aware online change
classification with start/end gaps and sliding train/test windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import StratifiedKFold

SECONDS_PER_DAY = 86_400


class SpanTooShortError(ValueError):
    """The dataset's time span cannot host a single fold."""


@dataclass(frozen=True)
class OccConfig:
    """Window geometry in days: a start gap before the first training
    window, a train->test gap, an end gap that the last test window must not
    enter, and an update step that slides the training window start."""

    sgap: int = 331
    gap: int = 73
    egap: int = 781
    update: int = 200
    train_days: int = 1_700
    test_days: int = 400

    def __post_init__(self) -> None:
        for name in ("sgap", "gap", "egap", "update", "train_days", "test_days"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def minimum_span_days(self) -> int:
        return self.sgap + self.train_days + self.gap + self.test_days + self.egap


def make_occ_folds(timestamps: np.ndarray,
                   config: OccConfig = OccConfig()) -> list[tuple[np.ndarray, np.ndarray]]:
    """Sliding (train indices, test indices) pairs over time-sorted data.

    Fold k trains on [T0 + sgap + k*update, +train_days) and tests on
    [train end + gap, +test_days); folds are emitted while the test window
    ends at or before the last commit minus the end gap.
    """
    ts = np.asarray(timestamps)
    if ts.size == 0:
        raise SpanTooShortError("empty timestamp list")
    if np.any(np.diff(ts) < 0):
        raise ValueError("timestamps must be sorted ascending")
    t0 = int(ts[0])
    last = int(ts[-1])
    span_days = (last - t0) / SECONDS_PER_DAY
    folds: list[tuple[np.ndarray, np.ndarray]] = []
    k = 0
    while True:
        train_start = t0 + (config.sgap + k * config.update) * SECONDS_PER_DAY
        train_end = train_start + config.train_days * SECONDS_PER_DAY
        test_start = train_end + config.gap * SECONDS_PER_DAY
        test_end = test_start + config.test_days * SECONDS_PER_DAY
        if test_end > last - config.egap * SECONDS_PER_DAY:
            break
        train_idx = np.flatnonzero((ts >= train_start) & (ts < train_end))
        test_idx = np.flatnonzero((ts >= test_start) & (ts < test_end))
        folds.append((train_idx, test_idx))
        k += 1
    if not folds:
        raise SpanTooShortError(
            f"span of {span_days:.0f} days cannot host one fold; "
            f"need at least {config.minimum_span_days} days"
        )
    return folds


def make_cv_folds(y: np.ndarray, n_splits: int = 10,
                  seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold splits on the bug label."""
    splitter = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed)
    return [(train, test) for train, test in splitter.split(np.zeros_like(y), y)]
