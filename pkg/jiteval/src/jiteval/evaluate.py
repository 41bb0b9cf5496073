"""Per-fold random-forest training and report assembly.

Sampling is applied strictly inside training folds; metrics are binary on
the bug-introducing class; means and standard deviations are taken across
folds (the report says so explicitly); feature significances are averaged
fold importances normalized to sum to one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import precision_recall_fscore_support

from .data import FEATURE_NAMES
from .folds import OccConfig, make_cv_folds, make_occ_folds
from .sampling import SAMPLING_METHODS, resample

log = logging.getLogger(__name__)

SCHEMES = ("cv10", "occ")


@dataclass(frozen=True)
class EvalConfig:
    trees: int = 200
    sampling: str = "baseline"
    scheme: str = "cv10"
    occ: OccConfig = field(default_factory=OccConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.trees < 1:
            raise ValueError("trees must be >= 1")
        if self.sampling not in SAMPLING_METHODS:
            raise ValueError(f"sampling must be one of {SAMPLING_METHODS}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


@dataclass(frozen=True)
class FoldResult:
    precision: float
    recall: float
    f1: float
    train_size: int
    test_size: int


@dataclass(frozen=True)
class EvalReport:
    scheme: str
    sampling: str
    trees: int
    seed: int
    folds: tuple[FoldResult, ...]
    skipped_folds: int
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    f1_mean: float
    f1_std: float
    significances: dict[str, float]
    std_basis: str = "across folds"

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "sampling": self.sampling,
            "trees": self.trees,
            "seed": self.seed,
            "folds": [vars(f) | {} for f in self.folds],
            "skipped_folds": self.skipped_folds,
            "precision": {"mean": self.precision_mean, "std": self.precision_std},
            "recall": {"mean": self.recall_mean, "std": self.recall_std},
            "f1": {"mean": self.f1_mean, "std": self.f1_std},
            "significances": self.significances,
            "std_basis": self.std_basis,
        }


def run_eval(X: np.ndarray, y: np.ndarray, timestamps: np.ndarray | None,
             config: EvalConfig) -> EvalReport:
    """Train and score one (scheme, sampling) cell.

    ``timestamps`` is required for the occ scheme and ignored otherwise.
    Training folds with a single class are skipped with a warning and
    reflected in the fold count.
    """
    if np.unique(y).size < 2:
        raise ValueError("dataset must contain both classes")
    if config.scheme == "occ":
        if timestamps is None:
            raise ValueError("occ scheme needs timestamps")
        folds = make_occ_folds(timestamps, config.occ)
    else:
        folds = make_cv_folds(y, n_splits=10, seed=config.seed)

    results: list[FoldResult] = []
    importances: list[np.ndarray] = []
    skipped = 0
    for train_idx, test_idx in folds:
        y_train = y[train_idx]
        if np.unique(y_train).size < 2 or test_idx.size == 0:
            log.warning("skipping fold with single-class training data "
                        "(train %d, test %d)", train_idx.size, test_idx.size)
            skipped += 1
            continue
        X_train, y_train = resample(X[train_idx], y_train, config.sampling,
                                    seed=config.seed)
        model = RandomForestClassifier(
            n_estimators=config.trees, random_state=config.seed, n_jobs=-1
        )
        model.fit(X_train, y_train)
        y_pred = model.predict(X[test_idx])
        precision, recall, f1, _ = precision_recall_fscore_support(
            y[test_idx], y_pred, average="binary", pos_label=1, zero_division=0
        )
        results.append(FoldResult(
            precision=float(precision), recall=float(recall), f1=float(f1),
            train_size=int(train_idx.size), test_size=int(test_idx.size),
        ))
        importances.append(model.feature_importances_)

    if not results:
        raise ValueError("every fold was skipped; dataset unusable for this scheme")

    def agg(attr: str) -> tuple[float, float]:
        values = np.array([getattr(r, attr) for r in results])
        return float(values.mean()), float(values.std())

    mean_importance = np.mean(importances, axis=0)
    total = mean_importance.sum()
    significances = mean_importance / total if total > 0 else mean_importance
    p = agg("precision")
    r = agg("recall")
    f = agg("f1")
    return EvalReport(
        scheme=config.scheme,
        sampling=config.sampling,
        trees=config.trees,
        seed=config.seed,
        folds=tuple(results),
        skipped_folds=skipped,
        precision_mean=p[0], precision_std=p[1],
        recall_mean=r[0], recall_std=r[1],
        f1_mean=f[0], f1_std=f[1],
        significances={name: float(v) for name, v in zip(FEATURE_NAMES, significances)},
    )
