"""Class-imbalance sampling for training folds.

Four regimes: baseline (no resampling), minority oversampling by nearest-
neighbor interpolation, the same followed by removing boundary pairs that
are mutual opposite-class nearest neighbors, and majority undersampling to
cluster centroids. Each balanced regime equalizes the class counts; the
implementations follow the common imbalanced-learn semantics on top of
scikit-learn primitives (k=5 interpolation neighbors; boundary cleaning
drops both ends of a pair; centroid count equals the minority size).
"""

from __future__ import annotations

import numpy as np
from sklearn.cluster import MiniBatchKMeans
from sklearn.neighbors import NearestNeighbors

SAMPLING_METHODS = ("baseline", "smote", "smote_tomek", "cluster_centroids")
SMOTE_NEIGHBORS = 5


def resample(X: np.ndarray, y: np.ndarray, method: str,
             seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    if method not in SAMPLING_METHODS:
        raise ValueError(f"unknown sampling method {method!r}")
    if method == "baseline":
        return X, y
    if method == "smote":
        return _smote(X, y, seed)
    if method == "smote_tomek":
        Xs, ys = _smote(X, y, seed)
        keep = _tomek_keep_mask(Xs, ys)
        return Xs[keep], ys[keep]
    return _cluster_centroids(X, y, seed)


def _split_classes(y: np.ndarray) -> tuple[int, int]:
    classes, counts = np.unique(y, return_counts=True)
    if classes.size != 2:
        raise ValueError(f"need exactly two classes, got {classes.tolist()}")
    minority = classes[np.argmin(counts)]
    majority = classes[np.argmax(counts)]
    if minority == majority:  # equal counts: nothing to balance
        minority, majority = classes[0], classes[1]
    return int(minority), int(majority)


def _smote(X: np.ndarray, y: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Oversample the minority class to the majority count by interpolating
    between minority samples and their minority nearest neighbors."""
    rng = np.random.RandomState(seed)
    minority, majority = _split_classes(y)
    min_idx = np.flatnonzero(y == minority)
    n_new = int(np.sum(y == majority) - min_idx.size)
    if n_new <= 0:
        return X, y
    X_min = X[min_idx]
    if min_idx.size == 1:
        synth = np.repeat(X_min, n_new, axis=0)
    else:
        k = min(SMOTE_NEIGHBORS, min_idx.size - 1)
        nn = NearestNeighbors(n_neighbors=k + 1).fit(X_min)
        neighbors = nn.kneighbors(X_min, return_distance=False)[:, 1:]
        base = rng.randint(0, X_min.shape[0], size=n_new)
        pick = neighbors[base, rng.randint(0, k, size=n_new)]
        steps = rng.uniform(size=(n_new, 1))
        synth = X_min[base] + steps * (X_min[pick] - X_min[base])
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_new, minority, dtype=y.dtype)])
    return X_out, y_out


def _tomek_keep_mask(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mask dropping both members of every pair of opposite-class points
    that are each other's nearest neighbor."""
    nn = NearestNeighbors(n_neighbors=2).fit(X)
    nearest = nn.kneighbors(X, return_distance=False)[:, 1]
    idx = np.arange(X.shape[0])
    mutual = nearest[nearest[idx]] == idx
    opposite = y[nearest[idx]] != y[idx]
    drop = mutual & opposite
    return ~drop


def _cluster_centroids(X: np.ndarray, y: np.ndarray,
                       seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Replace the majority class by the centroids of as many clusters as
    there are minority samples."""
    minority, majority = _split_classes(y)
    maj_idx = np.flatnonzero(y == majority)
    min_idx = np.flatnonzero(y == minority)
    n_clusters = min_idx.size
    if n_clusters >= maj_idx.size:
        return X, y
    km = MiniBatchKMeans(
        n_clusters=n_clusters,
        random_state=seed,
        batch_size=max(1024, 4 * n_clusters),
        n_init=3,
    ).fit(X[maj_idx])
    X_out = np.vstack([km.cluster_centers_, X[min_idx]])
    y_out = np.concatenate([
        np.full(n_clusters, majority, dtype=y.dtype),
        np.full(min_idx.size, minority, dtype=y.dtype),
    ])
    return X_out, y_out
