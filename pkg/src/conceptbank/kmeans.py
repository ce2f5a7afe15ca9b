"""K-means clustering with seeded k-means++ initialization."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .validation import as_matrix, check_feature_dim


def _squared_distances(X, centers):
    """Pairwise squared distances (m x k), clipped at zero."""
    d2 = (
        np.einsum("ij,ij->i", X, X)[:, None]
        - 2.0 * (X @ centers.T)
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(X, k, rng):
    m = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(m))
    centers[0] = X[first]
    d2 = np.einsum("ij,ij->i", X - centers[0], X - centers[0])
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            probs = d2 / total
            idx = int(rng.choice(m, p=probs))
        else:
            # All remaining mass at chosen centers (duplicates); pick any.
            idx = int(rng.integers(m))
        centers[c] = X[idx]
        diff = X - centers[c]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    return centers


def _lloyd(X, centers, max_iter):
    m = X.shape[0]
    k = centers.shape[0]
    labels = np.full(m, -1)
    history = []
    n_iter = 0
    for n_iter in range(1, int(max_iter) + 1):
        d2 = _squared_distances(X, centers)
        new_labels = np.argmin(d2, axis=1)  # ties -> lowest index
        counts = np.bincount(new_labels, minlength=k)
        reseeded = False
        if np.any(counts == 0):
            # Re-seed each empty cluster to the point farthest from its
            # assigned centroid, then let the next sweep re-assign.
            point_d2 = d2[np.arange(m), new_labels]
            for empty in np.flatnonzero(counts == 0):
                far = int(np.argmax(point_d2))
                centers[empty] = X[far]
                new_labels[far] = empty
                point_d2[far] = 0.0
                reseeded = True
            counts = np.bincount(new_labels, minlength=k)
        if not reseeded and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            if counts[c] > 0:
                centers[c] = X[labels == c].mean(axis=0)
        history.append(float(((X - centers[labels]) ** 2).sum()))
    # Final labels must be nearest-centroid consistent with final centers.
    labels = np.argmin(_squared_distances(X, centers), axis=1)
    inertia = float(((X - centers[labels]) ** 2).sum())
    return centers, labels, inertia, n_iter, history


class KMeans(BaseEstimator):
    """Lloyd's algorithm with k-means++ starts, deterministic per seed.

    Runs `n_init` independently seeded initializations and keeps the run
    with the lowest inertia (ties keep the earliest run).
    """

    def __init__(self, n_clusters, seed=0, max_iter=300, n_init=10):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.n_init = n_init

    def fit(self, X):
        X = as_matrix(X)
        m = X.shape[0]
        k = int(self.n_clusters)
        if k < 1:
            raise ValueError("n_clusters must be >= 1")
        if k > m:
            raise ValueError(f"n_clusters={k} exceeds {m} points")

        rng = np.random.default_rng(self.seed)
        best = None
        for _ in range(int(self.n_init)):
            centers = _kmeanspp_init(X, k, rng)
            result = _lloyd(X, centers.copy(), self.max_iter)
            if best is None or result[2] < best[2]:
                best = result

        (self.cluster_centers_, self.labels_, self.inertia_, self.n_iter_,
         self.inertia_history_) = best
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("KMeans instance is not fitted yet")
        X = as_matrix(X)
        check_feature_dim(X, self.n_features_in_)
        return np.argmin(_squared_distances(X, self.cluster_centers_), axis=1)

    def fit_predict(self, X):
        return self.fit(X).labels_
