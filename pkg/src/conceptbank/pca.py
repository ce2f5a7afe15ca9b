"""Principal component analysis via singular value decomposition."""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .validation import as_matrix, check_feature_dim


class PCA(BaseEstimator, TransformerMixin):
    """Mean-centering PCA keeping the strongest singular directions.

    The effective dimension is min(n_components, n_features, n_samples - 1);
    asking for more than the data can support truncates with a warning and
    the actual dimension is reported in `n_components_`.
    """

    def __init__(self, n_components=None):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = as_matrix(X)
        m, d = X.shape
        if m < 2:
            raise ValueError("PCA needs at least 2 samples")
        available = min(d, m - 1)
        if self.n_components is None:
            n = available
        else:
            n = int(self.n_components)
            if n < 1:
                raise ValueError("n_components must be >= 1")
            if n > available:
                warnings.warn(
                    f"n_components={n} exceeds available rank {available}; "
                    f"truncating",
                    stacklevel=2,
                )
                n = available

        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:n]
        # Deterministic sign: largest-magnitude entry of each component > 0.
        pivot = np.argmax(np.abs(components), axis=1)
        signs = np.sign(components[np.arange(n), pivot])
        signs[signs == 0.0] = 1.0
        self.components_ = components * signs[:, None]
        self.explained_variance_ = (s[:n] ** 2) / (m - 1)
        self.n_components_ = n
        self.n_features_in_ = d
        return self

    def transform(self, X):
        if not hasattr(self, "components_"):
            raise NotFittedError("PCA instance is not fitted yet")
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        X = as_matrix(X)
        check_feature_dim(X, self.n_features_in_)
        proj = (X - self.mean_) @ self.components_.T
        return proj[0] if single else proj
