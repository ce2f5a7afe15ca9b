"""L2-regularized L1-hinge linear SVM trained by dual coordinate descent.

The solver maintains the dual variables alpha (one per example, box
constrained to [0, C]) and the primal weight vector w = sum_i alpha_i y_i x_i,
sweeping the examples in a freshly seeded random order each epoch.  The bias
is handled by augmenting every example with a constant-1 coordinate, so the
bias is regularized along with the weights.  Training stops when the duality
gap primal(w) - dual(alpha) drops to `tol`, when a full epoch moves no dual
coordinate (an exact fixed point), or at `max_epochs`.
"""

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .validation import (
    as_matrix,
    as_signed_labels,
    check_feature_dim,
    check_positive,
)


def l2_normalize(x):
    """Scale a vector to unit L2 norm; the zero vector passes through."""
    a = np.asarray(x, dtype=np.float64)
    n = np.sqrt(np.sum(a * a))
    if n == 0.0:
        return a.copy()
    return a / n


def l2_normalize_rows(X):
    """Row-wise l2_normalize; zero rows pass through unchanged."""
    A = np.asarray(X, dtype=np.float64)
    norms = np.sqrt(np.sum(A * A, axis=1))
    safe = np.where(norms == 0.0, 1.0, norms)
    return A / safe[:, None]


@njit(cache=True, nogil=True)
def _cd_epoch(Xy, q_diag, alpha, w, C, order):
    """One dual coordinate descent sweep; returns the number of updates."""
    moved = 0
    for t in range(order.shape[0]):
        i = order[t]
        xi = Xy[i]
        g = -1.0
        for j in range(xi.shape[0]):
            g += xi[j] * w[j]
        a_old = alpha[i]
        if q_diag[i] > 0.0:
            a_new = a_old - g / q_diag[i]
            if a_new < 0.0:
                a_new = 0.0
            elif a_new > C:
                a_new = C
        else:
            # x_i = 0: the dual is linear in alpha_i, optimum sits on a bound.
            a_new = C if g < 0.0 else 0.0
        d = a_new - a_old
        if d != 0.0:
            alpha[i] = a_new
            moved += 1
            for j in range(xi.shape[0]):
                w[j] += d * xi[j]
    return moved


def _objectives(Xy, w, alpha, C):
    margins = 1.0 - Xy @ w
    hinge = np.sum(margins[margins > 0.0])
    reg = 0.5 * float(w @ w)
    primal = reg + C * hinge
    dual = float(np.sum(alpha)) - reg
    return primal, dual


class LinearSVM(BaseEstimator):
    """Binary linear SVM minimizing 0.5*||w||^2 + C * sum hinge(y_i * f(x_i)).

    Parameters
    ----------
    C : float
        Misclassification cost, > 0.
    tol : float
        Duality-gap stopping tolerance, > 0.
    max_epochs : int
        Hard cap on full sweeps over the data.
    fit_intercept : bool
        When True the bias is learned through constant-feature augmentation
        (and is therefore regularized).
    seed : int
        Seeds the per-epoch example permutation.
    """

    def __init__(self, C=1.0, tol=1e-4, max_epochs=1000, fit_intercept=True,
                 seed=0):
        self.C = C
        self.tol = tol
        self.max_epochs = max_epochs
        self.fit_intercept = fit_intercept
        self.seed = seed

    def fit(self, X, y):
        check_positive(self.C, "C")
        check_positive(self.tol, "tol")
        X = as_matrix(X)
        m = X.shape[0]
        if m < 1:
            raise ValueError("need at least one training example")
        y = as_signed_labels(y, m)

        if self.fit_intercept:
            Xa = np.hstack([X, np.ones((m, 1))])
        else:
            Xa = X
        Xy = np.ascontiguousarray(Xa * y[:, None])
        q_diag = np.einsum("ij,ij->i", Xy, Xy)

        rng = np.random.default_rng(self.seed)
        alpha = np.zeros(m)
        w = np.zeros(Xa.shape[1])
        C = float(self.C)

        gap = np.inf
        epoch = 0
        for epoch in range(1, int(self.max_epochs) + 1):
            order = rng.permutation(m)
            moved = _cd_epoch(Xy, q_diag, alpha, w, C, order)
            primal, dual = _objectives(Xy, w, alpha, C)
            gap = primal - dual
            if gap <= self.tol or moved == 0:
                break

        if self.fit_intercept:
            self.coef_ = w[:-1].copy()
            self.intercept_ = float(w[-1])
        else:
            self.coef_ = w.copy()
            self.intercept_ = 0.0
        self.n_features_in_ = X.shape[1]
        self.n_epochs_ = epoch
        self.duality_gap_ = float(gap)
        self.converged_ = bool(gap <= self.tol)
        return self

    def decision_function(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("LinearSVM instance is not fitted yet")
        X = as_matrix(X)
        check_feature_dim(X, self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0.0, 1, -1)
