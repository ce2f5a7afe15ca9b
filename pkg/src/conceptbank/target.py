"""Target classifiers over concept-score vectors (or raw visual features).

Score rows are l2-normalized, mean-centered, optionally rotated/truncated
by PCA, and fed to one-vs-all linear SVMs.  Centering happens in both the
PCA and the no-PCA paths, so a full-rank PCA differs from no PCA by a pure
rotation and leaves decisions unchanged.  `concept_space_weights` unfolds
the centering/rotation back into the input space, which is what makes
keyword attribution and the two-path score identity possible.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .features import FeatureTable
from .pca import PCA
from .svm import LinearSVM, l2_normalize_rows
from .validation import as_matrix, check_feature_dim

MODE_CONCEPT = "concept"
MODE_DIRECT = "direct"

_MAGIC = b"TARGETMODEL 1\n"


class TargetClassifier(BaseEstimator):
    """One-vs-all linear SVM per target class on projected score vectors."""

    def __init__(self, pca_n=900, use_pca=True, C=1.0, tol=1e-4,
                 max_epochs=1000, multi_label=False, seed=0,
                 mode=MODE_CONCEPT):
        self.pca_n = pca_n
        self.use_pca = use_pca
        self.C = C
        self.tol = tol
        self.max_epochs = max_epochs
        self.multi_label = multi_label
        self.seed = seed
        self.mode = mode

    def fit(self, X, y):
        if self.mode not in (MODE_CONCEPT, MODE_DIRECT):
            raise ValueError(f"unknown mode: {self.mode!r}")
        X = as_matrix(X)
        m = X.shape[0]
        if m == 0:
            raise ValueError("empty training set")
        if len(y) != m:
            raise ValueError(f"{len(y)} labels for {m} rows")

        if self.multi_label:
            label_sets = [frozenset(labels) for labels in y]
            classes = sorted(set().union(*label_sets)) if label_sets else []
            if len(classes) < 1:
                raise ValueError("multi-label training needs >= 1 class")
        else:
            label_sets = [frozenset([label]) for label in y]
            classes = sorted({label for label in y})
            if len(classes) < 2:
                raise ValueError(
                    f"single-label training needs >= 2 classes, "
                    f"got {classes}")

        Xn = l2_normalize_rows(X)
        if self.use_pca:
            pca = PCA(n_components=min(int(self.pca_n), X.shape[1], m - 1))
            pca.fit(Xn)
            self.mean_ = pca.mean_
            self.components_ = pca.components_
            projected = pca.transform(Xn)
        else:
            self.mean_ = Xn.mean(axis=0)
            self.components_ = None
            projected = Xn - self.mean_

        seeds = np.random.SeedSequence(self.seed).generate_state(len(classes))
        coef = []
        intercept = []
        for j, cls in enumerate(classes):
            yj = np.array([1.0 if cls in s else -1.0 for s in label_sets])
            model = LinearSVM(
                C=self.C, tol=self.tol, max_epochs=self.max_epochs,
                fit_intercept=True, seed=int(seeds[j]),
            ).fit(projected, yj)
            coef.append(model.coef_)
            intercept.append(model.intercept_)

        self.classes_ = classes
        self.coef_ = np.vstack(coef)
        self.intercept_ = np.array(intercept)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "coef_"):
            raise NotFittedError("TargetClassifier is not fitted yet")

    def decision_function(self, X):
        """Per-class scores H_j, one row per input row."""
        self._check_fitted()
        X = as_matrix(X)
        check_feature_dim(X, self.n_features_in_)
        Xn = l2_normalize_rows(X)
        if self.components_ is not None:
            projected = (Xn - self.mean_) @ self.components_.T
        else:
            projected = Xn - self.mean_
        return projected @ self.coef_.T + self.intercept_

    def predict(self, X):
        """Single-label decision: argmax, ties to the lowest class index."""
        scores = self.decision_function(X)
        return [self.classes_[i] for i in np.argmax(scores, axis=1)]

    def concept_space_weights(self):
        """Unfolded (weights, biases) acting directly on normalized inputs.

        decision_function(x) == l2(x) @ W.T + b exactly (up to float
        re-association), with W of shape (n_classes, input_dim).
        """
        self._check_fitted()
        if self.components_ is not None:
            W = self.coef_ @ self.components_
        else:
            W = self.coef_.copy()
        b = self.intercept_ - W @ self.mean_
        return W, b


def fit_target(scores, labels, **params):
    """Fit a TargetClassifier from a score FeatureTable and a label dict.

    Every score row must be labeled and every label must have a score row.
    """
    unlabeled = [i for i in scores.ids if i not in labels]
    if unlabeled:
        raise ValueError(
            f"{len(unlabeled)} score rows have no label, e.g. "
            f"{unlabeled[:5]!r}")
    missing = [i for i in labels if i not in scores]
    if missing:
        raise ValueError(
            f"{len(missing)} labeled ids have no score row, e.g. "
            f"{missing[:5]!r}")
    clf = TargetClassifier(**params)
    if clf.multi_label:
        y = [labels[i] for i in scores.ids]
    else:
        y = []
        for i in scores.ids:
            if len(labels[i]) != 1:
                raise ValueError(
                    f"image {i!r} has {len(labels[i])} labels in "
                    f"single-label mode")
            y.append(labels[i][0])
    return clf.fit(scores.matrix, y)


def score_table(model, features):
    """Decision scores for a FeatureTable, as an id-aligned FeatureTable."""
    return FeatureTable(features.ids, model.decision_function(features.matrix))


def standardize_scores(M):
    """Per-class (column) z-scores over the evaluation set.

    Constant columns come back as zeros rather than dividing by zero.
    """
    M = as_matrix(M, "scores")
    mean = M.mean(axis=0)
    std = M.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (M - mean) / std


def fuse_scores(concept_scores, direct_scores, alpha):
    """Blend standardized score sets: alpha*concept + (1-alpha)*direct."""
    c = np.asarray(concept_scores, dtype=np.float64)
    d = np.asarray(direct_scores, dtype=np.float64)
    if c.shape != d.shape:
        raise ValueError(
            f"score shapes differ: {c.shape} vs {d.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * c + (1.0 - alpha) * d


def save_target_model(model, path):
    model._check_fitted()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(f"mode {model.mode}\n".encode())
        fh.write(f"multi_label {int(model.multi_label)}\n".encode())
        fh.write(f"input_dim {model.n_features_in_}\n".encode())
        r = -1 if model.components_ is None else model.components_.shape[0]
        fh.write(f"n_components {r}\n".encode())
        fh.write(f"classes {len(model.classes_)}\n".encode())
        for cls in model.classes_:
            fh.write(cls.encode("utf-8") + b"\n")
        fh.write(b"END\n")
        fh.write(model.mean_.astype("<f8").tobytes())
        if model.components_ is not None:
            fh.write(model.components_.astype("<f8").tobytes(order="C"))
        fh.write(model.coef_.astype("<f8").tobytes(order="C"))
        fh.write(model.intercept_.astype("<f8").tobytes())


def load_target_model(path):
    with open(path, "rb") as fh:
        if fh.readline() != _MAGIC:
            raise ValueError(f"not a target model file: {path}")
        header = {}
        for field in ("mode", "multi_label", "input_dim", "n_components",
                      "classes"):
            key, _, value = fh.readline().decode().rstrip("\n").partition(" ")
            if key != field:
                raise ValueError(f"bad target model header in {path}")
            header[key] = value
        n_classes = int(header["classes"])
        classes = [fh.readline().decode("utf-8").rstrip("\n")
                   for _ in range(n_classes)]
        if fh.readline() != b"END\n":
            raise ValueError(f"bad target model header in {path}")

        dim = int(header["input_dim"])
        r = int(header["n_components"])

        def block(count):
            data = fh.read(count * 8)
            if len(data) != count * 8:
                raise ValueError(f"truncated target model file: {path}")
            return np.frombuffer(data, dtype="<f8").copy()

        mean = block(dim)
        components = block(r * dim).reshape(r, dim) if r >= 0 else None
        width = r if r >= 0 else dim
        coef = block(n_classes * width).reshape(n_classes, width)
        intercept = block(n_classes)

    model = TargetClassifier(
        use_pca=r >= 0, multi_label=header["multi_label"] == "1",
        mode=header["mode"])
    model.classes_ = classes
    model.mean_ = mean
    model.components_ = components
    model.coef_ = coef
    model.intercept_ = intercept
    model.n_features_in_ = dim
    return model
