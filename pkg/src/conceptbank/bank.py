"""Concept-classifier bank: cluster-aware training-set mining, one-vs-all
SVM training, scoring, and the versioned bank file format.

For a concept c with cluster h_c, the positive pool is every image whose
concept set contains c and the negative pool is every image whose concept
set is disjoint from h_c, so semantically overlapping concepts (same
cluster) never serve as negatives for each other.
"""

import math
import struct
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .features import FeatureTable
from .svm import LinearSVM, l2_normalize_rows
from .validation import check_feature_dim
from .vocabulary import KINDS, ConceptEntry, ConceptVocabulary

_MAGIC = b"CONCEPTBANK 1\n"


def build_training_sets(concept_key, vocab, image_concepts,
                        max_pos=1000, neg_ratio=3.0, seed=0):
    """Mine (positives, negatives) image-id lists for one concept.

    Positives are capped at `max_pos` by seeded uniform sampling; negatives
    are a seeded uniform sample of ceil(neg_ratio * |positives|) from the
    cluster-disjoint pool.  Both lists come back sorted.
    """
    members = vocab.cluster_members(concept_key)
    positives = []
    negatives = []
    for image_id in sorted(image_concepts):
        concepts = image_concepts[image_id]
        if concept_key in concepts:
            positives.append(image_id)
        elif not (members & concepts):
            negatives.append(image_id)
    if not positives:
        raise ValueError(f"concept has no positive images: {concept_key!r}")

    rng = np.random.default_rng(seed)
    if len(positives) > max_pos:
        chosen = rng.choice(len(positives), size=max_pos, replace=False)
        positives = sorted(positives[i] for i in chosen)
    n_neg = min(len(negatives), math.ceil(neg_ratio * len(positives)))
    if n_neg < len(negatives):
        chosen = rng.choice(len(negatives), size=n_neg, replace=False)
        negatives = sorted(negatives[i] for i in chosen)
    return positives, negatives


class ConceptBank:
    """Stacked concept-classifier weights V (n_concepts x feature_dim)."""

    def __init__(self, vocabulary, weights, biases):
        weights = np.asarray(weights, dtype=np.float64)
        biases = np.asarray(biases, dtype=np.float64)
        if weights.ndim != 2 or biases.ndim != 1:
            raise ValueError("weights must be 2-D and biases 1-D")
        if weights.shape[0] != len(vocabulary) or \
                biases.shape[0] != len(vocabulary):
            raise ValueError("one weight row and bias per concept required")
        self.vocabulary = vocabulary
        self.weights = weights
        self.biases = biases

    @property
    def n_concepts(self):
        return self.weights.shape[0]

    @property
    def feature_dim(self):
        return self.weights.shape[1]

    def transform_matrix(self, X):
        """Concept scores for raw feature rows: V @ l2(x) + b.

        Computed one concept column at a time so every column is
        bit-identical to the concept's standalone decision function.
        """
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        check_feature_dim(X, self.feature_dim, "features")
        Xn = l2_normalize_rows(X)
        scores = np.empty((X.shape[0], self.n_concepts))
        for i in range(self.n_concepts):
            scores[:, i] = Xn @ self.weights[i] + self.biases[i]
        return scores[0] if single else scores

    def transform(self, features):
        """Score table for a FeatureTable, rows in input id order."""
        return FeatureTable(features.ids, self.transform_matrix(features.matrix))

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(f"{self.n_concepts} {self.feature_dim}\n".encode())
            for e in self.vocabulary.entries:
                cluster = -1 if e.cluster is None else e.cluster
                fh.write(
                    f"{e.key}\t{e.kind}\t{e.frequency}\t{cluster}\n".encode())
            fh.write(b"END\n")
            fh.write(self.weights.astype("<f4").tobytes(order="C"))
            fh.write(self.biases.astype("<f4").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            if fh.readline() != _MAGIC:
                raise ValueError(f"not a concept bank file: {path}")
            counts = fh.readline().split()
            if len(counts) != 2:
                raise ValueError(f"bad bank header in {path}")
            n, d = int(counts[0]), int(counts[1])
            entries = []
            for _ in range(n):
                fields = fh.readline().decode("utf-8").rstrip("\n").split("\t")
                if len(fields) != 4:
                    raise ValueError(f"bad vocabulary line in {path}")
                key, kind, frequency, cluster = fields
                if kind not in KINDS:
                    raise ValueError(f"unknown concept kind in {path}: {kind!r}")
                entries.append(ConceptEntry(
                    key=key, kind=kind, frequency=int(frequency),
                    cluster=None if cluster == "-1" else int(cluster)))
            if fh.readline() != b"END\n":
                raise ValueError(f"bad bank header in {path}")
            weights = np.frombuffer(fh.read(n * d * 4), dtype="<f4")
            if weights.size != n * d:
                raise ValueError(f"truncated bank file: {path}")
            biases = np.frombuffer(fh.read(n * 4), dtype="<f4")
            if biases.size != n:
                raise ValueError(f"truncated bank file: {path}")
        return cls(ConceptVocabulary(entries),
                   weights.astype(np.float64).reshape(n, d),
                   biases.astype(np.float64))


class ConceptBankTrainer(BaseEstimator):
    """Trains one linear SVM per vocabulary concept over mined image sets.

    Feature rows are l2-normalized before training.  Each concept gets its
    own RNG stream derived from `seed`, so results are identical no matter
    how many worker threads run the per-concept jobs.
    """

    def __init__(self, C=1.0, tol=1e-4, max_epochs=1000, max_pos=1000,
                 neg_ratio=3.0, seed=0, n_jobs=1):
        self.C = C
        self.tol = tol
        self.max_epochs = max_epochs
        self.max_pos = max_pos
        self.neg_ratio = neg_ratio
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, vocab, features, image_concepts, log=None):
        """Train the bank; `log` (if given) receives one line per concept."""
        if len(vocab) == 0:
            raise ValueError("empty vocabulary")
        n = len(vocab)
        d = features.dimension
        # Two independent child seeds per concept: sampling and SVM order.
        seed_state = np.random.SeedSequence(self.seed).generate_state(2 * n)

        def train_one(i):
            key = vocab.entries[i].key
            pos, neg = build_training_sets(
                key, vocab, image_concepts,
                max_pos=self.max_pos, neg_ratio=self.neg_ratio,
                seed=int(seed_state[2 * i]))
            ids = pos + neg
            X = l2_normalize_rows(features.rows(ids))
            y = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
            model = LinearSVM(
                C=self.C, tol=self.tol, max_epochs=self.max_epochs,
                fit_intercept=True, seed=int(seed_state[2 * i + 1]),
            ).fit(X, y)
            return i, key, len(pos), len(neg), model

        weights = np.empty((n, d))
        biases = np.empty(n)
        n_jobs = max(1, int(self.n_jobs))
        if n_jobs == 1:
            results = map(train_one, range(n))
        else:
            pool = ThreadPoolExecutor(max_workers=n_jobs)
            results = pool.map(train_one, range(n))
        for i, key, n_pos, n_neg, model in results:
            weights[i] = model.coef_
            biases[i] = model.intercept_
            if log is not None:
                log(f"concept {key!r}: {n_pos} positives, {n_neg} negatives, "
                    f"{model.n_epochs_} epochs, gap {model.duality_gap_:.3g}")
        if n_jobs > 1:
            pool.shutdown()

        self.bank_ = ConceptBank(vocab, weights, biases)
        return self

    def transform(self, features):
        if not hasattr(self, "bank_"):
            raise NotFittedError("ConceptBankTrainer is not fitted yet")
        return self.bank_.transform(features)
