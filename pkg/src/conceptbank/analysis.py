"""Interpretability and concept-selection analyses.

Keyword tables rank the concepts behind each target class by the class's
effective weight in concept space (the PCA composition unfolded back to
one weight per concept).  Relatedness ranking orders concepts by an
exponentially decayed sum over classes of their embedding-distance rank,
and the selection curves compare training on the top-k concepts under the
frequency ordering versus the relatedness ordering.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .target import TargetClassifier


def effective_weights(model, bank):
    """Per-class weights over the bank's concepts (n_classes x n_concepts)."""
    W, b = model.concept_space_weights()
    if W.shape[1] != bank.n_concepts:
        raise ValueError(
            f"model input dimension {W.shape[1]} does not match the bank's "
            f"{bank.n_concepts} concepts")
    return W, b


def top_keywords(model, bank, k=5):
    """Top-k (concept, weight) pairs per class, weights non-increasing."""
    W, _ = effective_weights(model, bank)
    keys = bank.vocabulary.keys()
    if k > len(keys):
        warnings.warn(
            f"k={k} exceeds the {len(keys)} vocabulary concepts; clipping",
            stacklevel=2)
        k = len(keys)
    table = {}
    for j, cls in enumerate(model.classes_):
        ranked = sorted(zip(keys, W[j]), key=lambda kw: (-kw[1], kw[0]))
        table[cls] = [(key, float(weight)) for key, weight in ranked[:k]]
    return table


def mean_abs_weights(W):
    """Coordinate-wise mean of absolute per-class weights: (1/L) sum |w_j|."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] < 1:
        raise ValueError("need a (n_classes, n_concepts) weight matrix")
    return np.abs(W).mean(axis=0)


@dataclass
class RelatednessRanking:
    """Per-concept relatedness r and the per-class rank permutations."""

    r: dict                 # concept key -> sum_p exp(-rank_p)
    sigma: dict             # class label -> {concept key -> rank, 1-based}
    skipped_concepts: list  # keys with no embedding
    skipped_classes: list   # labels with no embedding


def relatedness_rank(concept_vectors, class_vectors):
    """Rank concepts by embedding distance to each class (Euclidean,
    increasing, ties by key) and score r(c) = sum_p exp(-sigma_p(c)).

    Entries with a None vector are skipped and reported.
    """
    concepts = {k: v for k, v in concept_vectors.items() if v is not None}
    classes = {p: v for p, v in class_vectors.items() if v is not None}
    skipped_concepts = sorted(set(concept_vectors) - set(concepts))
    skipped_classes = sorted(set(class_vectors) - set(classes))
    if not classes:
        raise ValueError("no target class has an embedding vector")
    if not concepts:
        raise ValueError("no concept has an embedding vector")

    keys = sorted(concepts)
    points = np.vstack([concepts[k] for k in keys])
    r = {k: 0.0 for k in keys}
    sigma = {}
    for label in sorted(classes):
        dists = np.linalg.norm(points - classes[label], axis=1)
        order = sorted(range(len(keys)), key=lambda i: (dists[i], keys[i]))
        ranks = {}
        for rank, i in enumerate(order, start=1):
            ranks[keys[i]] = rank
            r[keys[i]] += math.exp(-rank)
        sigma[label] = ranks
    return RelatednessRanking(
        r=r, sigma=sigma,
        skipped_concepts=skipped_concepts, skipped_classes=skipped_classes)


def order_by_frequency(vocab, ascending=False):
    """Concept indices by frequency (descending by default; ties by key)."""
    sign = 1 if ascending else -1
    return sorted(range(len(vocab)),
                  key=lambda i: (sign * vocab.entries[i].frequency,
                                 vocab.entries[i].key))


def order_by_relatedness(ranking, vocab):
    """Concept indices by descending r(c); concepts without a score last."""
    def sort_key(i):
        key = vocab.entries[i].key
        r = ranking.r.get(key)
        return (0, -r, key) if r is not None else (1, 0.0, key)
    return sorted(range(len(vocab)), key=sort_key)


def selection_curve(train_scores, y_train, test_scores, y_test, order, ks,
                    svm_params=None, seed=0):
    """Held-out accuracy as a function of the number of selected concepts.

    `order` lists concept column indices, best first.  k=0 reports chance
    accuracy 1/L exactly.  Selected columns are re-sorted to ascending
    index, so the k=N result is identical for every ordering of the same
    concept set.  Models are trained without PCA.
    """
    train_scores = np.asarray(train_scores, dtype=np.float64)
    test_scores = np.asarray(test_scores, dtype=np.float64)
    n_concepts = train_scores.shape[1]
    classes = sorted(set(y_train))
    params = dict(svm_params or {})
    points = []
    for k in ks:
        k = int(k)
        if k > n_concepts:
            raise ValueError(f"k={k} exceeds {n_concepts} concepts")
        if k == 0:
            points.append((0, 1.0 / len(classes)))
            continue
        cols = sorted(order[:k])
        model = TargetClassifier(
            use_pca=False, seed=seed, **params,
        ).fit(train_scores[:, cols], list(y_train))
        predictions = model.predict(test_scores[:, cols])
        correct = sum(p == t for p, t in zip(predictions, y_test))
        points.append((k, correct / len(y_test)))
    return points


def frequency_histogram(vocab):
    """(rank, frequency) pairs, most frequent first (ties by key)."""
    frequencies = sorted(
        ((e.frequency, e.key) for e in vocab.entries),
        key=lambda fk: (-fk[0], fk[1]))
    return [(rank, f) for rank, (f, _) in enumerate(frequencies, start=1)]


def weight_vs_frequency(mean_abs, vocab, window=50):
    """(rank, weight, moving average) per concept in frequency order.

    `mean_abs` must be aligned with the vocabulary order (which is already
    descending-frequency).  The centered moving average clips its window
    at the boundaries.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    mean_abs = np.asarray(mean_abs, dtype=np.float64)
    if mean_abs.shape != (len(vocab),):
        raise ValueError(
            f"expected {len(vocab)} weights, got shape {mean_abs.shape}")
    n = len(mean_abs)
    left = (window - 1) // 2
    right = window // 2
    series = []
    for i in range(n):
        lo = max(0, i - left)
        hi = min(n, i + right + 1)
        series.append((i + 1, float(mean_abs[i]),
                       float(mean_abs[lo:hi].mean())))
    return series
