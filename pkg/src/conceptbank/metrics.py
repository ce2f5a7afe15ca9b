"""Evaluation: top-1 accuracy with confusion counts (single-label mode)
and per-class average precision / mAP (multi-label mode).

AP for a class is the mean of the precision values at each positive's
rank, with items sorted by descending score and score ties broken by
image id.
"""

from dataclasses import dataclass, field

import numpy as np


def average_precision(scores, positives, ids):
    """AP of one class; None when the class has no positive examples."""
    n = len(scores)
    if not (len(positives) == n and len(ids) == n):
        raise ValueError("scores, positives and ids must have equal length")
    order = sorted(range(n), key=lambda i: (-scores[i], ids[i]))
    hits = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if positives[i]:
            hits += 1
            total += hits / rank
    if hits == 0:
        return None
    return total / hits


@dataclass
class EvaluationReport:
    class_labels: list
    n_images: int
    accuracy: float | None = None
    confusion: np.ndarray | None = None
    per_class_ap: list = field(default_factory=list)
    mean_ap: float | None = None
    excluded_classes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "class_labels": self.class_labels,
            "n_images": self.n_images,
            "accuracy": self.accuracy,
            "confusion": None if self.confusion is None
            else self.confusion.tolist(),
            "per_class_ap": [None if a is None else float(a)
                             for a in self.per_class_ap],
            "mean_ap": self.mean_ap,
            "excluded_classes": self.excluded_classes,
        }


def evaluate(ids, scores, truth, class_labels, mode="single"):
    """Score predictions against ground truth.

    ids:           image ids, aligned with the score rows
    scores:        (n_images, n_classes) decision values
    truth:         image id -> list of true labels
    class_labels:  column order of `scores`
    mode:          "single" (top-1 accuracy + confusion + AP over one-hot
                   truth) or "multi" (AP/mAP only; zero-positive classes
                   are excluded from mAP and reported)
    """
    if mode not in ("single", "multi"):
        raise ValueError(f"unknown evaluation mode: {mode!r}")
    scores = np.asarray(scores, dtype=np.float64)
    n = len(ids)
    if n == 0:
        raise ValueError("empty evaluation set")
    if scores.shape != (n, len(class_labels)):
        raise ValueError(
            f"scores shape {scores.shape} does not match {n} ids x "
            f"{len(class_labels)} classes")
    missing = [i for i in ids if i not in truth]
    if missing:
        raise ValueError(
            f"{len(missing)} evaluated images lack ground truth, e.g. "
            f"{missing[:5]!r}")
    class_index = {c: j for j, c in enumerate(class_labels)}
    for i in ids:
        for label in truth[i]:
            if label not in class_index:
                raise ValueError(
                    f"ground-truth label {label!r} not among the model "
                    f"classes")

    report = EvaluationReport(class_labels=list(class_labels), n_images=n)

    if mode == "single":
        for i in ids:
            if len(truth[i]) != 1:
                raise ValueError(
                    f"image {i!r} has {len(truth[i])} labels in single mode")
        true_idx = np.array([class_index[truth[i][0]] for i in ids])
        pred_idx = np.argmax(scores, axis=1)  # ties -> lowest class index
        report.accuracy = float(np.mean(pred_idx == true_idx))
        confusion = np.zeros((len(class_labels), len(class_labels)), dtype=int)
        np.add.at(confusion, (true_idx, pred_idx), 1)
        report.confusion = confusion
        positive_sets = [frozenset(truth[i]) for i in ids]
    else:
        positive_sets = [frozenset(truth[i]) for i in ids]

    included = []
    for j, cls in enumerate(class_labels):
        positives = [cls in s for s in positive_sets]
        ap = average_precision(scores[:, j], positives, ids)
        report.per_class_ap.append(ap)
        if ap is None:
            report.excluded_classes.append(cls)
        else:
            included.append(ap)
    if included:
        report.mean_ap = float(np.mean(included))
    return report
