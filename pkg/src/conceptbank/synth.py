"""Synthetic dataset with planted ground truth for desk-scale validation.

Each image carries a set of present concepts: all constituents of its
intended class plus background concepts drawn with probability
proportional to rank^(-tail_exponent) (a long tail).  Its feature vector
is the normalized sum of the present concepts' planted unit directions
plus Gaussian noise, and its emitted label is re-derived from the presence
set by the best-constituent-overlap rule (ties to the lowest class index).
Synthetic embeddings give every concept a class-membership signature so
relatedness ranking has real signal to find.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureTable, save_labels
from .svm import l2_normalize, l2_normalize_rows
from .vocabulary import RegionAnnotation, write_annotations

# Expected number of background concepts per image.
_BACKGROUND_MEAN = 3.0
# Noise scale of the synthetic embedding signatures.
_EMBEDDING_NOISE = 0.05


@dataclass(frozen=True)
class SynthSpec:
    feature_dim: int = 64
    n_concepts: int = 50
    n_classes: int = 10
    constituents_per_class: int = 5
    train_per_class: int = 200
    test_per_class: int = 100
    tail_exponent: float = 1.0
    noise_sigma: float = 0.05
    seed: int = 7

    def validate(self):
        counts = {
            "feature_dim": self.feature_dim,
            "n_concepts": self.n_concepts,
            "n_classes": self.n_classes,
            "constituents_per_class": self.constituents_per_class,
            "train_per_class": self.train_per_class,
            "test_per_class": self.test_per_class,
        }
        for name, value in counts.items():
            if int(value) < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.constituents_per_class > self.n_concepts:
            raise ValueError(
                "constituents_per_class cannot exceed n_concepts")
        if self.tail_exponent < 0:
            raise ValueError("tail_exponent must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class SynthDataset:
    spec: SynthSpec
    concept_names: list
    class_names: list
    directions: np.ndarray          # (n_concepts, feature_dim) unit rows
    constituents: dict              # class name -> sorted concept names
    train_features: FeatureTable
    test_features: FeatureTable
    train_labels: dict
    test_labels: dict
    presence: dict                  # image id -> sorted concept names
    annotations: list = field(default_factory=list)  # train images only
    embedding_table: dict = field(default_factory=dict)


def _assign_constituents(rng, spec):
    """Constituent concept indices per class; a disjoint random partition
    whenever the concepts suffice to tile every class."""
    L, cpc, N = spec.n_classes, spec.constituents_per_class, spec.n_concepts
    if N >= L * cpc:
        perm = rng.permutation(N)
        return [sorted(int(i) for i in perm[j * cpc:(j + 1) * cpc])
                for j in range(L)]
    return [sorted(int(i) for i in rng.choice(N, size=cpc, replace=False))
            for j in range(L)]


def _overlap_label(present, constituent_sets):
    """Index of the class whose constituents overlap `present` the most,
    ties to the lowest class index."""
    best_j = 0
    best = -1
    for j, constituents in enumerate(constituent_sets):
        overlap = len(present & constituents)
        if overlap > best:
            best = overlap
            best_j = j
    return best_j


def generate(spec):
    """Build the full dataset; bit-identical for a fixed spec."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    N, d, L = spec.n_concepts, spec.feature_dim, spec.n_classes

    concept_names = [f"c{i:03d}" for i in range(N)]
    class_names = [f"act{j:02d}" for j in range(L)]

    directions = l2_normalize_rows(rng.normal(size=(N, d)))
    constituent_idx = _assign_constituents(rng, spec)
    constituent_sets = [set(c) for c in constituent_idx]

    ranks = np.arange(1, N + 1, dtype=np.float64)
    weights = ranks ** -spec.tail_exponent
    background_p = np.minimum(_BACKGROUND_MEAN * weights / weights.sum(), 0.9)

    presence = {}
    annotations = []
    splits = {}
    split_labels = {}
    for split, per_class in (("train", spec.train_per_class),
                             ("test", spec.test_per_class)):
        ids = []
        rows = []
        labels = {}
        for j in range(L):
            for i in range(per_class):
                image_id = f"{split}_{j:02d}_{i:04d}"
                background = np.flatnonzero(rng.random(N) < background_p)
                present = constituent_sets[j] | {int(b) for b in background}
                label_idx = _overlap_label(present, constituent_sets)
                present_sorted = sorted(present)
                signal = l2_normalize(directions[present_sorted].sum(axis=0))
                noise = rng.normal(size=d) * spec.noise_sigma
                ids.append(image_id)
                rows.append(signal + noise)
                labels[image_id] = [class_names[label_idx]]
                presence[image_id] = [concept_names[c] for c in present_sorted]
                if split == "train":
                    for c in present_sorted:
                        annotations.append(RegionAnnotation(
                            image_id=image_id,
                            object_name=concept_names[c],
                            attributes=()))
        splits[split] = FeatureTable(ids, np.array(rows))
        split_labels[split] = labels

    # Embeddings: one coordinate per class; a concept's signature marks the
    # classes it constitutes, a class vector is its own one-hot coordinate.
    embedding_table = {}
    for i, name in enumerate(concept_names):
        signature = np.zeros(L)
        for j in range(L):
            if i in constituent_sets[j]:
                signature[j] = 1.0
        embedding_table[name] = (
            signature + rng.normal(size=L) * _EMBEDDING_NOISE)
    for j, name in enumerate(class_names):
        one_hot = np.zeros(L)
        one_hot[j] = 1.0
        embedding_table[name] = one_hot

    return SynthDataset(
        spec=spec,
        concept_names=concept_names,
        class_names=class_names,
        directions=directions,
        constituents={class_names[j]: [concept_names[c]
                                       for c in constituent_idx[j]]
                      for j in range(L)},
        train_features=splits["train"],
        test_features=splits["test"],
        train_labels=split_labels["train"],
        test_labels=split_labels["test"],
        presence=presence,
        annotations=annotations,
        embedding_table=embedding_table,
    )


def write_dataset(dataset, out_dir):
    """Emit every file the pipeline consumes; returns {name: path}."""
    os.makedirs(out_dir, exist_ok=True)
    truth_dir = os.path.join(out_dir, "truth")
    os.makedirs(truth_dir, exist_ok=True)
    paths = {
        "features_train": os.path.join(out_dir, "features_train.bin"),
        "features_test": os.path.join(out_dir, "features_test.bin"),
        "annotations_train": os.path.join(out_dir, "annotations_train.jsonl"),
        "labels_train": os.path.join(out_dir, "labels_train.tsv"),
        "labels_test": os.path.join(out_dir, "labels_test.tsv"),
        "embeddings": os.path.join(out_dir, "embeddings.txt"),
        "truth_constituents": os.path.join(truth_dir, "constituents.json"),
        "truth_presence": os.path.join(truth_dir, "presence.jsonl"),
        "truth_directions": os.path.join(truth_dir, "directions.bin"),
    }

    dataset.train_features.save(paths["features_train"])
    dataset.test_features.save(paths["features_test"])
    write_annotations(dataset.annotations, paths["annotations_train"])
    save_labels(dataset.train_labels, paths["labels_train"])
    save_labels(dataset.test_labels, paths["labels_test"])

    with open(paths["embeddings"], "w", encoding="utf-8") as fh:
        for word in dataset.concept_names + dataset.class_names:
            vec = dataset.embedding_table[word]
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec))
            fh.write("\n")

    with open(paths["truth_constituents"], "w", encoding="utf-8") as fh:
        json.dump(dataset.constituents, fh, sort_keys=True, indent=2)
        fh.write("\n")

    all_labels = {**dataset.train_labels, **dataset.test_labels}
    with open(paths["truth_presence"], "w", encoding="utf-8") as fh:
        for image_id in sorted(dataset.presence):
            fh.write(json.dumps({
                "image_id": image_id,
                "concepts": dataset.presence[image_id],
                "label": all_labels[image_id][0],
            }, sort_keys=True))
            fh.write("\n")

    FeatureTable(dataset.concept_names, dataset.directions).save(
        paths["truth_directions"])
    return paths
