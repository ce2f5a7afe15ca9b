"""Concept vocabulary: extraction from region annotations, min-count
filtering, and embedding-space clustering.

A vocabulary holds concepts of exactly one kind.  "obj" keys come from
object names, "attr" keys pool attributes across object types ("small dog"
and "small tree" both count toward "small"), and "objattr" keys pair the
two as "object|attribute".  Frequencies count distinct images, not
regions.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .kmeans import KMeans
from .text import ATTRIBUTE, NOUN, normalize_name

OBJ = "obj"
ATTR = "attr"
OBJ_ATTR = "objattr"
KINDS = (OBJ, ATTR, OBJ_ATTR)

COMPOUND_SEPARATOR = "|"


@dataclass(frozen=True)
class RegionAnnotation:
    """One annotated region: an object name plus its attributes."""

    image_id: str
    object_name: str
    attributes: tuple = ()


def read_annotations(path):
    """Read line-delimited JSON annotation records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(RegionAnnotation(
                    image_id=str(obj["image_id"]),
                    object_name=str(obj["object_name"]),
                    attributes=tuple(str(a) for a in obj.get("attributes", [])),
                ))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad annotation record") \
                    from exc
    return records


def write_annotations(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "image_id": rec.image_id,
                "object_name": rec.object_name,
                "attributes": list(rec.attributes),
            }, sort_keys=True))
            fh.write("\n")


@dataclass(frozen=True)
class ConceptEntry:
    key: str
    kind: str
    frequency: int
    embedding: np.ndarray | None = None
    cluster: int | None = None


@dataclass
class ConceptVocabulary:
    """Ordered concept entries (descending frequency, then key)."""

    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def keys(self):
        return [e.key for e in self.entries]

    def index_of(self, key):
        for i, e in enumerate(self.entries):
            if e.key == key:
                return i
        raise KeyError(f"concept not in vocabulary: {key!r}")

    def entry(self, key):
        return self.entries[self.index_of(key)]

    def cluster_members(self, key):
        """Keys sharing the cluster of `key` (including `key` itself)."""
        cluster = self.entry(key).cluster
        if cluster is None:
            raise ValueError(f"concept has no cluster assigned: {key!r}")
        return {e.key for e in self.entries if e.cluster == cluster}


def _sorted_entries(entries):
    return sorted(entries, key=lambda e: (-e.frequency, e.key))


def _region_keys(record, kind, policy):
    if kind == OBJ:
        key = normalize_name(record.object_name, policy, NOUN)
        return [key] if key else []
    if kind == ATTR:
        keys = []
        for attr in record.attributes:
            key = normalize_name(attr, policy, ATTRIBUTE)
            if key:
                keys.append(key)
        return keys
    if kind == OBJ_ATTR:
        obj = normalize_name(record.object_name, policy, NOUN)
        if not obj:
            return []
        keys = []
        for attr in record.attributes:
            a = normalize_name(attr, policy, ATTRIBUTE)
            if a:
                keys.append(obj + COMPOUND_SEPARATOR + a)
        return keys
    raise ValueError(f"unknown concept kind: {kind!r}")


def extract_concepts(annotations, kind, policy):
    """Normalize annotations into (vocabulary draft, per-image concept sets).

    Concepts whose normalized key is empty are dropped; duplicate concepts
    within an image count once.
    """
    image_concepts = {}
    for record in annotations:
        keys = _region_keys(record, kind, policy)
        if keys:
            image_concepts.setdefault(record.image_id, set()).update(keys)
    counts = {}
    for concepts in image_concepts.values():
        for key in concepts:
            counts[key] = counts.get(key, 0) + 1
    entries = _sorted_entries(
        ConceptEntry(key=k, kind=kind, frequency=f) for k, f in counts.items())
    return ConceptVocabulary(entries), image_concepts


def filter_min_count(vocab, min_count=10):
    """Drop concepts seen in fewer than `min_count` images."""
    kept = [e for e in vocab.entries if e.frequency >= min_count]
    return ConceptVocabulary(_sorted_entries(kept))


def concept_words(key):
    """Lookup words for a concept key (compound keys contribute both parts)."""
    return key.replace(COMPOUND_SEPARATOR, " ").split()


def cluster_concepts(vocab, store, k=100, seed=0):
    """Attach embeddings and k-means cluster ids to the vocabulary.

    Concepts whose words are all missing from the store get singleton
    clusters numbered after the k embedding clusters, so they never block
    another concept's negative mining.
    """
    vectors = {}
    for e in vocab.entries:
        vec, _ = store.phrase_vector(concept_words(e.key))
        if vec is not None:
            vectors[e.key] = vec
    embeddable = [e for e in vocab.entries if e.key in vectors]
    if k > len(embeddable):
        raise ValueError(
            f"k={k} exceeds the {len(embeddable)} concepts with embeddings")

    if k == 0:
        cluster_of = {}
    else:
        points = np.vstack([vectors[e.key] for e in embeddable])
        labels = KMeans(n_clusters=k, seed=seed).fit(points).labels_
        cluster_of = {e.key: int(c) for e, c in zip(embeddable, labels)}

    entries = []
    next_singleton = k
    for e in vocab.entries:
        if e.key in cluster_of:
            entries.append(replace(
                e, embedding=vectors[e.key], cluster=cluster_of[e.key]))
        else:
            entries.append(replace(
                e, embedding=vectors.get(e.key), cluster=next_singleton))
            next_singleton += 1
    return ConceptVocabulary(entries)


def save_vocabulary(vocab, path):
    """TSV: key, kind, frequency, cluster (-1 when unassigned)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("CONCEPTVOCAB 1\n")
        for e in vocab.entries:
            cluster = -1 if e.cluster is None else e.cluster
            fh.write(f"{e.key}\t{e.kind}\t{e.frequency}\t{cluster}\n")


def load_vocabulary(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "CONCEPTVOCAB 1":
            raise ValueError(f"not a vocabulary file: {path}")
        for lineno, raw in enumerate(fh, 2):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            key, kind, frequency, cluster = fields
            if kind not in KINDS:
                raise ValueError(f"{path}:{lineno}: unknown kind {kind!r}")
            entries.append(ConceptEntry(
                key=key, kind=kind, frequency=int(frequency),
                cluster=None if cluster == "-1" else int(cluster)))
    return ConceptVocabulary(entries)
