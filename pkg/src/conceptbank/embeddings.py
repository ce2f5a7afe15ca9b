"""Word-embedding table in the plain text format: "word v1 v2 ... vD"."""

import io

import numpy as np


class EmbeddingStore:
    """Immutable word -> vector table with a fixed dimension."""

    def __init__(self, dimension, table, skipped_lines=0):
        self.dimension = int(dimension)
        self._table = table
        self.skipped_lines = int(skipped_lines)

    def __len__(self):
        return len(self._table)

    def __contains__(self, word):
        return word in self._table

    def get(self, word):
        return self._table.get(word)

    def words(self):
        return self._table.keys()

    def phrase_vector(self, words):
        """Mean vector of the words found in the store.

        Returns (vector, missing_words); the vector is None when no word
        is present.  Found vectors are summed in sorted-word order so the
        result is exactly permutation-invariant.
        """
        present = []
        missing = []
        seen_missing = set()
        for w in words:
            if w in self._table:
                present.append(w)
            elif w not in seen_missing:
                seen_missing.add(w)
                missing.append(w)
        if not present:
            return None, missing
        present.sort()
        total = np.zeros(self.dimension)
        for w in present:
            total += self._table[w]
        return total / len(present), missing


def load_embeddings(source):
    """Parse an embedding table from a path or text stream.

    The dimension is inferred from the first line.  Duplicate words keep
    their first occurrence; malformed lines are skipped and counted.  More
    than half the lines failing to parse at the inferred dimension signals
    the wrong kind of file and raises.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8") as fh:
            return _parse_embeddings(fh)
    return _parse_embeddings(source)


def _parse_embeddings(stream):
    table = {}
    dimension = None
    skipped = 0
    total = 0
    for raw in stream:
        line = raw.strip()
        if not line:
            continue
        total += 1
        parts = line.split()
        if dimension is None:
            if len(parts) < 2:
                raise ValueError(
                    "first embedding line has no vector components")
            try:
                vec = np.array([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise ValueError(
                    f"first embedding line unparsable: {line[:80]!r}"
                ) from exc
            dimension = len(vec)
            table[parts[0]] = vec
            continue
        if len(parts) != dimension + 1:
            skipped += 1
            continue
        try:
            vec = np.array([float(v) for v in parts[1:]])
        except ValueError:
            skipped += 1
            continue
        if parts[0] not in table:
            table[parts[0]] = vec
    if dimension is None:
        raise ValueError("empty embedding stream")
    if skipped > 0.5 * total:
        raise ValueError(
            f"{skipped} of {total} lines did not match dimension "
            f"{dimension}; this does not look like an embedding table")
    return EmbeddingStore(dimension, table, skipped)


def dump_embeddings(store, path):
    """Write the store back out in the text format (words sorted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(store.words()):
            vec = store.get(word)
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec))
            fh.write("\n")


def embeddings_from_dict(table):
    """Build a store from an in-memory {word: vector} mapping."""
    if not table:
        raise ValueError("empty embedding table")
    dims = {len(v) for v in table.values()}
    if len(dims) != 1:
        raise ValueError(f"inconsistent embedding dimensions: {sorted(dims)}")
    arrays = {w: np.asarray(v, dtype=np.float64) for w, v in table.items()}
    return EmbeddingStore(dims.pop(), arrays)


def load_embeddings_text(text):
    """Convenience wrapper for tests: parse from a literal string."""
    return _parse_embeddings(io.StringIO(text))
