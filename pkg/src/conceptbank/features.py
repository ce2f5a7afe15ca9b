"""Feature tables (image id -> dense vector) and their file formats.

Binary layout (little endian):

    FEATURETABLE 1\n
    <count> <dim>\n
    END\n
    per row: uint32 id byte length, UTF-8 id, dim float32 values

A TSV fallback ("id\tv1\t...\tvd") is accepted on load.  Concept-score
tables reuse the same container, scores being just another feature space.
"""

import struct

import numpy as np

_MAGIC = b"FEATURETABLE 1\n"


class FeatureTable:
    """Dense per-image vectors with a fixed dimension and unique ids."""

    def __init__(self, ids, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("feature matrix must be 2-dimensional")
        if len(ids) != matrix.shape[0]:
            raise ValueError(
                f"{len(ids)} ids for {matrix.shape[0]} matrix rows")
        self.ids = [str(i) for i in ids]
        self._index = {}
        for pos, image_id in enumerate(self.ids):
            if image_id in self._index:
                raise ValueError(f"duplicate image id: {image_id!r}")
            self._index[image_id] = pos
        self.matrix = matrix

    @property
    def dimension(self):
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.ids)

    def __contains__(self, image_id):
        return image_id in self._index

    def row(self, image_id):
        try:
            return self.matrix[self._index[image_id]]
        except KeyError:
            raise KeyError(f"image id not in feature table: {image_id!r}")

    def rows(self, image_ids):
        missing = [i for i in image_ids if i not in self._index]
        if missing:
            raise KeyError(
                f"image ids not in feature table: {missing[:5]!r}"
                + (" ..." if len(missing) > 5 else ""))
        idx = [self._index[i] for i in image_ids]
        return self.matrix[idx]

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(f"{len(self.ids)} {self.dimension}\n".encode())
            fh.write(b"END\n")
            for image_id, row in zip(self.ids, self.matrix):
                encoded = image_id.encode("utf-8")
                fh.write(struct.pack("<I", len(encoded)))
                fh.write(encoded)
                fh.write(row.astype("<f4").tobytes())


def load_features(path):
    """Load a feature table, sniffing binary vs TSV."""
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
    if head == _MAGIC:
        return _load_binary(path)
    return _load_tsv(path)


def _load_binary(path):
    with open(path, "rb") as fh:
        fh.readline()  # magic, already checked
        counts = fh.readline().split()
        if len(counts) != 2:
            raise ValueError(f"bad feature table header in {path}")
        count, dim = int(counts[0]), int(counts[1])
        if fh.readline() != b"END\n":
            raise ValueError(f"bad feature table header in {path}")
        ids = []
        matrix = np.empty((count, dim))
        row_bytes = dim * 4
        for i in range(count):
            raw_len = fh.read(4)
            if len(raw_len) != 4:
                raise ValueError(f"truncated feature table: {path}")
            (id_len,) = struct.unpack("<I", raw_len)
            image_id = fh.read(id_len).decode("utf-8")
            data = fh.read(row_bytes)
            if len(data) != row_bytes:
                raise ValueError(f"truncated feature table: {path}")
            ids.append(image_id)
            matrix[i] = np.frombuffer(data, dtype="<f4")
    return FeatureTable(ids, matrix)


def _load_tsv(path):
    ids = []
    rows = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ValueError(f"{path}:{lineno}: no feature values")
            if dim is None:
                dim = len(fields) - 1
            elif len(fields) - 1 != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} values, "
                    f"got {len(fields) - 1}")
            ids.append(fields[0])
            rows.append([float(v) for v in fields[1:]])
    if not ids:
        raise ValueError(f"empty feature table: {path}")
    return FeatureTable(ids, np.array(rows))


def load_labels(path):
    """Parse an "image_id\tlabel[;label...]" TSV into {id: [labels]}."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[1]:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>labels")
            if fields[0] in labels:
                raise ValueError(f"{path}:{lineno}: duplicate id {fields[0]!r}")
            labels[fields[0]] = fields[1].split(";")
    if not labels:
        raise ValueError(f"empty label file: {path}")
    return labels


def save_labels(labels, path):
    with open(path, "w", encoding="utf-8") as fh:
        for image_id in labels:
            fh.write(f"{image_id}\t{';'.join(labels[image_id])}\n")
