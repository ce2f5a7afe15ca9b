import numpy as np
import pytest

from conceptbank import (
    RegionAnnotation,
    StopwordPolicy,
    cluster_concepts,
    extract_concepts,
    filter_min_count,
    load_vocabulary,
    read_annotations,
    save_vocabulary,
    write_annotations,
)
from conceptbank.embeddings import embeddings_from_dict
from conceptbank.vocabulary import ATTR, OBJ, OBJ_ATTR


@pytest.fixture(scope="module")
def policy():
    return StopwordPolicy.default()


def one_image_annotations():
    return [RegionAnnotation("img1", "a dog", ("small",))]


def test_extract_obj_kind(policy):
    vocab, image_concepts = extract_concepts(
        one_image_annotations(), OBJ, policy)
    assert {e.key: e.frequency for e in vocab} == {"dog": 1}
    assert image_concepts == {"img1": {"dog"}}


def test_extract_attr_and_objattr_kinds(policy):
    records = one_image_annotations()
    vocab, _ = extract_concepts(records, ATTR, policy)
    assert {e.key: e.frequency for e in vocab} == {"small": 1}
    vocab, image_concepts = extract_concepts(records, OBJ_ATTR, policy)
    assert {e.key: e.frequency for e in vocab} == {"dog|small": 1}
    assert image_concepts == {"img1": {"dog|small"}}


def test_attributes_pool_across_objects(policy):
    records = [
        RegionAnnotation("i1", "dog", ("small",)),
        RegionAnnotation("i2", "tree", ("small",)),
    ]
    vocab, _ = extract_concepts(records, ATTR, policy)
    assert {e.key: e.frequency for e in vocab} == {"small": 2}


def test_image_level_dedup(policy):
    records = [
        RegionAnnotation("i1", "dogs", ()),
        RegionAnnotation("i1", "dog", ()),
    ]
    vocab, image_concepts = extract_concepts(records, OBJ, policy)
    assert {e.key: e.frequency for e in vocab} == {"dog": 1}
    assert image_concepts == {"i1": {"dog"}}


def test_frequency_counts_images_brute_force(policy):
    rng = np.random.default_rng(0)
    names = ["dog", "cat", "tree", "car"]
    records = []
    for i in range(30):
        for name in rng.choice(names, size=rng.integers(1, 4), replace=True):
            records.append(RegionAnnotation(f"img{i}", str(name), ()))
    vocab, image_concepts = extract_concepts(records, OBJ, policy)
    for e in vocab:
        count = sum(1 for cs in image_concepts.values() if e.key in cs)
        assert e.frequency == count


def test_empty_keys_dropped(policy):
    records = [RegionAnnotation("i1", "the", ()),
               RegionAnnotation("i1", "dog", ())]
    vocab, image_concepts = extract_concepts(records, OBJ, policy)
    assert vocab.keys() == ["dog"]
    assert image_concepts == {"i1": {"dog"}}


def test_filter_min_count():
    records = [RegionAnnotation(f"i{n}", "common", ()) for n in range(12)]
    records += [RegionAnnotation(f"i{n}", "rare", ()) for n in range(9)]
    vocab, _ = extract_concepts(records, OBJ, StopwordPolicy.default())
    filtered = filter_min_count(vocab, 10)
    assert filtered.keys() == ["common"]
    assert filter_min_count(vocab, 1).keys() == vocab.keys()


def test_vocab_order_descending_frequency_then_key(policy):
    records = []
    for n in range(3):
        records.append(RegionAnnotation(f"a{n}", "bird", ()))
        records.append(RegionAnnotation(f"a{n}", "apple", ()))
    records.append(RegionAnnotation("extra", "cat", ()))
    vocab, _ = extract_concepts(records, OBJ, policy)
    assert vocab.keys() == ["apple", "bird", "cat"]


def two_blob_store():
    return embeddings_from_dict({
        "cat": [0.0, 0.1], "dog": [0.1, 0.0],
        "car": [10.0, 10.1], "bus": [10.1, 10.0],
    })


def make_vocab(keys, policy, images_per_key=1):
    records = []
    for key in keys:
        for n in range(images_per_key):
            records.append(RegionAnnotation(f"{key}{n}", key, ()))
    vocab, _ = extract_concepts(records, OBJ, policy)
    return vocab


def test_cluster_separated_blobs(policy):
    vocab = make_vocab(["cat", "dog", "car", "bus"], policy)
    clustered = cluster_concepts(vocab, two_blob_store(), k=2, seed=0)
    cluster = {e.key: e.cluster for e in clustered}
    assert cluster["cat"] == cluster["dog"]
    assert cluster["car"] == cluster["bus"]
    assert cluster["cat"] != cluster["car"]


def test_cluster_k_equals_entries(policy):
    vocab = make_vocab(["cat", "dog", "car", "bus"], policy)
    clustered = cluster_concepts(vocab, two_blob_store(), k=4, seed=0)
    assert len({e.cluster for e in clustered}) == 4


def test_unembeddable_concept_gets_singleton_cluster(policy):
    vocab = make_vocab(["cat", "dog", "zzzunknown"], policy)
    clustered = cluster_concepts(vocab, two_blob_store(), k=2, seed=0)
    entry = clustered.entry("zzzunknown")
    assert entry.embedding is None
    assert entry.cluster == 2  # numbered after the k embedding clusters
    assert clustered.cluster_members("zzzunknown") == {"zzzunknown"}


def test_cluster_k_exceeding_embeddable_rejected(policy):
    vocab = make_vocab(["cat", "dog"], policy)
    with pytest.raises(ValueError):
        cluster_concepts(vocab, two_blob_store(), k=3, seed=0)


def test_compound_key_phrase_vector(policy):
    vocab = make_vocab(["cat", "dog"], policy)
    records = [RegionAnnotation("i1", "cat", ("dog",))]
    compound, _ = extract_concepts(records, OBJ_ATTR, policy)
    clustered = cluster_concepts(compound, two_blob_store(), k=1, seed=0)
    entry = clustered.entry("cat|dog")
    assert np.allclose(entry.embedding, [0.05, 0.05])


def test_vocabulary_save_load_roundtrip(tmp_path, policy):
    vocab = make_vocab(["cat", "dog", "zzzunknown"], policy)
    clustered = cluster_concepts(vocab, two_blob_store(), k=2, seed=0)
    path = tmp_path / "vocab.tsv"
    save_vocabulary(clustered, path)
    loaded = load_vocabulary(path)
    assert loaded.keys() == clustered.keys()
    for a, b in zip(loaded, clustered):
        assert (a.key, a.kind, a.frequency, a.cluster) == \
            (b.key, b.kind, b.frequency, b.cluster)


def test_annotation_roundtrip(tmp_path):
    records = [
        RegionAnnotation("i1", "a dog", ("small", "furry")),
        RegionAnnotation("i2", "café", ()),
    ]
    path = tmp_path / "ann.jsonl"
    write_annotations(records, path)
    assert read_annotations(path) == records


def test_bad_annotation_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"image_id": "x"}\n', encoding="utf-8")
    with pytest.raises(ValueError):
        read_annotations(path)
