import numpy as np
import pytest

import conceptbank as cb
from conceptbank.embeddings import embeddings_from_dict
from conceptbank.vocabulary import concept_words


SMALL_SPEC = cb.SynthSpec(
    feature_dim=24, n_concepts=12, n_classes=3, constituents_per_class=4,
    train_per_class=40, test_per_class=20, noise_sigma=0.05, seed=13)


@pytest.fixture(scope="session")
def small_dataset():
    return cb.generate(SMALL_SPEC)


@pytest.fixture(scope="session")
def small_pipeline(small_dataset):
    """Vocabulary, bank, score tables and target model for the small dataset."""
    ds = small_dataset
    policy = cb.StopwordPolicy.default()
    draft, image_concepts = cb.extract_concepts(ds.annotations, "obj", policy)
    vocab = cb.filter_min_count(draft, 10)
    store = embeddings_from_dict(ds.embedding_table)
    embeddable = sum(
        1 for e in vocab
        if store.phrase_vector(concept_words(e.key))[0] is not None)
    vocab = cb.cluster_concepts(vocab, store, k=min(6, embeddable), seed=0)
    bank = cb.ConceptBankTrainer(seed=0).fit(
        vocab, ds.train_features, image_concepts).bank_
    train_scores = bank.transform(ds.train_features)
    test_scores = bank.transform(ds.test_features)
    model = cb.fit_target(train_scores, ds.train_labels, pca_n=900, seed=0)
    return {
        "dataset": ds,
        "policy": policy,
        "image_concepts": image_concepts,
        "vocab": vocab,
        "store": store,
        "bank": bank,
        "train_scores": train_scores,
        "test_scores": test_scores,
        "model": model,
    }
