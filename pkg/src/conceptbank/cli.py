"""Command-line surface for the concept-classification pipeline.

Subcommands: synth, build-vocab, train-concepts, train-target, evaluate,
keywords, select-features.  Hyperparameters live in a key=value config
file; --set key=value flags override it.  Every command writes its outputs
plus a machine-readable run manifest under the configured output
directory, and reruns with the same config and seed are bit-identical.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    frequency_histogram,
    order_by_frequency,
    order_by_relatedness,
    relatedness_rank,
    selection_curve,
    top_keywords,
)
from .bank import ConceptBank, ConceptBankTrainer
from .embeddings import load_embeddings
from .features import load_features, load_labels
from .metrics import evaluate
from .synth import SynthSpec, generate, write_dataset
from .target import (
    MODE_CONCEPT,
    MODE_DIRECT,
    fit_target,
    fuse_scores,
    load_target_model,
    save_target_model,
    standardize_scores,
)
from .text import StopwordPolicy, load_pairs, load_wordlist, tokenize_class_name
from .vocabulary import (
    cluster_concepts,
    concept_words,
    extract_concepts,
    filter_min_count,
    load_vocabulary,
    read_annotations,
    save_vocabulary,
)


@dataclass
class RunConfig:
    """All paths and hyperparameters of a pipeline run."""

    # input/output paths (None = not set)
    features: str = None
    features_test: str = None
    annotations: str = None
    embeddings: str = None
    labels: str = None
    labels_test: str = None
    noun_stopwords: str = None
    attribute_stopwords: str = None
    aliases: str = None
    vocabulary: str = None
    bank: str = None
    target_model: str = None
    direct_model: str = None
    out_dir: str = "runs"
    # pipeline hyperparameters
    concept_kind: str = "obj"
    min_count: int = 10
    k_clusters: int = 100
    max_pos: int = 1000
    neg_ratio: float = 3.0
    pca_n: int = 900
    use_pca: bool = True
    C: float = 1.0
    tol: float = 1e-4
    max_epochs: int = 1000
    alpha: float = 0.5
    eval_mode: str = "single"
    input_space: str = MODE_CONCEPT
    keyword_k: int = 5
    ks: str = "0,5,10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90,95,100"
    frequency_ascending: bool = False
    # synthetic dataset parameters
    synth_feature_dim: int = 64
    synth_concepts: int = 50
    synth_classes: int = 10
    synth_constituents: int = 5
    synth_train_per_class: int = 200
    synth_test_per_class: int = 100
    synth_tail: float = 1.0
    synth_sigma: float = 0.05
    # execution
    seed: int = 0
    threads: int = 1

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    def set_value(self, key, raw):
        if key not in self.field_names():
            raise ValueError(f"unknown config key: {key!r}")
        default = getattr(RunConfig, key)
        if default is None or isinstance(default, str):
            value = raw if raw != "" else None
        elif isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0"):
                raise ValueError(f"{key} expects a boolean, got {raw!r}")
            value = raw.lower() in ("true", "1")
        elif isinstance(default, int):
            value = int(raw)
        elif isinstance(default, float):
            value = float(raw)
        else:
            raise ValueError(f"unsupported config field type for {key}")
        setattr(self, key, value)

    @classmethod
    def from_file(cls, path):
        cfg = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                cfg.set_value(key.strip(), value.strip())
        return cfg

    def to_text(self):
        lines = []
        for name in sorted(self.field_names()):
            value = getattr(self, name)
            if value is None:
                value = ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"

    def config_hash(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def as_dict(self):
        return {name: getattr(self, name) for name in self.field_names()}

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError(
                "missing required config value(s): " + ", ".join(missing))

    def parsed_ks(self):
        try:
            return [int(v) for v in self.ks.split(",") if v.strip() != ""]
        except ValueError:
            raise ValueError(f"ks must be comma-separated integers: {self.ks!r}")


def _load_policy(cfg):
    policy = StopwordPolicy.default()
    nouns = policy.noun_stopwords
    attrs = policy.attribute_stopwords
    if cfg.noun_stopwords:
        nouns = frozenset(load_wordlist(cfg.noun_stopwords))
    if cfg.attribute_stopwords:
        attrs = frozenset(load_wordlist(cfg.attribute_stopwords))
    return StopwordPolicy(noun_stopwords=nouns, attribute_stopwords=attrs)


def _write_manifest(cfg, command):
    payload = {
        "command": command,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "package_version": __version__,
    }
    path = os.path.join(cfg.out_dir, f"manifest_{command}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_synth(cfg):
    spec = SynthSpec(
        feature_dim=cfg.synth_feature_dim,
        n_concepts=cfg.synth_concepts,
        n_classes=cfg.synth_classes,
        constituents_per_class=cfg.synth_constituents,
        train_per_class=cfg.synth_train_per_class,
        test_per_class=cfg.synth_test_per_class,
        tail_exponent=cfg.synth_tail,
        noise_sigma=cfg.synth_sigma,
        seed=cfg.seed,
    )
    dataset = generate(spec)
    paths = write_dataset(dataset, os.path.join(cfg.out_dir, "dataset"))
    _write_manifest(cfg, "synth")
    print(f"synth: {len(dataset.train_features)} train / "
          f"{len(dataset.test_features)} test images, "
          f"{len(dataset.concept_names)} concepts, "
          f"{len(dataset.class_names)} classes -> {paths['features_train']}")


def cmd_build_vocab(cfg):
    cfg.require("annotations", "embeddings")
    records = read_annotations(cfg.annotations)
    policy = _load_policy(cfg)
    draft, _ = extract_concepts(records, cfg.concept_kind, policy)
    vocab = filter_min_count(draft, cfg.min_count)
    print(f"build-vocab: {len(draft)} raw concepts, "
          f"{len(vocab)} with >= {cfg.min_count} images")
    if len(vocab) == 0:
        print("build-vocab: warning: vocabulary is empty")
        clustered = vocab
    else:
        store = load_embeddings(cfg.embeddings)
        embeddable = sum(
            1 for e in vocab
            if store.phrase_vector(concept_words(e.key))[0] is not None)
        k = min(cfg.k_clusters, embeddable)
        if k < cfg.k_clusters:
            print(f"build-vocab: warning: k_clusters={cfg.k_clusters} "
                  f"clamped to {k} embeddable concepts")
        clustered = cluster_concepts(vocab, store, k=k, seed=cfg.seed)

    save_vocabulary(clustered, os.path.join(cfg.out_dir, "vocabulary.tsv"))
    histogram = frequency_histogram(clustered)
    ordered = sorted(clustered.entries, key=lambda e: (-e.frequency, e.key))
    with open(os.path.join(cfg.out_dir, "histogram.tsv"), "w",
              encoding="utf-8") as fh:
        fh.write("rank\tconcept\tfrequency\n")
        for (rank, frequency), entry in zip(histogram, ordered):
            fh.write(f"{rank}\t{entry.key}\t{frequency}\n")
    _write_manifest(cfg, "build-vocab")


def cmd_train_concepts(cfg):
    cfg.require("vocabulary", "annotations", "features")
    vocab = load_vocabulary(cfg.vocabulary)
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty; nothing to train")
    kind = vocab.entries[0].kind
    records = read_annotations(cfg.annotations)
    _, image_concepts = extract_concepts(records, kind, _load_policy(cfg))
    features = load_features(cfg.features)
    trainer = ConceptBankTrainer(
        C=cfg.C, tol=cfg.tol, max_epochs=cfg.max_epochs,
        max_pos=cfg.max_pos, neg_ratio=cfg.neg_ratio,
        seed=cfg.seed, n_jobs=cfg.threads,
    ).fit(vocab, features, image_concepts, log=print)
    bank_path = os.path.join(cfg.out_dir, "bank.bin")
    trainer.bank_.save(bank_path)
    _write_manifest(cfg, "train-concepts")
    print(f"train-concepts: {trainer.bank_.n_concepts} classifiers over "
          f"{trainer.bank_.feature_dim}-d features -> {bank_path}")


def cmd_train_target(cfg):
    cfg.require("features", "labels")
    if cfg.input_space not in (MODE_CONCEPT, MODE_DIRECT):
        raise ValueError(f"input_space must be concept or direct, "
                         f"got {cfg.input_space!r}")
    features = load_features(cfg.features)
    labels = load_labels(cfg.labels)
    if cfg.input_space == MODE_CONCEPT:
        cfg.require("bank")
        scores = ConceptBank.load(cfg.bank).transform(features)
    else:
        scores = features
    model = fit_target(
        scores, labels,
        pca_n=cfg.pca_n, use_pca=cfg.use_pca, C=cfg.C, tol=cfg.tol,
        max_epochs=cfg.max_epochs, multi_label=cfg.eval_mode == "multi",
        seed=cfg.seed, mode=cfg.input_space)
    path = os.path.join(cfg.out_dir, f"{cfg.input_space}_model.bin")
    save_target_model(model, path)
    _write_manifest(cfg, "train-target")
    print(f"train-target: {len(model.classes_)} classes on "
          f"{model.n_features_in_}-d {cfg.input_space} input -> {path}")


def _model_scores(model, features, cfg):
    if model.mode == MODE_CONCEPT:
        cfg.require("bank")
        score_rows = ConceptBank.load(cfg.bank).transform(features)
        return model.decision_function(score_rows.matrix)
    return model.decision_function(features.matrix)


def cmd_evaluate(cfg):
    cfg.require("features_test", "labels_test", "target_model")
    features = load_features(cfg.features_test)
    truth = load_labels(cfg.labels_test)
    model = load_target_model(cfg.target_model)
    scores = _model_scores(model, features, cfg)
    if cfg.direct_model:
        direct = load_target_model(cfg.direct_model)
        if direct.classes_ != model.classes_:
            raise ValueError(
                "direct model classes differ from target model classes")
        direct_scores = _model_scores(direct, features, cfg)
        scores = fuse_scores(
            standardize_scores(scores), standardize_scores(direct_scores),
            cfg.alpha)
    report = evaluate(features.ids, scores, truth, model.classes_,
                      mode=cfg.eval_mode)
    _write_json(os.path.join(cfg.out_dir, "report.json"), report.to_dict())
    _write_manifest(cfg, "evaluate")
    summary = []
    if report.accuracy is not None:
        summary.append(f"accuracy {report.accuracy:.4f}")
    if report.mean_ap is not None:
        summary.append(f"mAP {report.mean_ap:.4f}")
    print(f"evaluate: {report.n_images} images, " + ", ".join(summary))


def cmd_keywords(cfg):
    cfg.require("target_model", "bank")
    model = load_target_model(cfg.target_model)
    if model.mode != MODE_CONCEPT:
        raise ValueError("keywords need a concept-mode target model")
    bank = ConceptBank.load(cfg.bank)
    table = top_keywords(model, bank, cfg.keyword_k)
    tsv_path = os.path.join(cfg.out_dir, "keywords.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("class\trank\tconcept\tweight\n")
        for cls in model.classes_:
            for rank, (key, weight) in enumerate(table[cls], start=1):
                fh.write(f"{cls}\t{rank}\t{key}\t{weight!r}\n")
    _write_json(os.path.join(cfg.out_dir, "keywords.json"),
                {cls: [[k, w] for k, w in pairs]
                 for cls, pairs in table.items()})
    _write_manifest(cfg, "keywords")
    for cls in model.classes_[:3]:
        keys = ", ".join(k for k, _ in table[cls])
        print(f"keywords: {cls}: {keys}")
    print(f"keywords: full table -> {tsv_path}")


def cmd_select_features(cfg):
    cfg.require("bank", "features", "labels", "features_test", "labels_test",
                "embeddings")
    bank = ConceptBank.load(cfg.bank)
    vocab = bank.vocabulary
    train_scores = bank.transform(load_features(cfg.features))
    test_scores = bank.transform(load_features(cfg.features_test))
    train_labels = load_labels(cfg.labels)
    test_labels = load_labels(cfg.labels_test)
    y_train = [train_labels[i][0] for i in train_scores.ids]
    y_test = [test_labels[i][0] for i in test_scores.ids]

    store = load_embeddings(cfg.embeddings)
    policy = _load_policy(cfg)
    aliases = load_pairs(cfg.aliases) if cfg.aliases else {}
    concept_vectors = {
        e.key: store.phrase_vector(concept_words(e.key))[0] for e in vocab}
    class_vectors = {
        label: store.phrase_vector(
            tokenize_class_name(label, policy, aliases))[0]
        for label in sorted(set(y_train))}
    ranking = relatedness_rank(concept_vectors, class_vectors)

    orders = {
        "frequency": order_by_frequency(
            vocab, ascending=cfg.frequency_ascending),
        "relatedness": order_by_relatedness(ranking, vocab),
    }
    ks = [k for k in cfg.parsed_ks() if k <= len(vocab)]
    dropped = [k for k in cfg.parsed_ks() if k > len(vocab)]
    if dropped:
        print(f"select-features: warning: dropping ks > {len(vocab)} "
              f"concepts: {dropped}")
    svm_params = {"C": cfg.C, "tol": cfg.tol, "max_epochs": cfg.max_epochs}

    results = {}
    tsv_path = os.path.join(cfg.out_dir, "selection_curve.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("ordering\tk\taccuracy\n")
        for name in sorted(orders):
            curve = selection_curve(
                train_scores.matrix, y_train, test_scores.matrix, y_test,
                orders[name], ks, svm_params=svm_params, seed=cfg.seed)
            results[name] = [[k, acc] for k, acc in curve]
            for k, acc in curve:
                fh.write(f"{name}\t{k}\t{acc!r}\n")
    _write_json(os.path.join(cfg.out_dir, "selection_curve.json"), results)
    _write_manifest(cfg, "select-features")
    print(f"select-features: {len(ks)} ks x {len(orders)} orderings -> "
          f"{tsv_path}")


_COMMANDS = {
    "synth": cmd_synth,
    "build-vocab": cmd_build_vocab,
    "train-concepts": cmd_train_concepts,
    "train-target": cmd_train_target,
    "evaluate": cmd_evaluate,
    "keywords": cmd_keywords,
    "select-features": cmd_select_features,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conceptbank",
        description="Concept-bank image classification pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} step")
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="overrides",
                       help="override a config value (repeatable)")
        p.add_argument("--out-dir", help="shorthand for --set out_dir=...")
    return parser


def load_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for item in args.overrides:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        cfg.set_value(key.strip(), value.strip())
    if args.out_dir:
        cfg.out_dir = args.out_dir
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        os.makedirs(cfg.out_dir, exist_ok=True)
        _COMMANDS[args.command](cfg)
    except Exception as exc:  # surface a clean diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
