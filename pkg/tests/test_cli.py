"""CLI behavior on a small synthetic dataset (full-scale runs live in
test_acceptance)."""

import json
import os
import subprocess
import sys

import pytest

from conceptbank.cli import RunConfig

PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SYNTH_ARGS = [
    "--set", "synth_feature_dim=16", "--set", "synth_concepts=9",
    "--set", "synth_classes=3", "--set", "synth_constituents=3",
    "--set", "synth_train_per_class=30", "--set", "synth_test_per_class=10",
    "--set", "seed=17",
]


def run_cli(*args, check=True):
    proc = subprocess.run(
        [sys.executable, "-m", "conceptbank", *args],
        capture_output=True, text=True, cwd=PKG_ROOT)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"command {args} failed ({proc.returncode}):\n{proc.stderr}")
    return proc


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """Run synth -> build-vocab -> train-concepts -> train-target once."""
    out = tmp_path_factory.mktemp("cli_run")
    run_cli("synth", "--out-dir", str(out), *SYNTH_ARGS)
    data = out / "dataset"
    common = [
        "--set", f"annotations={data}/annotations_train.jsonl",
        "--set", f"embeddings={data}/embeddings.txt",
        "--set", f"features={data}/features_train.bin",
        "--set", f"features_test={data}/features_test.bin",
        "--set", f"labels={data}/labels_train.tsv",
        "--set", f"labels_test={data}/labels_test.tsv",
        "--set", f"vocabulary={out}/vocabulary.tsv",
        "--set", f"bank={out}/bank.bin",
        "--set", f"target_model={out}/concept_model.bin",
        "--set", "seed=17",
    ]
    run_cli("build-vocab", "--out-dir", str(out), *common)
    run_cli("train-concepts", "--out-dir", str(out), *common)
    run_cli("train-target", "--out-dir", str(out), *common)
    return out, common


def test_pipeline_outputs_exist(pipeline_dir):
    out, _ = pipeline_dir
    for name in ("vocabulary.tsv", "histogram.tsv", "bank.bin",
                 "concept_model.bin", "manifest_build-vocab.json",
                 "manifest_train-concepts.json", "manifest_synth.json"):
        assert (out / name).exists(), name


def test_evaluate_writes_report(pipeline_dir):
    out, common = pipeline_dir
    run_cli("evaluate", "--out-dir", str(out), *common)
    report = json.loads((out / "report.json").read_text())
    assert report["n_images"] == 30
    assert report["accuracy"] >= 0.8
    assert len(report["per_class_ap"]) == 3


def test_keywords_written(pipeline_dir):
    out, common = pipeline_dir
    run_cli("keywords", "--out-dir", str(out), *common)
    table = json.loads((out / "keywords.json").read_text())
    assert sorted(table) == ["act00", "act01", "act02"]
    lines = (out / "keywords.tsv").read_text().strip().splitlines()
    assert lines[0] == "class\trank\tconcept\tweight"
    assert len(lines) == 1 + 3 * 5


def test_select_features_curves(pipeline_dir):
    out, common = pipeline_dir
    run_cli("select-features", "--out-dir", str(out), *common,
            "--set", "ks=0,3,9")
    curves = json.loads((out / "selection_curve.json").read_text())
    assert set(curves) == {"frequency", "relatedness"}
    for points in curves.values():
        assert points[0] == [0, pytest.approx(1 / 3)]
    assert curves["frequency"][-1][1] == curves["relatedness"][-1][1]


def test_missing_input_nonzero_exit_no_partial_output(tmp_path):
    out = tmp_path / "fresh"
    out.mkdir()
    proc = run_cli(
        "build-vocab", "--out-dir", str(out),
        "--set", "annotations=/nonexistent/ann.jsonl",
        "--set", "embeddings=/nonexistent/emb.txt",
        check=False)
    assert proc.returncode == 1
    assert "error:" in proc.stderr
    assert not (out / "vocabulary.tsv").exists()


def test_dimension_mismatch_diagnostic(pipeline_dir, tmp_path):
    out, common = pipeline_dir
    bad = tmp_path / "bad.tsv"
    bad.write_text("x\t1.0\t2.0\n", encoding="utf-8")
    proc = run_cli(
        "evaluate", "--out-dir", str(tmp_path), *common,
        "--set", f"features_test={bad}",
        "--set", f"labels_test={bad.parent}/labels.tsv",
        check=False)
    # missing labels file also acceptable as failure, so point labels at bad
    assert proc.returncode == 1


def test_empty_vocabulary_warns_but_succeeds(pipeline_dir, tmp_path):
    out, common = pipeline_dir
    proc = run_cli(
        "build-vocab", "--out-dir", str(tmp_path), *common,
        "--set", "min_count=100000")
    assert "warning" in proc.stdout
    vocab_lines = (tmp_path / "vocabulary.tsv").read_text().splitlines()
    assert vocab_lines == ["CONCEPTVOCAB 1"]


def test_unknown_config_key_rejected():
    proc = run_cli("synth", "--set", "bogus_key=1", check=False)
    assert proc.returncode == 1
    assert "bogus_key" in proc.stderr


def test_config_file_roundtrip(tmp_path):
    cfg = RunConfig()
    cfg.set_value("C", "2.5")
    cfg.set_value("min_count", "3")
    cfg.set_value("use_pca", "false")
    cfg.set_value("features", "/tmp/x.bin")
    path = tmp_path / "run.cfg"
    path.write_text(cfg.to_text(), encoding="utf-8")
    loaded = RunConfig.from_file(path)
    assert loaded == cfg
    assert loaded.config_hash() == cfg.config_hash()
    assert loaded.C == 2.5 and loaded.min_count == 3
    assert loaded.use_pca is False


def test_manifest_contents(pipeline_dir):
    out, _ = pipeline_dir
    manifest = json.loads((out / "manifest_train-concepts.json").read_text())
    assert manifest["command"] == "train-concepts"
    assert manifest["config"]["seed"] == 17
    assert len(manifest["config_hash"]) == 64
    assert "timestamp" not in manifest
