import filecmp
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("CADOC_CLI", "cadoc")

SMALL = [
    "--embed.dimension", "8",
    "--embed.epochs", "3",
    "--embed.subsample_threshold", "0",
    "--aux.epochs", "2",
    "--aux.cnn_widths", "1,2",
    "--aux.cnn_kernels", "4",
    "--aux.gru_hidden", "4",
    "--aux.batch_size", "8",
    "--weights.samples", "2",
    "--eval.introspect_docs", "5",
]


def cadoc(*args, check=True):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"cadoc {' '.join(args)} failed ({proc.returncode}):\n{proc.stderr}")
    return proc


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    cadoc("make-synthetic", str(d))
    return d


def stage_args(data, out):
    return [
        "--paths.docs", str(data / "docs.txt"),
        "--paths.pos", str(data / "pos.txt"),
        "--paths.domains", str(data / "domains.txt"),
        "--paths.sts", str(data / "sts.tsv"),
        "--paths.out", str(out),
        *SMALL,
    ]


PIPELINE = [
    ["build-vocab"],
    ["train-skipgram"],
    ["train-dbow"],
    ["train-aux", "--arch", "cnn"],
    ["train-aux", "--arch", "gru"],
    ["gen-weights", "--method", "ca", "--arch", "cnn"],
    ["gen-weights", "--method", "ca", "--arch", "gru", "--sampling", "pos"],
    ["gen-weights", "--method", "idf", "--temperature", "5.5"],
    ["train-wdbow", "--method", "ca-cnn"],
    ["train-wdbow", "--method", "ca-gru", "--sampling", "pos"],
    ["train-wdbow", "--method", "idf"],
    ["eval-sts", "--method", "dbow"],
    ["eval-sts", "--method", "skipgram"],
    ["eval-sts", "--method", "ca-cnn"],
    ["eval-sts", "--method", "ca-gru", "--sampling", "pos"],
    ["eval-sts", "--method", "idf"],
    ["introspect", "--sampling", "pos"],
    ["export-vectors", "--method", "ca-cnn"],
]


def run_pipeline(data, out):
    for step in PIPELINE:
        cadoc(*step, *stage_args(data, out))


def test_bundled_data_matches_generator(data):
    bundled = Path(__file__).resolve().parents[2] / "data" / "synthetic"
    for name in ["docs.txt", "pos.txt", "domains.txt", "sts.tsv"]:
        assert filecmp.cmp(bundled / name, data / name, shallow=False), name


def test_full_pipeline_and_determinism(data, tmp_path):
    run_pipeline(data, tmp_path / "a")
    run_pipeline(data, tmp_path / "b")
    a_files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "report.ca-cnn-global.jsonl" in a_files
    assert "introspection.tsv" in a_files
    for name in a_files:
        if name.endswith(".manifest.json"):
            continue
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False), name

    records = [json.loads(line) for line in (tmp_path / "a" / "report.dbow.jsonl").read_text().splitlines()]
    assert {r["domain"] for r in records} == {"even", "odd"}
    assert all(-1.0 <= r["pearson"] <= 1.0 for r in records)

    manifest = json.loads((tmp_path / "a" / "train-dbow.manifest.json").read_text())
    assert manifest["stage"] == "train-dbow"
    assert manifest["config"]["embed"]["dimension"] == 8
    assert set(manifest["lineage"]) >= {"corpus", "embed", "seed"}
    assert set(manifest["outputs"]) == {"dbow.docs.vec", "dbow.words.vec"}
    assert "started" in manifest and "finished" in manifest


def test_gen_weights_before_train_aux(data, tmp_path):
    args = stage_args(data, tmp_path)
    cadoc("build-vocab", *args)
    cadoc("train-dbow", *args)
    proc = cadoc("gen-weights", "--method", "ca", *args, check=False)
    assert proc.returncode == 1
    assert "train-aux" in proc.stderr
    assert not list(tmp_path.glob("weights.*"))


def test_lineage_mismatch_refused_unless_forced(data, tmp_path):
    args = stage_args(data, tmp_path)
    cadoc("build-vocab", *args)
    cadoc("train-dbow", *args)
    proc = cadoc("train-aux", *args, "--embed.window", "4", check=False)
    assert proc.returncode == 1
    assert "embed" in proc.stderr
    cadoc("train-aux", *args, "--embed.window", "4", "--force")


def test_usage_errors(data, tmp_path):
    proc = cadoc("build-vocab", "--bogus", check=False)
    assert proc.returncode == 2
    proc = cadoc("build-vocab", "--embed.nonexistent", "1", check=False)
    assert proc.returncode == 2
    assert "embed.nonexistent" in proc.stderr
    proc = cadoc("train-aux", "--arch", "lstm", check=False)
    assert proc.returncode != 0
    proc = cadoc("build-vocab", check=False)
    assert proc.returncode == 2
    assert "paths.docs" in proc.stderr


def test_config_file(data, tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"paths": {"docs": str(data / "docs.txt"), "out": "out"}, "corpus": {"min_count": 2}}))
    cadoc("--config", str(cfg), "build-vocab")
    manifest = json.loads((tmp_path / "out" / "build-vocab.manifest.json").read_text())
    assert manifest["config"]["corpus"]["min_count"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"embed": {"dimensions": 5}}))
    proc = cadoc("--config", str(bad), "build-vocab", check=False)
    assert proc.returncode == 2
    assert "embed.dimensions" in proc.stderr


def test_threads_flag(data, tmp_path):
    cadoc("build-vocab", *stage_args(data, tmp_path))
    cadoc("train-dbow", *stage_args(data, tmp_path), "--threads", "2")
    manifest = json.loads((tmp_path / "train-dbow.manifest.json").read_text())
    assert manifest["threads"] == 2
