import math

import numpy as np
import pytest

import cadoc


@pytest.fixture()
def toy():
    docs = [["a", "b", "c", "d"], ["d", "c", "b", "a"], ["e", "f", "g", "h"], ["a", "e", "b", "f"]]
    tags = [["DT", "NN", "NN", "VB"]] * 4
    return cadoc.Corpus(docs, pos_tags=tags)


def small_config(epochs=30):
    cfg = cadoc.TrainConfig()
    cfg.dimension = 8
    cfg.epochs = epochs
    cfg.subsample_threshold = 0.0
    cfg.window = 3
    cfg.joint_word_training = True
    return cfg


def test_corpus(toy):
    assert len(toy) == 4
    assert toy.vocabulary[:3] == ["a", "b", "c"]
    assert toy.idf("a") == pytest.approx(math.log(4 / 3))
    with pytest.raises(KeyError):
        toy.idf("zzz")


def test_train_dbow_shapes_and_unit_weights(toy):
    docs, words = cadoc.train_dbow(toy, small_config())
    assert docs.shape == (4, 8)
    assert words.shape == (8, 8)
    ones = [[1.0] * len(toy.occurrences(i)) for i in range(len(toy))]
    docs_w, _ = cadoc.train_dbow(toy, small_config(), ones)
    np.testing.assert_array_equal(docs, docs_w)


def test_weight_count_checked(toy):
    with pytest.raises(ValueError):
        cadoc.train_dbow(toy, small_config(), [[1.0]])


def test_aux_model_and_ca_weights(toy):
    docs, words = cadoc.train_dbow(toy, small_config())
    mc = cadoc.AuxModelConfig()
    mc.timesteps = 0
    mc.cnn_widths = [1, 2]
    mc.cnn_kernels = 4
    tc = cadoc.AuxTrainConfig()
    tc.epochs = 3
    tc.batch_size = 2
    model, losses = cadoc.train_aux_model(toy, docs, words, mc, tc)
    assert model.architecture == cadoc.Architecture.CNN
    assert len(losses) == 3
    raw = cadoc.ca_weights(model, toy, docs, words, samples=4)
    assert [len(r) for r in raw] == [4, 4, 4, 4]
    assert all(0.0 <= w <= 2.0 for r in raw for w in r)
    psi = cadoc.normalize(toy, raw, cadoc.DEFAULT_CA_TEMPERATURE)
    flat = [w for r in psi for w in r]
    assert sum(flat) / len(flat) == pytest.approx(1.0)
    pos = cadoc.ca_weights(model, toy, docs, words, sampling="pos", samples=2)
    assert len(pos) == 4


def test_pearson():
    assert cadoc.pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert cadoc.pearson([1, 2, 3], [3, 2, 1]) == -1.0
    with pytest.raises(ValueError):
        cadoc.pearson([1, 2, 3], [1, 1, 1])


def test_pipeline_stages(tmp_path):
    data = tmp_path / "data"
    cadoc.write_synthetic_corpus(str(data))
    overrides = {
        "paths.docs": str(data / "docs.txt"),
        "paths.pos": str(data / "pos.txt"),
        "paths.sts": str(data / "sts.tsv"),
        "paths.out": str(tmp_path / "run"),
        "embed.dimension": "8",
        "embed.epochs": "2",
        "aux.epochs": "1",
        "aux.cnn_widths": "1,2",
        "aux.cnn_kernels": "4",
        "weights.samples": "2",
    }
    cadoc.run("build-vocab", overrides=overrides)
    cadoc.run("train-dbow", overrides=overrides)
    cadoc.run("train-aux", overrides=overrides, arch="cnn")
    cadoc.run("gen-weights", overrides=overrides, method="ca", arch="cnn")
    cadoc.run("train-wdbow", overrides=overrides, method="ca-cnn")
    log = cadoc.run("eval-sts", overrides=overrides, method="ca-cnn")
    assert '"method":"ca-cnn-global"' in log
    assert (tmp_path / "run" / "report.ca-cnn-global.jsonl").exists()
    with pytest.raises(RuntimeError, match="train-aux"):
        cadoc.run("gen-weights", overrides=overrides, method="ca", arch="gru")
