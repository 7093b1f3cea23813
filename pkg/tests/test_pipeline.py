import numpy as np
import pytest

from codebook import kmeans
from config import DESCRIPTOR_DIM, Params
from errors import NoFeaturesError, ParameterError, TrainingError
from evaluation import Dataset, DatasetItem
from imgio import write_pgm
from model_io import dumps_model
from pipeline import (DebugDumps, auto_tau, classify_descriptors, classify_path, train_model)

SMALL = Params(k=8, seed=1)


@pytest.fixture(scope="module")
def inter_model(inter_corpus):
    _, dataset = inter_corpus
    return train_model(dataset, "inter", SMALL, progress=False)


@pytest.fixture(scope="module")
def intra_model(intra_corpus):
    _, dataset = intra_corpus
    return train_model(dataset, "intra", SMALL, progress=False)


# ========== Training ==========

def test_inter_training(inter_model, inter_corpus):
    model, summary = inter_model
    assert model.mode == "inter"
    assert model.classes == ("boxy", "rounded")
    assert model.weight_table.weights.shape == (8, 2)
    assert 0.0 <= model.weight_table.weights.min() and model.weight_table.weights.max() <= 1.0
    assert model.codebook.centroids.shape == (8, DESCRIPTOR_DIM)
    assert summary.images == {"boxy": 4, "rounded": 4}
    assert all(count > 0 for count in summary.descriptors.values())
    assert summary.tau == model.tau > 0
    assert summary.tau_source == "auto"


def test_intra_training(intra_model):
    model, summary = intra_model
    assert model.mode == "intra"
    assert model.weight_table is None
    assert [sig.label for sig in model.signatures] == ["sedan"] * 4 + ["taxi"] * 4
    assert all(len(sig) == 8 for sig in model.signatures)
    assert summary.iterations >= 1


def test_training_is_deterministic(inter_corpus, inter_model):
    _, dataset = inter_corpus
    again, _ = train_model(dataset, "inter", SMALL, progress=False)
    assert dumps_model(again) == dumps_model(inter_model[0])


def test_explicit_tau(intra_corpus):
    _, dataset = intra_corpus
    model, summary = train_model(dataset, "intra", SMALL, tau=0.35, progress=False)
    assert model.tau == 0.35
    assert summary.tau_source == "flag"


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_bad_tau(intra_corpus, tau):
    _, dataset = intra_corpus
    with pytest.raises(ParameterError):
        train_model(dataset, "intra", SMALL, tau=tau, progress=False)


def test_blank_training_images(tmp_path):
    items = []
    for index in range(2):
        items.append(DatasetItem(write_pgm(tmp_path / f"blank_{index}.pgm", np.full((40, 40), 90)), None))
    dataset = Dataset(("car",), {"car": items})
    with pytest.raises(TrainingError):
        train_model(dataset, "inter", SMALL, progress=False)


def test_auto_tau_is_median_assignment_distance(rng):
    points = rng.normal(size=(60, 4))
    cb = kmeans(points, 3, seed=0)
    distances = np.sort(np.linalg.norm(points[:, None, :] - cb.centroids[None, :, :], axis=2).min(axis=1))
    assert auto_tau(points, cb) == pytest.approx(float(np.median(distances)))


def test_auto_tau_needs_spread(rng):
    points = rng.normal(size=(5, 4))
    cb = kmeans(points, 5, seed=0)
    with pytest.raises(TrainingError):
        auto_tau(points, cb)


# ========== Matching ==========

def test_inter_classification_of_training_image(inter_model, inter_corpus):
    model, _ = inter_model
    _, dataset = inter_corpus
    verdict = classify_path(model, dataset.items["boxy"][0].image)
    assert verdict.label in model.classes
    assert verdict.detail >= 1
    assert len(verdict.scores) == 2
    assert verdict.value == max(verdict.scores)


def test_intra_self_match_has_zero_distance(intra_model, intra_corpus):
    model, _ = intra_model
    _, dataset = intra_corpus
    verdict = classify_path(model, dataset.items["taxi"][2].image)
    assert verdict.value == 0.0
    assert verdict.detail == 0
    assert verdict.label in model.classes


def test_no_descriptors_is_reported(intra_model):
    model, _ = intra_model
    with pytest.raises(NoFeaturesError):
        classify_descriptors(model, np.zeros((0, DESCRIPTOR_DIM)))


def test_debug_dumps(inter_model, inter_corpus, tmp_path):
    model, _ = inter_model
    _, dataset = inter_corpus
    image_path = dataset.items["rounded"][1].image
    dumps = DebugDumps(edges_dir=tmp_path / "edges", descriptors_dir=tmp_path / "desc")
    classify_path(model, image_path, dumps)

    edge_file = tmp_path / "edges" / f"{image_path.stem}.edges.pgm"
    assert edge_file.read_bytes().startswith(b"P5\n128 96\n255\n")
    lines = (tmp_path / "desc" / f"{image_path.stem}.desc.txt").read_text().splitlines()
    assert lines
    assert all(len(line.split()) == 2 + DESCRIPTOR_DIM for line in lines)
