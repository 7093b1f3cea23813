import csv
from types import SimpleNamespace

import numpy as np
import pytest

import evaluation
from errors import DatasetError, NoFeaturesError, ParameterError, UnmatchedQueryError
from evaluation import ConfusionMatrix, evaluate, format_report, load_dataset, split, write_csv
from imgio import write_pgm
from pipeline import Verdict


def _make_dataset(root, sizes, with_masks=False):
    for label, count in sizes.items():
        class_dir = root / label
        class_dir.mkdir(parents=True)
        for index in range(count):
            write_pgm(class_dir / f"{label}_{index}.pgm", np.full((4, 4), index * 10))
            if with_masks:
                write_pgm(class_dir / f"{label}_{index}.mask.pgm", np.full((4, 4), 255))
    return root


def _stub_model(classes=("car", "van")):
    return SimpleNamespace(classes=classes, mode="inter")


# ========== load_dataset ==========

def test_load_dataset_classes_and_counts(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"van": 2, "car": 3}))
    assert dataset.classes == ("car", "van")
    assert dataset.counts() == [3, 2]
    assert len(dataset) == 5


def test_mask_files_are_paired_not_listed(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 2}, with_masks=True))
    assert dataset.counts() == [2]
    for item in dataset.items["car"]:
        assert item.mask == item.image.with_name(item.image.stem + ".mask.pgm")


def test_images_without_masks(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 2}))
    assert all(item.mask is None for item in dataset.items["car"])


def test_non_image_files_are_ignored(tmp_path):
    root = _make_dataset(tmp_path, {"car": 1})
    (root / "car" / "notes.txt").write_text("shot on a rainy day")
    assert load_dataset(root).counts() == [1]


def test_empty_class_is_named(tmp_path):
    root = _make_dataset(tmp_path, {"car": 2})
    (root / "van").mkdir()
    with pytest.raises(DatasetError, match="van"):
        load_dataset(root)


def test_truncated_image_is_rejected_by_name(tmp_path):
    root = _make_dataset(tmp_path, {"boxy": 3})
    (root / "boxy" / "boxy_1.pgm").write_bytes(b"P5\n128 96\n255\n\x00")
    with pytest.raises(DatasetError, match="boxy_1.pgm.*truncated raster"):
        load_dataset(root)


def test_mask_of_the_wrong_size_is_rejected(tmp_path):
    root = _make_dataset(tmp_path, {"car": 2})
    write_pgm(root / "car" / "car_0.mask.pgm", np.full((3, 3), 255))
    with pytest.raises(DatasetError, match="car_0.mask.pgm"):
        load_dataset(root)


def test_missing_or_empty_root(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "nowhere")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)


# ========== split ==========

def test_split_is_seeded(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 8, "van": 8}))
    first = split(dataset, 3, seed=5, protocol="holdout")
    second = split(dataset, 3, seed=5, protocol="holdout")
    assert first.train.items == second.train.items
    assert first.eval.items == second.eval.items


def test_whole_protocol_evaluates_everything(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 5, "van": 4}))
    chosen = split(dataset, 2, seed=0, protocol="whole")
    assert chosen.train.counts() == [2, 2]
    assert chosen.eval.items == dataset.items
    assert chosen.protocol == "whole"


def test_holdout_protocol_is_disjoint(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 5, "van": 4}))
    chosen = split(dataset, 2, seed=0, protocol="holdout")
    assert chosen.eval.counts() == [3, 2]
    for label in dataset.classes:
        assert not set(chosen.train.items[label]) & set(chosen.eval.items[label])
        assert set(chosen.train.items[label]) | set(chosen.eval.items[label]) == set(dataset.items[label])


def test_holdout_with_every_image_in_training(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 3, "van": 3}))
    with pytest.raises(DatasetError, match="no images to evaluate"):
        split(dataset, 3, seed=0, protocol="holdout")


def test_split_larger_than_smallest_class(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 5, "van": 2}))
    with pytest.raises(DatasetError, match="smallest class"):
        split(dataset, 3, seed=0)


# ========== evaluate ==========

def test_always_first_class_rates(tmp_path, monkeypatch):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 3, "van": 3}))
    monkeypatch.setattr(evaluation, "classify_image", lambda model, image, mask: Verdict("car", 1.0, 1))
    matrix = evaluate(_stub_model(), dataset, progress=False)
    np.testing.assert_allclose(matrix.rates, [[100.0, 0.0], [100.0, 0.0]])
    assert matrix.accuracy("car") == 100.0
    assert matrix.accuracy("van") == 0.0
    assert matrix.overall_accuracy == 50.0


def test_failures_are_tallied_not_raised(tmp_path, monkeypatch):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 2, "van": 3}))

    def fake_classify(model, image, mask):
        level = int(image.pixels[0, 0])
        if level == 0:
            raise NoFeaturesError("blank")
        if level == 10:
            raise UnmatchedQueryError("nothing matched")
        return Verdict("van", 0.5, 2)

    monkeypatch.setattr(evaluation, "classify_image", fake_classify)
    matrix = evaluate(_stub_model(), dataset, progress=False)
    assert matrix.failed.tolist() == [2, 2]
    assert matrix.counts.tolist() == [[0, 0], [0, 1]]
    assert matrix.failure_reasons == {"no-features": 2, "no-match": 2}
    assert matrix.total == 5
    np.testing.assert_allclose(matrix.rates, [[0.0, 0.0], [0.0, 100.0]])


def test_unreadable_and_misconfigured_items_are_tallied(tmp_path, monkeypatch):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 2, "van": 2}))
    dataset.items["car"][0].image.write_bytes(b"P5\n4 4\n255\n\x00")

    def fake_classify(model, image, mask):
        if int(image.pixels[0, 0]) == 0:
            raise ParameterError("Canny thresholds must satisfy 0 < low < high")
        return Verdict("car", 1.0, 1)

    monkeypatch.setattr(evaluation, "classify_image", fake_classify)
    matrix = evaluate(_stub_model(), dataset, progress=False)
    assert matrix.failed.tolist() == [1, 1]
    assert matrix.failure_reasons == {"unreadable": 1, "bad-parameters": 1}
    assert matrix.counts.tolist() == [[1, 0], [1, 0]]


def test_evaluate_rejects_foreign_model_classes(tmp_path):
    dataset = load_dataset(_make_dataset(tmp_path, {"car": 1}))
    with pytest.raises(DatasetError, match="bus"):
        evaluate(_stub_model(("car", "bus")), dataset, progress=False)


# ========== reports ==========

def _sample_matrix():
    matrix = ConfusionMatrix.empty(("sedan", "taxi"), protocol="holdout")
    matrix.counts[:] = [[9, 1], [0, 10]]
    matrix.failed[:] = [1, 0]
    matrix.failure_reasons["no-features"] = 1
    return matrix


def test_report_text():
    report = format_report(_sample_matrix(), title="INTRA-CLASS CONFUSION MATRIX", seed=4)
    lines = report.splitlines()
    assert lines[0] == "#protocol=holdout"
    assert lines[1] == "#seed=4"
    assert "90.00%" in report and "10.00%" in report and "100.00%" in report
    assert "🎯 sedan accuracy: 90.00%" in report
    assert "🎯 Overall accuracy: 95.00%" in report
    assert "❌ Failed items: 1 of 21" in report


def test_csv_export(tmp_path):
    path = write_csv(_sample_matrix(), tmp_path / "matrix.csv")
    with open(path, newline="", encoding="utf-8") as csvfile:
        assert csvfile.readline() == "#protocol=holdout\n"
        rows = list(csv.DictReader(csvfile))
    assert rows[0] == {"true_class": "sedan", "pred_class": "sedan", "count": "9"}
    assert {"true_class": "sedan", "pred_class": "FAILED", "count": "1"} in rows
    assert {"true_class": "taxi", "pred_class": "taxi", "count": "10"} in rows
    assert len(rows) == 6
