import json

import numpy as np
import pytest

from synthdocseg.metrics import (
    confusion,
    mean_iou,
    report,
    report_to_json,
    report_to_table,
)


def test_confusion_hand_counted():
    truth = np.array([[0, 0, 1], [1, 2, 2]])
    pred = np.array([[0, 1, 1], [1, 2, 0]])
    counts = confusion(pred, truth)
    expect = np.array([[1, 1, 0], [0, 2, 0], [1, 0, 1]])
    assert np.array_equal(counts, expect)
    assert counts.sum() == truth.size


def test_confusion_shape_mismatch():
    with pytest.raises(ValueError):
        confusion(np.zeros((2, 2)), np.zeros((3, 3)))


def test_report_hand_computed():
    counts = np.array([[50, 10, 0], [5, 30, 5], [0, 0, 0]])
    rep = report(counts)
    assert rep.iou[0] == pytest.approx(50 / 65)  # tp=50 fp=5 fn=10
    assert rep.iou[1] == pytest.approx(30 / 50)
    assert rep.iou[2] == pytest.approx(0.0)  # tp=0 fp=5 fn=0
    assert rep.precision[0] == pytest.approx(50 / 55)
    assert rep.recall[1] == pytest.approx(30 / 40)
    assert rep.recall[2] == pytest.approx(1.0)  # vacuous 0/0
    assert rep.miou == pytest.approx(np.mean(rep.iou))


def test_perfect_prediction():
    truth = np.random.default_rng(0).integers(0, 3, size=(64, 64))
    rep = report(confusion(truth, truth))
    assert rep.miou == 1.0
    assert rep.iou == (1.0, 1.0, 1.0)


def test_absent_class_counts_as_perfect():
    truth = np.zeros((8, 8), dtype=np.uint8)
    rep = report(confusion(truth, truth))
    assert rep.iou == (1.0, 1.0, 1.0)


def test_micro_average_equals_pooled_pixels():
    rng = np.random.default_rng(1)
    docs = [(rng.integers(0, 3, size=(20, 20)), rng.integers(0, 3, size=(20, 20))) for _ in range(4)]
    total = sum(confusion(p, t) for t, p in docs)
    pooled_t = np.concatenate([t.ravel() for t, _ in docs])
    pooled_p = np.concatenate([p.ravel() for _, p in docs])
    assert np.array_equal(total, confusion(pooled_p, pooled_t))


def test_mean_iou_spot_value():
    assert mean_iou((0.643, 0.326, 0.995)) == pytest.approx(0.655, abs=5e-4)


@pytest.mark.parametrize(
    "ious,miou",
    [
        ((0.643, 0.326, 0.995), 0.655),
        ((0.609, 0.239, 0.996), 0.615),
        ((0.307, 0.265, 0.991), 0.521),
        ((0.696, 0.281, 0.996), 0.658),
        ((0.714, 0.463, 0.997), 0.725),
        ((0.518, 0.460, 0.991), 0.656),
        ((0.325, 0.059, 0.980), 0.455),
        ((0.336, 0.125, 0.984), 0.482),
        ((0.241, 0.072, 0.979), 0.431),
        ((0.375, 0.106, 0.983), 0.488),
        ((0.466, 0.173, 0.985), 0.541),
        ((0.523, 0.167, 0.983), 0.557),
    ],
)
def test_mean_iou_published_rows(ious, miou):
    # class IoUs are themselves rounded to 3 decimals, so the recomputed mean
    # can drift from the rounded published mean by up to ~1e-3
    assert mean_iou(ious) == pytest.approx(miou, abs=1e-3)


def test_report_json_roundtrip():
    counts = np.array([[50, 10, 0], [5, 30, 5], [0, 0, 0]])
    rep = report(counts)
    payload = json.loads(report_to_json(rep))
    assert payload["miou"] == pytest.approx(rep.miou)
    assert payload["classes"]["printed"]["iou"] == pytest.approx(rep.iou[1])


def test_report_table_layout():
    counts = np.eye(3, dtype=np.int64) * 10
    table = report_to_table(report(counts))
    lines = table.splitlines()
    assert len(lines) == 4
    assert "background" in lines[1] and "1.000" in lines[1]
    assert "handwritten" in lines[3]
