import csv
import io
import json

import numpy as np
import pytest

from eigenrec.dataset import Dataset, SplitSpec, Strategy, Subject
from eigenrec.eigenspace import Method
from eigenrec.evaluation import (
    CSV_FIELDS, AccuracyReport, ReportRow, emit, evaluate, run_matrix, summary_table,
)
from eigenrec.imageio import FaceVector

METHODS = [Method.pca(), Method.npca_method()]


def repeated_dataset(n_subjects=4, per=5, d=30, seed=0):
    rng = np.random.default_rng(seed)
    subjects = []
    for i in range(n_subjects):
        v = FaceVector(rng.uniform(0, 255, d), (d, 1))
        subjects.append(Subject(f"s{i + 1}", (v,) * per))
    return Dataset("rep", tuple(subjects), (d, 1))


def row(**kw):
    base = dict(dataset="ORL", method="PCA", train_fraction=0.8, correct=75, total=80,
                accuracy_percent=93.75, wall_time_s=None)
    base.update(kw)
    return ReportRow(**base)


def test_six_rows_in_order(synthetic):
    report = run_matrix([synthetic], METHODS, [0.4, 0.8, 0.6], timing=False)
    assert len(report) == 6
    assert [(r.train_fraction, r.method) for r in report.rows] == [
        (0.8, "PCA"), (0.8, "N-PCA"), (0.6, "PCA"), (0.6, "N-PCA"),
        (0.4, "PCA"), (0.4, "N-PCA")]
    for r in report.rows:
        assert 0 <= r.correct <= r.total
        assert r.correct + r.not_a_face + r.unknown_face + r.misidentified == r.total
        assert r.accuracy_percent == pytest.approx(100 * r.correct / r.total)


def test_totals_match_split(synthetic):
    r = evaluate(synthetic, Method.pca(), SplitSpec(0.5))
    assert r.total == 15 and r.wall_time_s >= 0


def test_duplicate_test_images_score_perfectly():
    ds = repeated_dataset()
    for m in METHODS:
        r = evaluate(ds, m, SplitSpec(0.8))
        assert (r.correct, r.total, r.accuracy_percent) == (4, 4, 100.0)


def test_rejections_count_as_errors():
    ds = repeated_dataset()
    odd = FaceVector(np.full(30, 255.0) - ds.subjects[0].images[0].values, (30, 1))
    odd = FaceVector(odd.values * 40, (30, 1))
    subjects = (Subject("s1", ds.subjects[0].images[:4] + (odd,)),) + ds.subjects[1:]
    r = evaluate(Dataset("odd", subjects, ds.dims), Method.pca(), SplitSpec(0.8))
    assert r.total == 4
    assert r.correct == 3
    assert r.not_a_face + r.unknown_face + r.misidentified == 1


def test_jobs_do_not_change_results(synthetic):
    kw = dict(strategy=Strategy.SEEDED_SHUFFLE, seed=5, timing=False)
    serial = run_matrix([synthetic], METHODS, [0.8, 0.5], jobs=1, **kw)
    parallel = run_matrix([synthetic], METHODS, [0.8, 0.5], jobs=3, **kw)
    assert emit(serial) == emit(parallel)
    assert emit(serial, "json") == emit(parallel, "json")


def test_rejects_empty_inputs(synthetic):
    with pytest.raises(ValueError):
        run_matrix([synthetic], [], [0.8])


class TestEmit:
    def test_csv_format(self):
        text = emit(AccuracyReport((row(), row(method="N-PCA", wall_time_s=1.23456,
                                                 train_fraction=0.6)))).decode()
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_FIELDS)
        assert lines[1] == "ORL,PCA,0.8,75,80,93.75,"
        assert lines[2] == "ORL,N-PCA,0.6,75,80,93.75,1.235"
        assert text.endswith("\n")

    def test_accuracy_two_decimals(self):
        text = emit(AccuracyReport((row(correct=1, total=3, accuracy_percent=100 / 3),)))
        assert list(csv.reader(io.StringIO(text.decode())))[1][5] == "33.33"

    def test_json(self):
        doc = json.loads(emit(AccuracyReport((row(),)), "json"))
        assert doc["rows"][0]["accuracy_percent"] == 93.75
        assert doc["rows"][0]["method"] == "PCA"
        assert doc["rows"][0]["wall_time_s"] is None

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit(AccuracyReport(()), "xml")


def test_summary_table():
    report = AccuracyReport((row(), row(method="N-PCA", accuracy_percent=92.5),
                             row(dataset="IFD", accuracy_percent=80.0)))
    lines = summary_table(report).splitlines()
    assert "ORL" in lines[0] and "IFD" in lines[0]
    assert lines[2].startswith("80/20")
    assert "93.75" in lines[2] and "80.00" in lines[2]
    assert lines[3].split()[-1] == "-"
