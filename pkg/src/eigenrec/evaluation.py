"""Recognition-rate experiments over methods x train fractions x datasets."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from threadpoolctl import threadpool_limits

from .classifier import Outcome, classify
from .dataset import Dataset, SplitSpec, Strategy, split
from .eigenspace import Method, train

log = logging.getLogger(__name__)

CSV_FIELDS = ("dataset", "method", "train_fraction", "correct", "total",
              "accuracy_percent", "wall_time_s")


@dataclass(frozen=True)
class ReportRow:
    dataset: str
    method: str
    train_fraction: float
    correct: int
    total: int
    accuracy_percent: float
    wall_time_s: Optional[float]
    not_a_face: int = 0
    unknown_face: int = 0
    misidentified: int = 0
    components: int = 0


@dataclass(frozen=True)
class AccuracyReport:
    rows: tuple

    def __len__(self):
        return len(self.rows)


def evaluate(ds: Dataset, method: Method, spec: SplitSpec,
             components: Optional[int] = None, timing: bool = True) -> ReportRow:
    """Train on the split's train half and score every test image.

    A test image is correct only when it is identified as its own subject;
    not-a-face and unknown-face rejections count against accuracy.
    """
    start = time.perf_counter()
    parts = split(ds, spec)
    model = train(parts.train, method, components=components)
    correct = not_face = unknown = wrong = 0
    for vec, label in parts.test:
        d = classify(model, vec)
        if d.outcome is Outcome.NOT_A_FACE:
            not_face += 1
        elif d.outcome is Outcome.UNKNOWN_FACE:
            unknown += 1
        elif d.best_label == label:
            correct += 1
        else:
            wrong += 1
    total = len(parts.test)
    elapsed = time.perf_counter() - start
    row = ReportRow(
        dataset=ds.name,
        method=method.name,
        train_fraction=float(spec.train_fraction),
        correct=correct,
        total=total,
        accuracy_percent=100.0 * correct / total,
        wall_time_s=elapsed if timing else None,
        not_a_face=not_face,
        unknown_face=unknown,
        misidentified=wrong,
        components=model.n_components,
    )
    log.info("%s %s %.2f: %d/%d (%.2f%%)", row.dataset, row.method,
             row.train_fraction, correct, total, row.accuracy_percent)
    return row


def _evaluate_job(args):
    # single-threaded BLAS per worker: no oversubscription, same bits as serial
    with threadpool_limits(limits=1):
        return evaluate(*args)


def run_matrix(datasets: Sequence[Dataset], methods: Sequence[Method], fractions,
               strategy: Strategy = Strategy.FIRST_K, seed: int = 0,
               components: Optional[int] = None, jobs: int = 1,
               timing: bool = True) -> AccuracyReport:
    """Evaluate the Cartesian product of inputs.

    Rows are ordered by dataset (as given), fraction descending, then
    method (as given); ``jobs`` only changes how fast they are produced.
    """
    if not datasets or not methods or not fractions:
        raise ValueError("datasets, methods and fractions must all be nonempty")
    specs = sorted({SplitSpec(f, seed, strategy) for f in fractions},
                   key=lambda s: s.train_fraction, reverse=True)
    tasks = [(ds, m, spec, components, timing)
             for ds in datasets for spec in specs for m in methods]
    if jobs <= 1 or len(tasks) == 1:
        with threadpool_limits(limits=1):
            rows = [evaluate(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            rows = list(pool.map(_evaluate_job, tasks))
    return AccuracyReport(tuple(rows))


def emit(report: AccuracyReport, fmt: str = "csv") -> bytes:
    fmt = fmt.lower()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in report.rows:
            writer.writerow([
                r.dataset, r.method, format(r.train_fraction, "g"), r.correct,
                r.total, f"{r.accuracy_percent:.2f}",
                "" if r.wall_time_s is None else f"{r.wall_time_s:.3f}",
            ])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {"rows": [asdict(r) for r in report.rows]}
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def summary_table(report: AccuracyReport) -> str:
    """Accuracy laid out with one row per (fraction, method), one column per dataset."""
    datasets = list(dict.fromkeys(r.dataset for r in report.rows))
    keys = list(dict.fromkeys((r.train_fraction, r.method) for r in report.rows))
    acc = {(r.train_fraction, r.method, r.dataset): r.accuracy_percent for r in report.rows}
    head = f"{'Train/Test':<11}{'Method':<8}" + "".join(f"{d:>10}" for d in datasets)
    lines = [head, "-" * len(head)]
    for frac, method in keys:
        ratio = f"{round(frac * 100)}/{round((1 - frac) * 100)}"
        cells = "".join(
            f"{acc[(frac, method, d)]:>10.2f}" if (frac, method, d) in acc else f"{'-':>10}"
            for d in datasets
        )
        lines.append(f"{ratio:<11}{method:<8}{cells}")
    return "\n".join(lines)
