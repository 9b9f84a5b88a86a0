"""Leave-one-drive-out evaluation, the n sweep, and report files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .dataset import CLASS_ORDER, LosoFold, assemble_loso, build_samples, to_arrays
from .errors import EmptyMatrix, SingleClassTrainingSet
from .features import FeatureVector, format_feature_table
from .forest import ForestConfig, ForestModel, fit_forest

CLASS_TAGS = tuple(c.tag for c in CLASS_ORDER)
LOW, HIGH = 0, 1


def confusion_matrix(actual, predicted, n_classes: int = 2) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for a, p in zip(actual, predicted):
        cm[int(a), int(p)] += 1
    return cm


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def _ratio(num, den) -> float:
    return float(num / den) if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both are 0."""
    return _ratio(2 * precision * recall, precision + recall)


def metrics_from_confusion(cm) -> ClassMetrics:
    """Per-class and support-weighted precision/recall/F1 from ``cm[actual, predicted]``.

    Zero denominators give 0. Classes without actual samples get weight 0
    in the weighted averages.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total < 1:
        raise EmptyMatrix("confusion matrix has no samples")
    tp = np.diag(cm)
    precision = tuple(_ratio(tp[k], cm[:, k].sum()) for k in range(len(cm)))
    recall = tuple(_ratio(tp[k], cm[k, :].sum()) for k in range(len(cm)))
    f1 = tuple(f1_score(p, r) for p, r in zip(precision, recall))
    support = tuple(int(s) for s in cm.sum(axis=1))
    w = np.asarray(support, dtype=np.float64) / total
    return ClassMetrics(
        accuracy=_ratio(tp.sum(), total),
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        weighted_precision=float(np.dot(w, precision)),
        weighted_recall=float(np.dot(w, recall)),
        weighted_f1=float(np.dot(w, f1)),
    )


@dataclass(frozen=True)
class FoldMetrics:
    test_drive_id: str
    n: int
    train_accuracy: float
    test_accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    confusion: tuple[tuple[int, ...], ...]


def _accuracy(model: ForestModel, samples) -> float:
    X, y = to_arrays(samples)
    return float(np.mean(model.predict_many(X) == y)) if len(y) else 0.0


def evaluate_fold(fold: LosoFold, config: ForestConfig, n: int = 0) -> tuple[FoldMetrics, ForestModel]:
    try:
        model = fit_forest(fold.train, config)
    except SingleClassTrainingSet as exc:
        raise SingleClassTrainingSet(f"fold holding out {fold.test_drive_id!r}: {exc}") from None
    X, y = to_arrays(fold.test)
    cm = confusion_matrix(y, model.predict_many(X), len(CLASS_ORDER))
    m = metrics_from_confusion(cm)
    fm = FoldMetrics(
        test_drive_id=fold.test_drive_id,
        n=n,
        train_accuracy=_accuracy(model, fold.train),
        test_accuracy=m.accuracy,
        precision=m.precision,
        recall=m.recall,
        f1=m.f1,
        support=m.support,
        weighted_precision=m.weighted_precision,
        weighted_recall=m.weighted_recall,
        weighted_f1=m.weighted_f1,
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
    )
    return fm, model


def _evaluate_fold_job(args):
    return evaluate_fold(*args)


def evaluate_folds(folds: Sequence[LosoFold], config: ForestConfig, n: int = 0, jobs: int = 1):
    """[(FoldMetrics, model)] in fold order. Every fold uses the same seed."""
    if len(folds) < 2:
        raise ValueError("need at least two folds")
    work = [(f, config, n) for f in folds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_fold_job, work))
    return [evaluate_fold(*w) for w in work]


def run_loso(folds: Sequence[LosoFold], config: ForestConfig, n: int = 0, jobs: int = 1) -> list[FoldMetrics]:
    return [fm for fm, _ in evaluate_folds(folds, config, n, jobs)]


@dataclass(frozen=True)
class Averages:
    """Unweighted means over folds.

    Per-class values average only the folds where that class has test
    samples; the ``folds_with_class`` counts say how many.
    """

    train_accuracy: float
    test_accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    folds_with_class: tuple[int, ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def average_folds(folds: Sequence[FoldMetrics]) -> Averages:
    def mean(vals):
        vals = list(vals)
        return float(np.mean(vals)) if vals else 0.0

    k = len(CLASS_ORDER)
    per_class = lambda attr, c: mean(getattr(f, attr)[c] for f in folds if f.support[c] > 0)  # noqa: E731
    return Averages(
        train_accuracy=mean(f.train_accuracy for f in folds),
        test_accuracy=mean(f.test_accuracy for f in folds),
        precision=tuple(per_class("precision", c) for c in range(k)),
        recall=tuple(per_class("recall", c) for c in range(k)),
        f1=tuple(per_class("f1", c) for c in range(k)),
        folds_with_class=tuple(sum(1 for f in folds if f.support[c] > 0) for c in range(k)),
        weighted_precision=mean(f.weighted_precision for f in folds),
        weighted_recall=mean(f.weighted_recall for f in folds),
        weighted_f1=mean(f.weighted_f1 for f in folds),
    )


@dataclass
class EvalReport:
    n_values: list[int]
    folds: dict[int, list[FoldMetrics]]
    averages: dict[int, Averages]
    metadata: dict = field(default_factory=dict)
    models: dict[tuple[int, str], ForestModel] = field(default_factory=dict, repr=False)

    @property
    def drives(self) -> list[str]:
        return sorted({f.test_drive_id for fs in self.folds.values() for f in fs})

    def table1(self) -> list[list]:
        """Rows ``[n, lowF1(drive1), ...]`` over sorted drive ids."""
        rows = []
        for n in self.n_values:
            by_drive = {f.test_drive_id: f.f1[LOW] for f in self.folds[n]}
            rows.append([n] + [by_drive.get(d, float("nan")) for d in self.drives])
        return rows

    def fig3(self) -> list[dict]:
        return [
            {
                "n": n,
                "train_accuracy": a.train_accuracy,
                "test_accuracy": a.test_accuracy,
                "weighted_f1": a.weighted_f1,
                "low_f1": a.f1[LOW],
                "high_f1": a.f1[HIGH],
            }
            for n, a in ((n, self.averages[n]) for n in self.n_values)
        ]

    def to_json(self) -> str:
        doc = {
            "metadata": self.metadata,
            "class_order": list(CLASS_TAGS),
            "n_values": self.n_values,
            "results": [
                {
                    "n": n,
                    "folds": [asdict(f) for f in sorted(self.folds[n], key=lambda f: f.test_drive_id)],
                    "average": asdict(self.averages[n]),
                }
                for n in self.n_values
            ],
            "fig3": self.fig3(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def feature_digest(vectors: Sequence[FeatureVector]) -> str:
    ordered = sorted(vectors, key=lambda v: (v.drive_id, v.section_index, v.window_start_s))
    return hashlib.sha256(format_feature_table(ordered).encode()).hexdigest()


def config_digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def sweep_n(
    vectors: Sequence[FeatureVector],
    n_values: Sequence[int] = (2, 3, 4, 5),
    config: ForestConfig = ForestConfig(),
    weights: str = "linear",
    jobs: int = 1,
) -> EvalReport:
    """Expand, fold and evaluate once per ``n``."""
    n_values = sorted(set(int(n) for n in n_values))
    folds_by_n, avgs, models = {}, {}, {}
    for n in n_values:
        samples = build_samples(vectors, n, weights)
        results = evaluate_folds(assemble_loso(samples), config, n, jobs)
        folds_by_n[n] = [fm for fm, _ in results]
        avgs[n] = average_folds(folds_by_n[n])
        for fm, model in results:
            models[(n, fm.test_drive_id)] = model
    meta = {
        "version": __version__,
        "seed": config.rng_seed,
        "forest_config": asdict(config),
        "expansion_weights": weights,
        "config_digest": config_digest({"forest": asdict(config), "weights": weights, "n_values": n_values}),
        "dataset_digest": feature_digest(vectors),
    }
    return EvalReport(n_values, folds_by_n, avgs, meta, models)


def _fmt(v: float) -> str:
    return "nan" if v != v else f"{v:.6f}"


def table1_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n"] + report.drives)
    for row in report.table1():
        wr.writerow([row[0]] + [_fmt(v) for v in row[1:]])
    return buf.getvalue()


def table2_csv(report: EvalReport, n: int | None = None) -> str:
    n = max(report.n_values) if n is None else n
    a = report.averages[n]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "class", "precision", "recall", "f1"])
    for k, tag in enumerate(CLASS_TAGS):
        wr.writerow([n, tag, _fmt(a.precision[k]), _fmt(a.recall[k]), _fmt(a.f1[k])])
    wr.writerow([n, "weighted_average", _fmt(a.weighted_precision), _fmt(a.weighted_recall), _fmt(a.weighted_f1)])
    return buf.getvalue()


def fig3_csv(report: EvalReport) -> str:
    rows = report.fig3()
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    cols = ["n", "train_accuracy", "test_accuracy", "weighted_f1", "low_f1", "high_f1"]
    wr.writerow(cols)
    for r in rows:
        wr.writerow([r["n"]] + [_fmt(r[c]) for c in cols[1:]])
    return buf.getvalue()
