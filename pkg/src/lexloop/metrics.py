"""Confusion counts, per-class precision/recall/F1, multi-seed aggregation
and the session report shapes.

Display rounding is two decimals for metrics and integer percent for
disagreement rates; the machine-readable records keep full precision.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .classifier import ClassifierModel, LabeledExample, forward_batch
from .labels import MENTAL, PHYSICAL, label_name

log = logging.getLogger(__name__)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion with mental as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(model: ClassifierModel, testset: Sequence[LabeledExample]) -> ConfusionCounts:
    if not testset:
        raise ValueError("testset must be non-empty")
    X = np.stack([ex.features for ex in testset])
    preds = forward_batch(model, X) > model.threshold
    tp = fp = fn = tn = 0
    for ex, pred in zip(testset, preds):
        if ex.label == MENTAL:
            tp += bool(pred)
            fn += not pred
        else:
            fp += bool(pred)
            tn += not pred
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False  # some 0/0 ratio was forced to 0

    def __iter__(self):
        yield from (self.precision, self.recall, self.f1)


def prf1(counts: ConfusionCounts, positive: int = MENTAL) -> ClassMetrics:
    """Precision/recall/F1 for one class; for physical the tp/tn and fp/fn
    roles swap. 0/0 ratios become 0 with the degenerate flag set."""
    if positive == MENTAL:
        tp, fp, fn = counts.tp, counts.fp, counts.fn
    else:
        tp, fp, fn = counts.tn, counts.fn, counts.fp
    degenerate = False
    if tp + fp == 0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1, degenerate = 0.0, True
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassMetrics(precision, recall, f1, degenerate)


def evaluate(model: ClassifierModel, testset: Sequence[LabeledExample]) -> dict:
    """Confusion plus both per-class metric triples."""
    counts = confusion(model, testset)
    return {
        "counts": counts,
        "mental": prf1(counts, MENTAL),
        "physical": prf1(counts, PHYSICAL),
    }


# --- session reports ---------------------------------------------------------


@dataclass
class IterationReport:
    iteration: int
    annotations: int  # words annotated this iteration, overflow included
    labeled_total: int
    pos_filled: int
    neg_filled: int
    quotas_met: bool
    dev_accuracy: float
    mental: ClassMetrics | None = None
    physical: ClassMetrics | None = None


@dataclass
class SessionReport:
    strategy: str
    seed: int
    pool_initial: int
    pool_remaining: int
    iterations: list[IterationReport] = field(default_factory=list)
    best_iteration: int | None = None


def _metrics_dict(m: ClassMetrics | None) -> dict | None:
    if m is None:
        return None
    return {
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "degenerate": m.degenerate,
    }


def _metrics_from(d: dict | None) -> ClassMetrics | None:
    if d is None:
        return None
    return ClassMetrics(d["precision"], d["recall"], d["f1"], d.get("degenerate", False))


def session_report_to_dict(report: SessionReport) -> dict:
    return {
        "strategy": report.strategy,
        "seed": report.seed,
        "pool_initial": report.pool_initial,
        "pool_remaining": report.pool_remaining,
        "best_iteration": report.best_iteration,
        "iterations": [
            {
                "iteration": it.iteration,
                "annotations": it.annotations,
                "labeled_total": it.labeled_total,
                "pos_filled": it.pos_filled,
                "neg_filled": it.neg_filled,
                "quotas_met": it.quotas_met,
                "dev_accuracy": it.dev_accuracy,
                "mental": _metrics_dict(it.mental),
                "physical": _metrics_dict(it.physical),
            }
            for it in report.iterations
        ],
    }


def session_report_from_dict(d: dict) -> SessionReport:
    report = SessionReport(
        strategy=d["strategy"],
        seed=d["seed"],
        pool_initial=d["pool_initial"],
        pool_remaining=d["pool_remaining"],
        best_iteration=d.get("best_iteration"),
    )
    for row in d["iterations"]:
        report.iterations.append(
            IterationReport(
                iteration=row["iteration"],
                annotations=row["annotations"],
                labeled_total=row["labeled_total"],
                pos_filled=row["pos_filled"],
                neg_filled=row["neg_filled"],
                quotas_met=row["quotas_met"],
                dev_accuracy=row["dev_accuracy"],
                mental=_metrics_from(row.get("mental")),
                physical=_metrics_from(row.get("physical")),
            )
        )
    return report


# --- aggregation over seeds --------------------------------------------------


@dataclass
class AggregateRow:
    iteration: int
    annotations_mean: float
    dev_accuracy_mean: float
    mental: ClassMetrics | None
    physical: ClassMetrics | None


@dataclass
class AggregateReport:
    strategy: str
    seeds: list[int]
    rows: list[AggregateRow]
    annotations_range: str  # "min~max" across all iterations and seeds
    enough_samples: bool  # every iteration of every run filled both quotas


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _mean_metrics(metrics: Sequence[ClassMetrics | None]) -> ClassMetrics | None:
    present = [m for m in metrics if m is not None]
    if not present:
        return None
    if len(present) != len(metrics):
        raise ValueError("reports disagree on testset evaluation presence")
    return ClassMetrics(
        precision=_mean([m.precision for m in present]),
        recall=_mean([m.recall for m in present]),
        f1=_mean([m.f1 for m in present]),
        degenerate=any(m.degenerate for m in present),
    )


def aggregate_runs(reports: Sequence[SessionReport]) -> AggregateReport:
    """Arithmetic means per iteration across same-shape runs."""
    if not reports:
        raise ValueError("no reports to aggregate")
    n_iter = len(reports[0].iterations)
    for r in reports:
        if len(r.iterations) != n_iter:
            raise ValueError(
                f"mismatched iteration counts: {len(r.iterations)} vs {n_iter}"
            )
        if r.strategy != reports[0].strategy:
            raise ValueError("reports mix strategies")

    rows = []
    for i in range(n_iter):
        its = [r.iterations[i] for r in reports]
        rows.append(
            AggregateRow(
                iteration=its[0].iteration,
                annotations_mean=_mean([it.annotations for it in its]),
                dev_accuracy_mean=_mean([it.dev_accuracy for it in its]),
                mental=_mean_metrics([it.mental for it in its]),
                physical=_mean_metrics([it.physical for it in its]),
            )
        )
    counts = [it.annotations for r in reports for it in r.iterations]
    return AggregateReport(
        strategy=reports[0].strategy,
        seeds=[r.seed for r in reports],
        rows=rows,
        annotations_range=f"{min(counts)}~{max(counts)}",
        enough_samples=all(it.quotas_met for r in reports for it in r.iterations),
    )


# --- annotator disagreement --------------------------------------------------


@dataclass(frozen=True)
class DualAnnotation:
    word: str
    first: int
    second: int | None
    adjudicated: int | None = None


@dataclass(frozen=True)
class DisagreementStats:
    total: int
    disagreements: int

    @property
    def rate_percent(self) -> int:
        if self.total == 0:
            return 0
        return round_half_up(100.0 * self.disagreements / self.total)


def disagreement_stats(annotations: Iterable[DualAnnotation]) -> dict[int, DisagreementStats]:
    """Per-class totals and disagreement counts, attributed by final label.

    Words missing a second label, or disagreeing without an adjudicated
    label, are skipped with a warning.
    """
    totals = {MENTAL: 0, PHYSICAL: 0}
    flips = {MENTAL: 0, PHYSICAL: 0}
    for ann in annotations:
        if ann.second is None:
            log.warning("word %r lacks a second label; skipped", ann.word)
            continue
        disagreed = ann.first != ann.second
        if disagreed:
            if ann.adjudicated is None:
                log.warning("word %r disagreed without adjudication; skipped", ann.word)
                continue
            final = ann.adjudicated
        else:
            final = ann.adjudicated if ann.adjudicated is not None else ann.first
        totals[final] += 1
        if disagreed:
            flips[final] += 1
    return {
        cls: DisagreementStats(total=totals[cls], disagreements=flips[cls])
        for cls in (MENTAL, PHYSICAL)
    }


# --- rendering ----------------------------------------------------------------


def _fmt(m: ClassMetrics | None) -> str:
    if m is None:
        return "   -    -    -"
    return f"{m.precision:5.2f} {m.recall:5.2f} {m.f1:5.2f}"


def render_session_table(report: SessionReport) -> str:
    lines = [
        f"strategy: {report.strategy}  seed: {report.seed}  "
        f"pool: {report.pool_initial} -> {report.pool_remaining} remaining",
        "iter  annots  labeled  quotas  dev_acc  mental P/R/F1     physical P/R/F1",
    ]
    for it in report.iterations:
        quotas = "met" if it.quotas_met else "short"
        lines.append(
            f"{it.iteration:4d}  {it.annotations:6d}  {it.labeled_total:7d}  "
            f"{quotas:>6}  {it.dev_accuracy:7.2f}  {_fmt(it.mental)}   {_fmt(it.physical)}"
        )
    if report.best_iteration is not None:
        lines.append(f"best iteration by testset macro-F1: {report.best_iteration}")
    return "\n".join(lines) + "\n"


def render_session_records(report: SessionReport) -> str:
    d = session_report_to_dict(report)
    header = {k: v for k, v in d.items() if k != "iterations"}
    header["kind"] = "session"
    lines = [json.dumps(header, sort_keys=True)]
    for row in d["iterations"]:
        row = dict(row, kind="iteration")
        lines.append(json.dumps(row, sort_keys=True))
    return "\n".join(lines) + "\n"


def render_aggregate_table(agg: AggregateReport) -> str:
    lines = [
        f"strategy: {agg.strategy}  seeds: {', '.join(str(s) for s in agg.seeds)}",
        f"annotations per iteration: {agg.annotations_range}  "
        f"enough samples: {'yes' if agg.enough_samples else 'no'}",
        "iter  annots  dev_acc  mental P/R/F1     physical P/R/F1",
    ]
    for row in agg.rows:
        lines.append(
            f"{row.iteration:4d}  {row.annotations_mean:6.1f}  {row.dev_accuracy_mean:7.2f}  "
            f"{_fmt(row.mental)}   {_fmt(row.physical)}"
        )
    return "\n".join(lines) + "\n"


def render_aggregate_records(agg: AggregateReport) -> str:
    header = {
        "kind": "aggregate",
        "strategy": agg.strategy,
        "seeds": agg.seeds,
        "annotations_range": agg.annotations_range,
        "enough_samples": agg.enough_samples,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for row in agg.rows:
        lines.append(
            json.dumps(
                {
                    "kind": "aggregate_row",
                    "iteration": row.iteration,
                    "annotations_mean": row.annotations_mean,
                    "dev_accuracy_mean": row.dev_accuracy_mean,
                    "mental": _metrics_dict(row.mental),
                    "physical": _metrics_dict(row.physical),
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"
