"""Detector scoring: confusion metrics with generated as the positive class,
soft-voting ensembles, mean±SD aggregation over runs, and toxicity percentage
aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import TOXICITY_CATEGORIES, PairedCorpus, PredictionRun, ToxicityScores

EVAL_METRICS = ("precision", "recall", "f1", "accuracy", "mcc")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    detector_name: str
    # metric name -> (mean over runs, population SD over runs)
    metrics: Mapping[str, tuple[float, float]]
    n_runs: int


def predicted_class(probs: tuple[float, float]) -> int:
    """Argmax with ties resolved toward class 0 (human)."""
    return 1 if probs[1] > probs[0] else 0


def confusion_counts(run: PredictionRun, labels: PairedCorpus) -> ConfusionCounts:
    tp = fp = tn = fn = 0
    for s in labels.samples:
        if s.id not in run.entries:
            raise ValueError(f"missing prediction for sample {s.id!r}")
        pred = predicted_class(run.entries[s.id])
        if s.label == 1:
            if pred == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred == 1:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def metrics_from_counts(c: ConfusionCounts) -> dict[str, float]:
    """precision/recall/f1/accuracy/mcc from a confusion matrix; 0/0 ratios are
    defined as 0."""
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    accuracy = (c.tp + c.tn) / c.total if c.total else 0.0
    denom = math.sqrt(
        float(c.tp + c.fp) * float(c.tp + c.fn) * float(c.tn + c.fp) * float(c.tn + c.fn)
    )
    mcc = (c.tp * c.tn - c.fp * c.fn) / denom if denom else 0.0
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "accuracy": accuracy,
        "mcc": mcc,
    }


def confusion_metrics(run: PredictionRun, labels: PairedCorpus) -> dict[str, float]:
    return metrics_from_counts(confusion_counts(run, labels))


def soft_vote(runs: Sequence[PredictionRun], run_id: str = "ensemble") -> PredictionRun:
    """Average probability vectors elementwise over runs sharing one id set."""
    if not runs:
        raise ValueError("soft_vote requires at least one run")
    ids = set(runs[0].entries)
    for run in runs[1:]:
        if set(run.entries) != ids:
            raise ValueError(f"run {run.run_id!r} covers a different sample id set")
    n = len(runs)
    entries: dict[str, tuple[float, float]] = {}
    for sample_id in runs[0].entries:
        p0 = sum(run.entries[sample_id][0] for run in runs) / n
        p1 = sum(run.entries[sample_id][1] for run in runs) / n
        entries[sample_id] = (p0, p1)
    names = []
    for run in runs:
        if run.detector_name not in names:
            names.append(run.detector_name)
    detector_name = "+".join(names) + " Ensemble"
    return PredictionRun(run_id, detector_name, entries)


def aggregate_runs(
    metric_records: Sequence[Mapping[str, float]], detector_name: str
) -> EvalReport:
    """Mean and population SD per metric over one detector's runs."""
    if not metric_records:
        raise ValueError("aggregate_runs requires at least one run")
    n = len(metric_records)
    summary: dict[str, tuple[float, float]] = {}
    for name in EVAL_METRICS:
        values = [rec[name] for rec in metric_records]
        mean = sum(values) / n
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / n)
        summary[name] = (mean, sd)
    return EvalReport(detector_name=detector_name, metrics=summary, n_runs=n)


def format_mean_sd(mean: float, sd: float, digits: int = 3) -> str:
    return f"{mean:.{digits}f}±{sd:.{digits}f}"


def aggregate_toxicity(
    scores: ToxicityScores,
    grouping: Mapping[str, str],
    threshold: float = 0.5,
) -> dict[str, dict[str, float]]:
    """Per group and category, the percentage of samples whose score meets the
    threshold.  ``grouping`` maps sample id -> group name; every grouped sample
    must be scored."""
    members: dict[str, list[str]] = {}
    for sample_id, group in grouping.items():
        members.setdefault(group, []).append(sample_id)
    out: dict[str, dict[str, float]] = {}
    for group, ids in members.items():
        if not ids:
            raise ValueError(f"group {group!r} is empty")
        row: dict[str, float] = {}
        for category in TOXICITY_CATEGORIES:
            hits = 0
            for sample_id in ids:
                if sample_id not in scores.entries:
                    raise ValueError(f"missing toxicity scores for sample {sample_id!r}")
                if scores.entries[sample_id][category] >= threshold:
                    hits += 1
            row[category] = 100.0 * hits / len(ids)
        out[group] = row
    return out
