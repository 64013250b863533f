"""Table-shaped reports assembled from the statistics primitives: annotator
agreement, per-model classification, ranking cutoffs, error concentration
with FDR control, and calibration. Exportable as JSON or per-table CSV."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .stats import (
    CalibrationReport,
    ConfusionMatrix,
    DEFERRED_LABELS,
    RankedEval,
    SignificanceResult,
    bh_fdr,
    classification_metrics,
    cohen_kappa,
    collapse_label,
    resolve_gold,
)

DISAGREEMENT_CATEGORIES = {
    "no_facts": "facts_party_claims",
    "no_special_regime": "special_regime",
    "no": "residual_no",
    "yes": "yes",
}


@dataclass(frozen=True)
class PairAnnotations:
    pair_id: str
    a1: str | None = None
    a2: str | None = None
    a3: str | None = None


def agreement_report(annotations: Sequence[PairAnnotations]) -> dict:
    """Agreement statistics over a campaign's annotations.

    Pairs missing a primary label, or carrying a deferred label (unsure /
    review), are excluded from kappa and gold and counted as pending.
    Disagreements lacking adjudication stay out of the gold totals.
    """
    confusion = {"yes_yes": 0, "yes_no": 0, "no_yes": 0, "no_no": 0}
    structure = {cat: 0 for cat in DISAGREEMENT_CATEGORIES.values()}
    gold = {"yes": 0, "no": 0}
    collapsed_a1: list[str] = []
    collapsed_a2: list[str] = []
    n_pending = 0
    n_unadjudicated = 0
    yes_counts = {"a1": 0, "a2": 0}

    for ann in annotations:
        if (
            ann.a1 is None
            or ann.a2 is None
            or ann.a1 in DEFERRED_LABELS
            or ann.a2 in DEFERRED_LABELS
        ):
            n_pending += 1
            continue
        c1, c2 = collapse_label(ann.a1), collapse_label(ann.a2)
        collapsed_a1.append(c1)
        collapsed_a2.append(c2)
        yes_counts["a1"] += c1 == "yes"
        yes_counts["a2"] += c2 == "yes"
        confusion[f"{c1}_{c2}"] += 1
        if c1 == c2:
            gold[c1] += 1
            continue
        if ann.a3 is None or ann.a3 in DEFERRED_LABELS:
            n_unadjudicated += 1
            continue
        label, _ = resolve_gold(ann.a1, ann.a2, ann.a3)
        gold[label] += 1
        structure[DISAGREEMENT_CATEGORIES[ann.a3]] += 1

    n_resolved = len(collapsed_a1)
    kappa, observed = (None, None)
    if n_resolved:
        kappa, observed = cohen_kappa(collapsed_a1, collapsed_a2)
    return {
        "n_pairs": len(annotations),
        "n_resolved": n_resolved,
        "n_pending": n_pending,
        "n_unadjudicated": n_unadjudicated,
        "observed_agreement": observed,
        "kappa": kappa,
        "confusion_a1_a2": confusion,
        "n_disagreements": confusion["yes_no"] + confusion["no_yes"],
        "disagreement_structure": structure,
        "gold": gold,
        "yes_rates": {
            "a1": yes_counts["a1"] / n_resolved if n_resolved else None,
            "a2": yes_counts["a2"] / n_resolved if n_resolved else None,
        },
    }


def classification_table(
    matrices: Mapping[str, ConfusionMatrix]
) -> list[dict]:
    """Per-model confusion counts with derived metrics, best MCC first."""
    rows = []
    for model, cm in matrices.items():
        metrics = classification_metrics(cm)
        rows.append(
            {"model": model, "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn, **metrics}
        )
    rows.sort(key=lambda r: (-(r["mcc"] if r["mcc"] is not None else -2), r["model"]))
    return rows


def ranking_table(evaluation: RankedEval) -> list[dict]:
    return [
        {
            "k": c.k,
            "tp": c.tp,
            "fp": c.fp,
            "precision": c.precision,
            "recall": c.recall,
            "fp_reduction": c.fp_reduction,
        }
        for c in evaluation.cutoffs
    ]


def significance_table(
    results: Mapping[str, SignificanceResult], alpha: float = 0.05
) -> list[dict]:
    """Per-model error-concentration results with BH-adjusted q-values and
    reject flags filled in across the whole family of tests."""
    models = list(results)
    q_values, rejects = bh_fdr([results[m].p_value for m in models], alpha=alpha)
    rows = []
    for model, q, reject in zip(models, q_values, rejects):
        r = results[model]
        r.q_value = q
        r.reject = reject
        rows.append(
            {
                "model": model,
                "fpr_agree": r.fpr_agree,
                "fpr_disagree": r.fpr_disagree,
                "odds_ratio": r.odds_ratio,
                "p_value": r.p_value,
                "q_value": q,
                "significant": reject,
            }
        )
    rows.sort(key=lambda r: (-r["odds_ratio"], r["model"]))
    return rows


def calibration_table(report: CalibrationReport) -> list[dict]:
    return [
        {
            "bin_lo": b.lo,
            "bin_hi": b.hi,
            "count": b.count,
            "mean_confidence": b.mean_confidence,
            "actual_rate": b.actual_rate,
            "gap": b.gap,
            "gap_midpoint": b.gap_midpoint,
        }
        for b in report.bins
    ]


def write_table_csv(rows: Sequence[Mapping], path: str | Path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    fieldnames = list(rows[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(dict(row))


def write_report_json(report: Mapping, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
