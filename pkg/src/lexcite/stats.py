"""Evaluation statistics: classification metrics, annotator agreement,
ranking metrics, error concentration by agreement stratum, FDR control,
and calibration."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy.stats import fisher_exact

# Six-way annotation vocabulary; the three "no" variants collapse to "no".
YES_LABELS = frozenset({"yes"})
NO_LABELS = frozenset({"no", "no_facts", "no_special_regime"})
DEFERRED_LABELS = frozenset({"unsure", "review"})
LABEL_VOCABULARY = YES_LABELS | NO_LABELS | DEFERRED_LABELS


class UndefinedMetricError(ValueError):
    """Raised when a metric is requested on degenerate input."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def classification_metrics(cm: ConfusionMatrix) -> dict:
    """Standard binary metrics from a confusion matrix.

    Metrics with a zero denominator are reported as None (undefined),
    never coerced to 0.
    """
    if cm.total == 0:
        raise UndefinedMetricError("all-zero confusion matrix")
    tp, tn, fp, fn = cm.tp, cm.tn, cm.fp, cm.fn

    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is not None and recall is not None and (precision + recall) > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = None
    accuracy = (tp + tn) / cm.total
    specificity = tn / (tn + fp) if (tn + fp) > 0 else None
    balanced_accuracy = (
        (recall + specificity) / 2 if recall is not None and specificity is not None else None
    )
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom > 0 else None
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "accuracy": accuracy,
        "mcc": mcc,
        "balanced_accuracy": balanced_accuracy,
    }


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> tuple[float | None, float]:
    """Cohen's kappa and observed agreement between two raters.

    Chance agreement uses the product of marginal label frequencies.
    Returns (None, observed) when chance agreement is 1 (kappa undefined).
    """
    if len(labels_a) != len(labels_b):
        raise ValueError("label lists must have the same length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty label lists")
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    categories = set(labels_a) | set(labels_b)
    p_e = sum(
        (sum(1 for a in labels_a if a == c) / n) * (sum(1 for b in labels_b if b == c) / n)
        for c in categories
    )
    if math.isclose(p_e, 1.0):
        return None, observed
    kappa = (observed - p_e) / (1 - p_e)
    return kappa, observed


def collapse_label(label: str) -> str:
    """Collapse an annotation label to binary yes/no."""
    if label in YES_LABELS:
        return "yes"
    if label in NO_LABELS:
        return "no"
    raise ValueError(f"label {label!r} does not collapse to yes/no")


def resolve_gold(
    label_a1: str, label_a2: str, label_a3: str | None = None
) -> tuple[str, bool]:
    """Resolve a pair's gold label from two primary annotators plus an
    adjudicator on disagreement.

    Returns (gold, agree) where agree is True iff the collapsed primary
    labels match. On agreement the shared label wins and any adjudication
    is ignored; on disagreement the adjudicator's collapsed label wins.
    """
    c1, c2 = collapse_label(label_a1), collapse_label(label_a2)
    if c1 == c2:
        return c1, True
    if label_a3 is None:
        raise ValueError("disagreement requires an adjudicated label")
    return collapse_label(label_a3), False


def average_precision(ranked_labels: Sequence[int]) -> float | None:
    """Average precision of a ranked binary-relevance list.

    Mean over positives of the precision at each positive's rank.
    Returns None when the list contains no positive (undefined).
    """
    hits = 0
    total = 0.0
    for i, rel in enumerate(ranked_labels, start=1):
        if rel:
            hits += 1
            total += hits / i
    if hits == 0:
        return None
    return total / hits


def random_baseline_ap(
    labels: Sequence[int], n_permutations: int = 10_000, seed: int = 0
) -> float:
    """Monte-Carlo mean average precision of uniformly random rankings
    of the given label multiset."""
    rng = random.Random(seed)
    pool = list(labels)
    total = 0.0
    for _ in range(n_permutations):
        rng.shuffle(pool)
        ap = average_precision(pool)
        if ap is None:
            raise UndefinedMetricError("label multiset has no positives")
        total += ap
    return total / n_permutations


@dataclass(frozen=True)
class CutoffStats:
    k: int
    tp: int
    fp: int
    precision: float
    recall: float
    fp_reduction: float


@dataclass(frozen=True)
class RankedEval:
    ap: float | None
    cutoffs: tuple[CutoffStats, ...]


def precision_recall_at_k(
    ranked_labels: Sequence[int], cutoffs: Iterable[int]
) -> RankedEval:
    """Precision/recall/TP/FP at each cutoff plus the reduction in false
    positives relative to a random ranking.

    fp_reduction(k) = 1 - FP@k / (k * negative_rate).
    """
    labels = [1 if l else 0 for l in ranked_labels]
    n = len(labels)
    n_pos = sum(labels)
    n_neg = n - n_pos
    neg_rate = n_neg / n if n else 0.0
    stats = []
    for k in sorted(set(cutoffs)):
        if k > n:
            raise ValueError(f"cutoff {k} exceeds list length {n}")
        tp = sum(labels[:k])
        fp = k - tp
        precision = tp / k if k else 0.0
        recall = tp / n_pos if n_pos else 0.0
        expected_fp = k * neg_rate
        fp_reduction = 1.0 - fp / expected_fp if expected_fp > 0 else 0.0
        stats.append(CutoffStats(k, tp, fp, precision, recall, fp_reduction))
    return RankedEval(ap=average_precision(labels), cutoffs=tuple(stats))


@dataclass
class SignificanceResult:
    fpr_agree: float
    fpr_disagree: float
    odds_ratio: float
    p_value: float
    q_value: float | None = None
    reject: bool | None = None
    continuity_corrected: bool = False
    counts: dict = field(default_factory=dict)


def fp_by_agreement(
    preds: Sequence[int], gold: Sequence[int], agree_flags: Sequence[bool]
) -> SignificanceResult:
    """False-positive rates within gold negatives, stratified by whether
    the primary annotators agreed, with the disagree/agree odds ratio and
    a two-sided exact test on the fp/tn 2x2 table.
    """
    if not (len(preds) == len(gold) == len(agree_flags)):
        raise ValueError("inputs must share a length")
    cells = {True: [0, 0], False: [0, 0]}  # stratum -> [fp, tn]
    for p, g, a in zip(preds, gold, agree_flags):
        if g:
            continue
        cells[bool(a)][0 if p else 1] += 1
    fp_a, tn_a = cells[True]
    fp_d, tn_d = cells[False]
    if fp_a + tn_a == 0 or fp_d + tn_d == 0:
        raise ValueError("both strata need gold negatives")
    fpr_a = fp_a / (fp_a + tn_a)
    fpr_d = fp_d / (fp_d + tn_d)
    corrected = False
    a, b, c, d = fp_d, tn_d, fp_a, tn_a
    if 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
        corrected = True
    odds_ratio = (a * d) / (c * b)
    _, p_value = fisher_exact([[fp_d, tn_d], [fp_a, tn_a]], alternative="two-sided")
    return SignificanceResult(
        fpr_agree=fpr_a,
        fpr_disagree=fpr_d,
        odds_ratio=odds_ratio,
        p_value=float(p_value),
        continuity_corrected=corrected,
        counts={"fp_agree": fp_a, "tn_agree": tn_a, "fp_disagree": fp_d, "tn_disagree": tn_d},
    )


def bh_fdr(p_values: Sequence[float], alpha: float = 0.05) -> tuple[list[float], list[bool]]:
    """Benjamini-Hochberg step-up procedure.

    Returns (q_values, reject_flags) in the input order. q-values are
    monotone-enforced adjusted p-values; the reject set is every test with
    sorted p <= (rank/m) * alpha for the largest such rank.
    """
    m = len(p_values)
    for p in p_values:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p-value out of range: {p}")
    if m == 0:
        return [], []
    order = sorted(range(m), key=lambda i: p_values[i])
    q_sorted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        i = order[rank - 1]
        running = min(running, p_values[i] * m / rank)
        q_sorted[rank - 1] = running
    cutoff_rank = 0
    for rank in range(1, m + 1):
        if p_values[order[rank - 1]] <= rank * alpha / m:
            cutoff_rank = rank
    q_values = [0.0] * m
    reject = [False] * m
    for rank, i in enumerate(order, start=1):
        q_values[i] = q_sorted[rank - 1]
        reject[i] = rank <= cutoff_rank
    return q_values, reject


@dataclass(frozen=True)
class CalibrationBin:
    lo: float
    hi: float
    count: int
    mean_confidence: float | None
    actual_rate: float | None
    gap: float | None
    gap_midpoint: float | None


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[CalibrationBin, ...]
    ece: float
    n_samples: int
    n_binned: int

    @property
    def out_of_range(self) -> int:
        return self.n_samples - self.n_binned


def calibration(
    probs: Sequence[float], outcomes: Sequence[int], bin_edges: Sequence[float]
) -> CalibrationReport:
    """Bin predicted probabilities into [lo, hi) intervals (last bin
    inclusive of its upper edge) and report per-bin confidence vs. actual
    positive rate plus the expected calibration error.

    ECE weights each non-empty bin by its share of the binned samples.
    Samples outside [edges[0], edges[-1]] are counted as out-of-range.
    """
    if len(probs) != len(outcomes):
        raise ValueError("probs and outcomes must share a length")
    edges = list(bin_edges)
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bin edges must be strictly increasing")
    for p in probs:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"probability out of range: {p}")

    n_bins = len(edges) - 1
    counts = [0] * n_bins
    conf_sums = [0.0] * n_bins
    pos_counts = [0] * n_bins
    binned = 0
    for p, y in zip(probs, outcomes):
        idx = None
        for b in range(n_bins):
            lo, hi = edges[b], edges[b + 1]
            if (lo <= p < hi) or (b == n_bins - 1 and p == hi):
                idx = b
                break
        if idx is None:
            continue
        binned += 1
        counts[idx] += 1
        conf_sums[idx] += p
        pos_counts[idx] += 1 if y else 0

    bins = []
    ece = 0.0
    for b in range(n_bins):
        lo, hi = edges[b], edges[b + 1]
        if counts[b] == 0:
            bins.append(CalibrationBin(lo, hi, 0, None, None, None, None))
            continue
        mean_conf = conf_sums[b] / counts[b]
        actual = pos_counts[b] / counts[b]
        bins.append(
            CalibrationBin(
                lo,
                hi,
                counts[b],
                mean_conf,
                actual,
                actual - mean_conf,
                actual - (lo + hi) / 2,
            )
        )
        if binned:
            ece += (counts[b] / binned) * abs(mean_conf - actual)
    return CalibrationReport(
        bins=tuple(bins), ece=ece, n_samples=len(probs), n_binned=binned
    )


def calibration_by_agreement(
    probs: Sequence[float],
    outcomes: Sequence[int],
    agree_flags: Sequence[bool],
    bin_edges: Sequence[float],
) -> dict[str, CalibrationReport]:
    """Calibration reports stratified by annotator agreement."""
    if not (len(probs) == len(outcomes) == len(agree_flags)):
        raise ValueError("inputs must share a length")
    out = {}
    for name, keep in (("agree", True), ("disagree", False)):
        sel = [i for i, a in enumerate(agree_flags) if bool(a) == keep]
        out[name] = calibration(
            [probs[i] for i in sel], [outcomes[i] for i in sel], bin_edges
        )
    return out
