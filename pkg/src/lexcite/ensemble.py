"""Supervised ensembling over precomputed base-model probabilities:
decision-grouped cross-validation, a deterministic logistic-regression
meta-learner, MCC threshold optimization, and weighted-average /
reciprocal-rank fusion alternatives."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .stats import ConfusionMatrix, classification_metrics


@dataclass
class FoldPlan:
    n_folds: int
    fold_of_pair: dict[str, int]
    decision_of_pair: dict[str, str]

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.n_folds
        for f in self.fold_of_pair.values():
            sizes[f] += 1
        return sizes


def group_kfold(
    pair_ids: Sequence[str],
    decision_ids: Sequence[str],
    n_folds: int = 5,
    seed: int = 0,
) -> FoldPlan:
    """Partition pairs into folds grouped by decision id.

    All pairs of one decision land in the same fold. Groups are assigned
    largest-first to the currently smallest fold, which keeps fold sizes
    as even as the grouping permits. Deterministic per seed.
    """
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if len(pair_ids) != len(decision_ids):
        raise ValueError("pair_ids and decision_ids must align")
    groups: dict[str, list[str]] = {}
    for pid, did in zip(pair_ids, decision_ids):
        groups.setdefault(did, []).append(pid)
    if len(groups) < n_folds:
        raise ValueError(f"need at least {n_folds} distinct decisions, got {len(groups)}")
    rng = random.Random(seed)
    order = sorted(groups)
    rng.shuffle(order)
    order.sort(key=lambda d: -len(groups[d]))  # stable: keeps shuffle within sizes
    sizes = [0] * n_folds
    fold_of_pair: dict[str, int] = {}
    for did in order:
        fold = min(range(n_folds), key=lambda f: (sizes[f], f))
        sizes[fold] += len(groups[did])
        for pid in groups[did]:
            fold_of_pair[pid] = fold
    return FoldPlan(
        n_folds=n_folds,
        fold_of_pair=fold_of_pair,
        decision_of_pair=dict(zip(pair_ids, decision_ids)),
    )


@dataclass
class MetaLearner:
    weights: np.ndarray
    intercept: float
    l2_strength: float
    tol: float
    loss_history: list[float] = field(default_factory=list)
    converged: bool = True

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = np.asarray(X, dtype=np.float64) @ self.weights + self.intercept
        return 1.0 / (1.0 + np.exp(-z))


def _logistic_objective(
    X: np.ndarray, y: np.ndarray, beta: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus L2 on the non-intercept weights, with
    gradient and Hessian. The penalty is on the averaged loss, so the
    optimum is invariant under dataset duplication."""
    n = X.shape[0]
    Xb = np.hstack([X, np.ones((n, 1))])
    z = Xb @ beta
    p = 1.0 / (1.0 + np.exp(-z))
    eps = 1e-12
    ce = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    reg_mask = np.ones_like(beta)
    reg_mask[-1] = 0.0  # intercept unpenalized
    loss = ce + 0.5 * l2 * float(np.sum((beta * reg_mask) ** 2))
    grad = Xb.T @ (p - y) / n + l2 * beta * reg_mask
    W = p * (1 - p)
    hess = (Xb.T * W) @ Xb / n + l2 * np.diag(reg_mask)
    return loss, grad, hess


def fit_logistic(
    X: Sequence[Sequence[float]],
    y: Sequence[int],
    l2_strength: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> MetaLearner:
    """Deterministic full-batch logistic regression.

    Newton steps with backtracking from a zero initialization; converges
    when the gradient norm is at most tol. Raises on single-class data.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("need at least one example of each class")
    beta = np.zeros(X.shape[1] + 1)
    losses: list[float] = []
    converged = False
    for _ in range(max_iter):
        loss, grad, hess = _logistic_objective(X, y, beta, l2_strength)
        losses.append(loss)
        if float(np.linalg.norm(grad)) <= tol:
            converged = True
            break
        try:
            step = np.linalg.solve(hess + 1e-10 * np.eye(len(beta)), grad)
        except np.linalg.LinAlgError:
            step = grad
        # backtracking keeps the loss non-increasing
        scale = 1.0
        for _ in range(50):
            candidate = beta - scale * step
            new_loss, _, _ = _logistic_objective(X, y, candidate, l2_strength)
            if new_loss <= loss:
                beta = candidate
                break
            scale *= 0.5
        else:
            converged = float(np.linalg.norm(grad)) <= tol
            break
    if not np.all(np.isfinite(beta)):
        raise ArithmeticError("optimizer produced non-finite weights")
    return MetaLearner(
        weights=beta[:-1],
        intercept=float(beta[-1]),
        l2_strength=l2_strength,
        tol=tol,
        loss_history=losses,
        converged=converged,
    )


@dataclass
class StackReport:
    skipped_inner_folds: list[tuple[int, int]] = field(default_factory=list)


def nested_stack(
    features: dict[str, Sequence[float]],
    labels: dict[str, int],
    plan: FoldPlan,
    inner_folds: int | None = None,
    l2_strength: float = 1.0,
    tol: float = 1e-8,
    fit_hook: Callable[[list[str]], None] | None = None,
    report: StackReport | None = None,
) -> dict[str, float]:
    """Out-of-fold meta-learner probabilities for every pair.

    For each outer fold the meta-learner trains on the remaining folds
    only, so no pair is scored by a model that saw its fold (or, because
    folds group by decision, its decision). With inner_folds set, the
    outer training set is re-split by the same grouping rule and the
    prediction averages one fit per inner training subset; single-class
    inner training sets are skipped and reported.

    fit_hook, when provided, receives the training pair ids of every fit
    (leakage instrumentation for tests).
    """
    pair_ids = sorted(features)
    if set(pair_ids) != set(labels):
        raise ValueError("features and labels must cover the same pairs")
    missing = [p for p in pair_ids if p not in plan.fold_of_pair]
    if missing:
        raise ValueError(f"fold plan does not cover {missing[:3]}")

    out: dict[str, float] = {}
    for fold in range(plan.n_folds):
        test_ids = [p for p in pair_ids if plan.fold_of_pair[p] == fold]
        train_ids = [p for p in pair_ids if plan.fold_of_pair[p] != fold]
        if not test_ids:
            continue
        X_test = np.asarray([features[p] for p in test_ids], dtype=np.float64)

        def fit_on(ids: list[str]) -> MetaLearner | None:
            ys = [labels[p] for p in ids]
            if len(set(ys)) < 2:
                return None
            if fit_hook is not None:
                fit_hook(list(ids))
            return fit_logistic(
                [features[p] for p in ids], ys, l2_strength=l2_strength, tol=tol
            )

        if inner_folds is None or inner_folds <= 1:
            model = fit_on(train_ids)
            if model is None:
                raise ValueError(f"outer fold {fold}: training data has a single class")
            probs = model.predict_proba(X_test)
        else:
            inner_plan = group_kfold(
                train_ids,
                [plan.decision_of_pair[p] for p in train_ids],
                n_folds=inner_folds,
                seed=fold,
            )
            acc = np.zeros(len(test_ids))
            n_models = 0
            for inner in range(inner_folds):
                inner_train = [
                    p for p in train_ids if inner_plan.fold_of_pair[p] != inner
                ]
                model = fit_on(inner_train)
                if model is None:
                    if report is not None:
                        report.skipped_inner_folds.append((fold, inner))
                    continue
                acc += model.predict_proba(X_test)
                n_models += 1
            if n_models == 0:
                raise ValueError(f"outer fold {fold}: every inner fold was single-class")
            probs = acc / n_models
        for pid, prob in zip(test_ids, probs):
            out[pid] = float(prob)
    return out


def mcc_from_counts(tp: int, tn: int, fp: int, fn: int) -> float:
    m = classification_metrics(ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn))["mcc"]
    return m if m is not None else 0.0


def optimize_threshold(
    probs: Sequence[float],
    labels: Sequence[int],
    metric: Callable[[int, int, int, int], float] = mcc_from_counts,
) -> float:
    """Threshold from the observed probabilities maximizing the metric
    under "predict yes iff p >= t"; ties resolve to the smallest t."""
    if len(probs) != len(labels):
        raise ValueError("probs and labels must align")
    ys = set(labels)
    if ys != {0, 1}:
        raise ValueError("both classes must be present")
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    paired = sorted(zip(probs, labels))
    best_t, best_score = None, -np.inf
    # sweep thresholds from the smallest observed prob upward
    tp, fn = n_pos, 0
    fp, tn = n_neg, 0
    i = 0
    for t in sorted(set(probs)):
        while i < len(paired) and paired[i][0] < t:
            if paired[i][1]:
                tp -= 1
                fn += 1
            else:
                fp -= 1
                tn += 1
            i += 1
        score = metric(tp, tn, fp, fn)
        if score > best_score:
            best_t, best_score = t, score
    assert best_t is not None
    return best_t


def confusion_at(probs: Sequence[float], labels: Sequence[int], threshold: float) -> ConfusionMatrix:
    tp = tn = fp = fn = 0
    for p, y in zip(probs, labels):
        pred = p >= threshold
        if pred and y:
            tp += 1
        elif pred:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def weighted_average(
    probs_matrix: Sequence[Sequence[float]], weights: Sequence[float]
) -> list[float]:
    """Convex combination of per-model probability columns after weight
    normalization. probs_matrix rows are pairs, columns are models."""
    W = np.asarray(weights, dtype=np.float64)
    if np.any(W < 0):
        raise ValueError("weights must be >= 0")
    total = W.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    M = np.asarray(probs_matrix, dtype=np.float64)
    if M.shape[1] != len(W):
        raise ValueError("weight count must match model count")
    return list(M @ (W / total))


def rank_fusion(rank_matrix: Sequence[Sequence[int]]) -> list[float]:
    """Mean reciprocal rank per pair over per-model rankings (rank 1 is
    best). Higher fused score means better consensus placement."""
    M = np.asarray(rank_matrix, dtype=np.float64)
    if np.any(M < 1):
        raise ValueError("ranks must be >= 1")
    return list(np.mean(1.0 / M, axis=1))


def load_features_jsonl(path) -> dict[str, dict[str, float]]:
    """Load {pair_id, model_id, probability} records into a pair-indexed
    feature table. Probabilities outside [0, 1] are rejected."""
    import json

    table: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            p = float(rec["probability"])
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{path}:{line_no}: probability {p} out of [0, 1]")
            table.setdefault(rec["pair_id"], {})[rec["model_id"]] = p
    return table


def feature_matrix(
    table: dict[str, dict[str, float]]
) -> tuple[list[str], list[str], dict[str, list[float]], list[str]]:
    """Align a feature table to a fixed model order.

    Pairs missing any model's probability are excluded and reported, never
    silently imputed. Returns (pair_ids, model_order, rows, excluded).
    """
    model_order = sorted({m for per in table.values() for m in per})
    rows: dict[str, list[float]] = {}
    excluded: list[str] = []
    for pid in sorted(table):
        per = table[pid]
        if any(m not in per for m in model_order):
            excluded.append(pid)
            continue
        rows[pid] = [per[m] for m in model_order]
    return sorted(rows), model_order, rows, excluded


def cross_validated_stack(
    features: dict[str, Sequence[float]],
    labels: dict[str, int],
    decision_ids: dict[str, str],
    n_folds: int = 5,
    seed: int = 0,
    inner_folds: int | None = None,
) -> tuple[dict[str, float], dict]:
    """Grouped-CV stacking with a pooled-threshold report.

    Returns the out-of-fold probabilities and a cv_report payload: fold
    sizes, the threshold optimized on the pooled out-of-fold predictions,
    pooled metrics at that threshold, and per-fold metrics at the same
    threshold.
    """
    pair_ids = sorted(features)
    plan = group_kfold(
        pair_ids, [decision_ids[p] for p in pair_ids], n_folds=n_folds, seed=seed
    )
    oof = nested_stack(features, labels, plan, inner_folds=inner_folds)
    probs = [oof[p] for p in pair_ids]
    ys = [labels[p] for p in pair_ids]
    threshold = optimize_threshold(probs, ys)
    pooled = confusion_at(probs, ys, threshold)
    folds = []
    for fold in range(plan.n_folds):
        members = [p for p in pair_ids if plan.fold_of_pair[p] == fold]
        cm = confusion_at([oof[p] for p in members], [labels[p] for p in members], threshold)
        metrics = (
            classification_metrics(cm) if cm.total else {}
        )
        folds.append(
            {
                "fold": fold,
                "n": len(members),
                "cm": {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn},
                "metrics": metrics,
            }
        )
    report = {
        "n_folds": plan.n_folds,
        "fold_sizes": plan.fold_sizes(),
        "threshold": threshold,
        "pooled_cm": {"tp": pooled.tp, "tn": pooled.tn, "fp": pooled.fp, "fn": pooled.fn},
        "pooled_metrics": classification_metrics(pooled),
        "folds": folds,
    }
    return oof, report
