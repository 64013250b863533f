import json
import math
import random

import numpy as np
import pytest

from lexcite.ensemble import (
    StackReport,
    confusion_at,
    cross_validated_stack,
    feature_matrix,
    fit_logistic,
    group_kfold,
    load_features_jsonl,
    mcc_from_counts,
    nested_stack,
    optimize_threshold,
    rank_fusion,
    weighted_average,
)


class TestGroupKfold:
    def test_one_decision_per_fold(self):
        pair_ids = [f"p{i}" for i in range(10)]
        decision_ids = [f"d{i // 2}" for i in range(10)]
        plan = group_kfold(pair_ids, decision_ids, n_folds=5, seed=0)
        assert sorted(plan.fold_sizes()) == [2, 2, 2, 2, 2]
        for i in range(0, 10, 2):
            assert plan.fold_of_pair[f"p{i}"] == plan.fold_of_pair[f"p{i+1}"]

    def test_large_group_colocated(self):
        pair_ids = [f"p{i}" for i in range(12)]
        decision_ids = ["big"] * 6 + [f"d{i}" for i in range(6)]
        plan = group_kfold(pair_ids, decision_ids, n_folds=3, seed=1)
        big_folds = {plan.fold_of_pair[f"p{i}"] for i in range(6)}
        assert len(big_folds) == 1

    def test_deterministic_per_seed(self):
        pair_ids = [f"p{i}" for i in range(30)]
        decision_ids = [f"d{i % 11}" for i in range(30)]
        a = group_kfold(pair_ids, decision_ids, seed=5)
        b = group_kfold(pair_ids, decision_ids, seed=5)
        assert a.fold_of_pair == b.fold_of_pair

    def test_partition(self):
        pair_ids = [f"p{i}" for i in range(40)]
        decision_ids = [f"d{i % 13}" for i in range(40)]
        plan = group_kfold(pair_ids, decision_ids, n_folds=5, seed=2)
        assert set(plan.fold_of_pair) == set(pair_ids)
        assert sum(plan.fold_sizes()) == 40

    def test_benchmark_shape_balances_exactly(self):
        # 643 single-pair + 186 double-pair decisions = 1015 pairs / 829 decisions
        pair_ids, decision_ids = [], []
        n = 0
        for d in range(829):
            for _ in range(2 if d < 186 else 1):
                pair_ids.append(f"p{n}")
                decision_ids.append(f"d{d}")
                n += 1
        plan = group_kfold(pair_ids, decision_ids, n_folds=5, seed=0)
        assert plan.fold_sizes() == [203] * 5

    def test_too_few_groups(self):
        with pytest.raises(ValueError):
            group_kfold(["p1", "p2"], ["d1", "d1"], n_folds=5)


class TestFitLogistic:
    def test_separable_ordering(self):
        model = fit_logistic([[0.0], [1.0]], [0, 1])
        p0, p1 = model.predict_proba(np.array([[0.0], [1.0]]))
        assert p1 > p0

    def test_duplicated_dataset_identical_weights(self):
        X = [[0.1], [0.9], [0.4], [0.7]]
        y = [0, 1, 0, 1]
        m1 = fit_logistic(X, y)
        m2 = fit_logistic(X + X, y + y)
        assert m1.weights == pytest.approx(m2.weights, abs=1e-8)
        assert m1.intercept == pytest.approx(m2.intercept, abs=1e-8)

    def test_one_dimensional_brute_force_oracle(self):
        # symmetric dataset forces a zero intercept, leaving a 1-D problem
        xs = [-2.0, -1.0, 1.0, 2.0]
        ys = [0, 0, 1, 1]
        l2 = 1.0

        def objective(w):
            ce = 0.0
            for x, y in zip(xs, ys):
                p = 1.0 / (1.0 + math.exp(-w * x))
                ce += -(y * math.log(p) + (1 - y) * math.log(1 - p))
            return ce / len(xs) + 0.5 * l2 * w * w

        grid = [i / 10000 for i in range(0, 30000)]
        w_star = min(grid, key=objective)
        model = fit_logistic([[x] for x in xs], ys, l2_strength=l2)
        assert model.intercept == pytest.approx(0.0, abs=1e-6)
        assert model.weights[0] == pytest.approx(w_star, abs=1e-4)

    def test_loss_non_increasing(self):
        rng = random.Random(3)
        X = [[rng.random(), rng.random()] for _ in range(40)]
        y = [1 if x[0] + 0.5 * x[1] > 0.7 else 0 for x in X]
        model = fit_logistic(X, y)
        assert model.converged
        for a, b in zip(model.loss_history, model.loss_history[1:]):
            assert b <= a + 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            fit_logistic([[0.1], [0.2]], [1, 1])

    def test_deterministic(self):
        X = [[0.2, 0.3], [0.9, 0.1], [0.5, 0.8], [0.1, 0.9]]
        y = [0, 1, 1, 0]
        m1, m2 = fit_logistic(X, y), fit_logistic(X, y)
        assert list(m1.weights) == list(m2.weights)
        assert m1.intercept == m2.intercept


def two_fold_toy():
    features = {
        "a1": [0.1],
        "a2": [0.8],
        "b1": [0.2],
        "b2": [0.9],
    }
    labels = {"a1": 0, "a2": 1, "b1": 0, "b2": 1}
    pair_ids = list(features)
    decisions = ["dA", "dA", "dB", "dB"]
    plan = group_kfold(pair_ids, decisions, n_folds=2, seed=0)
    return features, labels, plan


class TestNestedStack:
    def test_matches_manual_two_fit_trace(self):
        features, labels, plan = two_fold_toy()
        got = nested_stack(features, labels, plan)
        for fold in range(2):
            train = [p for p in features if plan.fold_of_pair[p] != fold]
            test = [p for p in features if plan.fold_of_pair[p] == fold]
            model = fit_logistic([features[p] for p in train], [labels[p] for p in train])
            expected = model.predict_proba(np.array([features[p] for p in test]))
            for pid, e in zip(test, expected):
                assert got[pid] == pytest.approx(float(e))

    def test_constant_features_give_training_prior(self):
        features = {f"p{i}": [1.0] for i in range(12)}
        labels = {f"p{i}": 1 if i % 3 == 0 else 0 for i in range(12)}
        decisions = [f"d{i}" for i in range(12)]
        plan = group_kfold(list(features), decisions, n_folds=2, seed=0)
        probs = nested_stack(features, labels, plan)
        for pid, prob in probs.items():
            fold = plan.fold_of_pair[pid]
            train = [p for p in features if plan.fold_of_pair[p] != fold]
            prior = sum(labels[p] for p in train) / len(train)
            assert prob == pytest.approx(prior, abs=1e-3)

    def test_row_order_invariance(self):
        features, labels, plan = two_fold_toy()
        shuffled = dict(reversed(list(features.items())))
        assert nested_stack(features, labels, plan) == nested_stack(shuffled, labels, plan)

    def test_no_leakage_instrumented(self):
        rng = random.Random(9)
        pair_ids = [f"p{i}" for i in range(60)]
        decisions = [f"d{i % 17}" for i in range(60)]
        features = {p: [rng.random(), rng.random()] for p in pair_ids}
        labels = {p: rng.randint(0, 1) for p in pair_ids}
        plan = group_kfold(pair_ids, decisions, n_folds=5, seed=4)
        decision_of = dict(zip(pair_ids, decisions))
        training_sets = []
        nested_stack(features, labels, plan, fit_hook=training_sets.append)
        assert training_sets
        for train_ids in training_sets:
            train_decisions = {decision_of[p] for p in train_ids}
            eval_decisions = {decision_of[p] for p in pair_ids if p not in set(train_ids)}
            assert not train_decisions & eval_decisions

    def test_inner_folds_skip_single_class_with_report(self):
        # fold 1's inner re-split isolates every positive in one inner fold,
        # so the other inner fit sees a single class and is skipped
        from lexcite.ensemble import FoldPlan

        decisions = {
            "t1": "dT", "t2": "dT", "u1": "dU", "u2": "dU",  # fold 0
            "x1": "dA", "x2": "dA", "y1": "dB", "z1": "dC",  # fold 1
        }
        labels = {"t1": 1, "t2": 0, "u1": 1, "u2": 0, "x1": 1, "x2": 0, "y1": 0, "z1": 0}
        fold_of = {p: (0 if p[0] in "tu" else 1) for p in decisions}
        plan = FoldPlan(n_folds=2, fold_of_pair=fold_of, decision_of_pair=decisions)
        features = {p: [0.05 * i] for i, p in enumerate(sorted(decisions))}
        report = StackReport()
        probs = nested_stack(features, labels, plan, inner_folds=2, report=report)
        assert set(probs) == set(decisions)
        assert report.skipped_inner_folds
        # the skip happened while training on fold 1 (predicting fold 0)
        assert all(outer == 0 for outer, _ in report.skipped_inner_folds)

    def test_fold_plan_must_cover_rows(self):
        features, labels, plan = two_fold_toy()
        features["extra"] = [0.5]
        labels["extra"] = 1
        with pytest.raises(ValueError):
            nested_stack(features, labels, plan)


class TestOptimizeThreshold:
    def test_two_point_case(self):
        assert optimize_threshold([0.2, 0.8], [0, 1]) == pytest.approx(0.8)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            optimize_threshold([0.2, 0.8], [1, 1])

    def test_exhaustive_scan_oracle(self):
        rng = random.Random(12)
        probs = [round(rng.random(), 3) for _ in range(80)]
        labels = [1 if rng.random() < p else 0 for p in probs]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[0]
        chosen = optimize_threshold(probs, labels)

        def mcc_at(t):
            cm = confusion_at(probs, labels, t)
            return mcc_from_counts(cm.tp, cm.tn, cm.fp, cm.fn)

        best = max(sorted(set(probs)), key=mcc_at)
        # ties resolve to the smallest threshold
        candidates = [t for t in sorted(set(probs)) if mcc_at(t) == mcc_at(best)]
        assert chosen == candidates[0]

    def test_reapplication_reproduces_confusion(self):
        probs = [0.1, 0.4, 0.45, 0.6, 0.8, 0.9]
        labels = [0, 0, 1, 0, 1, 1]
        t = optimize_threshold(probs, labels)
        cm = confusion_at(probs, labels, t)
        assert cm.tp + cm.fn == sum(labels)
        assert cm.tn + cm.fp == len(labels) - sum(labels)


class TestFusionAlternatives:
    def test_weighted_average_equal_weights(self):
        assert weighted_average([[0.2, 0.8]], [1.0, 1.0]) == [pytest.approx(0.5)]

    def test_weight_one_identity(self):
        assert weighted_average([[0.3, 0.9]], [0.0, 1.0]) == [pytest.approx(0.9)]

    def test_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            weighted_average([[0.5, 0.5]], [0.0, 0.0])

    def test_rank_fusion_hand_arithmetic(self):
        fused = rank_fusion([[1, 2], [2, 1], [3, 3]])
        assert fused[0] == pytest.approx((1 + 1 / 2) / 2)
        assert fused[1] == pytest.approx((1 / 2 + 1) / 2)
        assert fused[2] == pytest.approx(1 / 3)

    def test_rank_fusion_rejects_bad_ranks(self):
        with pytest.raises(ValueError):
            rank_fusion([[0, 1]])


class TestFeatureTable:
    def test_load_and_align(self, tmp_path):
        path = tmp_path / "features.jsonl"
        rows = [
            {"pair_id": "p1", "model_id": "m1", "probability": 0.2},
            {"pair_id": "p1", "model_id": "m2", "probability": 0.7},
            {"pair_id": "p2", "model_id": "m1", "probability": 0.9},
            {"pair_id": "p2", "model_id": "m2", "probability": 0.8},
            {"pair_id": "p3", "model_id": "m1", "probability": 0.1},  # m2 missing
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows))
        table = load_features_jsonl(path)
        pair_ids, model_order, matrix, excluded = feature_matrix(table)
        assert model_order == ["m1", "m2"]
        assert pair_ids == ["p1", "p2"]
        assert matrix["p1"] == [0.2, 0.7]
        assert excluded == ["p3"]

    def test_out_of_range_probability_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"pair_id": "p", "model_id": "m", "probability": 1.4}))
        with pytest.raises(ValueError):
            load_features_jsonl(path)


class TestCrossValidatedStack:
    def make_campaign(self, n_decisions=40, pairs_per=2, seed=6):
        rng = random.Random(seed)
        features, labels, decisions = {}, {}, {}
        for d in range(n_decisions):
            for j in range(pairs_per):
                pid = f"p{d:03d}_{j}"
                y = rng.randint(0, 1)
                base = 0.65 if y else 0.35
                features[pid] = [
                    min(1.0, max(0.0, base + 0.25 * (rng.random() - 0.5))) for _ in range(3)
                ]
                labels[pid] = y
                decisions[pid] = f"d{d:03d}"
        return features, labels, decisions

    def test_report_shape_and_consistency(self):
        features, labels, decisions = self.make_campaign()
        oof, report = cross_validated_stack(features, labels, decisions, n_folds=5, seed=0)
        assert set(oof) == set(features)
        assert sum(report["fold_sizes"]) == len(features)
        assert len(report["folds"]) == 5
        pooled = report["pooled_cm"]
        assert sum(pooled.values()) == len(features)
        # per-fold confusion matrices sum to the pooled one
        for cell in ("tp", "tn", "fp", "fn"):
            assert sum(f["cm"][cell] for f in report["folds"]) == pooled[cell]
        # signal is informative, so the stack beats coin-flip MCC comfortably
        assert report["pooled_metrics"]["mcc"] > 0.3

    def test_threshold_is_observed_probability(self):
        features, labels, decisions = self.make_campaign(seed=9)
        oof, report = cross_validated_stack(features, labels, decisions, n_folds=4, seed=1)
        assert report["threshold"] in set(oof.values())
