import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexcite.fusion import (
    DEFAULT_CONFIG,
    FusionConfig,
    VerdictCollapseReport,
    agreement_bonus,
    collapse_verdicts,
    ensemble_score,
    rank,
    select_low_yes_models,
    vote_set,
)


def votes_from_count(n_yes):
    return [True] * n_yes + [False] * (4 - n_yes)


class TestVoteSet:
    def test_union_vs_inter2(self):
        votes = [True, False, False, False]
        assert vote_set(votes, "union")
        assert not vote_set(votes, "inter2")

    def test_inter4_full_agreement(self):
        assert vote_set([True] * 4, "inter4")

    def test_all_sixteen_patterns_nest(self):
        for pattern in itertools.product([True, False], repeat=4):
            memberships = [vote_set(pattern, lvl) for lvl in ("union", "inter2", "inter3", "inter4")]
            # inter4 => inter3 => inter2 => union
            for tighter, looser in zip(memberships[1:], memberships[:-1]):
                assert not tighter or looser

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            vote_set([True, False], "union")

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            vote_set([True] * 4, "inter5")


class TestEnsembleScore:
    def test_maximum_is_two_point_eight(self):
        score = ensemble_score([True] * 4, 1.0, 1.0, 1.0)
        assert score == pytest.approx(2.8)

    def test_two_yes_no_signals(self):
        # 2 * 0.25 + inter2 bonus 0.3
        assert ensemble_score(votes_from_count(2), 0.0, 0.0, 0.0) == pytest.approx(0.8)

    def test_all_no_zeros(self):
        assert ensemble_score(votes_from_count(0), 0.0, 0.0, 0.0) == 0.0

    def test_highest_only_bonus(self):
        assert agreement_bonus(votes_from_count(4)) == 1.0
        assert agreement_bonus(votes_from_count(3)) == 0.5
        assert agreement_bonus(votes_from_count(2)) == 0.3
        assert agreement_bonus(votes_from_count(1)) == 0.0

    def test_cumulative_bonus_mode(self):
        config = FusionConfig(cumulative_bonus=True)
        assert agreement_bonus(votes_from_count(4), config) == pytest.approx(1.8)
        assert ensemble_score(votes_from_count(4), 1.0, 1.0, 1.0, config) == pytest.approx(3.6)

    def test_unnormalized_signal_rejected(self):
        with pytest.raises(ValueError):
            ensemble_score(votes_from_count(1), 1.2, 0.0, 0.0)

    @given(
        st.lists(st.booleans(), min_size=4, max_size=4),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
    )
    def test_flipping_no_to_yes_never_decreases(self, votes, t, b, c):
        base = ensemble_score(votes, t, b, c)
        for i, v in enumerate(votes):
            if not v:
                flipped = votes.copy()
                flipped[i] = True
                assert ensemble_score(flipped, t, b, c) >= base - 1e-12


class TestRank:
    def test_tie_resolved_by_tiebreak(self):
        order = rank(["p1", "p2"], [1.0, 1.0], [0.2, 0.9])
        assert order == ["p2", "p1"]

    def test_distinct_primaries_never_reordered(self):
        # epsilon times any tie-break stays below the smallest primary gap
        pair_ids = ["a", "b", "c"]
        primaries = [2.0, 1.5, 1.0]
        worst_tie = [0.0, 1.0, 1.0]
        assert rank(pair_ids, primaries, worst_tie) == ["a", "b", "c"]

    def test_identical_everything_pair_id_order(self):
        assert rank(["z", "a", "m"], [1, 1, 1], [0.5, 0.5, 0.5]) == ["a", "m", "z"]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rank(["a"], [1.0, 2.0], [0.5])

    def test_unnormalized_tiebreak_rejected(self):
        with pytest.raises(ValueError):
            rank(["a"], [1.0], [3.0])

    def test_permutation_invariant(self):
        ids = ["p3", "p1", "p2", "p4"]
        primary = [0.3, 0.9, 0.3, 0.1]
        tie = [0.9, 0.5, 0.1, 0.0]
        expected = rank(ids, primary, tie)
        reordered = list(zip(ids, primary, tie))[::-1]
        got = rank([r[0] for r in reordered], [r[1] for r in reordered], [r[2] for r in reordered])
        assert got == expected


class TestSelectLowYesModels:
    def test_paper_like_rates(self):
        rates = {
            "llama-8b": 0.22,
            "qwen-7b": 0.54,
            "qwen-32b": 0.66,
            "mistral-nemo": 0.75,
            "llama-70b": 0.84,
            "qwen3-32b": 0.85,
            "gemma-27b": 0.94,
            "aya-32b": 0.94,
            "saul-7b": 0.95,
            "command-r": 0.96,
        }
        assert select_low_yes_models(rates) == [
            "llama-8b",
            "qwen-7b",
            "qwen-32b",
            "mistral-nemo",
        ]

    def test_equal_rates_lexicographic(self):
        rates = {m: 0.5 for m in ("d", "b", "a", "c", "e")}
        assert select_low_yes_models(rates) == ["a", "b", "c", "d"]

    def test_exactly_four(self):
        rates = {"a": 0.1, "b": 0.2, "c": 0.3, "d": 0.4}
        assert select_low_yes_models(rates) == ["a", "b", "c", "d"]

    def test_too_few_models(self):
        with pytest.raises(ValueError):
            select_low_yes_models({"a": 0.1, "b": 0.2, "c": 0.3})

    def test_rate_out_of_range(self):
        with pytest.raises(ValueError):
            select_low_yes_models({"a": 1.2, "b": 0.2, "c": 0.3, "d": 0.1})


class TestCollapseVerdicts:
    def test_unparseable_maps_to_no_and_is_counted(self):
        report = VerdictCollapseReport()
        votes = collapse_verdicts(
            {"m1": "yes", "m2": "unparseable", "m3": "no"},
            model_order=["m1", "m2", "m3", "m4"],
            pair_id="p1",
            report=report,
        )
        assert votes == [True, False, False, False]
        assert report.n_unparseable == 2  # m2 unparseable, m4 missing
        assert report.unparseable_pairs == ["p1", "p1"]

    def test_invalid_verdict(self):
        with pytest.raises(ValueError):
            collapse_verdicts({"m1": "maybe"}, model_order=["m1"])
