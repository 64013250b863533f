"""Signal fusion into rankings: agreement vote sets over four model
verdicts, the weighted unsupervised ensemble score, and epsilon-scaled
tie-breaking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

VOTE_LEVELS = {"union": 1, "inter2": 2, "inter3": 3, "inter4": 4}
N_VOTERS = 4


@dataclass(frozen=True)
class FusionConfig:
    llm_weight: float = 0.25
    bonus_inter2: float = 0.3
    bonus_inter3: float = 0.5
    bonus_inter4: float = 1.0
    w_tfidf: float = 0.2
    w_bm25: float = 0.2
    w_cross: float = 0.4
    epsilon: float = 1e-6
    cumulative_bonus: bool = False

    def __post_init__(self) -> None:
        weights = (
            self.llm_weight,
            self.bonus_inter2,
            self.bonus_inter3,
            self.bonus_inter4,
            self.w_tfidf,
            self.w_bm25,
            self.w_cross,
        )
        if any(w < 0 for w in weights):
            raise ValueError("weights must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


DEFAULT_CONFIG = FusionConfig()


def _yes_count(votes: Sequence[bool]) -> int:
    if len(votes) != N_VOTERS:
        raise ValueError(f"expected {N_VOTERS} votes, got {len(votes)}")
    return sum(1 for v in votes if v)


def vote_set(votes: Sequence[bool], level: str) -> bool:
    """Membership by agreement level: at least 1/2/3/4 positive votes for
    union/inter2/inter3/inter4."""
    if level not in VOTE_LEVELS:
        raise ValueError(f"unknown vote level {level!r}")
    return _yes_count(votes) >= VOTE_LEVELS[level]


def agreement_bonus(votes: Sequence[bool], config: FusionConfig = DEFAULT_CONFIG) -> float:
    """Bonus for cross-model agreement. By default only the highest
    applicable level pays out; the cumulative mode stacks all reached
    levels instead."""
    count = _yes_count(votes)
    if config.cumulative_bonus:
        total = 0.0
        if count >= 2:
            total += config.bonus_inter2
        if count >= 3:
            total += config.bonus_inter3
        if count >= 4:
            total += config.bonus_inter4
        return total
    if count >= 4:
        return config.bonus_inter4
    if count >= 3:
        return config.bonus_inter3
    if count >= 2:
        return config.bonus_inter2
    return 0.0


def ensemble_score(
    votes: Sequence[bool],
    tfidf_n: float,
    bm25_n: float,
    cross_n: float,
    config: FusionConfig = DEFAULT_CONFIG,
) -> float:
    """Unsupervised ensemble score: per-model vote weight plus agreement
    bonus plus weighted, already-normalized lexical and cross-encoder
    signals."""
    for name, v in (("tfidf_n", tfidf_n), ("bm25_n", bm25_n), ("cross_n", cross_n)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be normalized to [0, 1], got {v}")
    return (
        config.llm_weight * _yes_count(votes)
        + agreement_bonus(votes, config)
        + config.w_tfidf * tfidf_n
        + config.w_bm25 * bm25_n
        + config.w_cross * cross_n
    )


def rank(
    pair_ids: Sequence[str],
    primary_scores: Sequence[float],
    tie_break_scores: Sequence[float],
    epsilon: float = DEFAULT_CONFIG.epsilon,
) -> list[str]:
    """Order pair ids descending by primary + epsilon * tie_break.

    Tie-break scores must be normalized to [0, 1] so that epsilon keeps
    them strictly below any meaningful primary gap. Residual ties fall
    back to pair id ascending for determinism.
    """
    if not (len(pair_ids) == len(primary_scores) == len(tie_break_scores)):
        raise ValueError("pair_ids, primary_scores and tie_break_scores must align")
    for t in tie_break_scores:
        if not (0.0 <= t <= 1.0):
            raise ValueError(f"tie-break score {t} not normalized to [0, 1]")
    combined = [
        (primary_scores[i] + epsilon * tie_break_scores[i], pair_ids[i])
        for i in range(len(pair_ids))
    ]
    return [pid for _, pid in sorted(combined, key=lambda x: (-x[0], x[1]))]


def select_low_yes_models(
    yes_rates: Mapping[str, float], n_select: int = 4
) -> list[str]:
    """The n models with the lowest positive prediction rates, ties broken
    by model id."""
    for model, rate in yes_rates.items():
        if not (0.0 <= rate <= 1.0):
            raise ValueError(f"yes-rate for {model} out of [0, 1]: {rate}")
    if len(yes_rates) < n_select:
        raise ValueError(f"need at least {n_select} models, got {len(yes_rates)}")
    ordered = sorted(yes_rates.items(), key=lambda kv: (kv[1], kv[0]))
    return [model for model, _ in ordered[:n_select]]


@dataclass
class VerdictCollapseReport:
    """Data-quality tally produced when raw verdicts are folded to binary
    votes; unparseable verdicts count as 'no'."""

    n_votes: int = 0
    n_unparseable: int = 0
    unparseable_pairs: list[str] = field(default_factory=list)


def collapse_verdicts(
    verdicts: Mapping[str, str], model_order: Sequence[str], pair_id: str = "",
    report: VerdictCollapseReport | None = None,
) -> list[bool]:
    """Fold per-model verdict strings into the fixed-width vote vector.

    Verdicts are 'yes', 'no' or 'unparseable'; unparseable maps to no (the
    conservative reading) and is tallied in the report.
    """
    votes = []
    for model in model_order:
        verdict = verdicts.get(model, "unparseable")
        if verdict not in ("yes", "no", "unparseable"):
            raise ValueError(f"unknown verdict {verdict!r} for {model}")
        if report is not None:
            report.n_votes += 1
            if verdict == "unparseable":
                report.n_unparseable += 1
                if pair_id:
                    report.unparseable_pairs.append(pair_id)
        votes.append(verdict == "yes")
    return votes
