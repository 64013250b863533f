"""Candidate pair production: explicit training pairs, evaluation-only
negatives, the implicit candidate pool, and adversarial filtering with a
resumable verdict checkpoint."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .citations import (
    CIVIL,
    CitationMention,
    RenumberingTable,
    has_explicit_keywords,
    is_cited_in_decision,
)
from .corpus import Article, Chunk
from .lexical import LexicalModel, tfidf_cosine
from .vectors import VectorIndex, within_threshold

PROVENANCE_EXPLICIT = "explicit"
PROVENANCE_IMPLICIT = "implicit_candidate"
PROVENANCE_FILTERED = "filtered_positive"

EXPLICIT_MIN_SIMILARITY = 0.15
NEGATIVE_MAX_SIMILARITY = 0.05


def pair_id(decision_id: str, chunk_index: int, article_number: str) -> str:
    """Stable pair identifier, identical across runs and machines."""
    material = "\x1f".join([decision_id, str(chunk_index), article_number])
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CandidatePair:
    pair_id: str
    decision_id: str
    chunk_index: int
    article_number: str
    provenance: str
    distance: float | None = None

    @classmethod
    def make(
        cls,
        decision_id: str,
        chunk_index: int,
        article_number: str,
        provenance: str,
        distance: float | None = None,
    ) -> "CandidatePair":
        return cls(
            pair_id=pair_id(decision_id, chunk_index, article_number),
            decision_id=decision_id,
            chunk_index=chunk_index,
            article_number=article_number,
            provenance=provenance,
            distance=distance,
        )

    def to_dict(self) -> dict:
        rec = {
            "pair_id": self.pair_id,
            "decision_id": self.decision_id,
            "chunk_index": self.chunk_index,
            "article_number": self.article_number,
            "provenance": self.provenance,
        }
        if self.distance is not None:
            rec["distance"] = self.distance
        return rec


def extract_explicit_pairs(
    chunks: Sequence[Chunk],
    mentions_by_chunk: Mapping[tuple[str, int], Sequence[CitationMention]],
    articles: Mapping[str, Article],
    lexical_model: LexicalModel,
    min_similarity: float = EXPLICIT_MIN_SIMILARITY,
) -> list[CandidatePair]:
    """One pair per (chunk, cited civil-code article) whose tf-idf cosine
    clears the floor; accidental lexical overlaps below it are dropped."""
    pairs: list[CandidatePair] = []
    for chunk in chunks:
        mentions = mentions_by_chunk.get((chunk.decision_id, chunk.index), ())
        cited: list[str] = []
        for m in mentions:
            if m.code != CIVIL:
                continue
            for number in m.articles:
                if number in articles and number not in cited:
                    cited.append(number)
        for number in cited:
            similarity = tfidf_cosine(lexical_model, chunk.text, articles[number].text)
            if similarity >= min_similarity:
                pairs.append(
                    CandidatePair.make(
                        chunk.decision_id, chunk.index, number, PROVENANCE_EXPLICIT
                    )
                )
    return pairs


def sample_negative(
    chunk: Chunk,
    articles: Mapping[str, Article],
    lexical_model: LexicalModel,
    rng: random.Random,
    max_similarity: float = NEGATIVE_MAX_SIMILARITY,
) -> Article:
    """Uniformly sample an article nearly unrelated to the chunk
    (tf-idf cosine below the ceiling). Evaluation-only counterparts."""
    eligible = [
        number
        for number in sorted(articles)
        if tfidf_cosine(lexical_model, chunk.text, articles[number].text) < max_similarity
    ]
    if not eligible:
        raise ValueError("no article below the negative-similarity ceiling")
    return articles[rng.choice(eligible)]


def generate_implicit_candidates(
    chunks: Sequence[Chunk],
    chunk_vectors: Mapping[tuple[str, int], Sequence[float]],
    index: VectorIndex,
    mentions_by_decision: Mapping[str, Sequence[CitationMention]],
    table: RenumberingTable,
    k: int = 5,
    prune_by_threshold: bool = True,
) -> list[CandidatePair]:
    """Implicit-candidate pool from nearest-neighbor retrieval.

    A chunk contributes nothing when its raw text carries explicit
    citation keywords. Retrieved articles are dropped when cited in the
    decision under any equivalent number, and (by default) when beyond
    the index's distance threshold. At most k pairs per chunk.
    """
    out: list[CandidatePair] = []
    for chunk in chunks:
        if has_explicit_keywords(chunk.text):
            continue
        key = (chunk.decision_id, chunk.index)
        if key not in chunk_vectors:
            continue
        mentions = mentions_by_decision.get(chunk.decision_id, ())
        for article_number, distance in index.knn(chunk_vectors[key], k):
            if prune_by_threshold and not within_threshold(distance, index.threshold):
                continue
            if is_cited_in_decision(article_number, mentions, table):
                continue
            out.append(
                CandidatePair.make(
                    chunk.decision_id,
                    chunk.index,
                    article_number,
                    PROVENANCE_IMPLICIT,
                    distance=distance,
                )
            )
    return out


@dataclass
class FilterOutcome:
    positives: list[CandidatePair] = field(default_factory=list)
    rejected: list[str] = field(default_factory=list)
    unparseable: list[str] = field(default_factory=list)

    def rejects_report(self) -> dict:
        return {"rejected": sorted(self.rejected), "unparseable": sorted(self.unparseable)}


class VerdictCheckpoint:
    """Verdicts persist as they arrive so an interrupted filtering run
    resumes where it stopped instead of re-asking the provider."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self.verdicts: dict[str, str] = {}
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self.verdicts[rec["pair_id"]] = rec["verdict"]

    def record(self, pid: str, verdict: str) -> None:
        self.verdicts[pid] = verdict
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"pair_id": pid, "verdict": verdict}, sort_keys=True) + "\n")


def adversarial_filter(
    pairs: Sequence[CandidatePair],
    verdict_provider: Callable[[CandidatePair], str],
    checkpoint_path: str | Path | None = None,
) -> FilterOutcome:
    """Keep only pairs the filtering model judges positive.

    The provider returns 'yes', 'no' or 'unparseable' per pair (raising on
    hard failure, which halts the run with the checkpoint intact).
    Unparseable pairs land in the rejects report, never silently dropped.
    """
    checkpoint = VerdictCheckpoint(checkpoint_path)
    outcome = FilterOutcome()
    for pair in pairs:
        verdict = checkpoint.verdicts.get(pair.pair_id)
        if verdict is None:
            verdict = verdict_provider(pair)
            if verdict not in ("yes", "no", "unparseable"):
                raise ValueError(f"provider returned invalid verdict {verdict!r}")
            checkpoint.record(pair.pair_id, verdict)
        if verdict == "yes":
            outcome.positives.append(replace(pair, provenance=PROVENANCE_FILTERED))
        elif verdict == "no":
            outcome.rejected.append(pair.pair_id)
        else:
            outcome.unparseable.append(pair.pair_id)
    return outcome


def write_candidates_jsonl(pairs: Iterable[CandidatePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def read_candidates_jsonl(path: str | Path) -> list[CandidatePair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(
                CandidatePair(
                    pair_id=rec["pair_id"],
                    decision_id=rec["decision_id"],
                    chunk_index=rec["chunk_index"],
                    article_number=rec["article_number"],
                    provenance=rec["provenance"],
                    distance=rec.get("distance"),
                )
            )
    return out
