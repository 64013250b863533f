"""HTTP service for the annotation campaign: ranked candidate review,
label submission over an append-only log, adjudication queue and live
agreement statistics.

Every response is a projection of library calls; the service computes no
statistics of its own.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .corpus import Article
from .reports import PairAnnotations, agreement_report
from .stats import DEFERRED_LABELS, LABEL_VOCABULARY, collapse_label

DEFAULT_ANNOTATORS = {"a1": "A1", "a2": "A2", "adjudicator": "A3"}


@dataclass
class LabelRecord:
    pair_id: str
    annotator_id: str
    label: str
    ts: str

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "annotator_id": self.annotator_id,
            "label": self.label,
            "ts": self.ts,
        }


@dataclass
class PairEntry:
    pair_id: str
    decision_id: str
    chunk_index: int
    article_number: str
    chunk_text: str
    chunk_span: tuple[int, int]


class CampaignStore:
    """Owns pairs, decision/article texts, rankings and the label log.

    Labels append to a single-writer log; the latest record per
    (pair, annotator) wins. Replaying the log reconstructs the state.
    """

    def __init__(
        self,
        pairs: Iterable[PairEntry],
        decisions: dict[str, str],
        articles: dict[str, Article],
        rankings: dict[str, float] | None = None,
        label_log_path: str | Path | None = None,
        annotators: dict[str, str] = DEFAULT_ANNOTATORS,
    ):
        self.pairs = {p.pair_id: p for p in pairs}
        self.decisions = decisions
        self.articles = articles
        self.rankings = rankings
        self.annotators = dict(annotators)
        self.label_log_path = Path(label_log_path) if label_log_path else None
        self._labels: dict[str, dict[str, LabelRecord]] = {}
        self._write_lock = threading.Lock()
        if self.label_log_path and self.label_log_path.exists():
            with open(self.label_log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._apply(LabelRecord(**rec))

    def _apply(self, record: LabelRecord) -> None:
        self._labels.setdefault(record.pair_id, {})[record.annotator_id] = record

    def submit_label(self, pair_id: str, annotator_id: str, label: str) -> LabelRecord:
        if pair_id not in self.pairs:
            raise KeyError(pair_id)
        if label not in LABEL_VOCABULARY:
            raise ValueError(f"label {label!r} not in vocabulary")
        record = LabelRecord(
            pair_id=pair_id,
            annotator_id=annotator_id,
            label=label,
            ts=datetime.now(timezone.utc).isoformat(),
        )
        with self._write_lock:
            self._apply(record)
            if self.label_log_path:
                self.label_log_path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.label_log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        return record

    def labels_for(self, pair_id: str) -> dict[str, str]:
        return {a: r.label for a, r in self._labels.get(pair_id, {}).items()}

    def snapshot(self, path: str | Path) -> None:
        """Write the current latest-per-annotator label state."""
        state = {
            pid: {a: r.to_dict() for a, r in per.items()}
            for pid, per in sorted(self._labels.items())
        }
        Path(path).write_text(json.dumps(state, indent=2, sort_keys=True))

    # ------------------------------------------------------------ queries

    def _usable_label(self, pair_id: str, annotator: str) -> str | None:
        label = self.labels_for(pair_id).get(annotator)
        if label is None or label in DEFERRED_LABELS:
            return None
        return label

    def agreement_status(self, pair_id: str) -> str | None:
        l1 = self._usable_label(pair_id, self.annotators["a1"])
        l2 = self._usable_label(pair_id, self.annotators["a2"])
        if l1 is None or l2 is None:
            return None
        return "agree" if collapse_label(l1) == collapse_label(l2) else "disagree"

    def adjudication_queue(self) -> list[str]:
        """Pairs whose primary annotators disagree and that carry no usable
        adjudication yet, in stable pair order."""
        queue = []
        for pid in sorted(self.pairs):
            if self.agreement_status(pid) != "disagree":
                continue
            if self._usable_label(pid, self.annotators["adjudicator"]) is not None:
                continue
            queue.append(pid)
        return queue

    def annotator_queue(self, annotator_id: str) -> list[str]:
        """Pairs the annotator has not labeled yet or flagged for review,
        in ranking order when rankings are loaded."""
        pending = [
            pid for pid in self.pairs if self._usable_label(pid, annotator_id) is None
        ]
        return self._ranked(pending)

    def _ranked(self, pair_ids: list[str]) -> list[str]:
        if self.rankings is None:
            return sorted(pair_ids)
        return sorted(pair_ids, key=lambda p: (-self.rankings.get(p, 0.0), p))

    def candidates_for_article(self, number: str) -> list[str]:
        if number not in self.articles:
            raise KeyError(number)
        if self.rankings is None:
            raise RuntimeError("no rankings loaded")
        members = [p.pair_id for p in self.pairs.values() if p.article_number == number]
        return self._ranked(members)

    def pair_view(self, pair_id: str) -> dict:
        pair = self.pairs[pair_id]
        article = self.articles.get(pair.article_number)
        return {
            "pair_id": pair.pair_id,
            "article": {
                "number": pair.article_number,
                "book": article.book if article else None,
                "hierarchy": list(article.hierarchy) if article else [],
                "text": article.text if article else "",
            },
            "chunk_text": pair.chunk_text,
            "decision_id": pair.decision_id,
            "decision_text": self.decisions.get(pair.decision_id, ""),
            "highlight_span": list(pair.chunk_span),
            "labels": self.labels_for(pair_id),
            "agreement": self.agreement_status(pair_id),
            "score": self.rankings.get(pair_id) if self.rankings else None,
        }

    def stats_agreement(self) -> dict:
        annotations = []
        for pid in sorted(self.pairs):
            labels = self.labels_for(pid)
            annotations.append(
                PairAnnotations(
                    pair_id=pid,
                    a1=labels.get(self.annotators["a1"]),
                    a2=labels.get(self.annotators["a2"]),
                    a3=labels.get(self.annotators["adjudicator"]),
                )
            )
        report = agreement_report(annotations)
        report["annotators"] = self.annotators
        return report


class LabelSubmission(BaseModel):
    annotator_id: str
    label: str


def create_app(store: CampaignStore) -> FastAPI:
    app = FastAPI(title="lexcite annotation service")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "pairs": len(store.pairs)}

    @app.get("/articles/{number}/candidates")
    def article_candidates(number: str, k: int = 20, cursor: int = 0) -> dict:
        try:
            ranked = store.candidates_for_article(number)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown article {number}")
        except RuntimeError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        k = max(0, k)
        window = ranked[cursor : cursor + k]
        return {
            "article_number": number,
            "total": len(ranked),
            "cursor": cursor,
            "next_cursor": cursor + len(window) if cursor + len(window) < len(ranked) else None,
            "items": [store.pair_view(pid) for pid in window],
        }

    @app.get("/pairs/{pair_id}")
    def pair_detail(pair_id: str) -> dict:
        if pair_id not in store.pairs:
            raise HTTPException(status_code=404, detail=f"unknown pair {pair_id}")
        return store.pair_view(pair_id)

    @app.post("/pairs/{pair_id}/labels")
    def submit_label(pair_id: str, submission: LabelSubmission) -> dict:
        try:
            record = store.submit_label(pair_id, submission.annotator_id, submission.label)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown pair {pair_id}")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return record.to_dict()

    @app.get("/queues/adjudication")
    def adjudication_queue(k: int | None = None, cursor: int = 0) -> dict:
        queue = store.adjudication_queue()
        window = queue[cursor : cursor + k] if k is not None else queue[cursor:]
        return {
            "total": len(queue),
            "cursor": cursor,
            "items": [store.pair_view(pid) for pid in window],
        }

    @app.get("/queues/annotator/{annotator_id}")
    def annotator_queue(annotator_id: str, k: int = 50, cursor: int = 0) -> dict:
        queue = store.annotator_queue(annotator_id)
        window = queue[cursor : cursor + k]
        return {
            "total": len(queue),
            "cursor": cursor,
            "items": [store.pair_view(pid) for pid in window],
        }

    @app.get("/stats/agreement")
    def stats_agreement() -> dict:
        return store.stats_agreement()

    return app


def load_campaign(
    pairs_path: str | Path,
    decisions_path: str | Path,
    articles_path: str | Path,
    rankings_path: str | Path | None = None,
    label_log_path: str | Path | None = None,
    annotators: dict[str, str] = DEFAULT_ANNOTATORS,
) -> CampaignStore:
    """Assemble a campaign store from the pipeline's file formats."""
    pairs = []
    with open(pairs_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            pairs.append(
                PairEntry(
                    pair_id=rec["pair_id"],
                    decision_id=rec["decision_id"],
                    chunk_index=rec["chunk_index"],
                    article_number=rec["article_number"],
                    chunk_text=rec.get("chunk_text", ""),
                    chunk_span=tuple(rec.get("chunk_span", (0, 0))),
                )
            )
    decisions = {}
    with open(decisions_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                decisions[rec["id"]] = rec["motivation"]
    articles = {}
    with open(articles_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                articles[rec["number"]] = Article(
                    number=rec["number"],
                    book=rec.get("book", "III"),
                    hierarchy=tuple((str(l), str(h)) for l, h in rec.get("hierarchy", [])),
                    text=rec["text"],
                )
    rankings = None
    if rankings_path is not None:
        rankings = {}
        with open(rankings_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    rankings[rec["pair_id"]] = rec["score"]
    return CampaignStore(
        pairs=pairs,
        decisions=decisions,
        articles=articles,
        rankings=rankings,
        label_log_path=label_log_path,
        annotators=annotators,
    )
