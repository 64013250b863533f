"""TF-IDF and BM25 similarity between chunks and articles, plus the
min-max normalization used by score fusion."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

# Lowercase, strip punctuation, keep digits and dashed compounds so article
# numbers like "1352-9" survive as single tokens. No stemming.
_TOKEN_RE = re.compile(r"[0-9a-zà-öø-ÿœ]+(?:-[0-9a-zà-öø-ÿœ]+)*")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class LexicalModel:
    """Document-frequency table with BM25 parameters, fitted once over a
    corpus and immutable afterwards."""

    df: dict[str, int]
    n_docs: int
    avg_doc_len: float
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise ValueError("model requires at least one document")
        if self.k1 <= 0 or not (0.0 <= self.b <= 1.0):
            raise ValueError("require k1 > 0 and 0 <= b <= 1")
        bad = [t for t, c in self.df.items() if c > self.n_docs]
        if bad:
            raise ValueError(f"document frequency exceeds corpus size for {bad[:3]}")

    def idf(self, term: str) -> float:
        """Smoothed tf-idf weight, strictly positive for every term."""
        return math.log((1 + self.n_docs) / (1 + self.df.get(term, 0))) + 1.0

    def bm25_idf(self, term: str) -> float:
        """Okapi idf with the +1 shift that keeps weights non-negative."""
        n_t = self.df.get(term, 0)
        return math.log(1 + (self.n_docs - n_t + 0.5) / (n_t + 0.5))

    def dump(self, path: str | Path) -> None:
        payload = {
            "n_docs": self.n_docs,
            "avg_doc_len": self.avg_doc_len,
            "k1": self.k1,
            "b": self.b,
            "df": dict(sorted(self.df.items())),
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "LexicalModel":
        payload = json.loads(Path(path).read_text())
        return cls(
            df=dict(payload["df"]),
            n_docs=payload["n_docs"],
            avg_doc_len=payload["avg_doc_len"],
            k1=payload["k1"],
            b=payload["b"],
        )


def fit(corpus: Iterable[str], k1: float = 1.5, b: float = 0.75) -> LexicalModel:
    """Fit document frequencies over a corpus. Order-insensitive."""
    df: Counter[str] = Counter()
    n_docs = 0
    total_len = 0
    for doc in corpus:
        tokens = tokenize(doc)
        n_docs += 1
        total_len += len(tokens)
        df.update(set(tokens))
    if n_docs == 0:
        raise ValueError("empty corpus")
    return LexicalModel(df=dict(df), n_docs=n_docs, avg_doc_len=total_len / n_docs, k1=k1, b=b)


def _tfidf_vector(model: LexicalModel, text: str) -> dict[str, float]:
    counts = Counter(tokenize(text))
    return {t: tf * model.idf(t) for t, tf in counts.items()}


def tfidf_cosine(model: LexicalModel, a: str, b: str) -> float:
    """Cosine similarity of smoothed tf-idf vectors; symmetric, in [0, 1]."""
    va, vb = _tfidf_vector(model, a), _tfidf_vector(model, b)
    if not va or not vb:
        return 0.0
    dot = sum(w * vb[t] for t, w in va.items() if t in vb)
    norm_a = math.sqrt(sum(w * w for w in va.values()))
    norm_b = math.sqrt(sum(w * w for w in vb.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return min(1.0, dot / (norm_a * norm_b))


def bm25(model: LexicalModel, query: str, doc: str) -> float:
    """Okapi BM25 score of doc for query; 0 when no query term occurs."""
    doc_tokens = tokenize(doc)
    tf = Counter(doc_tokens)
    dl = len(doc_tokens)
    norm = model.k1 * (1 - model.b + model.b * dl / model.avg_doc_len) if model.avg_doc_len > 0 else model.k1
    score = 0.0
    for term in tokenize(query):
        f = tf.get(term, 0)
        if f == 0:
            continue
        score += model.bm25_idf(term) * f * (model.k1 + 1) / (f + norm)
    return score


def minmax_normalize(scores: Sequence[float]) -> list[float]:
    """Map scores onto [0, 1] with min -> 0 and max -> 1.

    Degenerate inputs (constant or singleton lists) map to 0.5 everywhere,
    which is order-neutral and avoids a zero division.
    """
    if len(scores) == 0:
        raise ValueError("empty score list")
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return [0.5] * len(scores)
    span = hi - lo
    return [(s - lo) / span for s in scores]
