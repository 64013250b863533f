"""Corpus store: decision/article ingestion, abbreviation-safe chunking,
legal-reference masking, grouped splits and length statistics."""

from __future__ import annotations

import json
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

ARTICLE_NUMBER_RE = re.compile(r"^\d+(-\d+)?$")
BOOKS = ("I", "II", "III", "IV", "V")

# Abbreviations that must never end a sentence, checked against the text
# ending at a candidate boundary. Extensible via the chunker argument.
PROTECTED_ABBREVIATIONS = (
    "C. civ.",
    "C. com.",
    "C. consom.",
    "C. pr. civ.",
    "art.",
    "al.",
    "M.",
    "MM.",
)

MASK_ARTICLE = "[ARTICLE]"
MASK_DECISION = "[DECISION]"
MASK_LOI = "[LOI]"
MASK_MONTANT = "[MONTANT]"


@dataclass(frozen=True)
class Decision:
    id: str
    court_id: str
    date: str
    motivation: str


@dataclass(frozen=True)
class Article:
    number: str
    book: str
    hierarchy: tuple[tuple[str, str], ...]
    text: str

    def __post_init__(self) -> None:
        if not ARTICLE_NUMBER_RE.match(self.number):
            raise ValueError(f"malformed article number {self.number!r}")
        if self.book not in BOOKS:
            raise ValueError(f"book must be one of {BOOKS}, got {self.book!r}")
        if not self.text.strip():
            raise ValueError("article text must be non-empty")


@dataclass(frozen=True)
class Chunk:
    decision_id: str
    index: int
    text: str
    token_count: int
    char_span: tuple[int, int]
    oversize: bool = False


@dataclass(frozen=True)
class IngestError:
    line_number: int
    message: str


def count_tokens(text: str) -> int:
    """Whitespace token count; the configurable default token definition."""
    return len(text.split())


def _sentence_spans(
    text: str, protected: Sequence[str] = PROTECTED_ABBREVIATIONS
) -> list[tuple[int, int]]:
    """Sentence spans over the text.

    A boundary is a run of '.', '!' or '?' followed by whitespace and an
    uppercase letter or digit, unless the text up to the boundary ends with
    a protected abbreviation.
    """

    def is_protected(end: int) -> bool:
        tail = text[:end]
        low = tail.lower()
        for abbr in protected:
            a = abbr.lower()
            if not low.endswith(a):
                continue
            before = len(tail) - len(a) - 1
            if before < 0 or not tail[before].isalnum():
                return True
        return False

    boundaries = []
    for m in re.finditer(r"[.!?]+", text):
        end = m.end()
        rest = text[end:]
        if rest:
            if not rest[0].isspace():
                continue
            follow = rest.lstrip()
            if follow and not (follow[0].isupper() or follow[0].isdigit()):
                continue
        if is_protected(end):
            continue
        boundaries.append(end)

    spans = []
    cursor = 0
    for end in boundaries:
        start = cursor
        while start < end and text[start].isspace():
            start += 1
        if start < end:
            spans.append((start, end))
        cursor = end
    start = cursor
    while start < len(text) and text[start].isspace():
        start += 1
    tail_end = len(text.rstrip())
    if start < tail_end:
        spans.append((start, tail_end))
    return spans


def chunk_motivation(
    text: str,
    max_tokens: int = 100,
    decision_id: str = "",
    protected: Sequence[str] = PROTECTED_ABBREVIATIONS,
) -> list[Chunk]:
    """Split a motivation into chunks of at most two sentences and at most
    ``max_tokens`` whitespace tokens.

    A single sentence longer than the limit is emitted alone and flagged
    oversize. Chunk spans index into the original text, so each chunk's
    text is exactly text[start:end].
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    sentences = _sentence_spans(text, protected)
    chunks: list[Chunk] = []
    i = 0
    while i < len(sentences):
        start, end = sentences[i]
        take = 1
        if i + 1 < len(sentences):
            pair_end = sentences[i + 1][1]
            if count_tokens(text[start:pair_end]) <= max_tokens:
                end = pair_end
                take = 2
        piece = text[start:end]
        tokens = count_tokens(piece)
        chunks.append(
            Chunk(
                decision_id=decision_id,
                index=len(chunks),
                text=piece,
                token_count=tokens,
                char_span=(start, end),
                oversize=tokens > max_tokens,
            )
        )
        i += take
    return chunks


# Masking patterns, applied in order. Statute and decision references are
# replaced before article heads so their internal numbers are not split up;
# placeholders contain no digits so a second pass matches nothing.
_MASK_RULES: tuple[tuple[re.Pattern, str], ...] = (
    (
        re.compile(
            r"(?:arrêts?|jugements?|décisions?)\s+(?:rendus?\s+)?(?:du|en date du|de la)\s+"
            r"\d{1,2}(?:er)?\s+[a-zà-öø-ÿœ]+\s+\d{4}",
            re.IGNORECASE,
        ),
        MASK_DECISION,
    ),
    (re.compile(r"n°\s*RG\s*\d+\s*[/.-]\s*\d+", re.IGNORECASE), MASK_DECISION),
    (re.compile(r"pourvoi\s+n°\s*[\d.-]+", re.IGNORECASE), MASK_DECISION),
    (
        re.compile(
            r"(?:lois?|ordonnances?|décrets?)\s+n°\s*\d{2,4}-\d+"
            r"(?:\s+du\s+\d{1,2}(?:er)?\s+[a-zà-öø-ÿœ]+\s+\d{4})?",
            re.IGNORECASE,
        ),
        MASK_LOI,
    ),
    (
        re.compile(
            r"(?:articles?|art\.)\s+(?:L\.?\s*)?\d+(?:-\d+)?"
            r"(?:\s*(?:,|\bet\b|\bà\b)\s*(?:L\.?\s*)?\d+(?:-\d+)?)*",
            re.IGNORECASE,
        ),
        MASK_ARTICLE,
    ),
    (
        re.compile(
            r"(?:code\s+civil|code\s+de\s+commerce|code\s+de\s+la\s+consommation"
            r"|code\s+de\s+procédure\s+civile|C\.\s*civ\.|C\.\s*com\.|C\.\s*consom\."
            r"|C\.\s*pr\.\s*civ\.)",
            re.IGNORECASE,
        ),
        MASK_LOI,
    ),
    (
        re.compile(r"\d+(?:[\s.,  ]\d+)*\s*(?:euros?\b|EUR\b|francs?\b|€)"),
        MASK_MONTANT,
    ),
)


def mask_references(text: str) -> str:
    """Replace article mentions, code and statute names, decision citations
    and monetary amounts with placeholder tokens. Idempotent."""
    out = text
    for pattern, token in _MASK_RULES:
        out = pattern.sub(token, out)
    return out


@dataclass
class SplitAssignment:
    assignment: dict[str, str]

    def ids_for(self, split: str) -> list[str]:
        return [d for d, s in self.assignment.items() if s == split]

    def sizes(self) -> dict[str, int]:
        out = {"train": 0, "validation": 0, "test": 0}
        for s in self.assignment.values():
            out[s] += 1
        return out


def assign_splits(
    decision_ids: Sequence[str],
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> SplitAssignment:
    """Deterministically partition decision ids into train/validation/test.

    Sizes follow the ratios by largest remainder, so each split is within
    one decision of its exact share. Grouping is by decision id only.
    """
    import random

    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    ids = list(decision_ids)
    if len(ids) != len(set(ids)):
        raise ValueError("duplicate decision ids")
    if len(ids) < 3:
        raise ValueError("need at least 3 decisions to split")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n = len(ids)
    names = ("train", "validation", "test")
    floors = [int(n * r) for r in ratios]
    remainders = [n * r - f for r, f in zip(ratios, floors)]
    missing = n - sum(floors)
    for i in sorted(range(3), key=lambda i: (-remainders[i], i))[:missing]:
        floors[i] += 1
    assignment: dict[str, str] = {}
    cursor = 0
    for name, size in zip(names, floors):
        for d in ids[cursor : cursor + size]:
            assignment[d] = name
        cursor += size
    return SplitAssignment(assignment=assignment)


@dataclass(frozen=True)
class LengthStats:
    n: int
    mean: float
    median: float
    min: int
    max: int


def _length_stats(texts: Sequence[str]) -> LengthStats:
    counts = [count_tokens(t) for t in texts]
    return LengthStats(
        n=len(counts),
        mean=statistics.fmean(counts),
        median=statistics.median(counts),
        min=min(counts),
        max=max(counts),
    )


@dataclass
class CorpusStore:
    """Build-then-read store for decisions, articles and derived chunks."""

    decisions: dict[str, Decision] = field(default_factory=dict)
    articles: dict[str, Article] = field(default_factory=dict)
    chunks: list[Chunk] = field(default_factory=list)
    ingest_errors: list[IngestError] = field(default_factory=list)

    def ingest_decisions(self, stream: Iterable[str] | IO[str]) -> int:
        """Ingest line-delimited decision records; returns the number
        accepted. Malformed or duplicate records are reported per line in
        ``ingest_errors`` and skipped."""
        accepted = 0
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                self.ingest_errors.append(IngestError(line_no, f"invalid record: {exc}"))
                continue
            dec_id = rec.get("id")
            motivation = rec.get("motivation")
            if not dec_id or not isinstance(dec_id, str):
                self.ingest_errors.append(IngestError(line_no, "missing id"))
                continue
            if not motivation or not isinstance(motivation, str) or not motivation.strip():
                self.ingest_errors.append(IngestError(line_no, f"{dec_id}: missing motivation"))
                continue
            if dec_id in self.decisions:
                self.ingest_errors.append(IngestError(line_no, f"duplicate id {dec_id}"))
                continue
            self.decisions[dec_id] = Decision(
                id=dec_id,
                court_id=str(rec.get("court_id", "")),
                date=str(rec.get("date", "")),
                motivation=motivation,
            )
            accepted += 1
        return accepted

    def ingest_articles(self, stream: Iterable[str] | IO[str]) -> int:
        accepted = 0
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                article = Article(
                    number=rec["number"],
                    book=rec.get("book", "III"),
                    hierarchy=tuple((str(l), str(h)) for l, h in rec.get("hierarchy", [])),
                    text=rec["text"],
                )
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                self.ingest_errors.append(IngestError(line_no, f"invalid article: {exc}"))
                continue
            if article.number in self.articles:
                self.ingest_errors.append(
                    IngestError(line_no, f"duplicate article {article.number}")
                )
                continue
            self.articles[article.number] = article
            accepted += 1
        return accepted

    def chunk_all(self, max_tokens: int = 100) -> list[Chunk]:
        """Chunk every decision's motivation; replaces stored chunks."""
        self.chunks = []
        for dec in sorted(self.decisions.values(), key=lambda d: d.id):
            self.chunks.extend(
                chunk_motivation(dec.motivation, max_tokens=max_tokens, decision_id=dec.id)
            )
        return self.chunks


def corpus_stats(store: CorpusStore) -> dict:
    """Counts and word-length distributions for chunks and articles."""
    if not store.decisions and not store.articles:
        raise ValueError("empty store")
    report: dict = {
        "n_decisions": len(store.decisions),
        "n_articles": len(store.articles),
        "n_chunks": len(store.chunks),
    }
    if store.chunks:
        report["chunks"] = _length_stats([c.text for c in store.chunks])
    if store.articles:
        report["articles"] = _length_stats([a.text for a in store.articles.values()])
    return report


def write_chunks_jsonl(chunks: Iterable[Chunk], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in chunks:
            fh.write(
                json.dumps(
                    {
                        "decision_id": c.decision_id,
                        "index": c.index,
                        "text": c.text,
                        "token_count": c.token_count,
                        "span": list(c.char_span),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def read_chunks_jsonl(path: str | Path) -> list[Chunk]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            chunks.append(
                Chunk(
                    decision_id=rec["decision_id"],
                    index=rec["index"],
                    text=rec["text"],
                    token_count=rec["token_count"],
                    char_span=tuple(rec["span"]),
                )
            )
    return chunks


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)


def write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
