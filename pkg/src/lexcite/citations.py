"""Explicit statutory citation extraction for French legal text: article
ranges, coordinated enumerations, abbreviated code names, and resolution
of the 2016 contract-law renumbering."""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

CIVIL = "civil"
COMMERCIAL = "commercial"
CONSOMMATION = "consommation"
PROCEDURE_CIVILE = "procedure_civile"

ARTICLE_NUMBER_RE = re.compile(r"^\d+(-\d+)?$")

# Head of a citation, then a blob of numbers joined by commas, "et" or a
# range "à", then optionally the code the articles belong to.
_HEAD_RE = r"(?:articles?|art\.)"
_NUM = r"(?:L\.?\s*)?\d+(?:-\d+)?"
_BLOB = rf"{_NUM}(?:\s*(?:,|\bet\b|\bà\b)\s*{_NUM})*"
_CODE = (
    r"(?:du|de\s+la|des|au)\s+(?:même\s+code|code\s+(?:de\s+la\s+|de\s+|du\s+)?[a-zà-öø-ÿœ]+"
    r"(?:\s+[a-zà-öø-ÿœ]+)?)"
    r"|C\.\s*civ\.|C\.\s*com\.|C\.\s*consom\.|C\.\s*pr\.\s*civ\.|CPC\b"
)
_MENTION_RE = re.compile(
    rf"\b({_HEAD_RE})\s+({_BLOB})(\s*(?:{_CODE}))?", re.IGNORECASE
)
_BLOB_TOKEN_RE = re.compile(r"\d+(?:-\d+)?|à|et|,", re.IGNORECASE)

_CODE_ALIASES = {
    "code civil": CIVIL,
    "c. civ.": CIVIL,
    "code de commerce": COMMERCIAL,
    "c. com.": COMMERCIAL,
    "code de la consommation": CONSOMMATION,
    "c. consom.": CONSOMMATION,
    "code de procédure civile": PROCEDURE_CIVILE,
    "c. pr. civ.": PROCEDURE_CIVILE,
    "cpc": PROCEDURE_CIVILE,
}

DEFAULT_KEYWORDS = ("article", "loi", "code")


class RangeExpansionError(ValueError):
    """A range of article numbers that cannot be enumerated."""


@dataclass(frozen=True)
class CitationMention:
    """One explicit citation: the code cited, the expanded article numbers
    and the character span of the mention in the source text."""

    code: str
    articles: tuple[str, ...]
    span: tuple[int, int]


def _normalize_code(raw: str | None, default_code: str) -> str:
    if raw is None:
        return default_code
    cleaned = re.sub(r"\s+", " ", raw.strip().lower())
    cleaned = re.sub(r"^(?:du|de la|des|au)\s+", "", cleaned)
    if cleaned == "même code":
        return default_code
    cleaned = re.sub(r"^c\.\s*", "c. ", cleaned)
    if cleaned in _CODE_ALIASES:
        return _CODE_ALIASES[cleaned]
    if cleaned.startswith("code"):
        name = re.sub(r"^code\s+(?:de la |de |du )?", "", cleaned).strip()
        return f"other:{name}" if name else "other:inconnu"
    return f"other:{cleaned}"


def _split_number(number: str) -> tuple[int, int | None]:
    base, _, suffix = number.partition("-")
    return int(base), int(suffix) if suffix else None


def expand_range(start: str, end: str) -> list[str]:
    """Enumerate the article numbers between two endpoints.

    Same-base endpoints walk the dash suffix (the bare base counts as
    suffix zero); plain integers walk the base. Ranges mixing suffixes
    across different bases have no defined enumeration and are rejected.
    """
    sb, ss = _split_number(start)
    eb, es = _split_number(end)
    if ss is None and es is None:
        if eb < sb:
            raise RangeExpansionError(f"descending range {start} à {end}")
        return [str(n) for n in range(sb, eb + 1)]
    if sb == eb:
        lo = 0 if ss is None else ss
        hi = 0 if es is None else es
        if hi < lo:
            raise RangeExpansionError(f"descending range {start} à {end}")
        return [str(sb) if s == 0 else f"{sb}-{s}" for s in range(lo, hi + 1)]
    raise RangeExpansionError(f"range {start} à {end} mixes suffixes across bases")


def _parse_blob(blob: str) -> list[str]:
    tokens = _BLOB_TOKEN_RE.findall(blob)
    numbers: list[str] = []
    pending_range = False
    for tok in tokens:
        low = tok.lower()
        if low in (",", "et"):
            continue
        if low == "à":
            pending_range = True
            continue
        number = re.sub(r"^L\.?\s*", "", tok)
        if pending_range:
            pending_range = False
            if not numbers:
                logger.warning("range with no left endpoint near %r", blob)
                continue
            try:
                numbers[-1:] = expand_range(numbers[-1], number)
            except RangeExpansionError as exc:
                logger.warning("unparseable range dropped: %s", exc)
                numbers.pop()
        else:
            numbers.append(number)
    # drop anything that is not a well-formed article number (e.g. L-codes)
    return [n for n in numbers if ARTICLE_NUMBER_RE.match(n)]


def extract_citations(text: str, default_code: str = CIVIL) -> list[CitationMention]:
    """Extract explicit article citations in document order.

    Ranges are expanded to every number they cover, enumerations are
    flattened, and abbreviated code names are resolved. A mention with no
    trailing code is attributed to ``default_code``.
    """
    mentions: list[CitationMention] = []
    for m in _MENTION_RE.finditer(text):
        articles = _parse_blob(m.group(2))
        if not articles:
            continue
        code = _normalize_code(m.group(3), default_code)
        mentions.append(
            CitationMention(code=code, articles=tuple(articles), span=m.span())
        )
    return mentions


def has_explicit_keywords(text: str, keywords: Sequence[str] = DEFAULT_KEYWORDS) -> bool:
    """True iff the text contains any keyword (case-insensitive, word
    boundaries, singular or plural)."""
    for kw in keywords:
        if re.search(rf"\b{re.escape(kw)}s?\b", text, re.IGNORECASE):
            return True
    return False


class RenumberingTable:
    """Bidirectional old/new article-number equivalence table.

    The mapping must be one-to-one in each direction and no number may
    appear on both sides, so every number has at most one counterpart.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        old_to_new: dict[str, str] = {}
        new_to_old: dict[str, str] = {}
        for old, new in pairs:
            for n in (old, new):
                if not ARTICLE_NUMBER_RE.match(n):
                    raise ValueError(f"malformed article number {n!r}")
            if old in old_to_new or new in new_to_old:
                raise ValueError(f"duplicate mapping for {old} -> {new}")
            old_to_new[old] = new
            new_to_old[new] = old
        both_sides = set(old_to_new) & set(new_to_old)
        if both_sides:
            raise ValueError(f"numbers on both sides of the table: {sorted(both_sides)}")
        self._old_to_new = old_to_new
        self._new_to_old = new_to_old

    def __len__(self) -> int:
        return len(self._old_to_new)

    def counterpart(self, number: str) -> str | None:
        return self._old_to_new.get(number) or self._new_to_old.get(number)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self._old_to_new.items())

    @classmethod
    def from_csv(cls, path: str | Path) -> "RenumberingTable":
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for row in csv.reader(line for line in fh if not line.startswith("#")):
                if not row:
                    continue
                if len(row) != 2:
                    raise ValueError(f"expected old,new per line, got {row!r}")
                pairs.append((row[0].strip(), row[1].strip()))
        return cls(pairs)

    @classmethod
    def bundled(cls) -> "RenumberingTable":
        """The table shipped with the package."""
        ref = resources.files("lexcite.data").joinpath("renumbering.csv")
        with resources.as_file(ref) as path:
            return cls.from_csv(path)


def resolve_renumbering(number: str, table: RenumberingTable) -> frozenset[str]:
    """Equivalence set of an article number: itself plus its renumbering
    counterpart when one exists."""
    if not ARTICLE_NUMBER_RE.match(number):
        raise ValueError(f"malformed article number {number!r}")
    counterpart = table.counterpart(number)
    return frozenset({number, counterpart}) if counterpart else frozenset({number})


def is_cited_in_decision(
    article_number: str,
    decision_mentions: Iterable[CitationMention],
    table: RenumberingTable,
) -> bool:
    """True iff the article, under any equivalent number, appears among the
    decision's civil-code mentions. Mentions of other codes never count."""
    equivalents = resolve_renumbering(article_number, table)
    for mention in decision_mentions:
        if mention.code != CIVIL:
            continue
        if equivalents.intersection(mention.articles):
            return True
    return False
