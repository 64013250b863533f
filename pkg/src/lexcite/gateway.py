"""The only boundary to learned models: prompt rendering, verdict parsing,
score fetching over file or HTTP transports, and a persistent cache.

Nothing in this module runs a model; scores and verdicts always arrive
through files or the wire protocol.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import httpx

ENDPOINT_ENV = "LEXCITE_SCORER_ENDPOINT"
TOKEN_ENV = "LEXCITE_SCORER_TOKEN"

KIND_LLM_VERDICT = "llm_verdict"
KIND_PROBABILITY = "probability"
KIND_EMBEDDING_DISTANCE = "embedding_distance"
KIND_CROSS_ENCODER = "cross_encoder"
SCORE_KINDS = (
    KIND_LLM_VERDICT,
    KIND_PROBABILITY,
    KIND_EMBEDDING_DISTANCE,
    KIND_CROSS_ENCODER,
)

_PAYLOAD_BLOCK = "\n\nArticle {article_number} : {article_text}\n\nExtrait de décision : {chunk_text}\n"

PROMPT_TEMPLATES: dict[str, str] = {
    "adversarial_strict": (
        "Tu es un juriste assistant spécialisé en droit français. Ta tâche consiste à "
        "déterminer si un extrait de décision judiciaire met en œuvre, applique ou reprend "
        "de manière implicite la règle de droit d'un article de loi donné, c'est-à-dire sans "
        "que le numéro ou la référence de l'article ne soit explicitement cité dans l'extrait, "
        "mais en reprenant son contenu, sa règle ou son principe. Réponds par 'OUI' ou 'NON' "
        "suivi d'une brève justification. IMPORTANT: Si tu n'es pas sûr ou qu'il y a un doute, "
        "réponds NON." + _PAYLOAD_BLOCK
    ),
    "zeroshot_binary": (
        "Tu es un expert en droit civil français. Ta tâche est de déterminer si un article du "
        "Code civil est implicitement appliqué dans un extrait de décision de justice.\n"
        "IMPORTANT:\n"
        "- Réponds UNIQUEMENT par « oui » ou « non »\n"
        "- « oui » = l'article est implicitement appliqué (le raisonnement juridique utilise "
        "cet article sans le citer)\n"
        "- « non » = l'article n'est pas appliqué (simple mention des faits, ou autre régime "
        "juridique)\n"
        "Ne donne aucune explication, juste « oui » ou « non »." + _PAYLOAD_BLOCK
    ),
    "zeroshot_reasoning": (
        "Tu es un expert en droit civil français. Ta tâche est de déterminer si un article du "
        "Code civil est implicitement appliqué dans un extrait de décision de justice.\n\n"
        "Analyse l'extrait en considérant:\n"
        "1. Le raisonnement juridique utilisé par le juge\n"
        "2. Les concepts juridiques mobilisés (même sans citation explicite)\n"
        "3. La cohérence entre l'article proposé et le raisonnement de la décision\n\n"
        "À la fin de ton analyse, conclus OBLIGATOIREMENT par une ligne contenant uniquement:\n"
        "RÉPONSE: oui\n"
        "ou\n"
        "RÉPONSE: non\n\n"
        "- « oui » = l'article est implicitement appliqué (le raisonnement juridique utilise "
        "cet article sans le citer)\n"
        "- « non » = l'article n'est pas appliqué (simple mention des faits, ou autre régime "
        "juridique par exemple)" + _PAYLOAD_BLOCK
    ),
}

TEMPLATE_PARSE_MODES = {
    "adversarial_strict": "strict",
    "zeroshot_binary": "binary",
    "zeroshot_reasoning": "reasoning",
}


def render_prompt(template_id: str, article, chunk) -> str:
    """Fill a template's slots with the article and chunk. Deterministic;
    the template text outside the slots is preserved byte for byte."""
    if template_id not in PROMPT_TEMPLATES:
        raise ValueError(f"unknown template {template_id!r}")
    if hasattr(article, "number"):
        number, text = article.number, article.text
    else:
        number, text = article
    chunk_text = chunk.text if hasattr(chunk, "text") else chunk
    if not str(text).strip() or not str(chunk_text).strip():
        raise ValueError("article and chunk must be non-empty")
    return PROMPT_TEMPLATES[template_id].format(
        article_number=number, article_text=text, chunk_text=chunk_text
    )


def _fold(text: str) -> str:
    """Casefold and strip diacritics, so RÉPONSE/reponse compare equal."""
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(c for c in decomposed if not unicodedata.combining(c)).casefold()


def _first_word(text: str) -> str:
    """First alphabetic run, skipping leading quotes, digits or brackets."""
    word = []
    for ch in text:
        if ch.isalpha():
            word.append(ch)
        elif word:
            break
    return "".join(word)


def parse_verdict(raw: str, mode: str = "binary") -> str:
    """Parse a model reply into 'yes', 'no' or 'unparseable'.

    binary and strict: the first word decides, case- and diacritic-
    insensitively; strict replies may continue with a justification.
    reasoning: the last line of the form "RÉPONSE: oui|non" decides.
    Total: never raises on any input string.
    """
    if mode not in ("binary", "strict", "reasoning"):
        raise ValueError(f"unknown parse mode {mode!r}")
    if not isinstance(raw, str):
        return "unparseable"
    if mode in ("binary", "strict"):
        word = _fold(_first_word(raw))
        if word == "oui":
            return "yes"
        if word == "non":
            return "no"
        return "unparseable"
    for line in reversed(raw.splitlines()):
        folded = _fold(line).strip()
        if folded.startswith("reponse"):
            tail = folded[len("reponse") :].lstrip(" : ")
            head = tail.split()[0] if tail.split() else ""
            head = head.strip(".«»\"'")
            if head == "oui":
                return "yes"
            if head == "non":
                return "no"
    return "unparseable"


def cache_key(
    pair_id: str, model_id: str, channel: str, template_body: str | None = None
) -> str:
    """Stable, injective key over (pair, model, verdict-template-or-kind).

    The template body is hashed in, so editing a template invalidates the
    cache even when its id is reused.
    """
    body_hash = (
        hashlib.sha256(template_body.encode("utf-8")).hexdigest() if template_body else ""
    )
    material = "\x1f".join([pair_id, model_id, channel, body_hash])
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Verdict:
    """A parsed model reply for one pair; parsed is a pure function of the
    raw text and the template's parse mode."""

    pair_id: str
    model_id: str
    raw: str
    parsed: str  # yes | no | unparseable


def to_verdict(record: "ScoreRecord", mode: str) -> Verdict:
    return Verdict(
        pair_id=record.pair_id,
        model_id=record.model_id,
        raw=str(record.value),
        parsed=parse_verdict(str(record.value), mode=mode),
    )


@dataclass(frozen=True)
class ScoreRequest:
    pair_id: str
    model_id: str
    kind: str
    payload: dict | None = None

    def key(self) -> str:
        template_body = None
        channel = self.kind
        if self.payload:
            channel = self.payload.get("template_id", self.kind)
            template_body = self.payload.get("prompt")
        return cache_key(self.pair_id, self.model_id, channel, template_body)


@dataclass(frozen=True)
class ScoreRecord:
    pair_id: str
    model_id: str
    kind: str
    value: object

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "model_id": self.model_id,
            "kind": self.kind,
            "value": self.value,
        }


@dataclass(frozen=True)
class FetchFailure:
    pair_id: str
    model_id: str
    kind: str
    reason: str


class ScoreCache:
    """Append-only jsonl cache with concurrent reads and serialized writes."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, ScoreRecord] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._records[rec["key"]] = ScoreRecord(
                        rec["pair_id"], rec["model_id"], rec["kind"], rec["value"]
                    )

    def __len__(self) -> int:
        return len(self._records)

    def get(self, key: str) -> ScoreRecord | None:
        return self._records.get(key)

    def put(self, key: str, record: ScoreRecord) -> None:
        with self._lock:
            self._records[key] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": key, **record.to_dict()}, sort_keys=True) + "\n")


class FileTransport:
    """Reference transport: resolves requests against a scores.jsonl file
    of {pair_id, model_id, kind, value} records."""

    def __init__(self, source: str | Path | Iterable[dict]):
        if isinstance(source, (str, Path)):
            records = []
            with open(source, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        records.append(json.loads(line))
        else:
            records = list(source)
        self._table = {
            (r["pair_id"], r["model_id"], r["kind"]): r["value"] for r in records
        }

    def resolve(self, request: ScoreRequest) -> ScoreRecord | FetchFailure:
        key = (request.pair_id, request.model_id, request.kind)
        if key not in self._table:
            return FetchFailure(
                request.pair_id, request.model_id, request.kind, "missing record"
            )
        return ScoreRecord(request.pair_id, request.model_id, request.kind, self._table[key])


class HttpTransport:
    """Live transport speaking the scorer wire protocol:

    POST /v1/embed   {texts: [...]}            -> {dim, vectors: [[...]]}
    POST /v1/verdict {model_id, prompt}        -> {text}
    POST /v1/rerank  {pairs: [{a, b}]}         -> {scores: [...]}

    Transient failures retry with exponential backoff up to max_attempts,
    then resolve to a typed failure.
    """

    def __init__(
        self,
        endpoint: str,
        token: str | None = None,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = client or httpx.Client(headers=headers, timeout=timeout)

    @classmethod
    def from_env(cls, **kwargs) -> "HttpTransport":
        endpoint = os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise RuntimeError(f"{ENDPOINT_ENV} is not set")
        return cls(endpoint, token=os.environ.get(TOKEN_ENV), **kwargs)

    def _post(self, route: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                response = self._client.post(f"{self.endpoint}{route}", json=payload)
                if response.status_code >= 500:
                    raise httpx.HTTPStatusError(
                        f"server error {response.status_code}",
                        request=response.request,
                        response=response,
                    )
                response.raise_for_status()
                return response.json()
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff * (2**attempt))
        raise last_error  # type: ignore[misc]

    def resolve(self, request: ScoreRequest) -> ScoreRecord | FetchFailure:
        payload = request.payload or {}
        try:
            if request.kind == KIND_LLM_VERDICT:
                body = self._post(
                    "/v1/verdict",
                    {"model_id": request.model_id, "prompt": payload["prompt"]},
                )
                value: object = body["text"]
            elif request.kind == KIND_CROSS_ENCODER:
                body = self._post("/v1/rerank", {"pairs": [payload["pair"]]})
                value = float(body["scores"][0])
            elif request.kind in (KIND_PROBABILITY, KIND_EMBEDDING_DISTANCE):
                return FetchFailure(
                    request.pair_id,
                    request.model_id,
                    request.kind,
                    f"kind {request.kind} is file-delivered only",
                )
            else:
                body = self._post("/v1/embed", {"texts": [payload["text"]]})
                value = body["vectors"][0]
        except KeyError as exc:
            return FetchFailure(
                request.pair_id, request.model_id, request.kind, f"missing payload field {exc}"
            )
        except Exception as exc:  # typed failure after exhausted retries
            return FetchFailure(request.pair_id, request.model_id, request.kind, str(exc))
        return ScoreRecord(request.pair_id, request.model_id, request.kind, value)


def fetch(
    requests: Sequence[ScoreRequest],
    transport,
    cache: ScoreCache | None = None,
) -> tuple[list[ScoreRecord], list[FetchFailure]]:
    """Resolve every request to a record or a typed failure.

    The cache is consulted before the transport and populated afterwards;
    fully cached batches make zero transport calls.
    """
    records: list[ScoreRecord] = []
    failures: list[FetchFailure] = []
    for request in requests:
        key = request.key()
        if cache is not None:
            hit = cache.get(key)
            if hit is not None:
                records.append(hit)
                continue
        resolved = transport.resolve(request)
        if isinstance(resolved, FetchFailure):
            failures.append(resolved)
            continue
        if cache is not None:
            cache.put(key, resolved)
        records.append(resolved)
    return records, failures


def load_scores_jsonl(path: str | Path) -> list[ScoreRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            records.append(
                ScoreRecord(rec["pair_id"], rec["model_id"], rec["kind"], rec["value"])
            )
    return records


def write_scores_jsonl(records: Iterable[ScoreRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
