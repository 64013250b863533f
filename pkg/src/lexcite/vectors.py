"""Exact nearest-neighbor retrieval over unit-normalized embeddings with a
squared-L2 acceptance threshold."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_THRESHOLD = 0.574
NORM_TOLERANCE = 1e-6


def normalize(vector: Sequence[float]) -> np.ndarray:
    """Validate and L2-normalize a vector."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains non-finite values")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return arr / norm


@dataclass
class VectorIndex:
    """Flat exact index: every query is a full scan, so results equal a
    linear scan by construction. Immutable after build."""

    ids: tuple[str, ...]
    matrix: np.ndarray  # row-normalized, shape (n, dim)
    threshold: float = DEFAULT_THRESHOLD

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def knn(self, query: Sequence[float], k: int) -> list[tuple[str, float]]:
        """The min(k, n) nearest entries by squared L2 distance, ascending,
        ties broken by entry id ascending."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = normalize(query)
        if q.shape[0] != self.dim:
            raise ValueError(f"query dim {q.shape[0]} != index dim {self.dim}")
        dists = np.sum((self.matrix - q) ** 2, axis=1)
        order = sorted(range(len(self.ids)), key=lambda i: (dists[i], self.ids[i]))
        return [(self.ids[i], float(dists[i])) for i in order[: min(k, len(self.ids))]]


def build(
    entries: Iterable[tuple[str, Sequence[float]]],
    threshold: float = DEFAULT_THRESHOLD,
) -> VectorIndex:
    """Build an index from (id, vector) entries. Vectors are normalized on
    load; inconsistent dimensions or non-finite values are rejected."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    ids: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    for entry_id, vector in entries:
        row = normalize(vector)
        if dim is None:
            dim = row.shape[0]
        elif row.shape[0] != dim:
            raise ValueError(
                f"dimension mismatch for {entry_id}: {row.shape[0]} != {dim}"
            )
        ids.append(str(entry_id))
        rows.append(row)
    if not rows:
        raise ValueError("index requires at least one entry")
    return VectorIndex(ids=tuple(ids), matrix=np.vstack(rows), threshold=threshold)


def within_threshold(distance: float, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """Inclusive acceptance test on a squared L2 distance."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return distance <= threshold


def load_embeddings_jsonl(path: str | Path) -> list[tuple[str, np.ndarray]]:
    """Load {id, dim, vector} records; vectors are validated against the
    declared dimension and normalized."""
    out: list[tuple[str, np.ndarray]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            vec = rec["vector"]
            if len(vec) != rec["dim"]:
                raise ValueError(
                    f"{path}:{line_no}: vector length {len(vec)} != declared dim {rec['dim']}"
                )
            out.append((str(rec["id"]), normalize(vec)))
    return out


def write_embeddings_jsonl(
    entries: Iterable[tuple[str, Sequence[float]]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry_id, vector in entries:
            arr = [float(x) for x in vector]
            fh.write(
                json.dumps(
                    {"id": entry_id, "dim": len(arr), "vector": arr}, sort_keys=True
                )
                + "\n"
            )
