"""Deduplicated exemplar store with a query-to-exemplar map and similarity scans.

The query index is an exact scan over a dense matrix. At desk scale this is
fast enough, and it is the reference any approximate index must reproduce.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Exemplar, as_embedding
from .embedding import EmbeddingProvider, embed_exemplar
from .errors import (BuildError, InvalidArgumentError, LibraryFormatError, LibraryNotFoundError,
                     MetaSynthError, NotFoundError)

log = logging.getLogger(__name__)

FORMAT = "metasynth-lib/1"


class _Matrix:
    """Append-only row matrix with amortized O(1) growth."""

    def __init__(self, dimension: int):
        self._buf = np.zeros((16, dimension))
        self.n = 0

    def append(self, row: np.ndarray) -> None:
        if self.n == self._buf.shape[0]:
            grown = np.zeros((self._buf.shape[0] * 2, self._buf.shape[1]))
            grown[:self.n] = self._buf[:self.n]
            self._buf = grown
        self._buf[self.n] = row
        self.n += 1

    @property
    def view(self) -> np.ndarray:
        return self._buf[:self.n]


@dataclass
class AddResult:
    added: bool
    exemplar_id: int
    similarity: float | None = None


@dataclass
class BuildReport:
    fetched: int = 0
    duplicates: int = 0
    stored: int = 0
    skipped: dict[str, str] = field(default_factory=dict)


class ExemplarLibrary:
    def __init__(self, embedder: EmbeddingProvider, epsilon_dup: float = 0.95):
        if not 0.0 < epsilon_dup < 1.0:
            raise InvalidArgumentError("epsilon_dup must lie in (0, 1)")
        self.embedder = embedder
        self.dimension = embedder.dimension
        self.epsilon_dup = epsilon_dup
        self.exemplars: list[Exemplar] = []
        self.query_index: dict[str, list[int]] = {}
        self.query_embeddings: dict[str, np.ndarray] = {}
        self._exemplar_matrix = _Matrix(self.dimension)
        self._query_matrix = _Matrix(self.dimension)
        self._queries: list[str] = []
        self.build_report: BuildReport | None = None

    def __len__(self) -> int:
        return len(self.exemplars)

    @property
    def exemplar_matrix(self) -> np.ndarray:
        """N-by-d view, one row per stored exemplar."""
        return self._exemplar_matrix.view

    @property
    def queries(self) -> list[str]:
        return list(self._queries)

    def get(self, exemplar_id: int) -> Exemplar:
        return self.exemplars[exemplar_id]

    def ensure_query(self, query: str) -> None:
        if query not in self.query_index:
            vec = self.embedder.embed_text(query)
            self.query_index[query] = []
            self.query_embeddings[query] = vec
            self._queries.append(query)
            self._query_matrix.append(vec)

    def make_exemplar(self, query: str, url: str, title: str, description: str, rank: int) -> Exemplar:
        return Exemplar(query, url, title, description, rank, embed_exemplar(title, description, self.embedder))

    def nearest_exemplar(self, vec: np.ndarray) -> tuple[int, float] | None:
        if not self.exemplars:
            return None
        sims = self.exemplar_matrix @ vec
        best = int(np.argmax(sims))
        return best, float(sims[best])

    def add_exemplar(self, exemplar: Exemplar) -> AddResult:
        """Store ``exemplar`` unless it is a near-duplicate of any stored one.

        A duplicate (cosine strictly above ``epsilon_dup``) is dropped and the
        id of the closest stored exemplar is returned; the first copy wins.
        """
        if exemplar.embedding.shape != (self.dimension,):
            raise InvalidArgumentError(
                f"embedding dimension {exemplar.embedding.shape[0]} != library dimension {self.dimension}")
        nearest = self.nearest_exemplar(exemplar.embedding)
        if nearest is not None and nearest[1] > self.epsilon_dup:
            return AddResult(False, nearest[0], nearest[1])
        eid = len(self.exemplars)
        self.exemplars.append(replace(exemplar, exemplar_id=eid))
        self._exemplar_matrix.append(exemplar.embedding)
        self.ensure_query(exemplar.query)
        self.query_index[exemplar.query].append(eid)
        return AddResult(True, eid, nearest[1] if nearest else None)

    def _query_sims(self, z_x: np.ndarray) -> np.ndarray:
        if z_x.shape != (self.dimension,):
            raise InvalidArgumentError("query vector has the wrong dimension")
        return self._query_matrix.view @ z_x

    def nearest_query(self, z_x: np.ndarray) -> tuple[str, float]:
        if not self._queries:
            raise NotFoundError("library has no queries")
        sims = self._query_sims(z_x)
        top = float(sims.max())
        return min(q for q, s in zip(self._queries, sims) if s == top), top

    def queries_above(self, z_x: np.ndarray, tau_q: float) -> list[tuple[str, float]]:
        if not self._queries:
            return []
        sims = self._query_sims(z_x)
        hits = [(q, float(s)) for q, s in zip(self._queries, sims) if s >= tau_q]
        hits.sort(key=lambda qs: (-qs[1], qs[0]))
        return hits

    def exemplars_for_queries(self, queries: Iterable[str]) -> list[Exemplar]:
        ids: list[int] = []
        seen: set[int] = set()
        for q in queries:
            for eid in self.query_index.get(q, ()):
                if eid not in seen:
                    seen.add(eid)
                    ids.append(eid)
        return [self.exemplars[i] for i in ids]

    def __eq__(self, other):
        if not isinstance(other, ExemplarLibrary):
            return NotImplemented
        return (self.dimension == other.dimension and self.epsilon_dup == other.epsilon_dup
                and self.exemplars == other.exemplars and self.query_index == other.query_index)

    __hash__ = None


def build_library(seed_queries: Sequence[str], search, cfg, embedder: EmbeddingProvider) -> ExemplarLibrary:
    """Harvest the top ``cfg.K_lib`` results of every seed query into a new library.

    Seed queries whose search fails are skipped (reason kept in
    ``library.build_report.skipped``); a build where every query failed raises
    :class:`BuildError`.
    """
    if not seed_queries:
        raise BuildError("no seed queries")
    lib = ExemplarLibrary(embedder, cfg.epsilon_dup)
    report = BuildReport()
    for query in seed_queries:
        try:
            results = search.search(query, cfg.K_lib)
        except MetaSynthError as exc:
            log.warning("seed query %r skipped: %s", query, exc)
            report.skipped[query] = f"{exc.code}: {exc}"
            continue
        lib.ensure_query(query)
        for r in results:
            report.fetched += 1
            outcome = lib.add_exemplar(lib.make_exemplar(query, r.url, r.title, r.description, r.rank))
            if outcome.added:
                report.stored += 1
            else:
                report.duplicates += 1
    if len(report.skipped) == len(seed_queries):
        raise BuildError(f"all {len(seed_queries)} seed queries failed")
    lib.build_report = report
    return lib


def save_library(lib: ExemplarLibrary, path: str | Path) -> None:
    """Write the library as JSON lines: one header, then one exemplar per line.

    Queries that have no exemplars are kept as ``{"query": ...}`` records so the
    query index survives the round trip.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        header = {"format": FORMAT, "dimension": lib.dimension, "epsilon_dup": lib.epsilon_dup}
        fh.write(json.dumps(header) + "\n")
        for q in lib.queries:
            if not lib.query_index[q]:
                fh.write(json.dumps({"query": q}, ensure_ascii=False) + "\n")
        for e in lib.exemplars:
            row = {"query": e.query, "url": e.url, "title": e.title, "description": e.description,
                   "rank": e.rank, "embedding": e.embedding.tolist()}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    tmp.replace(path)


def load_library(path: str | Path, embedder: EmbeddingProvider) -> ExemplarLibrary:
    path = Path(path)
    if not path.is_file():
        raise LibraryNotFoundError(f"library file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LibraryFormatError(1, "missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LibraryFormatError(1, f"invalid header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise LibraryFormatError(1, f"expected format {FORMAT!r}")
    dimension = header.get("dimension")
    if dimension != embedder.dimension:
        raise LibraryFormatError(1, f"dimension {dimension} does not match embedder ({embedder.dimension})")
    lib = ExemplarLibrary(embedder, header.get("epsilon_dup", 0.95))
    empty_queries: list[str] = []
    for lineno, line in enumerate(lines[1:], 2):
        try:
            row = json.loads(line)
            if set(row) == {"query"}:
                empty_queries.append(row["query"])
                continue
            vec = as_embedding(row["embedding"], dimension)
            exemplar = Exemplar(row["query"], row["url"], row["title"], row["description"], int(row["rank"]), vec)
        except (ValueError, KeyError, TypeError) as exc:
            raise LibraryFormatError(lineno, f"malformed exemplar record ({exc})") from exc
        # stored libraries already satisfy dedup; re-checking would make load order-sensitive
        eid = len(lib.exemplars)
        lib.exemplars.append(replace(exemplar, exemplar_id=eid))
        lib._exemplar_matrix.append(vec)
        lib.ensure_query(exemplar.query)
        lib.query_index[exemplar.query].append(eid)
    for q in empty_queries:
        lib.ensure_query(q)
    return lib
