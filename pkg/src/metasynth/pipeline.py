"""Per-page online flow (resolve, select, generate/refine) and client wiring from settings."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field

from .clients import HttpChatClient, HttpSearch, MockGenerator, SimulatedSearch, load_corpus
from .config import Settings
from .core import Guardrails, ProductPage, Snippet
from .embedding import HashingEmbedder, HttpEmbeddingProvider, embed_page
from .errors import ConfigError, MetaSynthError, NoCoverageError
from .library import ExemplarLibrary
from .refinement import Evaluator, RefinementTrace, generate_initial, run_loop
from .retrieval import resolve_queries
from .selection import select_exemplars

log = logging.getLogger(__name__)


@dataclass
class PageResult:
    page_id: str
    snippet: Snippet | None
    stop_reason: str | None
    iterations: int
    queries_used: list[str]
    mode: str | None = None
    exemplar_ids: list[int] = field(default_factory=list)
    augmented: int = 0
    error: str | None = None
    trace: RefinementTrace | None = None

    @property
    def accepted(self) -> bool:
        return self.stop_reason == "accepted"

    def to_dict(self) -> dict:
        return {
            "page_id": self.page_id,
            "snippet": {"title": self.snippet.title, "description": self.snippet.description} if self.snippet else None,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "queries_used": list(self.queries_used),
            "mode": self.mode,
            "exemplar_ids": list(self.exemplar_ids),
            "augmented": self.augmented,
            "scores": self.trace.final.scores.to_dict() if self.trace and self.trace.iterations else None,
            "error": self.error,
        }


class Pipeline:
    """Holds the library, clients and evaluator; processes one page at a time.

    ``use_retrieval=False`` skips the library entirely (zero-shot generation);
    ``use_evaluation=False`` returns the initial generation unevaluated. Both
    exist for ablation runs. Library augmentation is serialized by a lock so
    several threads may call :meth:`process` concurrently.
    """

    def __init__(self, library: ExemplarLibrary, search, llm, cfg, guardrails: Guardrails,
                 evaluator: Evaluator | None = None, use_retrieval: bool = True, use_evaluation: bool = True):
        self.library = library
        self.search = search
        self.llm = llm
        self.cfg = cfg
        self.guardrails = guardrails
        self.evaluator = evaluator or Evaluator(guardrails, library.embedder)
        self.use_retrieval = use_retrieval
        self.use_evaluation = use_evaluation
        self._writer = threading.Lock()
        self.augmented_total = 0

    def _exemplars(self, page: ProductPage, result: PageResult) -> list:
        if not self.use_retrieval:
            result.mode = "zero-shot"
            return []
        try:
            with self._writer:
                resolution = resolve_queries(page, self.library, self.search, self.llm, self.cfg)
        except NoCoverageError as exc:
            log.info("%s", exc)
            result.mode = "zero-shot"
            return []
        result.mode = resolution.mode
        result.queries_used = resolution.query_texts
        result.augmented = resolution.augmented_count
        self.augmented_total += resolution.augmented_count
        pool = self.library.exemplars_for_queries(resolution.query_texts)
        chosen = select_exemplars(pool, embed_page(page, self.library.embedder), self.cfg)
        result.exemplar_ids = chosen.selected
        return [self.library.get(i) for i in chosen.selected]

    def process(self, page: ProductPage) -> PageResult:
        result = PageResult(page.page_id, None, None, 0, [])
        try:
            exemplars = self._exemplars(page, result)
            if not self.use_evaluation:
                result.snippet = generate_initial(page, exemplars, self.guardrails, self.llm)
                result.stop_reason, result.iterations = "unevaluated", 1
                return result
            trace = run_loop(page, exemplars, self.guardrails, self.cfg, self.llm, self.evaluator)
        except MetaSynthError as exc:
            result.error = f"{exc.code}: {exc}"
            return result
        result.trace = trace
        result.snippet = trace.final.snippet
        result.stop_reason = trace.stop_reason
        result.iterations = len(trace.iterations)
        result.error = trace.error
        return result


def make_embedder(settings: Settings):
    opts = settings.embedding.options
    if settings.embedding.kind == "hashing":
        kwargs = {"dimension": settings.pipeline.d}
        if "seed" in opts:
            kwargs["seed"] = int(opts["seed"])
        if "bigrams" in opts:
            kwargs["bigrams"] = bool(opts["bigrams"])
        return HashingEmbedder(**kwargs)
    if settings.embedding.kind == "http":
        if "endpoint" not in opts:
            raise ConfigError("embedding.endpoint", "required for kind=http")
        return HttpEmbeddingProvider(opts["endpoint"], settings.pipeline.d)
    raise ConfigError("embedding.kind", f"unknown kind {settings.embedding.kind!r}")


def make_search(settings: Settings, embedder):
    opts = settings.search.options
    if settings.search.kind == "simulated":
        if "corpus" not in opts:
            raise ConfigError("search.corpus", "required for kind=simulated")
        return SimulatedSearch(load_corpus(settings.resolve_path(opts["corpus"])), embedder)
    if settings.search.kind == "http":
        if "endpoint" not in opts:
            raise ConfigError("search.endpoint", "required for kind=http")
        return HttpSearch(opts["endpoint"], max_in_flight=int(opts.get("max_in_flight", 4)))
    raise ConfigError("search.kind", f"unknown kind {settings.search.kind!r}")


def make_llm(settings: Settings):
    opts = settings.llm.options
    if settings.llm.kind == "mock":
        return MockGenerator()
    if settings.llm.kind == "http":
        for key in ("endpoint", "model"):
            if key not in opts:
                raise ConfigError(f"llm.{key}", "required for kind=http")
        return HttpChatClient(opts["endpoint"], opts["model"], max_in_flight=int(opts.get("max_in_flight", 4)))
    raise ConfigError("llm.kind", f"unknown kind {settings.llm.kind!r}")


def make_evaluator(settings: Settings, embedder) -> Evaluator:
    return Evaluator(settings.guardrails, embedder, settings.promo_lexicon, settings.cta_phrases)
