"""Search and generator client contracts with their implementations.

Search clients return results in strictly increasing rank order starting at
1. Generator clients take ordered prompt sections and return completion text.
"""
from __future__ import annotations

import json
import logging
import math
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence, runtime_checkable

import httpx
import numpy as np

from . import prompts
from .core import Snippet, is_absolute_url
from .embedding import EmbeddingProvider, HashingEmbedder, embed_exemplar, tokenize
from .errors import ClientParseError, InputError, InvalidArgumentError, TransportError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str
    description: str
    rank: int


@runtime_checkable
class SearchClient(Protocol):
    name: str
    max_k: int

    def search(self, query: str, k: int) -> list[SearchResult]: ...


@runtime_checkable
class GeneratorClient(Protocol):
    name: str

    def send(self, parts: prompts.PromptParts) -> str: ...


def _with_retries(call: Callable[[], httpx.Response], attempts: int, backoff: float,
                  sleep: Callable[[float], None]) -> httpx.Response:
    last = None
    for attempt in range(attempts):
        try:
            resp = call()
        except httpx.HTTPError as exc:
            last = f"{type(exc).__name__}: {exc}"
        else:
            if resp.status_code // 100 == 2:
                return resp
            last = f"HTTP {resp.status_code}"
        if attempt + 1 < attempts:
            sleep(backoff * 2 ** attempt)
    raise TransportError(f"gave up after {attempts} attempts ({last})")


# --- simulated search engine -------------------------------------------------


@dataclass(frozen=True)
class SimulatedCorpusDoc:
    url: str
    title: str
    description: str
    popularity: float = 0.0

    def __post_init__(self):
        if self.popularity < 0:
            raise InvalidArgumentError(f"{self.url}: popularity must be >= 0")


def load_corpus(path: str | Path) -> list[SimulatedCorpusDoc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                docs.append(SimulatedCorpusDoc(row["url"], row["title"], row["description"],
                                               float(row.get("popularity", 0.0))))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: bad corpus record ({exc})") from exc
    return docs


def save_corpus(docs: Iterable[SimulatedCorpusDoc], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            row = {"url": d.url, "title": d.title, "description": d.description, "popularity": d.popularity}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


class SimulatedSearch:
    """Deterministic stand-in for a black-box engine.

    Scores each document by cosine(query, title+description) plus a small
    popularity bonus ``0.01 * log(1 + popularity)``; ties go to the smaller URL.
    """

    name = "simulated"

    def __init__(self, corpus: Sequence[SimulatedCorpusDoc], embedder: EmbeddingProvider | None = None,
                 max_k: int = 100):
        urls = [d.url for d in corpus]
        if len(set(urls)) != len(urls):
            raise InvalidArgumentError("corpus urls must be unique")
        self.corpus = list(corpus)
        self.embedder = embedder or HashingEmbedder()
        self.max_k = max_k
        self.calls = 0
        if self.corpus:
            self._matrix = np.stack([embed_exemplar(d.title, d.description, self.embedder) for d in self.corpus])
        else:
            self._matrix = np.zeros((0, self.embedder.dimension))
        self._bonus = np.array([0.01 * math.log1p(d.popularity) for d in self.corpus])

    def scores(self, query: str) -> np.ndarray:
        return self._matrix @ self.embedder.embed_text(query) + self._bonus

    def search(self, query: str, k: int) -> list[SearchResult]:
        if k < 1:
            raise InvalidArgumentError("k must be >= 1")
        self.calls += 1
        if not self.corpus:
            return []
        scores = self.scores(query)
        order = sorted(range(len(self.corpus)), key=lambda i: (-scores[i], self.corpus[i].url))
        return [
            SearchResult(self.corpus[i].url, self.corpus[i].title, self.corpus[i].description, rank)
            for rank, i in enumerate(order[:min(k, self.max_k)], 1)
        ]


# --- HTTP search ---------------------------------------------------------------


def parse_search_payload(payload, k: int) -> list[SearchResult]:
    """Normalize a provider JSON payload into ranked results.

    Accepts ``{"results": [...]}``, ``{"organic_results": [...]}`` or a bare
    list. Items need a url (``url``/``link``), ``title`` and a description
    (``description``/``snippet``). An explicit ``rank``/``position`` orders the
    list; ranks are then reassigned 1..K by list order.
    """
    if isinstance(payload, dict):
        items = payload.get("results", payload.get("organic_results"))
    else:
        items = payload
    if not isinstance(items, list):
        raise ClientParseError("search response has no result list")
    parsed = []
    for pos, item in enumerate(items):
        if not isinstance(item, dict):
            raise ClientParseError(f"result {pos} is not an object")
        url = item.get("url", item.get("link"))
        title = item.get("title")
        desc = item.get("description", item.get("snippet"))
        if not isinstance(url, str) or not isinstance(title, str) or not isinstance(desc, str):
            raise ClientParseError(f"result {pos} lacks url/title/description")
        if not is_absolute_url(url):
            raise ClientParseError(f"result {pos} has non-absolute url {url!r}")
        declared = item.get("rank", item.get("position"))
        if declared is not None and not isinstance(declared, (int, float)):
            raise ClientParseError(f"result {pos} has non-numeric rank")
        parsed.append((declared if declared is not None else math.inf, pos, url, title, desc))
    parsed.sort(key=lambda row: (row[0], row[1]))
    return [SearchResult(url, title, desc, rank) for rank, (_, _, url, title, desc) in enumerate(parsed[:k], 1)]


class HttpSearch:
    """GET ``endpoint?q=<query>&num=<k>`` against a SERP-style JSON API."""

    name = "http"

    def __init__(self, endpoint: str, api_key: str | None = None, client: httpx.Client | None = None,
                 max_k: int = 100, attempts: int = 3, backoff: float = 0.5, max_in_flight: int = 4,
                 sleep: Callable[[float], None] = time.sleep, timeout: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get("SEARCH_API_KEY")
        self.max_k = max_k
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def search(self, query: str, k: int) -> list[SearchResult]:
        if k < 1:
            raise InvalidArgumentError("k must be >= 1")
        k = min(k, self.max_k)
        params = {"q": query, "num": k}
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        with self._slots:
            resp = _with_retries(lambda: self._client.get(self.endpoint, params=params, headers=headers),
                                 self.attempts, self.backoff, self._sleep)
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ClientParseError(f"search response is not JSON: {exc}") from exc
        return parse_search_payload(payload, k)


# --- generators ----------------------------------------------------------------


class HttpChatClient:
    """Chat-completion style endpoint; temperature fixed at 0."""

    name = "http-chat"

    def __init__(self, endpoint: str, model: str, api_key: str | None = None, client: httpx.Client | None = None,
                 attempts: int = 3, backoff: float = 0.5, max_in_flight: int = 4,
                 sleep: Callable[[float], None] = time.sleep, timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def send(self, parts: prompts.PromptParts) -> str:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompts.render(parts)}],
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        with self._slots:
            resp = _with_retries(lambda: self._client.post(self.endpoint, json=body, headers=headers),
                                 self.attempts, self.backoff, self._sleep)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ClientParseError(f"unexpected chat response: {exc}") from exc


_NON_SELLING = {"name", "brand", "category", "title"}
# generic boilerplate: one promotional word each, no product-specific tokens
_BOOSTERS = ("Premium quality.", "A perfect choice.", "Exclusive design.", "Stylish and practical.")


def _sentences(text: str) -> list[str]:
    return [s.strip() for s in re.split(r"(?<=[.!?])\s+", text) if s.strip()]


def _tidy(text: str) -> str:
    text = re.sub(r"\s+", " ", text).strip()
    text = re.sub(r"\s+([.,!?;:])", r"\1", text)
    text = re.sub(r"([.!?])(?:\s*[.,;:])+", r"\1", text)
    return text.strip(" ,;:")


class MockGenerator:
    """Deterministic template transducer standing in for an LLM.

    * expand: ``brand + name``, ``name``, ``brand + last word of name``
      (lowercased, deduplicated, at most ``count`` lines).
    * generate: title ``brand + name``; description is the first selling
      attribute followed by the top exemplar's closing sentence (when any
      exemplar is given) and the CTA ``Shop now.``
    * refine: applies directives mechanically to the previous snippet.
    """

    name = "mock"

    def __init__(self, cta_phrase: str = "Shop now."):
        self.cta_phrase = cta_phrase
        self.calls = 0

    def send(self, parts: prompts.PromptParts) -> str:
        self.calls += 1
        task = prompts.section(parts, "task")
        page = dict(prompts.parse_page_section(prompts.section(parts, "page") or ""))
        if task == prompts.EXPAND_TASK:
            count = int(prompts.section(parts, "count") or 5)
            return "\n".join(self._expand(page)[:count])
        if task == prompts.REFINE_TASK:
            previous = prompts.parse_completion(prompts.section(parts, "previous") or "")
            directives = [line[2:] for line in (prompts.section(parts, "directives") or "").splitlines()
                          if line.startswith("- ")]
            required = prompts.parse_guardrail_section(prompts.section(parts, "guardrails") or "")
            return prompts.format_snippet(self._refine(previous, directives, required))
        return prompts.format_snippet(self._generate(page, prompts.section(parts, "exemplars") or "none"))

    @staticmethod
    def _expand(page: dict[str, str]) -> list[str]:
        name = page.get("name", "").strip()
        brand = page.get("brand", "").strip()
        words = tokenize(name)
        candidates = [f"{brand} {name}", name, f"{brand} {words[-1]}" if words else ""]
        out = []
        for c in candidates:
            c = " ".join(c.lower().split())
            if c and c not in out:
                out.append(c)
        return out

    def _generate(self, page: dict[str, str], exemplar_text: str) -> Snippet:
        name = page.get("name") or next(iter(page.values()), "Product")
        brand = page.get("brand", "")
        title = f"{brand} {name}".strip() if brand and not name.lower().startswith(brand.lower()) else name
        selling = next((v for k, v in page.items() if k not in _NON_SELLING and v.strip()),
                       page.get("category", name))
        parts = [_sentences(selling)[0] if _sentences(selling) else selling]
        hook = self._exemplar_hook(exemplar_text)
        if hook:
            parts.append(hook)
        parts.append(self.cta_phrase)
        return Snippet(title, _tidy(" ".join(p if p.endswith((".", "!", "?")) else p + "." for p in parts)))

    @staticmethod
    def _exemplar_hook(exemplar_text: str) -> str | None:
        for line in exemplar_text.splitlines():
            line = line.strip()
            if line.startswith("DESCRIPTION: "):
                sentences = _sentences(line[len("DESCRIPTION: "):])
                return sentences[-1] if len(sentences) > 1 else None
        return None

    def _refine(self, previous: Snippet, directives: list[str], required: dict[str, list[str]]) -> Snippet:
        title, description = previous.title, previous.description
        boosts = 0
        for d in directives:
            if d.startswith("remove forbidden term "):
                term = re.escape(d[len("remove forbidden term "):])
                title = re.sub(term, "", title, flags=re.IGNORECASE)
                description = re.sub(term, "", description, flags=re.IGNORECASE)
            elif d == "insert a call to action":
                description = f"{description} {self.cta_phrase}"
            elif d == "increase promotional strength":
                description = f"{_BOOSTERS[boosts % len(_BOOSTERS)]} {description}"
                boosts += 1
            elif d.startswith("increase relevance: mention "):
                mention = d[len("increase relevance: mention "):]
                if mention.lower() not in description.lower():
                    description = f"{description} {mention}."
            elif d.startswith("include required element "):
                phrases = required.get(d[len("include required element "):])
                if phrases:
                    description = f"{description} {phrases[0].capitalize()}."
        title = _tidy(title) or previous.title
        description = _tidy(description) or previous.description
        return Snippet(title, description)
