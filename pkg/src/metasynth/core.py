"""Domain types shared across the pipeline plus similarity and guardrail checks."""
from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence
from urllib.parse import urlparse

import numpy as np

from .errors import InvalidArgumentError

SEPARATOR = " || "
CRITERIA = ("rel", "promo", "cta", "brand")
PATTERN_PREFIX = "re:"


def _has_control(text: str) -> bool:
    return any(unicodedata.category(ch) == "Cc" for ch in text)


def is_absolute_url(url: str) -> bool:
    parsed = urlparse(url)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def as_embedding(values: Iterable[float] | np.ndarray, dimension: int | None = None) -> np.ndarray:
    """Coerce to a read-only float64 vector, checking dimension and unit norm."""
    vec = np.array(values, dtype=np.float64)
    if vec.ndim != 1:
        raise InvalidArgumentError("embedding must be one-dimensional")
    if dimension is not None and vec.shape[0] != dimension:
        raise InvalidArgumentError(f"embedding has dimension {vec.shape[0]}, expected {dimension}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-6:
        raise InvalidArgumentError(f"embedding is not unit-norm (|v| = {norm:.9f})")
    vec.setflags(write=False)
    return vec


def normalize(values: Iterable[float] | np.ndarray) -> np.ndarray:
    vec = np.array(values, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise InvalidArgumentError("cannot normalize a zero vector")
    vec = vec / norm
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True)
class ProductPage:
    page_id: str
    url: str
    attributes: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.page_id:
            raise InvalidArgumentError("page_id must be non-empty")
        if not is_absolute_url(self.url):
            raise InvalidArgumentError(f"page {self.page_id}: url {self.url!r} is not absolute")
        attrs = tuple((str(k), str(v)) for k, v in self.attributes)
        if not any(v.strip() for _, v in attrs):
            raise InvalidArgumentError(f"page {self.page_id}: no non-empty attribute")
        object.__setattr__(self, "attributes", attrs)

    def get(self, name: str, default: str | None = None) -> str | None:
        for key, value in self.attributes:
            if key == name:
                return value
        return default

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProductPage":
        raw = data.get("attributes", [])
        if isinstance(raw, Mapping):
            attrs = tuple(raw.items())
        else:
            attrs = tuple((a["name"], a["value"]) for a in raw)
        return cls(page_id=str(data.get("page_id", "")), url=str(data.get("url", "")), attributes=attrs)

    def to_dict(self) -> dict:
        return {
            "page_id": self.page_id,
            "url": self.url,
            "attributes": [{"name": k, "value": v} for k, v in self.attributes],
        }


@dataclass(frozen=True)
class Snippet:
    title: str
    description: str

    def __post_init__(self):
        for name in ("title", "description"):
            value = getattr(self, name)
            if not value or not value.strip():
                raise InvalidArgumentError(f"snippet {name} must be non-empty")
            if _has_control(value):
                raise InvalidArgumentError(f"snippet {name} contains control characters")

    @property
    def text(self) -> str:
        return concat_snippet(self.title, self.description)


@dataclass(frozen=True, eq=False)
class Exemplar:
    query: str
    url: str
    title: str
    description: str
    rank: int
    embedding: np.ndarray = field(repr=False)
    exemplar_id: int | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidArgumentError(f"rank must be >= 1, got {self.rank}")
        object.__setattr__(self, "embedding", as_embedding(self.embedding))

    def __eq__(self, other):
        if not isinstance(other, Exemplar):
            return NotImplemented
        return (
            self.query == other.query
            and self.url == other.url
            and self.title == other.title
            and self.description == other.description
            and self.rank == other.rank
            and self.exemplar_id == other.exemplar_id
            and np.array_equal(self.embedding, other.embedding)
        )

    __hash__ = None

    @property
    def snippet(self) -> Snippet:
        return Snippet(self.title, self.description)


@dataclass(frozen=True)
class RequiredElement:
    """A named presence check, matched by any of ``phrases`` or by ``pattern``."""

    name: str
    phrases: tuple[str, ...] = ()
    pattern: str | None = None

    def __post_init__(self):
        if not self.name:
            raise InvalidArgumentError("required element name must be non-empty")
        if not self.phrases and not self.pattern:
            raise InvalidArgumentError(f"required element {self.name!r} has no matcher")
        if any(not p for p in self.phrases):
            raise InvalidArgumentError(f"required element {self.name!r} has an empty phrase")

    def matches(self, text: str) -> bool:
        lowered = text.lower()
        if any(p.lower() in lowered for p in self.phrases):
            return True
        return bool(self.pattern and re.search(self.pattern, text, re.IGNORECASE))

    @classmethod
    def from_spec(cls, name: str, definition) -> "RequiredElement":
        # list -> phrase set, "re:..." -> pattern, other string -> single phrase
        if isinstance(definition, str):
            if definition.startswith(PATTERN_PREFIX):
                return cls(name, pattern=definition[len(PATTERN_PREFIX):])
            return cls(name, phrases=(definition,))
        return cls(name, phrases=tuple(definition))

    def to_spec(self):
        if self.pattern is not None:
            return PATTERN_PREFIX + self.pattern
        return list(self.phrases)


DEFAULT_THRESHOLDS = {"rel": 0.5, "promo": 0.34, "cta": 1.0, "brand": 1.0}


@dataclass(frozen=True)
class Guardrails:
    hard_prohibitions: tuple[str, ...] = ()
    required_elements: tuple[RequiredElement, ...] = ()
    thresholds: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def __post_init__(self):
        object.__setattr__(self, "hard_prohibitions", tuple(self.hard_prohibitions))
        object.__setattr__(self, "required_elements", tuple(self.required_elements))
        object.__setattr__(self, "thresholds", dict(self.thresholds))
        if set(self.thresholds) != set(CRITERIA):
            raise InvalidArgumentError(
                f"thresholds must cover exactly {list(CRITERIA)}, got {sorted(self.thresholds)}"
            )
        for key, value in self.thresholds.items():
            if not 0.0 <= float(value) <= 1.0:
                raise InvalidArgumentError(f"threshold {key}={value} outside [0, 1]")
        if any(not h for h in self.hard_prohibitions):
            raise InvalidArgumentError("hard prohibitions must be non-empty strings")

    @classmethod
    def from_dict(cls, data: Mapping) -> "Guardrails":
        thresholds = dict(DEFAULT_THRESHOLDS)
        thresholds.update(data.get("thresholds", {}))
        required = data.get("required", {})
        return cls(
            hard_prohibitions=tuple(data.get("hard", ())),
            required_elements=tuple(RequiredElement.from_spec(k, v) for k, v in required.items()),
            thresholds=thresholds,
        )

    def to_dict(self) -> dict:
        return {
            "hard": list(self.hard_prohibitions),
            "required": {r.name: r.to_spec() for r in self.required_elements},
            "thresholds": {k: self.thresholds[k] for k in CRITERIA},
        }


_PIPE_RUN = re.compile(r"\|{2,}")


def sanitize(text: str) -> str:
    # collapsing every pipe run (not only " || ") keeps the join injective
    # when a part ends or starts with pipes
    return _PIPE_RUN.sub("|", text)


def concat_snippet(title: str, description: str) -> str:
    """Join title and description with the ``" || "`` separator.

    Separator occurrences inside either part are first rewritten to ``" | "``
    so the first separator in the result always marks the boundary.
    """
    if not title or not description:
        raise InvalidArgumentError("title and description must be non-empty")
    return f"{sanitize(title)}{SEPARATOR}{sanitize(description)}"


def split_snippet(text: str) -> tuple[str, str]:
    title, sep, description = text.partition(SEPARATOR)
    if not sep:
        raise InvalidArgumentError("text has no separator")
    return title, description


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise InvalidArgumentError("cosine similarity of a zero vector")
    sim = float(np.dot(a, b)) / (na * nb)
    return min(1.0, max(-1.0, sim))


@dataclass(frozen=True)
class Violation:
    phrase: str
    span: tuple[int, int]
    matched: str


def _hard_regex(entry: str) -> re.Pattern:
    if entry.startswith(PATTERN_PREFIX):
        return re.compile(entry[len(PATTERN_PREFIX):], re.IGNORECASE)
    return re.compile(re.escape(entry), re.IGNORECASE)


def scan_hard_constraints(text: str, guardrails: Guardrails) -> list[Violation]:
    """Every case-insensitive occurrence of a hard-prohibited phrase or pattern."""
    found = []
    for entry in guardrails.hard_prohibitions:
        for m in _hard_regex(entry).finditer(text):
            if m.end() > m.start():
                found.append(Violation(entry, (m.start(), m.end()), m.group(0)))
    found.sort(key=lambda v: (v.span, v.phrase))
    return found


def check_required_elements(snippet: Snippet, guardrails: Guardrails) -> list[str]:
    text = snippet.text
    return [r.name for r in guardrails.required_elements if not r.matches(text)]
