"""Snippet generation, the evaluator panel, feedback consolidation and the refinement loop."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import prompts
from .config import DEFAULT_CTA_PHRASES, load_promo_lexicon
from .core import CRITERIA, Guardrails, ProductPage, Snippet, check_required_elements, scan_hard_constraints
from .embedding import EmbeddingProvider, HashingEmbedder, embed_exemplar, embed_page, tokenize
from .errors import GenerationFormatError, InvalidArgumentError, MetaSynthError

log = logging.getLogger(__name__)

HARD = "hard"
SOFT = "soft"
# fixed criterion order used as the last consolidation tie-break
CONSOLIDATION_ORDER = ("brand", "rel", "cta", "promo")

_DEFAULT_EMBEDDER = HashingEmbedder()


# --- generation --------------------------------------------------------------


def _complete(llm, parts: prompts.PromptParts) -> Snippet:
    """Send, parse; on a parse failure reprompt once with a format reminder."""
    text = llm.send(parts)
    try:
        return prompts.parse_completion(text)
    except InvalidArgumentError:
        log.info("unparseable completion, reprompting once")
    text = llm.send(parts + [("format", prompts.FORMAT_REMINDER)])
    try:
        return prompts.parse_completion(text)
    except InvalidArgumentError as exc:
        raise GenerationFormatError(f"completion unparseable after reprompt: {exc}") from exc


def generate_initial(page: ProductPage, exemplars: Sequence, guardrails: Guardrails, llm) -> Snippet:
    return _complete(llm, prompts.assemble_prompt(page, exemplars, guardrails))


def refine(page: ProductPage, exemplars: Sequence, guardrails: Guardrails, previous: Snippet,
           feedback: "Feedback", llm) -> Snippet:
    if not feedback.consolidated:
        raise InvalidArgumentError("refine needs at least one directive")
    parts = prompts.assemble_prompt(page, exemplars, guardrails, previous, feedback.consolidated)
    return _complete(llm, parts)


# --- evaluator panel ---------------------------------------------------------


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def score_relevance(snippet: Snippet, page: ProductPage, embedder: EmbeddingProvider = _DEFAULT_EMBEDDER) -> float:
    sim = float(embed_exemplar(snippet.title, snippet.description, embedder) @ embed_page(page, embedder))
    return _clamp01(sim)


def _term_pattern(term: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)", re.IGNORECASE)


def score_promo(snippet: Snippet, lexicon: Sequence[str] | None = None) -> float:
    """Distinct promotional terms present (whole-word match), divided by 3, capped at 1."""
    if lexicon is None:
        lexicon = _default_lexicon()
    text = snippet.text
    hits = sum(1 for term in set(lexicon) if _term_pattern(term).search(text))
    return _clamp01(hits / 3.0)


def score_cta(snippet: Snippet, phrases: Sequence[str] = DEFAULT_CTA_PHRASES) -> int:
    text = snippet.text.lower()
    return int(any(p.lower() in text for p in phrases))


@dataclass(frozen=True)
class BrandCheck:
    score: float
    hard_violations: list
    missing_required: list[str]


def score_brand(snippet: Snippet, guardrails: Guardrails) -> BrandCheck:
    violations = scan_hard_constraints(snippet.text, guardrails)
    missing = check_required_elements(snippet, guardrails)
    total = len(guardrails.hard_prohibitions) + len(guardrails.required_elements)
    if total == 0:
        return BrandCheck(1.0, violations, missing)
    violated_entries = len({v.phrase for v in violations})
    return BrandCheck(_clamp01(1.0 - (violated_entries + len(missing)) / total), violations, missing)


_lexicon_cache: tuple[str, ...] | None = None


def _default_lexicon() -> tuple[str, ...]:
    global _lexicon_cache
    if _lexicon_cache is None:
        _lexicon_cache = load_promo_lexicon()
    return _lexicon_cache


@dataclass(frozen=True)
class ScoreVector:
    rel: float
    promo: float
    cta: int
    brand: float
    hard_violations: list = field(default_factory=list)
    missing_required: list[str] = field(default_factory=list)
    failed_criteria: tuple[str, ...] = ()

    def get(self, criterion: str) -> float:
        return float(getattr(self, criterion))

    @property
    def aggregate(self) -> float:
        return (self.rel + self.promo + self.cta + self.brand) / 4.0

    def passes(self, thresholds: Mapping[str, float]) -> bool:
        return (not self.hard_violations and not self.missing_required and not self.failed_criteria
                and all(self.get(k) >= thresholds[k] for k in CRITERIA))

    def to_dict(self) -> dict:
        return {
            "rel": self.rel, "promo": self.promo, "cta": self.cta, "brand": self.brand,
            "aggregate": self.aggregate,
            "hard_violations": [v.matched for v in self.hard_violations],
            "missing_required": list(self.missing_required),
        }


@dataclass(frozen=True)
class Directive:
    criterion: str
    text: str
    severity: str


@dataclass(frozen=True)
class Feedback:
    directives: list[Directive]
    consolidated: list[str]

    def __bool__(self) -> bool:
        return bool(self.consolidated)


def _missing_attribute(snippet: Snippet, page: ProductPage) -> str | None:
    present = set(tokenize(snippet.text))
    for _, value in page.attributes:
        words = tokenize(value)
        if words and not set(words) <= present:
            return value.strip()
    return None


class Evaluator:
    """Built-in deterministic evaluator panel (cosine, lexicon and guardrail checks).

    Any scorer can be swapped for a plug-in (for example an LLM-backed one)
    through ``scorers``; a plug-in for ``rel``/``promo``/``brand`` must return a
    value in [0, 1] and one for ``cta`` must return 0 or 1.
    """

    def __init__(self, guardrails: Guardrails, embedder: EmbeddingProvider = _DEFAULT_EMBEDDER,
                 lexicon: Sequence[str] | None = None, cta_phrases: Sequence[str] = DEFAULT_CTA_PHRASES,
                 scorers: Mapping[str, Callable] | None = None):
        self.guardrails = guardrails
        self.embedder = embedder
        self.lexicon = tuple(lexicon) if lexicon is not None else _default_lexicon()
        self.cta_phrases = tuple(cta_phrases)
        self.scorers = dict(scorers or {})

    def _run(self, criterion: str, snippet: Snippet, page: ProductPage):
        plugin = self.scorers.get(criterion)
        if plugin is not None:
            value = plugin(snippet, page)
            if criterion == "cta" and value not in (0, 1):
                raise ValueError(f"cta scorer returned {value!r}")
            if not 0.0 <= float(value) <= 1.0:
                raise ValueError(f"{criterion} scorer returned {value!r}")
            return value
        if criterion == "rel":
            return score_relevance(snippet, page, self.embedder)
        if criterion == "promo":
            return score_promo(snippet, self.lexicon)
        if criterion == "cta":
            return score_cta(snippet, self.cta_phrases)
        return score_brand(snippet, self.guardrails).score

    def evaluate(self, snippet: Snippet, page: ProductPage) -> tuple[ScoreVector, Feedback]:
        values: dict[str, float] = {}
        errored: list[str] = []
        for criterion in CRITERIA:
            try:
                values[criterion] = self._run(criterion, snippet, page)
            except Exception as exc:  # a broken scorer fails its criterion, not the loop
                log.warning("scorer %s failed: %s", criterion, exc)
                values[criterion] = 0.0
                errored.append(criterion)
        brand = score_brand(snippet, self.guardrails)
        scores = ScoreVector(
            rel=float(values["rel"]), promo=float(values["promo"]), cta=int(values["cta"]),
            brand=float(values["brand"]), hard_violations=brand.hard_violations,
            missing_required=brand.missing_required, failed_criteria=tuple(errored),
        )
        directives = self._directives(snippet, page, scores, errored)
        alpha = self.guardrails.thresholds
        return scores, Feedback(directives, consolidate_feedback(directives, scores, alpha))

    def _directives(self, snippet, page, scores: ScoreVector, errored) -> list[Directive]:
        alpha = self.guardrails.thresholds
        out: list[Directive] = []
        for criterion in errored:
            out.append(Directive(criterion, f"retry criterion {criterion}", SOFT))
        seen_terms = set()
        for v in scores.hard_violations:
            term = v.matched.lower() if v.phrase.startswith("re:") else v.phrase
            if term not in seen_terms:
                seen_terms.add(term)
                out.append(Directive("brand", f"remove forbidden term {term}", HARD))
        for name in scores.missing_required:
            out.append(Directive("brand", f"include required element {name}", HARD))
        if "brand" not in errored and not out and scores.brand < alpha["brand"]:
            out.append(Directive("brand", "follow the brand guidelines", SOFT))
        if "rel" not in errored and scores.rel < alpha["rel"]:
            missing = _missing_attribute(snippet, page)
            text = f"increase relevance: mention {missing}" if missing else "increase relevance: mention the product attributes"
            out.append(Directive("rel", text, SOFT))
        if "promo" not in errored and scores.promo < alpha["promo"]:
            out.append(Directive("promo", "increase promotional strength", SOFT))
        if "cta" not in errored and scores.cta < alpha["cta"]:
            out.append(Directive("cta", "insert a call to action", SOFT))
        return out


def evaluate(snippet: Snippet, page: ProductPage, guardrails: Guardrails, **kwargs) -> tuple[ScoreVector, Feedback]:
    return Evaluator(guardrails, **kwargs).evaluate(snippet, page)


def consolidate_feedback(directives: Sequence[Directive], scores: ScoreVector,
                         alpha: Mapping[str, float]) -> list[str]:
    """Order directives hard-first, then by threshold shortfall, then by fixed criterion order."""
    def key(indexed):
        i, d = indexed
        shortfall = alpha[d.criterion] - scores.get(d.criterion)
        return (0 if d.severity == HARD else 1, -shortfall, CONSOLIDATION_ORDER.index(d.criterion), i)

    out: list[str] = []
    for _, d in sorted(enumerate(directives), key=key):
        if d.text not in out:
            out.append(d.text)
    return out


# --- loop ----------------------------------------------------------------------


ACCEPTED = "accepted"
BUDGET_EXHAUSTED = "budget_exhausted"
STAGNATED = "stagnated"
GENERATION_ERROR = "generation_error"


@dataclass(frozen=True)
class Iteration:
    snippet: Snippet
    scores: ScoreVector
    feedback: Feedback


@dataclass
class RefinementTrace:
    iterations: list[Iteration] = field(default_factory=list)
    stop_reason: str | None = None
    accepted_index: int | None = None
    best_index: int | None = None
    generator_calls: int = 0
    error: str | None = None

    @property
    def final(self) -> Iteration:
        idx = self.accepted_index if self.accepted_index is not None else self.best_index
        return self.iterations[idx]

    @property
    def accepted(self) -> bool:
        return self.stop_reason == ACCEPTED


def run_loop(page: ProductPage, exemplars: Sequence, guardrails: Guardrails, cfg, llm,
             evaluator: Evaluator | None = None) -> RefinementTrace:
    """Generate, then evaluate and refine until accepted, out of budget, or stagnant.

    At most ``cfg.K_max`` generation calls are made (one initial plus up to
    ``K_max - 1`` refinements; a format reprompt belongs to the call it
    retries). A generation error after the first iterate ends the trace with
    ``stop_reason="generation_error"``; an error on the initial call propagates.
    """
    if cfg.K_max < 1:
        raise InvalidArgumentError("K_max must be >= 1")
    evaluator = evaluator or Evaluator(guardrails)
    trace = RefinementTrace()
    snippet = generate_initial(page, exemplars, guardrails, llm)
    trace.generator_calls = 1
    flat = 0
    for t in range(cfg.K_max):
        scores, feedback = evaluator.evaluate(snippet, page)
        trace.iterations.append(Iteration(snippet, scores, feedback))
        best = trace.iterations[trace.best_index].scores.aggregate if trace.best_index is not None else None
        if best is None or scores.aggregate > best:
            trace.best_index = t
        if scores.passes(guardrails.thresholds):
            trace.stop_reason, trace.accepted_index = ACCEPTED, t
            return trace
        if t > 0 and cfg.stagnation_enabled:
            gain = scores.aggregate - trace.iterations[t - 1].scores.aggregate
            flat = flat + 1 if gain < cfg.stagnation_delta else 0
            if flat >= cfg.stagnation_window:
                trace.stop_reason = STAGNATED
                return trace
        if t == cfg.K_max - 1:
            break
        if not feedback.consolidated:
            # thresholds failed without an actionable directive; nothing to refine against
            break
        try:
            snippet = refine(page, exemplars, guardrails, snippet, feedback, llm)
        except MetaSynthError as exc:
            trace.generator_calls += 1
            trace.stop_reason, trace.error = GENERATION_ERROR, f"{exc.code}: {exc}"
            return trace
        trace.generator_calls += 1
    trace.stop_reason = BUDGET_EXHAUSTED
    return trace
