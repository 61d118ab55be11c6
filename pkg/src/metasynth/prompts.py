"""Prompt sections and the completion wire format.

A prompt is an ordered list of ``(label, text)`` sections. Completions come
back as two labeled lines, ``TITLE: ...`` and ``DESCRIPTION: ...``.
"""
from __future__ import annotations

import re
from typing import Sequence

from .core import Guardrails, ProductPage, Snippet
from .embedding import serialize_page
from .errors import InvalidArgumentError

PromptParts = list[tuple[str, str]]

GENERATE_TASK = (
    "Write a search-engine meta title and meta description for the product page below. "
    "Follow the style of the exemplars, obey the guardrails, and reply with exactly two lines: "
    "'TITLE: <title>' and 'DESCRIPTION: <description>'."
)
REFINE_TASK = (
    "Revise the previous meta title and description so that every directive is satisfied. "
    "Reply with exactly two lines: 'TITLE: <title>' and 'DESCRIPTION: <description>'."
)
EXPAND_TASK = (
    "Propose search queries a shopper would type to find the product page below. "
    "Reply with one query per line."
)
FORMAT_REMINDER = (
    "Your previous reply could not be parsed. Reply with exactly two lines and nothing else: "
    "'TITLE: <title>' and 'DESCRIPTION: <description>'."
)

_LINE = re.compile(r"^\s*(TITLE|DESCRIPTION)\s*:\s*(.*?)\s*$", re.IGNORECASE)


def format_snippet(snippet: Snippet) -> str:
    return f"TITLE: {snippet.title}\nDESCRIPTION: {snippet.description}"


def parse_completion(text: str) -> Snippet:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        m = _LINE.match(line)
        if m and m.group(1).upper() not in fields:
            fields[m.group(1).upper()] = m.group(2)
    if "TITLE" not in fields or "DESCRIPTION" not in fields:
        raise InvalidArgumentError("completion lacks TITLE/DESCRIPTION lines")
    return Snippet(fields["TITLE"], fields["DESCRIPTION"])


def _exemplar_block(exemplars: Sequence) -> str:
    if not exemplars:
        return "none"
    blocks = []
    for i, e in enumerate(exemplars, 1):
        blocks.append(f"{i}. TITLE: {e.title}\n   DESCRIPTION: {e.description}")
    return "\n".join(blocks)


def _guardrail_block(guardrails: Guardrails) -> str:
    avoid = "; ".join(guardrails.hard_prohibitions) or "none"
    include = []
    for r in guardrails.required_elements:
        matcher = " | ".join(r.phrases) if r.phrases else f"pattern {r.pattern}"
        include.append(f"{r.name} ({matcher})")
    return f"avoid: {avoid}\ninclude: {'; '.join(include) or 'none'}"


def assemble_prompt(page: ProductPage, exemplars: Sequence, guardrails: Guardrails,
                    previous: Snippet | None = None, directives: Sequence[str] | None = None) -> PromptParts:
    refining = previous is not None
    parts: PromptParts = [
        ("task", REFINE_TASK if refining else GENERATE_TASK),
        ("page", serialize_page(page)),
        ("exemplars", _exemplar_block(exemplars)),
        ("guardrails", _guardrail_block(guardrails)),
    ]
    if refining:
        parts.append(("previous", format_snippet(previous)))
        parts.append(("directives", "\n".join(f"- {d}" for d in directives or ())))
    return parts


def expand_prompt(page: ProductPage, n_expand: int) -> PromptParts:
    return [("task", EXPAND_TASK), ("page", serialize_page(page)), ("count", str(n_expand))]


def render(parts: PromptParts) -> str:
    """Flatten sections into one message for chat-style endpoints."""
    return "\n\n".join(f"## {label}\n{text}" for label, text in parts)


def section(parts: PromptParts, label: str) -> str | None:
    for key, text in parts:
        if key == label:
            return text
    return None


def parse_page_section(text: str) -> list[tuple[str, str]]:
    attrs = []
    for line in text.splitlines():
        name, sep, value = line.partition(": ")
        if sep:
            attrs.append((name, value))
    return attrs


def parse_guardrail_section(text: str) -> dict[str, list[str]]:
    """Recover ``{element name: phrases}`` from the rendered guardrail section."""
    required: dict[str, list[str]] = {}
    for line in text.splitlines():
        if not line.startswith("include: ") or line == "include: none":
            continue
        for item in line[len("include: "):].split("; "):
            m = re.match(r"^(.*?) \((.*)\)$", item)
            if m and not m.group(2).startswith("pattern "):
                required[m.group(1)] = m.group(2).split(" | ")
    return required
