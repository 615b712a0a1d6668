"""Canonical prompt templates.

These strings are golden-tested; do not edit casually. Placeholders are
filled by :func:`fill`, which substitutes in a single pass so braces inside
question bodies or code snippets are never misread as placeholders.
"""

from __future__ import annotations

import re

GENAI_TEMPLATE = (
    "Provide a detailed, concise, pertinent, and coherent explanatory answer "
    "to the question below. Provide examples if needed.\n"
    "\n"
    "Question:\n"
    "#{topic}\n"
    "{body}"
)

RAG_TEMPLATE = (
    "Sift through the text chunks provided (extracted from the textbook "
    '"{textbook}") and combine the most relevant ones into a detailed, '
    "concise, pertinent, and coherent explanatory answer to the question "
    "below. Every statement must contain a reference to the source textbook "
    "page(s). Provide examples if needed.\n"
    "\n"
    "Question:\n"
    "#{topic}\n"
    "{body}\n"
    "\n"
    "Text chunks:\n"
    "{contents}"
)

QA_EXTRACTION_TEMPLATE = (
    "Analyse the English paragraph below to generate a comprehensive list "
    "of Q&As in English, capturing: what, who, why, how, how much, where, "
    "when, who by, which, whose. Answers must succinctly reflect the "
    "paragraph's content without repeating the question's wording. Q&As "
    "must use precise and direct language, avoiding vague terms and "
    "generalizations, clearly specifying the context and subjects involved "
    "without assuming prior knowledge.\n"
    "\n"
    "Example Paragraph: Alice, an experienced hiker, explores the Rocky "
    "Mountains despite rain. She packs her gear early in the morning.\n"
    "\n"
    "Expected Output:\n"
    "- Who is Alice? An experienced hiker.\n"
    "- What did Alice do? Explored the Rocky Mountains.\n"
    "- Despite what did Alice decide to explore the Rocky Mountains? Rain.\n"
    "- What did she pack? Gear.\n"
    "- When did she pack? Early in the morning.\n"
    "\n"
    "Paragraph for Analysis:\n"
    "{sentence}"
)

_PLACEHOLDER_RE = re.compile(r"\{(topic|body|textbook|contents|sentence)\}")


def fill(template: str, **values: str) -> str:
    """Substitute named placeholders without rescanning inserted text."""
    def sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in values:
            raise KeyError(f"no value supplied for placeholder {{{name}}}")
        return values[name]

    return _PLACEHOLDER_RE.sub(sub, template)
