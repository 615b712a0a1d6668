"""Prompt assembly for the three generation modes, and display cleanup.

Modes: ``genai`` (no retrieval), ``rag`` (primary-question retrieval), and
``rag_coi`` (primary retrieval plus implicit question-context pairs from an
illocution plan). All modes decode at temperature 0.5 and top-p 0.0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import Chunk
from .planner import IllocutionPlan
from .providers import GenerationRequest, GenerationResult
from .records import QuestionRecord
from .templates import GENAI_TEMPLATE, RAG_TEMPLATE, fill

DECODING = (0.5, 0.0)  # (temperature, top_p) for every generated bundle

MODES = ("genai", "rag", "rag_coi")


@dataclass(frozen=True)
class PromptBundle:
    mode: str
    text: str
    decoding: tuple[float, float] = DECODING
    retrieved_chunk_ids: tuple[str, ...] = ()
    plan: IllocutionPlan | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode}")
        if self.mode == "genai" and self.retrieved_chunk_ids:
            raise ValueError("genai bundles carry no retrieved chunks")
        if self.mode == "rag_coi" and self.plan is None:
            raise ValueError("rag_coi bundles require a plan")


@dataclass(frozen=True)
class Explanation:
    question_id: str
    mode: str
    model_id: str
    text: str
    decoding: tuple[float, float]
    created_at: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("explanation text must be non-empty")


def _chunk_block(c: Chunk) -> str:
    first, last = c.page_span
    return f"Page {first}-{last}:\n{c.text}"


def render_contents(chunks: list[Chunk]) -> str:
    return "\n\n".join(_chunk_block(c) for c in chunks)


def assemble_genai(q: QuestionRecord) -> PromptBundle:
    """Direct-questioning prompt; no retrieved material is referenced."""
    text = fill(GENAI_TEMPLATE, topic=q.title, body=q.body)
    return PromptBundle(mode="genai", text=text)


def assemble_rag(q: QuestionRecord, textbook_title: str, chunks: list[Chunk]) -> PromptBundle:
    """Retrieval prompt over the primary question's chunks."""
    if not chunks:
        raise ValueError("rag mode needs at least one chunk; fall back to genai explicitly")
    text = fill(
        RAG_TEMPLATE,
        textbook=textbook_title,
        topic=q.title,
        body=q.body,
        contents=render_contents(chunks),
    )
    return PromptBundle(
        mode="rag", text=text, retrieved_chunk_ids=tuple(c.id for c in chunks)
    )


def assemble_rag_coi(
    q: QuestionRecord,
    textbook_title: str,
    primary_chunks: list[Chunk],
    plan: IllocutionPlan,
) -> PromptBundle:
    """Retrieval prompt extended with the plan's question-context pairs.

    Each selected implicit question contributes a block appended after the
    primary contents section, in plan (descending best-score) order. With
    an empty plan the text is byte-identical to :func:`assemble_rag`.
    """
    if not primary_chunks and not plan.selected:
        raise ValueError("rag_coi needs primary chunks or a non-empty plan")
    sections = [render_contents(primary_chunks)] if primary_chunks else []
    for i, sel in enumerate(plan.selected, start=1):
        block = (
            f"Implicit question {i}: {sel.question.text}\n"
            "Context:\n"
            + render_contents([c for c, _ in sel.chunks])
        )
        sections.append(block)
    text = fill(
        RAG_TEMPLATE,
        textbook=textbook_title,
        topic=q.title,
        body=q.body,
        contents="\n\n".join(sections),
    )
    chunk_ids = [c.id for c in primary_chunks] + plan.chunk_ids()
    return PromptBundle(
        mode="rag_coi", text=text, retrieved_chunk_ids=tuple(chunk_ids), plan=plan
    )


def generate(bundle: PromptBundle, provider, question_id: str = "") -> Explanation:
    """Run one chat completion for a bundle; responses are cached upstream."""
    if not bundle.text.strip():
        raise ValueError("bundle text is empty")
    request = GenerationRequest(
        model_id=getattr(provider, "model_id", "unknown"),
        prompt=bundle.text,
        temperature=bundle.decoding[0],
        top_p=bundle.decoding[1],
    )
    result: GenerationResult = provider.complete(request)
    return Explanation(
        question_id=question_id,
        mode=bundle.mode,
        model_id=request.model_id,
        text=result.text,
        decoding=bundle.decoding,
        created_at=result.created_at,
    )


# ---------------------------------------------------------------------------
# Display cleanup
# ---------------------------------------------------------------------------

_BRACKETED = re.compile(r"\[[^\[\]]*\]")
_PARENTHESIZED = re.compile(r"\(([^()]*)\)")
_SOURCE_WORDS = re.compile(r"\bpages?\b|\bpp?\.", re.IGNORECASE)


def strip_citations(text: str, textbook_title: str | None = None) -> str:
    """Remove citation markers before display or clause extraction.

    Square-bracketed spans go unconditionally; parenthesized spans go only
    when their content looks like a source annotation (mentions pages or
    the textbook title), so math like "f(x)" survives. Idempotent.
    """

    def drop_source_parens(m: re.Match) -> str:
        inner = m.group(1)
        if _SOURCE_WORDS.search(inner):
            return ""
        if textbook_title and textbook_title.lower() in inner.lower():
            return ""
        return m.group(0)

    out = text
    while True:  # nested markers unwrap one level per pass
        cleaned = _BRACKETED.sub("", out)
        cleaned = _PARENTHESIZED.sub(drop_source_parens, cleaned)
        if cleaned == out:
            break
        out = cleaned
    out = re.sub(r" {2,}", " ", out)
    out = re.sub(r" +([.,;:!?])", r"\1", out)
    out = re.sub(r" +$", "", out, flags=re.MULTILINE)
    return out
