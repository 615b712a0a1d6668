"""Offline bank of implicit questions extracted from source chunks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .adherence import Clause, extract_clauses
from .corpus import Chunk
from .providers import GenerationRequest
from .records import QuestionRecord
from .templates import QA_EXTRACTION_TEMPLATE, fill
from .vector_index import VectorIndex, build_index


@dataclass(frozen=True)
class ImplicitQuestion:
    id: str
    question: str
    answer: str
    source_chunk_id: str
    tag: str

    def __post_init__(self) -> None:
        if not self.question.strip():
            raise ValueError("implicit question text must be non-empty")


class QuestionBank:
    """Implicit questions plus a vector index over their texts."""

    def __init__(self, questions: list[ImplicitQuestion], embedder):
        self.questions = list(questions)
        self._by_id = {q.id: q for q in self.questions}
        if len(self._by_id) != len(self.questions):
            raise ValueError("duplicate question ids in bank")
        self.index: VectorIndex | None = None
        if self.questions:
            self.index = build_index(
                [(q.id, q.question, q.id) for q in self.questions], embedder
            )

    def __len__(self) -> int:
        return len(self.questions)

    def by_id(self, qid: str) -> ImplicitQuestion:
        return self._by_id[qid]

    def save(self, bank_path: str | Path, index_path: str | Path | None = None) -> None:
        with open(bank_path, "w", encoding="utf-8") as fh:
            for q in self.questions:
                rec = {
                    "id": q.id,
                    "question": q.question,
                    "answer": q.answer,
                    "source_chunk_id": q.source_chunk_id,
                    "tag": q.tag,
                }
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
        if index_path is not None and self.index is not None:
            self.index.save(index_path)

    @classmethod
    def load(cls, bank_path: str | Path, embedder) -> "QuestionBank":
        questions = []
        with open(bank_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                questions.append(ImplicitQuestion(**rec))
        return cls(questions, embedder)


def parse_qa_lines(response: str) -> tuple[list[tuple[str, str]], int]:
    """Parse dash-prefixed "question? answer" lines from a generator reply.

    Splits each "- ..." line at the first question mark; the question keeps
    it, the answer is what follows, trimmed. Returns the pairs and the
    number of lines that could not be parsed.
    """
    pairs: list[tuple[str, str]] = []
    skipped = 0
    for raw in response.splitlines():
        line = raw.strip()
        if not line.startswith("-"):
            continue
        body = line[1:].strip()
        qmark = body.find("?")
        if qmark < 0 or not body[:qmark].strip():
            skipped += 1
            continue
        question = body[: qmark + 1].strip()
        answer = body[qmark + 1:].strip()
        pairs.append((question, answer))
    return pairs, skipped


def extract_qas(paragraph: str, generator) -> list[tuple[str, str]]:
    """Ask the generator for Q&As over one paragraph and parse its reply."""
    if not paragraph.strip():
        raise ValueError("paragraph must be non-empty")
    prompt = fill(QA_EXTRACTION_TEMPLATE, sentence=paragraph)
    result = generator.complete(
        GenerationRequest(
            model_id=getattr(generator, "model_id", "unknown"),
            prompt=prompt,
            temperature=0.5,
            top_p=0.0,
        )
    )
    pairs, _skipped = parse_qa_lines(result.text)
    return pairs


def build_bank(
    chunks: list[Chunk],
    generator,
    embedder,
    tag: str = "",
    checkpoint_path: str | Path | None = None,
) -> QuestionBank:
    """Extract implicit questions from every chunk and index them.

    A chunk plays the role of a paragraph. When ``checkpoint_path`` is
    given, per-chunk results are appended there as they complete and
    already-processed chunks are skipped on re-entry, so a long extraction
    run can resume after a provider failure.
    """
    done: dict[str, list[dict]] = {}
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        with open(checkpoint_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                done.setdefault(rec["source_chunk_id"], []).append(rec)

    questions: list[ImplicitQuestion] = []
    ckpt = open(checkpoint_path, "a", encoding="utf-8") if checkpoint_path else None
    try:
        for c in chunks:
            if c.id in done:
                for rec in done[c.id]:
                    questions.append(ImplicitQuestion(**rec))
                continue
            pairs = extract_qas(c.text, generator)
            for i, (q, a) in enumerate(pairs):
                rec = {
                    "id": f"{c.id}#q{i}",
                    "question": q,
                    "answer": a,
                    "source_chunk_id": c.id,
                    "tag": tag,
                }
                questions.append(ImplicitQuestion(**rec))
                if ckpt:
                    ckpt.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
            if ckpt:
                ckpt.flush()
    finally:
        if ckpt:
            ckpt.close()
    return QuestionBank(questions, embedder)


def template_questions(
    primary: QuestionRecord,
    clause_extractor: Callable[[str], list[Clause]] | None = None,
) -> list[str]:
    """Generate "What is {X}?" questions from the primary question's labels.

    X ranges over the distinct subject and object labels of the clauses
    found in the question text, in order of first appearance, deduplicated
    case-insensitively. Only the "what" archetype is generated; other
    templates add too little to be worth their noise.
    """
    extractor = clause_extractor or extract_clauses
    labels: list[str] = []
    seen: set[str] = set()
    for clause in extractor(primary.query_text()):
        for label in (clause.subject, clause.object):
            cleaned = label.strip().rstrip("?.!,;:")
            if not cleaned:
                continue
            key = cleaned.lower()
            if key in seen:
                continue
            seen.add(key)
            labels.append(cleaned)
    return [f"What is {label}?" for label in labels]
