"""Illocution planning: pick implicit questions and assign them evidence.

Given a primary question, the planner over-generates a candidate pool of
implicit questions (bank retrieval plus "What is {X}?" templates), fetches
supporting chunks for each, deduplicates chunks so each belongs to exactly
one candidate, and keeps the best few candidates as the explanatory
scaffold for prompt assembly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import Chunk
from .question_bank import QuestionBank, template_questions
from .records import QuestionRecord
from .vector_index import VectorIndex


@dataclass(frozen=True)
class CandidateQuestion:
    text: str
    origin: str  # "bank" or "template"
    question_vector: np.ndarray

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("candidate question text must be non-empty")


@dataclass(frozen=True)
class SelectedQuestion:
    question: CandidateQuestion
    chunks: tuple[tuple[Chunk, float], ...]  # non-empty, scores descending
    best_score: float


@dataclass
class IllocutionPlan:
    primary: QuestionRecord
    selected: list[SelectedQuestion] = field(default_factory=list)
    # Chunk ids shared between the primary retrieval and the implicit
    # contexts; duplicates there are allowed but worth surfacing.
    primary_overlap_ids: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.selected)

    def chunk_ids(self) -> list[str]:
        return [c.id for sel in self.selected for c, _ in sel.chunks]

    def to_json(self) -> dict:
        return {
            "primary_id": self.primary.id,
            "selected": [
                {
                    "question": sel.question.text,
                    "origin": sel.question.origin,
                    "best_score": sel.best_score,
                    "chunks": [
                        {"id": c.id, "score": score} for c, score in sel.chunks
                    ],
                }
                for sel in self.selected
            ],
            "primary_overlap_ids": self.primary_overlap_ids,
        }


def pool_ratio_check(pool_size: int, keep: int) -> bool:
    """True when the candidate pool is at least five times the kept count.

    A configuration lint, not a hard constraint: a thinner pool leaves the
    planner little room to discard unsupported or duplicate candidates.
    """
    return pool_size >= 5 * keep


def plan(
    primary: QuestionRecord,
    bank: QuestionBank,
    chunk_index: VectorIndex,
    embedder,
    pool_size: int = 25,
    per_question_chunks: int = 10,
    keep: int = 5,
    clause_extractor=None,
) -> IllocutionPlan:
    """Build the explanatory scaffold for one primary question.

    Steps: (1) retrieve the top ``pool_size`` bank questions by cosine to
    the primary query text; (2) append template questions; (3) retrieve up
    to ``per_question_chunks`` chunks per candidate; (4) assign each chunk
    only to the candidate scoring it highest (ties favor earlier pool
    order), dropping candidates left chunkless; (5) rank survivors by best
    remaining chunk score and keep the top ``keep``.

    With an empty bank and no template labels the plan is empty and
    downstream generation degrades to plain retrieval.
    """
    if keep > pool_size:
        raise ValueError("keep must be <= pool_size")
    if len(chunk_index) == 0:
        raise ValueError("chunk index is empty")

    # Step 1: candidate pool from the bank.
    candidates: list[CandidateQuestion] = []
    if len(bank) > 0:
        query_vec = embedder.embed([primary.query_text()])[0]
        for qid, _score in bank.index.top_k(query_vec, pool_size):
            candidates.append(
                CandidateQuestion(
                    text=bank.by_id(qid).question,
                    origin="bank",
                    question_vector=bank.index.vector(qid),
                )
            )

    # Step 2: template questions augment the pool.
    template_texts = template_questions(primary, clause_extractor)
    if template_texts:
        template_vecs = embedder.embed(template_texts)
        for text, vec in zip(template_texts, template_vecs):
            candidates.append(
                CandidateQuestion(text=text, origin="template", question_vector=vec)
            )

    if not candidates:
        return IllocutionPlan(primary=primary)

    # Step 3: per-candidate chunk retrieval.
    retrieved: list[list[tuple[str, float]]] = []
    for cand in candidates:
        hits = chunk_index.top_k(cand.question_vector, per_question_chunks)
        retrieved.append(hits)

    # Step 4: every chunk goes to the candidate that scores it highest;
    # ties break toward earlier pool order.
    owner: dict[str, tuple[float, int]] = {}
    for ci, hits in enumerate(retrieved):
        for chunk_id, score in hits:
            held = owner.get(chunk_id)
            if held is None or score > held[0]:
                owner[chunk_id] = (score, ci)
    surviving: list[list[tuple[str, float]]] = [
        [(cid, s) for cid, s in hits if owner[cid][1] == ci]
        for ci, hits in enumerate(retrieved)
    ]

    # Step 5: rank by best surviving chunk score, keep the top few.
    ranked = [
        (ci, hits) for ci, hits in enumerate(surviving) if hits
    ]
    ranked.sort(key=lambda item: (-item[1][0][1], item[0]))

    selected = []
    for ci, hits in ranked[:keep]:
        selected.append(
            SelectedQuestion(
                question=candidates[ci],
                chunks=tuple((chunk_index.payload(cid), s) for cid, s in hits),
                best_score=hits[0][1],
            )
        )
    return IllocutionPlan(primary=primary, selected=selected)


def flag_primary_overlap(p: IllocutionPlan, primary_chunks: list[Chunk]) -> IllocutionPlan:
    """Record which plan chunks also appear in the primary retrieval."""
    primary_ids = {c.id for c in primary_chunks}
    p.primary_overlap_ids = sorted(set(p.chunk_ids()) & primary_ids)
    return p


def plans_to_jsonl(plans: list[IllocutionPlan], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in plans:
            fh.write(json.dumps(p.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
