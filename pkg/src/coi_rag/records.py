"""Question records shared by the planner, prompting, and the bench."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class QuestionRecord:
    """One user question with its forum metadata."""

    id: str
    tag: str
    title: str
    body: str
    accepted_answer: str
    views: int

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError(f"question {self.id!r} has an empty title")

    def query_text(self) -> str:
        """Retrieval query: title and body joined by a newline."""
        if not self.body.strip():
            return self.title
        return f"{self.title}\n{self.body}"
