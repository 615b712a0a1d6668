"""Embedding and generation providers, plus the on-disk call cache.

Two provider families exist for each role: a remote one speaking an
OpenAI-compatible HTTP API, and a hermetic one (hashed embeddings,
scripted generators) that keeps tests and demos fully offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
import requests


class ProviderError(RuntimeError):
    """A provider call failed after all retry attempts."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


def request_hash(payload: dict) -> str:
    """Stable content hash of a request payload (canonical JSON, sha256)."""
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class CallCache:
    """Directory-backed map from request-content hash to response payload.

    Writes go through a temp file and ``os.replace`` so an interrupted run
    never leaves a truncated entry. Hits return the stored payload
    byte-for-byte as first written.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> dict | None:
        p = self._path(key)
        if not p.exists():
            return None
        return json.loads(p.read_text(encoding="utf-8"))

    def put(self, key: str, payload: dict) -> None:
        p = self._path(key)
        tmp = p.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )
        os.replace(tmp, p)


def _post_with_retries(
    url: str,
    body: dict,
    headers: dict,
    transport: Callable[[str, dict, dict], dict] | None,
    retries: int = 3,
    backoff: float = 0.5,
) -> dict:
    """POST JSON with bounded retries and exponential backoff."""
    last_exc: Exception | None = None
    for attempt in range(1, retries + 1):
        try:
            if transport is not None:
                return transport(url, body, headers)
            resp = requests.post(url, json=body, headers=headers, timeout=60)
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:  # transport, HTTP, or decode failure
            last_exc = exc
            if attempt < retries:
                time.sleep(backoff * (2 ** (attempt - 1)))
    raise ProviderError(f"request to {url} failed: {last_exc}", attempts=retries)


# ---------------------------------------------------------------------------
# Embedding providers
# ---------------------------------------------------------------------------


def _token_bucket(token: str, dims: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dims


class HashedEmbedder:
    """Deterministic bag-of-words embedder.

    Each whitespace token is hashed (stable 64-bit digest) into one of
    ``dims`` buckets; the count vector is L2-normalized. No network, no
    state: the same text always maps to the same unit vector.
    """

    def __init__(self, dims: int = 256):
        if dims <= 0:
            raise ValueError("dims must be positive")
        self.dims = dims

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dims))
        out = np.zeros((len(texts), self.dims))
        for i, text in enumerate(texts):
            if not text.strip():
                raise ValueError(f"cannot embed empty text at position {i}")
            out[i] = self.embed_raw(text)
            out[i] /= np.linalg.norm(out[i])
        return out

    def embed_raw(self, text: str) -> np.ndarray:
        """Unnormalized token-count vector; zero vector for empty text."""
        v = np.zeros(self.dims)
        for tok in text.split():
            v[_token_bucket(tok, self.dims)] += 1.0
        return v


class RemoteEmbedder:
    """OpenAI-compatible embeddings client with caching and retries."""

    def __init__(
        self,
        model_id: str,
        endpoint: str = "https://api.openai.com/v1",
        api_key_env: str = "OPENAI_API_KEY",
        cache: CallCache | None = None,
        transport: Callable[[str, dict, dict], dict] | None = None,
        retries: int = 3,
        backoff: float = 0.5,
    ):
        self.model_id = model_id
        self.endpoint = endpoint.rstrip("/")
        self.api_key_env = api_key_env
        self.cache = cache
        self.transport = transport
        self.retries = retries
        self.backoff = backoff
        self.dims: int | None = None  # learned from the first response

    def _headers(self) -> dict:
        key = os.environ.get(self.api_key_env, "")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def embed(self, texts: list[str]) -> np.ndarray:
        for i, t in enumerate(texts):
            if not t.strip():
                raise ValueError(f"cannot embed empty text at position {i}")
        vectors: list[list[float]] = []
        for text in texts:
            body = {"model": self.model_id, "input": [text]}
            key = request_hash({"endpoint": "embeddings", **body})
            payload = self.cache.get(key) if self.cache else None
            if payload is None:
                payload = _post_with_retries(
                    f"{self.endpoint}/embeddings",
                    body,
                    self._headers(),
                    self.transport,
                    retries=self.retries,
                    backoff=self.backoff,
                )
                if self.cache:
                    self.cache.put(key, payload)
            vectors.append(payload["data"][0]["embedding"])
        arr = np.asarray(vectors, dtype=float)
        norms = np.linalg.norm(arr, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ProviderError("embedding service returned a zero vector")
        arr = arr / norms
        self.dims = arr.shape[1]
        return arr


# ---------------------------------------------------------------------------
# Generation providers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenerationRequest:
    model_id: str
    prompt: str
    temperature: float
    top_p: float

    def payload(self) -> dict:
        return {
            "model": self.model_id,
            "messages": [{"role": "user", "content": self.prompt}],
            "temperature": self.temperature,
            "top_p": self.top_p,
        }


@dataclass
class GenerationResult:
    text: str
    created_at: str
    from_cache: bool = False


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class RemoteGenerator:
    """OpenAI-compatible chat-completions client with caching and retries."""

    kind = "remote"

    def __init__(
        self,
        model_id: str,
        endpoint: str = "https://api.openai.com/v1",
        api_key_env: str = "OPENAI_API_KEY",
        cache: CallCache | None = None,
        transport: Callable[[str, dict, dict], dict] | None = None,
        retries: int = 3,
        backoff: float = 0.5,
    ):
        self.model_id = model_id
        self.endpoint = endpoint.rstrip("/")
        self.api_key_env = api_key_env
        self.cache = cache
        self.transport = transport
        self.retries = retries
        self.backoff = backoff

    def _headers(self) -> dict:
        key = os.environ.get(self.api_key_env, "")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def complete(self, request: GenerationRequest) -> GenerationResult:
        body = request.payload()
        key = request_hash({"endpoint": "chat", **body})
        cached = self.cache.get(key) if self.cache else None
        if cached is not None:
            return GenerationResult(
                text=cached["text"], created_at=cached["created_at"], from_cache=True
            )
        response = _post_with_retries(
            f"{self.endpoint}/chat/completions",
            body,
            self._headers(),
            self.transport,
            retries=self.retries,
            backoff=self.backoff,
        )
        try:
            text = response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat response: {exc}", attempts=1)
        if not text or not text.strip():
            raise ProviderError("empty completion from generator", attempts=1)
        payload = {"text": text, "created_at": _now_iso()}
        if self.cache:
            self.cache.put(key, payload)
        return GenerationResult(text=text, created_at=payload["created_at"])


_SENTENCE_RE = re.compile(r"[A-Z][^.!?\n]*[.!]")
_BLOCK_HEADER_RE = re.compile(
    r"^(Page \d+-\d+:|Context:|Text chunks:|Implicit question \d+: .*|Question:|#.*)$"
)


def _context_sentences(prompt: str) -> list[str]:
    """Complete sentences from the evidence blocks of a prompt.

    Everything before the first ``Text chunks:`` marker (the instructions
    and the question) is discarded, as are block-header lines; what remains
    is scanned for capitalized sentences ending in terminal punctuation.
    Order of first appearance is kept; duplicates are dropped.
    """
    marker = "Text chunks:"
    idx = prompt.find(marker)
    if idx < 0:
        return []
    body = prompt[idx + len(marker):]
    kept = [ln for ln in body.splitlines() if not _BLOCK_HEADER_RE.match(ln.strip())]
    seen: set[str] = set()
    sentences: list[str] = []
    for m in _SENTENCE_RE.finditer("\n".join(kept)):
        s = " ".join(m.group(0).split())
        if s not in seen:
            seen.add(s)
            sentences.append(s)
    return sentences


_ECHO_PREAMBLE = (
    "Here follows an explanation assembled from the supplied reference excerpts. "
    "Several broad remarks appear first because assistants typically add framing. "
    "Readers should weigh unsourced framing differently than quoted material. "
    "Everything past this point restates whichever excerpts were provided."
)


def _behavior_context_echo(prompt: str) -> str:
    """Answer by restating every complete sentence found in the context."""
    sentences = _context_sentences(prompt)
    if not sentences:
        first_line = next(
            (ln for ln in prompt.splitlines() if ln.startswith("#")), "#the question"
        )
        return f"{_ECHO_PREAMBLE} No reference material was given for {first_line.lstrip('#')}"
    return " ".join([_ECHO_PREAMBLE] + sentences)


def _behavior_context_echo_short(prompt: str) -> str:
    """Like ``context_echo`` but keeps every other context sentence."""
    sentences = _context_sentences(prompt)
    if not sentences:
        return _behavior_context_echo(prompt)
    return " ".join([_ECHO_PREAMBLE] + sentences[::2])


def _behavior_qa_stub(prompt: str) -> str:
    """Emit deterministic dash-list Q&As for a question-extraction prompt."""
    marker = "Paragraph for Analysis:"
    idx = prompt.find(marker)
    paragraph = prompt[idx + len(marker):].strip() if idx >= 0 else prompt
    lines = []
    for m in _SENTENCE_RE.finditer(paragraph):
        words = m.group(0).rstrip(".!").split()
        if len(words) < 4:
            continue
        topic = " ".join(words[:3])
        lines.append(f"- What is {topic}? {' '.join(words[3:])}.")
        if len(lines) >= 2:
            break
    return "\n".join(lines) if lines else "- What is this passage? A short fragment."


SCRIPTED_BEHAVIORS: dict[str, Callable[[str], str]] = {
    "context_echo": _behavior_context_echo,
    "context_echo_short": _behavior_context_echo_short,
    "qa_stub": _behavior_qa_stub,
}


@dataclass
class ScriptedGenerator:
    """Deterministic offline generator.

    Responses come from an explicit request-hash -> text mapping, from a
    named builtin behavior, or from a caller-supplied function of the
    prompt text, checked in that order.
    """

    kind = "scripted"
    model_id: str = "scripted"
    script: dict[str, str] = field(default_factory=dict)
    behavior: str | None = None
    fn: Callable[[str], str] | None = None
    cache: CallCache | None = None

    def complete(self, request: GenerationRequest) -> GenerationResult:
        key = request_hash({"endpoint": "chat", **request.payload()})
        cached = self.cache.get(key) if self.cache else None
        if cached is not None:
            return GenerationResult(
                text=cached["text"], created_at=cached["created_at"], from_cache=True
            )
        if key in self.script:
            text = self.script[key]
        elif self.behavior is not None:
            if self.behavior not in SCRIPTED_BEHAVIORS:
                raise ProviderError(f"unknown scripted behavior: {self.behavior}")
            text = SCRIPTED_BEHAVIORS[self.behavior](request.prompt)
        elif self.fn is not None:
            text = self.fn(request.prompt)
        else:
            raise ProviderError(f"scripted generator has no entry for request {key[:12]}")
        if not text.strip():
            raise ProviderError("scripted generator produced empty text")
        payload = {"text": text, "created_at": _now_iso()}
        if self.cache:
            self.cache.put(key, payload)
        return GenerationResult(text=text, created_at=payload["created_at"])
