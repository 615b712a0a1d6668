from __future__ import annotations

from pathlib import Path

import pytest

from coi_rag.providers import HashedEmbedder

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def golden_dir() -> Path:
    return FIXTURES / "golden"


@pytest.fixture
def hashed64() -> HashedEmbedder:
    return HashedEmbedder(dims=64)


@pytest.fixture
def hashed256() -> HashedEmbedder:
    return HashedEmbedder(dims=256)


class SpyEmbedder:
    """HashedEmbedder wrapper that records every embedded text."""

    def __init__(self, dims: int = 256):
        self.inner = HashedEmbedder(dims=dims)
        self.dims = dims
        self.texts: list[str] = []

    def embed(self, texts):
        self.texts.extend(texts)
        return self.inner.embed(texts)

    def embed_raw(self, text):
        return self.inner.embed_raw(text)


@pytest.fixture
def spy_embedder() -> SpyEmbedder:
    return SpyEmbedder()
