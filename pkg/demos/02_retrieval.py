"""Dense retrieval with hashed embeddings and exact top-k cosine search.

The hashed embedder maps each token to one of `dims` buckets with a
stable hash and L2-normalizes the count vector. It needs no network and
is deterministic, which makes retrieval behavior easy to reason about:
cosine similarity is exactly the token-overlap geometry.
"""

from pathlib import Path

from coi_rag import HashedEmbedder, build_index, chunk, cosine, read_document

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden"

embedder = HashedEmbedder(dims=256)

a, b = embedder.embed(["cat dog", "cat"])
print(f"cosine('cat dog', 'cat') = {cosine(a, b):.4f}  (= 1/sqrt(2))")

doc = read_document(FIXTURE / "vex_book.txt", doc_id="vex")
chunks = chunk(doc)
index = build_index([(c.id, c.text, c) for c in chunks], embedder)
print(f"\nindex: {len(index)} chunks, dims {index.dims}")

query = "How does a vex list grow when the backing buffer is full?"
qvec = embedder.embed([query])[0]
print(f"query: {query}")
for key, score in index.top_k(qvec, 3):
    text = index.payload(key).text
    print(f"  {score:.3f}  {key:<14} {text[:70]}...")

# Exact search: identical to a full linear scan, ties broken by key.
import numpy as np

scores = index.vectors @ qvec
best = sorted(range(len(index)), key=lambda i: (-scores[i], index.keys[i]))[0]
assert index.keys[best] == index.top_k(qvec, 1)[0][0]
print("\ntop-1 equals a brute-force linear scan")
