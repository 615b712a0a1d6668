"""Chunk a source document into overlapping token windows.

Documents are split into 150-token windows that start every 75 tokens
(so consecutive windows share half their tokens), and a trailing window
shorter than 100 tokens folds into its predecessor. Page sentinels in the
source file become page provenance on every chunk.
"""

from pathlib import Path

from coi_rag import chunk, read_document

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden"

doc = read_document(FIXTURE / "vex_book.txt", doc_id="vex", title="The Vex Language Handbook")
print(f"document: {doc.title!r}, {len(doc.tokens)} tokens, "
      f"{len(doc.page_offsets)} page markers")

chunks = chunk(doc, size=150, overlap=75, min_tokens=100)
print(f"chunks: {len(chunks)}")
for c in chunks[:4]:
    print(f"  {c.id:<16} tokens [{c.token_start:4d}, {c.token_end:4d})  "
          f"pages {c.page_span[0]}-{c.page_span[1]}")
print("  ...")
tail = chunks[-1]
print(f"  {tail.id:<16} tokens [{tail.token_start:4d}, {tail.token_end:4d})  "
      f"pages {tail.page_span[0]}-{tail.page_span[1]}")

# Every token is covered, and consecutive full windows overlap by exactly 75.
covered = set()
for c in chunks:
    covered.update(range(c.token_start, c.token_end))
assert covered == set(range(len(doc.tokens)))
print("coverage: every token lies in at least one chunk")

first, second = chunks[0], chunks[1]
shared = min(first.token_end, second.token_end) - second.token_start
print(f"overlap between first two chunks: {shared} tokens")
