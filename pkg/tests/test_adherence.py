from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coi_rag.adherence import (
    AdherenceReport,
    Clause,
    ClauseMatch,
    adherent_count,
    build_source_index,
    evaluate_text,
    extract_clauses,
    factscore,
    match_clauses,
    mean_similarity,
    threshold_sweep,
)
from coi_rag.providers import HashedEmbedder
from coi_rag.vector_index import cosine

SOURCE_TEXT = (
    "The parser reads one token at a time. "
    "Every symbol lives inside a flat table. "
    "The compiler checks each declaration before use. "
    "A stack frame holds the local bindings. "
    "The allocator returns aligned memory blocks. "
    "Each module exports a single namespace."
)


@pytest.fixture
def source(hashed256):
    return build_source_index([SOURCE_TEXT], hashed256)


def fake_matches(similarities):
    clause = Clause("s", "is", "o", 0)
    return [ClauseMatch(clause, f"src:{i}", s) for i, s in enumerate(similarities)]


class TestExtractClauses:
    def test_simple_svo(self):
        got = extract_clauses("Alice explores the Rocky Mountains.")
        assert got == [Clause("Alice", "explores", "the Rocky Mountains", 0)]

    def test_verbless_sentence_yields_nothing(self):
        assert extract_clauses("Yes.") == []

    def test_two_sentences_two_indexes(self):
        got = extract_clauses("She packs her gear. She is tired.")
        assert [c.sentence_index for c in got] == [0, 1]
        assert got[0] == Clause("She", "packs", "her gear", 0)
        assert got[1].predicate.startswith("is")

    def test_empty_text(self):
        assert extract_clauses("") == []

    def test_auxiliary_verb_group(self):
        got = extract_clauses("The value has been cached by the runtime.")
        assert len(got) == 1
        assert got[0].subject == "The value"
        assert got[0].predicate.startswith("has been")

    def test_leading_verb_sentence_skipped(self):
        # No token before the only verb-like word: no subject, no clause.
        assert extract_clauses("Runs.") == []


class TestMatchClauses:
    def test_identical_clause_scores_one_both_modes(self, source, hashed256):
        ai = [Clause("The parser", "reads", "one token at a time", 0)]
        for mode in ("whole_clause", "component_weighted"):
            m = match_clauses(ai, source, hashed256, mode=mode)
            assert m[0].similarity == pytest.approx(1.0, abs=1e-9)

    def test_component_two_thirds(self, source, hashed256):
        ai = [Clause("The parser", "reads", "zebra xylophone", 0)]
        m = match_clauses(ai, source, hashed256, mode="component_weighted")
        assert m[0].similarity == pytest.approx(2 / 3, abs=1e-9)

    def test_unknown_mode_rejected(self, source, hashed256):
        with pytest.raises(ValueError):
            match_clauses([Clause("a", "is", "b", 0)], source, hashed256, mode="fuzzy")

    def test_whole_mode_matches_brute_force(self, source, hashed256):
        rng = np.random.default_rng(5)
        words = SOURCE_TEXT.replace(".", "").split() + ["quark", "zeppelin"]
        for _ in range(25):
            subject = " ".join(rng.choice(words, 2))
            obj = " ".join(rng.choice(words, 3))
            ai = [Clause(subject, "holds", obj, 0)]
            got = match_clauses(ai, source, hashed256)[0]
            rendering = hashed256.embed([ai[0].render()])[0]
            best = max(
                cosine(rendering, source.whole.vector(k)) for k in source.keys
            )
            assert got.similarity == pytest.approx(min(1.0, max(0.0, best)), abs=1e-12)

    def test_component_mode_matches_brute_force(self, source, hashed256):
        rng = np.random.default_rng(6)
        words = SOURCE_TEXT.replace(".", "").split()
        for _ in range(15):
            ai_clause = Clause(
                " ".join(rng.choice(words, 2)),
                str(rng.choice(words, 1)[0]),
                " ".join(rng.choice(words, 2)),
                0,
            )
            got = match_clauses([ai_clause], source, hashed256, mode="component_weighted")[0]
            best = -1.0
            for src_clause in source.clauses:
                total = 0.0
                for part in ("subject", "predicate", "object"):
                    a_text = getattr(ai_clause, part)
                    s_text = getattr(src_clause, part)
                    if not a_text.strip() and not s_text.strip():
                        total += 1.0
                    elif not a_text.strip() or not s_text.strip():
                        total += 0.0
                    else:
                        total += cosine(*hashed256.embed([a_text, s_text]))
                best = max(best, total / 3)
            assert got.similarity == pytest.approx(min(1.0, max(0.0, best)), abs=1e-12)


class TestScores:
    def test_factscore_all_ones(self):
        assert factscore(fake_matches([1.0, 1.0, 1.0]), 1.0) == 1.0

    def test_factscore_half(self):
        assert factscore(fake_matches([0.9, 0.5]), 0.7) == 0.5

    def test_factscore_t_zero_is_one(self):
        assert factscore(fake_matches([0.3, 0.01, 0.0]), 0.0) == 1.0

    def test_factscore_empty_is_error(self):
        with pytest.raises(ValueError):
            factscore([], 0.7)

    def test_mean_similarity(self):
        assert mean_similarity(fake_matches([1.0, 1.0])) == 1.0
        assert mean_similarity(fake_matches([0.8, 0.6])) == pytest.approx(0.7)
        with pytest.raises(ValueError):
            mean_similarity([])

    def test_adherent_count(self):
        assert adherent_count(fake_matches([0.9, 0.71, 0.69]), 0.7) == 2
        with pytest.raises(ValueError):
            adherent_count([], 0.7)

    def test_threshold_sweep_examples(self):
        assert threshold_sweep(fake_matches([1.0]), [0.6, 0.7, 0.8]) == [
            (0.6, 1.0), (0.7, 1.0), (0.8, 1.0),
        ]
        got = threshold_sweep(fake_matches([0.65, 0.75]), [0.6, 0.7, 0.8])
        assert [f for _, f in got] == [1.0, 0.5, 0.0]

    def test_threshold_sweep_requires_sorted(self):
        with pytest.raises(ValueError):
            threshold_sweep(fake_matches([0.5]), [0.8, 0.2])

    @given(
        st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=30),
        st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=5),
    )
    @settings(max_examples=100, deadline=None)
    def test_sweep_non_increasing_and_counts_exact(self, sims, ts):
        matches = fake_matches(sims)
        ts = sorted(ts)
        scores = [f for _, f in threshold_sweep(matches, ts)]
        assert all(a >= b for a, b in zip(scores, scores[1:]))
        for t in ts:
            brute = sum(1 for s in sims if s >= t)
            assert adherent_count(matches, t) == brute
            assert factscore(matches, t) * len(sims) == pytest.approx(brute)

    def test_monotonicity_in_threshold(self):
        matches = fake_matches([0.2, 0.5, 0.7, 0.9])
        assert factscore(matches, 0.3) >= factscore(matches, 0.8)


class TestOracles:
    def test_verbatim_copy_scores_perfectly(self, source, hashed256):
        copied = (
            "The parser reads one token at a time. "
            "A stack frame holds the local bindings. "
            "Each module exports a single namespace."
        )
        report = evaluate_text(copied, source, hashed256, t=0.7)
        assert report.factscore == 1.0
        assert report.mean_similarity == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_vocabulary_scores_zero(self, source, hashed256):
        alien = "Quartz umbrellas juggle vivid xylophones. Zebras quietly fumigate jaded herons."
        report = evaluate_text(alien, source, hashed256, t=0.7)
        assert report.factscore == 0.0

    def test_zero_clause_text_unevaluable(self, source, hashed256):
        assert evaluate_text("Yes. No. Maybe.", source, hashed256) is None

    def test_report_identity(self, source, hashed256):
        text = "The parser reads one token at a time. Purple quasars vibrate."
        report = evaluate_text(text, source, hashed256, t=0.7)
        assert report.factscore * report.clause_count == pytest.approx(report.adherent_count)
        assert report.word_count == len(text.split())

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            AdherenceReport("q", "rag", 0.7, 0.5, 0.5, 3, 2, 10)
