"""Staged experiment pipeline.

Stages (each also a CLI subcommand) communicate through files in the
output directory: ``ingest`` writes chunks and the chunk indexes,
``build-bank`` the implicit-question banks, ``plan`` the illocution plans,
``answer`` the generated explanations, ``evaluate`` the per-item adherence
records, ``analyze`` the statistical comparisons, and ``report`` the
aggregate CSV and plots. ``run`` chains all of them and writes a manifest
of content hashes.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .. import planner as planner_mod
from ..adherence import build_source_index, evaluate_text
from ..corpus import Chunk, chunk, chunks_from_jsonl, chunks_to_jsonl, read_document
from ..planner import CandidateQuestion, IllocutionPlan, SelectedQuestion
from ..prompting import assemble_genai, assemble_rag, assemble_rag_coi, generate
from ..providers import CallCache, ProviderError
from ..question_bank import QuestionBank, build_bank
from ..records import QuestionRecord
from ..vector_index import VectorIndex, build_index
from .config import ExperimentConfig
from .report import write_analysis, write_csv_and_plots


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def load_questions(path: str | Path, allowed_tags: set[str] | None = None) -> list[QuestionRecord]:
    """Read the question dataset (JSON Lines).

    Required fields per line: id, tag, title, body, accepted_answer,
    views. Records come back ordered by (tag, views descending, id) so
    every run sees the same sequence.
    """
    required = ("id", "tag", "title", "body", "accepted_answer", "views")
    records: list[QuestionRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON ({exc})") from exc
            for fld in required:
                if fld not in rec:
                    raise ValueError(f"{path}:{lineno}: missing field {fld!r}")
            if rec["id"] in seen:
                raise ValueError(f"{path}:{lineno}: duplicate question id {rec['id']!r}")
            seen.add(rec["id"])
            if allowed_tags is not None and rec["tag"] not in allowed_tags:
                raise ValueError(
                    f"{path}:{lineno}: tag {rec['tag']!r} has no configured corpus"
                )
            records.append(
                QuestionRecord(
                    id=str(rec["id"]),
                    tag=rec["tag"],
                    title=rec["title"],
                    body=rec["body"],
                    accepted_answer=rec["accepted_answer"],
                    views=int(rec["views"]),
                )
            )
    records.sort(key=lambda q: (q.tag, -q.views, q.id))
    return records


# ---------------------------------------------------------------------------
# Stage context
# ---------------------------------------------------------------------------


@dataclass
class StageContext:
    """Shared handles for one invocation of the pipeline."""

    cfg: ExperimentConfig
    embedder: object
    cache: CallCache
    out: Path
    transports: dict = field(default_factory=dict)

    def generator(self, model_name: str):
        spec = self.cfg.model(model_name)
        return spec.build(self.cache, transport=self.transports.get(model_name))

    def needs_retrieval(self) -> bool:
        return any(m in ("rag", "rag_coi") for m in self.cfg.modes)


def make_context(
    cfg: ExperimentConfig, embedder=None, transports: dict | None = None
) -> StageContext:
    if not planner_mod.pool_ratio_check(cfg.pool_size, cfg.keep_questions):
        warnings.warn(
            f"candidate pool {cfg.pool_size} is below 5x the kept count "
            f"{cfg.keep_questions}; the planner has little room to discard "
            "unsupported candidates",
            stacklevel=2,
        )
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    cache = CallCache(cfg.cache_dir)
    if embedder is None:
        embedder = cfg.build_embedder(cache=cache)
    return StageContext(
        cfg=cfg, embedder=embedder, cache=cache, out=cfg.output_dir,
        transports=transports or {},
    )


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_ingest(ctx: StageContext) -> None:
    """Chunk every corpus; embed chunks when a retrieval mode is active."""
    for spec in ctx.cfg.corpora:
        doc = read_document(spec.path, doc_id=spec.tag, title=spec.title)
        chunks = chunk(
            doc,
            size=ctx.cfg.chunk_size,
            overlap=ctx.cfg.chunk_overlap,
            min_tokens=ctx.cfg.chunk_min_tokens,
        )
        chunks_to_jsonl(chunks, ctx.out / f"chunks.{spec.tag}.jsonl")
        if ctx.needs_retrieval():
            index = build_index([(c.id, c.text, None) for c in chunks], ctx.embedder)
            index.save(ctx.out / f"chunk_index.{spec.tag}.jsonl")


def _load_chunks(ctx: StageContext, tag: str) -> dict[str, Chunk]:
    chunks = chunks_from_jsonl(ctx.out / f"chunks.{tag}.jsonl")
    return {c.id: c for c in chunks}


def _load_chunk_index(ctx: StageContext, tag: str) -> VectorIndex:
    index = VectorIndex.load(ctx.out / f"chunk_index.{tag}.jsonl")
    chunks = _load_chunks(ctx, tag)
    index.payloads = [chunks[k] for k in index.keys]
    return index


def stage_build_bank(ctx: StageContext) -> None:
    """Extract implicit questions from every chunk of every corpus."""
    if not ctx.cfg.bank_model:
        for spec in ctx.cfg.corpora:
            (ctx.out / f"bank.{spec.tag}.jsonl").write_text("", encoding="utf-8")
        return
    generator = ctx.generator(ctx.cfg.bank_model)
    for spec in ctx.cfg.corpora:
        chunks = list(_load_chunks(ctx, spec.tag).values())
        chunks.sort(key=lambda c: c.token_start)
        bank = build_bank(chunks, generator, ctx.embedder, tag=spec.tag)
        bank.save(ctx.out / f"bank.{spec.tag}.jsonl")


def _load_bank(ctx: StageContext, tag: str) -> QuestionBank:
    return QuestionBank.load(ctx.out / f"bank.{tag}.jsonl", ctx.embedder)


def stage_plan(ctx: StageContext) -> None:
    """Write one illocution plan per question (rag_coi runs only)."""
    if "rag_coi" not in ctx.cfg.modes:
        (ctx.out / "plans.jsonl").write_text("", encoding="utf-8")
        return
    questions = load_questions(ctx.cfg.questions_path, allowed_tags=ctx.cfg.tags)
    banks = {tag: _load_bank(ctx, tag) for tag in sorted(ctx.cfg.tags)}
    indexes = {tag: _load_chunk_index(ctx, tag) for tag in sorted(ctx.cfg.tags)}
    with open(ctx.out / "plans.jsonl", "w", encoding="utf-8") as fh:
        for q in questions:
            p = planner_mod.plan(
                q,
                banks[q.tag],
                indexes[q.tag],
                ctx.embedder,
                pool_size=ctx.cfg.pool_size,
                per_question_chunks=ctx.cfg.per_question_chunks,
                keep=ctx.cfg.keep_questions,
            )
            primary = _primary_chunks(ctx, indexes[q.tag], q)
            planner_mod.flag_primary_overlap(p, [c for c, _ in primary])
            fh.write(_dump(p.to_json()) + "\n")


def _primary_chunks(ctx: StageContext, index: VectorIndex, q: QuestionRecord):
    vec = ctx.embedder.embed([q.query_text()])[0]
    hits = index.top_k(vec, ctx.cfg.per_question_chunks)
    return [(index.payload(key), score) for key, score in hits]


def _load_plans(ctx: StageContext) -> dict[str, dict]:
    plans: dict[str, dict] = {}
    path = ctx.out / "plans.jsonl"
    if not path.exists():
        return plans
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                plans[rec["primary_id"]] = rec
    return plans


def _plan_from_json(rec: dict, q: QuestionRecord, chunks_by_id: dict[str, Chunk]) -> IllocutionPlan:
    selected = []
    for sel in rec["selected"]:
        pairs = tuple((chunks_by_id[c["id"]], c["score"]) for c in sel["chunks"])
        selected.append(
            SelectedQuestion(
                question=CandidateQuestion(
                    text=sel["question"], origin=sel["origin"], question_vector=None
                ),
                chunks=pairs,
                best_score=sel["best_score"],
            )
        )
    return IllocutionPlan(
        primary=q, selected=selected,
        primary_overlap_ids=list(rec.get("primary_overlap_ids", [])),
    )


def stage_answer(ctx: StageContext) -> None:
    """Generate one explanation per (question, model, mode)."""
    questions = load_questions(ctx.cfg.questions_path, allowed_tags=ctx.cfg.tags)
    plans = _load_plans(ctx)
    indexes = {}
    chunk_maps = {}
    if ctx.needs_retrieval():
        for tag in sorted(ctx.cfg.tags):
            indexes[tag] = _load_chunk_index(ctx, tag)
            chunk_maps[tag] = _load_chunks(ctx, tag)

    with open(ctx.out / "explanations.jsonl", "w", encoding="utf-8") as fh:
        for q in questions:
            title = ctx.cfg.corpus(q.tag).title
            primary = (
                [c for c, _ in _primary_chunks(ctx, indexes[q.tag], q)]
                if ctx.needs_retrieval()
                else []
            )
            for model_spec in ctx.cfg.answer_models:
                generator = ctx.generator(model_spec.name)
                for mode in ctx.cfg.modes:
                    rec = {
                        "question_id": q.id,
                        "tag": q.tag,
                        "model": model_spec.name,
                        "mode": mode,
                    }
                    try:
                        if mode == "genai":
                            bundle = assemble_genai(q)
                        elif mode == "rag":
                            bundle = assemble_rag(q, title, primary)
                        else:
                            plan_rec = plans.get(q.id)
                            plan_obj = (
                                _plan_from_json(plan_rec, q, chunk_maps[q.tag])
                                if plan_rec
                                else IllocutionPlan(primary=q)
                            )
                            bundle = assemble_rag_coi(q, title, primary, plan_obj)
                        explanation = generate(bundle, generator, question_id=q.id)
                    except (ProviderError, ValueError) as exc:
                        rec["error"] = str(exc)
                        fh.write(_dump(rec) + "\n")
                        continue
                    rec.update(
                        {
                            "text": explanation.text,
                            "created_at": explanation.created_at,
                            "decoding": list(explanation.decoding),
                            "retrieved_chunk_ids": list(bundle.retrieved_chunk_ids),
                            "prompt_sha256": hashlib.sha256(
                                bundle.text.encode("utf-8")
                            ).hexdigest(),
                        }
                    )
                    fh.write(_dump(rec) + "\n")


ITEM_CSV_FIELDS = (
    "question_id", "tag", "model", "mode", "factscore", "mean_similarity",
    "adherent_count", "clause_count", "word_count",
)


def stage_evaluate(ctx: StageContext) -> None:
    """Score every explanation against its corpus; one item row each."""
    import csv

    from ..prompting import strip_citations

    sources = {}
    titles = {}
    for spec in ctx.cfg.corpora:
        doc = read_document(spec.path, doc_id=spec.tag, title=spec.title)
        sources[spec.tag] = build_source_index([doc.text], ctx.embedder)
        titles[spec.tag] = spec.title

    items: list[dict] = []
    with open(ctx.out / "explanations.jsonl", encoding="utf-8") as src:
        for line in src:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "error" in rec:
                items.append(rec)
                continue
            stripped = strip_citations(rec["text"], titles[rec["tag"]])
            report = evaluate_text(
                stripped,
                sources[rec["tag"]],
                ctx.embedder,
                question_id=rec["question_id"],
                mode_label=rec["mode"],
                t=ctx.cfg.threshold,
                matching=ctx.cfg.matching,
            )
            item = dict(rec)
            if report is None:
                item["unevaluable"] = True
            else:
                item.update(
                    {
                        "threshold": report.threshold,
                        "matching": ctx.cfg.matching,
                        "factscore": report.factscore,
                        "mean_similarity": report.mean_similarity,
                        "adherent_count": report.adherent_count,
                        "clause_count": report.clause_count,
                        "word_count": report.word_count,
                    }
                )
            items.append(item)

    with open(ctx.out / "items.jsonl", "w", encoding="utf-8") as dst:
        for item in items:
            dst.write(_dump(item) + "\n")
    with open(ctx.out / "items.csv", "w", encoding="utf-8", newline="") as dst:
        writer = csv.DictWriter(
            dst, fieldnames=ITEM_CSV_FIELDS, extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(i for i in items if "factscore" in i)


def load_items(ctx: StageContext) -> list[dict]:
    items = []
    with open(ctx.out / "items.jsonl", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                items.append(json.loads(line))
    return items


def stage_analyze(ctx: StageContext) -> dict:
    analysis = analyze_items(load_items(ctx), ctx.cfg)
    write_analysis(analysis, ctx.out / "analysis.json")
    return analysis


def analyze_items(items: list[dict], cfg: ExperimentConfig) -> dict:
    """Paired rag_coi-vs-rag comparisons per (model, metric), BH-corrected.

    A question enters a comparison only when both modes produced an
    evaluable explanation for that model. Each comparison runs the
    normality-gated paired test one-sided in the improvement direction;
    the BH family is every comparison in the run.
    """
    from ..stats import PairedSample, benjamini_hochberg, bh_adjusted_pvalues, select_paired_test

    scored = [i for i in items if "factscore" in i]
    by_key = {(i["model"], i["mode"], i["question_id"]): i for i in scored}
    models = sorted({i["model"] for i in scored})
    question_ids = sorted({i["question_id"] for i in scored})

    comparisons = []
    if "rag" in cfg.modes and "rag_coi" in cfg.modes:
        for model in models:
            for metric in cfg.metrics:
                labels, coi, rag = [], [], []
                for qid in question_ids:
                    lhs = by_key.get((model, "rag_coi", qid))
                    rhs = by_key.get((model, "rag", qid))
                    if lhs is None or rhs is None:
                        continue
                    labels.append(qid)
                    coi.append(float(lhs[metric]))
                    rag.append(float(rhs[metric]))
                entry = {
                    "model": model,
                    "metric": metric,
                    "n": len(labels),
                    "comparison": "rag_coi_minus_rag",
                }
                if len(labels) < 2:
                    entry["skipped"] = "fewer than 2 evaluable pairs"
                    comparisons.append(entry)
                    continue
                sample = PairedSample.from_lists(labels, coi, rag)
                diffs = sample.differences()
                if not diffs.any():
                    entry.update(
                        {
                            "test": "degenerate",
                            "statistic": 0.0,
                            "p_one_sided": 1.0,
                            "p_two_sided": 1.0,
                            "dz": 0.0,
                            "ci95": [0.0, 0.0],
                            "exact": True,
                        }
                    )
                    comparisons.append(entry)
                    continue
                result = select_paired_test(sample, alternative="greater")
                entry.update(
                    {
                        "test": result.test_name,
                        "statistic": result.statistic,
                        "p_one_sided": result.p_one_sided,
                        "p_two_sided": result.p_two_sided,
                        "dz": _json_float(result.effect_size),
                        "ci95": [result.ci95[0], result.ci95[1]],
                        "exact": result.exact,
                    }
                )
                comparisons.append(entry)

    tested = [c for c in comparisons if "p_one_sided" in c]
    pvals = [c["p_one_sided"] for c in tested]
    flags = benjamini_hochberg(pvals, q=cfg.fdr_q)
    adjusted = bh_adjusted_pvalues(pvals)
    for c, rej, adj in zip(tested, flags, adjusted):
        c["bh_rejected"] = bool(rej)
        c["p_bh_adjusted"] = adj

    failures = [i for i in items if "error" in i]
    unevaluable = [i for i in items if i.get("unevaluable")]
    return {
        "comparisons": comparisons,
        "fdr_q": cfg.fdr_q,
        "alpha": cfg.alpha,
        "seed": cfg.seed,
        "counts": {
            "items": len(items),
            "scored": len(scored),
            "failed": len(failures),
            "unevaluable": len(unevaluable),
        },
    }


def _json_float(x: float) -> float | None:
    return None if x != x else x  # NaN is not representable in strict JSON


def stage_report(ctx: StageContext) -> None:
    items = load_items(ctx)
    analysis = json.loads((ctx.out / "analysis.json").read_text(encoding="utf-8"))
    write_csv_and_plots(items, analysis, ctx.cfg, ctx.out)


def write_manifest(out: Path) -> None:
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            files[str(p.relative_to(out))] = hashlib.sha256(p.read_bytes()).hexdigest()
    (out / "manifest.json").write_text(_dump({"files": files}) + "\n", encoding="utf-8")


@dataclass
class ExperimentReport:
    items: int
    failed: int
    unevaluable: int
    analysis: dict
    output_dir: Path

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_experiment(
    cfg: ExperimentConfig, embedder=None, transports: dict | None = None
) -> ExperimentReport:
    """Run every stage end to end and write the manifest.

    Provider failures do not abort the run; the affected items carry an
    error record and the report flags the run as partial.
    """
    ctx = make_context(cfg, embedder=embedder, transports=transports)
    stage_ingest(ctx)
    if "rag_coi" in cfg.modes:
        stage_build_bank(ctx)
    stage_plan(ctx)
    stage_answer(ctx)
    stage_evaluate(ctx)
    analysis = stage_analyze(ctx)
    stage_report(ctx)
    write_manifest(ctx.out)
    counts = analysis["counts"]
    return ExperimentReport(
        items=counts["items"],
        failed=counts["failed"],
        unevaluable=counts["unevaluable"],
        analysis=analysis,
        output_dir=ctx.out,
    )
