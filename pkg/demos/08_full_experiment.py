"""Run the whole experiment pipeline on the hermetic golden fixture.

Two synthetic textbooks, six questions, two scripted mock models, hashed
embeddings: everything runs offline and reproduces byte-for-byte. The
same pipeline drives real runs once remote providers are configured; see
the README for the config format and the `coi-bench` CLI.
"""

import json
import shutil
import tempfile
from pathlib import Path

from coi_rag.bench.config import load_config
from coi_rag.bench.runner import run_experiment

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden"

workdir = Path(tempfile.mkdtemp(prefix="coi-demo-"))
cfg = load_config(FIXTURE / "config.ini")
cfg.output_dir = workdir / "out"
cfg.cache_dir = workdir / "cache"

report = run_experiment(cfg)
print(f"items={report.items} failed={report.failed} unevaluable={report.unevaluable}")
print(f"artifacts under {report.output_dir}:")
for p in sorted(report.output_dir.iterdir()):
    print(f"  {p.name}")

items = [json.loads(l) for l in (cfg.output_dir / "items.jsonl").read_text().splitlines()]
print("\nmedian adherence ratio by model and mode:")
import numpy as np

for model in sorted({i["model"] for i in items}):
    row = []
    for mode in cfg.modes:
        vals = [i["factscore"] for i in items
                if i["model"] == model and i["mode"] == mode and "factscore" in i]
        row.append(f"{mode}={np.median(vals):.3f}")
    print(f"  {model}: " + "  ".join(row))

print("\nrag_coi vs rag comparisons (one-sided, BH-corrected):")
for comp in report.analysis["comparisons"]:
    if "p_one_sided" not in comp:
        continue
    mark = "*" if comp["bh_rejected"] else " "
    print(f" {mark} {comp['model']:<8} {comp['metric']:<16} {comp['test']:<22} "
          f"p={comp['p_one_sided']:.4f} adj={comp['p_bh_adjusted']:.4f} "
          f"dz={comp['dz']:.2f}")

shutil.rmtree(workdir)
