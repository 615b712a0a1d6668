"""The statistical protocol: gated paired tests, FDR control, and power.

Paired comparisons gate on Shapiro-Wilk normality of the differences:
non-normal differences go to the exact Wilcoxon signed-rank test, normal
ones to the paired t-test. Families of one-sided p-values pass through
Benjamini-Hochberg FDR control, and the power helper answers "how many
paired questions do we need?".
"""

import numpy as np

from coi_rag.stats import (
    PairedSample,
    benjamini_hochberg,
    bh_adjusted_pvalues,
    bootstrap_ci,
    cohens_dz,
    mann_whitney_u,
    required_pairs,
    select_paired_test,
    shapiro_wilk,
    wilcoxon_signed_rank,
)

rng = np.random.default_rng(7)

# Paired comparison with a small real effect.
baseline = rng.normal(0.35, 0.12, size=90)
improved = baseline + rng.normal(0.04, 0.10, size=90)
sample = PairedSample.from_lists([f"q{i}" for i in range(90)], improved, baseline)

w, p_norm = shapiro_wilk(sample.differences())
result = select_paired_test(sample, alternative="greater")
print(f"normality gate: W={w:.3f}, p={p_norm:.3f} -> {result.test_name}")
print(f"  one-sided p={result.p_one_sided:.4f}, dz={result.effect_size:.3f}, "
      f"95% CI ({result.ci95[0]:.4f}, {result.ci95[1]:.4f}), exact={result.exact}")

# Exact small-sample Wilcoxon: six uniformly positive differences.
tiny = PairedSample.from_lists(list("abcdef"), [2, 3, 4, 5, 6, 7], [1] * 6)
print(f"\nsix positive differences, exact one-sided p = "
      f"{wilcoxon_signed_rank(tiny, 'greater').p_one_sided}  (= 1/64)")

# Independent groups: complete separation at 3 vs 3.
u = mann_whitney_u([4, 5, 6], [1, 2, 3], "greater")
print(f"U={u.statistic:.1f}, exact one-sided p = {u.p_one_sided}  (= 1/20)")

# A family of comparisons under FDR control at 5%.
pvals = [0.001, 0.012, 0.024, 0.045, 0.18, 0.62]
flags = benjamini_hochberg(pvals, q=0.05)
adjusted = bh_adjusted_pvalues(pvals)
print("\nBenjamini-Hochberg at q=0.05:")
for p, f, a in zip(pvals, flags, adjusted):
    print(f"  raw {p:.3f} -> adjusted {a:.3f} {'reject' if f else 'keep'}")

# Effect size and uncertainty helpers.
print(f"\nCohen's dz of [2, 4]: {cohens_dz([2, 4]):.4f}")
lo, hi = bootstrap_ci(list(baseline), "median", seed=7)
print(f"bootstrap 95% CI of the baseline median: ({lo:.3f}, {hi:.3f})")

# Planning a paired study for a small-to-moderate effect.
for method in ("normal", "noncentral_t"):
    n = required_pairs(0.3, alpha=0.05, power=0.8, tails="one", method=method)
    print(f"required pairs (dz=0.3, one-tailed, power 0.8, {method}): {n}")
