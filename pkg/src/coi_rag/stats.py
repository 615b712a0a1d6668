"""Paired and independent nonparametric tests, FDR control, and power.

The experiment protocol gates each paired comparison on a Shapiro-Wilk
normality check of the differences: non-normal differences go to the
Wilcoxon signed-rank test, normal ones to the paired t-test. Independent
group comparisons use the Mann-Whitney U test. One-sided p-values are the
primary output; two-sided values are reported alongside. Small samples use
exact null distributions (subset-sum enumeration for Wilcoxon, label
enumeration for Mann-Whitney), larger ones a normal approximation with
continuity and tie corrections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats as sps

WILCOXON_EXACT_MAX_N = 25
MWU_EXACT_MAX_TOTAL = 12

ALTERNATIVES = ("greater", "less", "two_sided")


@dataclass(frozen=True)
class PairedSample:
    """Two measurements per label; differences are taken as a - b."""

    labels: tuple[str, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.a) == len(self.b) == len(self.labels)):
            raise ValueError("labels, a, and b must have equal lengths")
        if len(self.a) < 2:
            raise ValueError("paired sample needs at least 2 pairs")

    @classmethod
    def from_lists(cls, labels, a, b) -> "PairedSample":
        return cls(tuple(labels), tuple(float(v) for v in a), tuple(float(v) for v in b))

    def differences(self) -> np.ndarray:
        return np.asarray(self.a) - np.asarray(self.b)


@dataclass(frozen=True)
class TestResult:
    test_name: str
    statistic: float
    p_one_sided: float
    p_two_sided: float
    effect_size: float
    ci95: tuple[float, float]
    n: int
    exact: bool
    alternative: str

    def __post_init__(self) -> None:
        for p in (self.p_one_sided, self.p_two_sided):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"p-value out of range: {p}")
        if self.ci95[0] > self.ci95[1]:
            raise ValueError("ci95 low bound exceeds high bound")


def _check_alternative(alternative: str) -> None:
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")


def _check_method(method: str) -> None:
    if method not in ("auto", "exact", "approx"):
        raise ValueError("method must be 'auto', 'exact', or 'approx'")


def _pick(p_greater: float, p_less: float, alternative: str) -> tuple[float, float]:
    """One-sided p for the requested direction, plus the symmetric two-sided p."""
    p_two = min(1.0, 2.0 * min(p_greater, p_less))
    if alternative == "greater":
        return p_greater, p_two
    if alternative == "less":
        return p_less, p_two
    return min(p_greater, p_less), p_two


# ---------------------------------------------------------------------------
# Effect sizes
# ---------------------------------------------------------------------------


def cohens_dz(d) -> float:
    """Paired effect size: mean of differences over their sample sd."""
    d = np.asarray(d, dtype=float)
    if d.size < 2:
        raise ValueError("cohens_dz needs at least 2 differences")
    sd = d.std(ddof=1)
    if sd == 0:
        raise ValueError("cohens_dz is undefined for zero-variance differences")
    return float(d.mean() / sd)


def _dz_or_nan(d: np.ndarray) -> float:
    sd = d.std(ddof=1)
    if sd == 0:
        return float("nan")
    return float(d.mean() / sd)


def _cohens_d_independent(x: np.ndarray, y: np.ndarray) -> float:
    n1, n2 = len(x), len(y)
    dof = n1 + n2 - 2
    if dof <= 0:
        return float("nan")
    pooled_var = ((n1 - 1) * x.var(ddof=1) + (n2 - 1) * y.var(ddof=1)) / dof if dof else 0.0
    if pooled_var <= 0:
        return float("nan")
    return float((x.mean() - y.mean()) / math.sqrt(pooled_var))


def _t_ci_mean(d: np.ndarray) -> tuple[float, float]:
    """Two-sided 95% t-interval on the mean of d."""
    n = len(d)
    sd = d.std(ddof=1)
    if n < 2 or sd == 0:
        m = float(d.mean())
        return (m, m)
    half = sps.t.ppf(0.975, n - 1) * sd / math.sqrt(n)
    m = float(d.mean())
    return (m - half, m + half)


# ---------------------------------------------------------------------------
# Normality gate
# ---------------------------------------------------------------------------


def shapiro_wilk(x) -> tuple[float, float]:
    """Shapiro-Wilk W and p-value (Royston's approximation, via scipy)."""
    x = np.asarray(x, dtype=float)
    if not 3 <= x.size <= 5000:
        raise ValueError("shapiro_wilk requires 3 <= n <= 5000")
    if np.ptp(x) == 0:
        raise ValueError("shapiro_wilk is undefined for a zero-variance sample")
    w, p = sps.shapiro(x)
    return float(w), float(p)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank
# ---------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _signed_rank_tail(scaled_ranks: tuple[int, ...]) -> np.ndarray:
    """Null tail counts of the doubled positive-rank sum.

    Entry w holds the number of sign assignments whose scaled rank sum is
    >= w. Built by the classic subset-sum recurrence over the rank
    multiset; midranks are doubled beforehand so sums stay integral.
    """
    counts = np.zeros(sum(scaled_ranks) + 1)
    counts[0] = 1.0
    for r in scaled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: len(counts) - r]
        counts = counts + shifted
    return np.cumsum(counts[::-1])[::-1]


def wilcoxon_signed_rank(
    s: PairedSample, alternative: str = "greater", method: str = "auto"
) -> TestResult:
    """Signed-rank test on paired differences.

    Zero differences are dropped (Wilcoxon's procedure); ties in |d| get
    midranks. The null is enumerated exactly up to n=25 nonzero
    differences, beyond that a normal approximation with continuity and
    tie corrections is used; ``method`` ("auto", "exact", "approx")
    overrides the size rule. The effect size is Cohen's dz of the raw
    differences (NaN when they have zero spread).
    """
    _check_alternative(alternative)
    _check_method(method)
    d_all = s.differences()
    d = d_all[d_all != 0]
    n = d.size
    if n == 0:
        raise ValueError("wilcoxon requires at least one nonzero difference")

    ranks = sps.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    if method == "exact" or (method == "auto" and n <= WILCOXON_EXACT_MAX_N):
        scaled = tuple(sorted(int(round(2 * r)) for r in ranks))
        tail = _signed_rank_tail(scaled)
        total = 2.0 ** n
        w_scaled = int(round(2 * w_plus))
        p_greater = float(tail[w_scaled] / total)
        below = total - (tail[w_scaled + 1] if w_scaled + 1 < len(tail) else 0.0)
        p_less = float(below / total)
        exact = True
    else:
        mu = n * (n + 1) / 4.0
        tie_sizes = np.unique(ranks, return_counts=True)[1]
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((tie_sizes**3 - tie_sizes).sum()) / 48.0)
        sigma = math.sqrt(var)
        p_greater = float(sps.norm.sf((w_plus - mu - 0.5) / sigma))
        p_less = float(sps.norm.cdf((w_plus - mu + 0.5) / sigma))
        exact = False

    p_one, p_two = _pick(p_greater, p_less, alternative)
    return TestResult(
        test_name="wilcoxon_signed_rank",
        statistic=w_plus,
        p_one_sided=p_one,
        p_two_sided=p_two,
        effect_size=_dz_or_nan(d_all),
        ci95=_t_ci_mean(d_all),
        n=int(d_all.size),
        exact=exact,
        alternative=alternative,
    )


# ---------------------------------------------------------------------------
# Paired t
# ---------------------------------------------------------------------------


def paired_t(s: PairedSample, alternative: str = "greater") -> TestResult:
    _check_alternative(alternative)
    d = s.differences()
    n = d.size
    sd = d.std(ddof=1)
    if sd == 0:
        raise ValueError("paired t-test is undefined for zero-variance differences")
    t_stat = float(d.mean() / (sd / math.sqrt(n)))
    df = n - 1
    p_greater = float(sps.t.sf(t_stat, df))
    p_less = float(sps.t.cdf(t_stat, df))
    p_one, p_two = _pick(p_greater, p_less, alternative)
    return TestResult(
        test_name="paired_t",
        statistic=t_stat,
        p_one_sided=p_one,
        p_two_sided=p_two,
        effect_size=float(d.mean() / sd),
        ci95=_t_ci_mean(d),
        n=int(n),
        exact=False,
        alternative=alternative,
    )


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


def mann_whitney_u(x, y, alternative: str = "greater", method: str = "auto") -> TestResult:
    """Rank-sum test for two independent samples.

    U counts how often x-values beat y-values (ties at half weight). The
    null is enumerated over all label assignments when the combined size
    is at most 12, otherwise approximated normally with tie correction;
    ``method`` ("auto", "exact", "approx") overrides the size rule.
    ``greater`` asks whether x tends to exceed y. The effect size is the
    independent-samples Cohen's d (NaN when it is undefined).
    """
    _check_alternative(alternative)
    _check_method(method)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = x.size, y.size
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be non-empty")

    combined = np.concatenate([x, y])
    ranks = sps.rankdata(combined)
    u_obs = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)

    total_n = n1 + n2
    if method == "exact" and total_n > 20:
        raise ValueError("exact enumeration is limited to 20 combined observations")
    if method == "exact" or (method == "auto" and total_n <= MWU_EXACT_MAX_TOTAL):
        # Permutation null over the observed values; doubled ranks keep
        # the comparisons integral despite midranks.
        scaled = [int(round(2 * r)) for r in ranks]
        offset = n1 * (n1 + 1)
        u2_obs = int(round(2 * u_obs))
        ge = le = count = 0
        for positions in itertools.combinations(range(total_n), n1):
            u2 = sum(scaled[i] for i in positions) - offset
            count += 1
            if u2 >= u2_obs:
                ge += 1
            if u2 <= u2_obs:
                le += 1
        p_greater = ge / count
        p_less = le / count
        exact = True
    else:
        mu = n1 * n2 / 2.0
        tie_sizes = np.unique(combined, return_counts=True)[1]
        tie_term = float((tie_sizes**3 - tie_sizes).sum()) / (total_n * (total_n - 1))
        var = n1 * n2 / 12.0 * ((total_n + 1) - tie_term)
        if var <= 0:  # every observation tied: U is degenerate
            p_greater = p_less = 1.0
        else:
            sigma = math.sqrt(var)
            p_greater = float(sps.norm.sf((u_obs - mu - 0.5) / sigma))
            p_less = float(sps.norm.cdf((u_obs - mu + 0.5) / sigma))
        exact = False

    p_one, p_two = _pick(p_greater, p_less, alternative)
    if n1 >= 2 and n2 >= 2:
        dof = n1 + n2 - 2
        pooled_var = ((n1 - 1) * x.var(ddof=1) + (n2 - 1) * y.var(ddof=1)) / dof
        if pooled_var > 0:
            half = sps.t.ppf(0.975, dof) * math.sqrt(pooled_var * (1 / n1 + 1 / n2))
            md = float(x.mean() - y.mean())
            ci = (md - half, md + half)
        else:
            md = float(x.mean() - y.mean())
            ci = (md, md)
    else:
        ci = (float("-inf"), float("inf"))
    return TestResult(
        test_name="mann_whitney_u",
        statistic=u_obs,
        p_one_sided=p_one,
        p_two_sided=p_two,
        effect_size=_cohens_d_independent(x, y),
        ci95=ci,
        n=int(total_n),
        exact=exact,
        alternative=alternative,
    )


# ---------------------------------------------------------------------------
# Multiple testing
# ---------------------------------------------------------------------------


def benjamini_hochberg(pvals, q: float = 0.05) -> list[bool]:
    """Step-up FDR control; rejection flags in the input order."""
    pvals = [float(p) for p in pvals]
    if not pvals:
        return []
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    for p in pvals:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value out of range: {p}")
    m = len(pvals)
    order = sorted(range(m), key=lambda i: pvals[i])
    threshold = -1.0
    for rank, idx in enumerate(order, start=1):
        if pvals[idx] <= rank * q / m:
            threshold = pvals[idx]
    return [p <= threshold for p in pvals]


def bh_adjusted_pvalues(pvals) -> list[float]:
    """BH-adjusted p-values; rejecting adjusted <= q matches the step-up rule."""
    pvals = [float(p) for p in pvals]
    m = len(pvals)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: pvals[i])
    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, pvals[idx] * m / rank)
        adjusted[idx] = running
    return adjusted


# ---------------------------------------------------------------------------
# Power analysis and intervals
# ---------------------------------------------------------------------------


def required_pairs(
    dz: float,
    alpha: float = 0.05,
    power: float = 0.8,
    tails: str = "one",
    method: str = "noncentral_t",
) -> int:
    """Smallest paired-sample size reaching the target power.

    ``noncentral_t`` iterates n upward through the exact paired-t power
    function with noncentrality dz*sqrt(n). ``normal`` is the closed-form
    ceil((z_alpha + z_power)^2 / dz^2) approximation, documented as a
    fallback; it runs a little low for small n.
    """
    if dz <= 0:
        raise ValueError("dz must be positive")
    if not (0 < alpha < 1 and 0 < power < 1):
        raise ValueError("alpha and power must lie in (0, 1)")
    if tails not in ("one", "two"):
        raise ValueError("tails must be 'one' or 'two'")

    a = alpha if tails == "one" else alpha / 2

    if method == "normal":
        z_a = sps.norm.ppf(1 - a)
        z_b = sps.norm.ppf(power)
        return max(2, math.ceil((z_a + z_b) ** 2 / dz**2))

    if method != "noncentral_t":
        raise ValueError("method must be 'noncentral_t' or 'normal'")
    n = 2
    while n < 1_000_000:
        df = n - 1
        tcrit = sps.t.ppf(1 - a, df)
        ncp = dz * math.sqrt(n)
        attained = float(sps.nct.sf(tcrit, df, ncp))
        if tails == "two":
            attained += float(sps.nct.cdf(-tcrit, df, ncp))
        if attained >= power:
            return n
        n += 1
    raise RuntimeError("power target not reachable")


def bootstrap_ci(
    x,
    statistic: str = "mean",
    n_boot: int = 10000,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile-bootstrap 95% interval; deterministic for a given seed."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("bootstrap_ci needs at least 2 observations")
    fns = {"mean": np.mean, "median": np.median}
    if statistic not in fns:
        raise ValueError("statistic must be 'mean' or 'median'")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(n_boot, x.size))
    values = fns[statistic](x[idx], axis=1)
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# Test selection
# ---------------------------------------------------------------------------


def select_paired_test(s: PairedSample, alternative: str = "greater") -> TestResult:
    """Normality-gated paired comparison.

    Shapiro-Wilk on the differences decides the test: p < 0.05 (or an
    undecidable gate: fewer than 3 pairs, zero-variance differences) means
    Wilcoxon signed-rank, anything else the paired t-test.
    """
    d = s.differences()
    try:
        _, p_normal = shapiro_wilk(d)
    except ValueError:
        return wilcoxon_signed_rank(s, alternative)
    if p_normal < 0.05:
        return wilcoxon_signed_rank(s, alternative)
    return paired_t(s, alternative)
