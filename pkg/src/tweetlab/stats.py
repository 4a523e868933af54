"""Group-comparison statistics: Welch's t-test, Cohen's d, confidence intervals
for mean differences, Benjamini–Hochberg adjustment, and the three-way
Human/Censored/Uncensored comparison table.

The t-distribution CDF is computed from the regularized incomplete beta
function (continued-fraction evaluation), so results are identical across
platforms with no SciPy dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum, lgamma
from typing import Mapping, Sequence

from .corpus import MetricValue, PairedCorpus

GROUPS = ("Human", "Censored", "Uncensored")

CENSORED_SOURCES = ("LL3", "Mistral", "Qwen2", "GPT4o")
UNCENSORED_SOURCES = (
    "LL3-Dolphin",
    "LL3-Hermes",
    "Mistral-Dolphin",
    "Mistral-Hermes",
    "Qwen2-Dolphin",
)

DEFAULT_GROUP_MAP: dict[str, str] = {
    "Human": "Human",
    **{s: "Censored" for s in CENSORED_SOURCES},
    **{s: "Uncensored" for s in UNCENSORED_SOURCES},
}

# Comparisons are always rendered in this order.
GROUP_PAIRS = (("Human", "Censored"), ("Human", "Uncensored"), ("Censored", "Uncensored"))

STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


@dataclass(frozen=True)
class GroupSamples:
    group: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ValueError(f"unknown group {self.group!r}")


@dataclass(frozen=True)
class ComparisonResult:
    metric_name: str
    group_a: str
    group_b: str
    n_a: int
    n_b: int
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float
    t_stat: float
    df: float
    p_raw: float
    p_adjusted: float
    cohens_d: float
    ci_low: float
    ci_high: float
    stars: str


# ---------------------------------------------------------------------------
# t-distribution via the regularized incomplete beta function


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta (modified Lentz algorithm).
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = lgamma(a + b) - lgamma(a) - lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    if df <= 0.0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * reg_inc_beta(df / 2.0, 0.5, x)
    return p if t <= 0 else 1.0 - p


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if df <= 0.0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))


def t_ppf(q: float, df: float) -> float:
    """Quantile of the t-distribution by bisection on the CDF."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_ppf(1.0 - q, df)
    hi = 1.0
    while t_cdf(hi, df) < q and hi < 1e300:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Test statistics


def _mean_sample_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = fsum(xs) / n
    var = fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var


def _mean_pop_sd(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = fsum(xs) / n
    return mean, math.sqrt(fsum((x - mean) ** 2 for x in xs) / n)


def _check_sizes(a: Sequence[float], b: Sequence[float]) -> None:
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least 2 values")


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test; returns (t, df, two-sided p).

    Sample variances use divisor n−1; df follows Welch–Satterthwaite.  When
    both variances are zero: t = 0 and p = 1 for equal means, otherwise
    t = ±inf and p = 0.
    """
    _check_sizes(a, b)
    n_a, n_b = len(a), len(b)
    mean_a, var_a = _mean_sample_var(a)
    mean_b, var_b = _mean_sample_var(b)
    se2 = var_a / n_a + var_b / n_b
    if se2 == 0.0:
        df = float(n_a + n_b - 2)
        if mean_a == mean_b:
            return 0.0, df, 1.0
        return math.copysign(math.inf, mean_a - mean_b), df, 0.0
    t = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / ((var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1))
    return t, df, t_two_sided_p(t, df)


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """(mean_a − mean_b) / pooled SD with the classic pooled variance."""
    _check_sizes(a, b)
    n_a, n_b = len(a), len(b)
    mean_a, var_a = _mean_sample_var(a)
    mean_b, var_b = _mean_sample_var(b)
    pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / (n_a + n_b - 2)
    if pooled == 0.0:
        raise ValueError("Cohen's d undefined for zero pooled standard deviation")
    return (mean_a - mean_b) / math.sqrt(pooled)


def mean_diff_ci(
    a: Sequence[float], b: Sequence[float], level: float = 0.95
) -> tuple[float, float]:
    """Confidence interval for mean_a − mean_b using the Welch standard error
    and Welch–Satterthwaite degrees of freedom."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    _check_sizes(a, b)
    n_a, n_b = len(a), len(b)
    mean_a, var_a = _mean_sample_var(a)
    mean_b, var_b = _mean_sample_var(b)
    diff = mean_a - mean_b
    se2 = var_a / n_a + var_b / n_b
    if se2 == 0.0:
        return diff, diff
    df = se2 * se2 / ((var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1))
    half = t_ppf(1.0 - (1.0 - level) / 2.0, df) * math.sqrt(se2)
    return diff - half, diff + half


def bh_adjust(p_values: Sequence[float]) -> list[float]:
    """Benjamini–Hochberg step-up adjusted p-values, returned in input order."""
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p_values[idx] * m / rank)
        adjusted[idx] = running
    return adjusted


def stars(p_adjusted: float) -> str:
    for threshold, mark in STAR_THRESHOLDS:
        if p_adjusted < threshold:
            return mark
    return "ns"


# ---------------------------------------------------------------------------
# Group comparisons


def _pair_result(
    metric_name: str, group_a: str, a: Sequence[float], group_b: str, b: Sequence[float]
) -> tuple[ComparisonResult, float]:
    t, df, p_raw = welch_t(a, b)
    mean_a, sd_a = _mean_pop_sd(a)
    mean_b, sd_b = _mean_pop_sd(b)
    ci_low, ci_high = mean_diff_ci(a, b)
    try:
        d = cohens_d(a, b)
    except ValueError:
        d = math.nan
    result = ComparisonResult(
        metric_name=metric_name,
        group_a=group_a,
        group_b=group_b,
        n_a=len(a),
        n_b=len(b),
        mean_a=mean_a,
        sd_a=sd_a,
        mean_b=mean_b,
        sd_b=sd_b,
        t_stat=t,
        df=df,
        p_raw=p_raw,
        p_adjusted=math.nan,  # filled in after family adjustment
        cohens_d=d,
        ci_low=ci_low,
        ci_high=ci_high,
        stars="ns",
    )
    return result, p_raw


def _apply_adjustment(results: list[ComparisonResult], p_raw: list[float]) -> list[ComparisonResult]:
    from dataclasses import replace

    adjusted = bh_adjust(p_raw)
    return [
        replace(r, p_adjusted=p_adj, stars=stars(p_adj)) for r, p_adj in zip(results, adjusted)
    ]


def compare_metric(
    metric_name: str, values_by_group: Mapping[str, Sequence[float]]
) -> list[ComparisonResult]:
    """Pairwise comparisons over the canonical group pairs present in the
    input (groups with fewer than 2 values are skipped); BH adjustment spans
    the comparisons produced by this call."""
    results: list[ComparisonResult] = []
    p_raws: list[float] = []
    for group_a, group_b in GROUP_PAIRS:
        a = values_by_group.get(group_a)
        b = values_by_group.get(group_b)
        if a is None or b is None or len(a) < 2 or len(b) < 2:
            continue
        result, p_raw = _pair_result(metric_name, group_a, a, group_b, b)
        results.append(result)
        p_raws.append(p_raw)
    return _apply_adjustment(results, p_raws)


def compare_groups(metric_name: str, groups: Sequence[GroupSamples]) -> list[ComparisonResult]:
    """Three-way comparison (Human vs Censored, Human vs Uncensored, Censored
    vs Uncensored) with BH adjustment across the three tests."""
    by_name = {g.group: g.values for g in groups}
    if sorted(by_name) != sorted(GROUPS) or len(groups) != len(GROUPS):
        raise ValueError(f"expected exactly one group each of {GROUPS}")
    for name in GROUPS:
        if len(by_name[name]) == 0:
            raise ValueError(f"group {name!r} is empty")
    results = compare_metric(metric_name, by_name)
    if len(results) != len(GROUP_PAIRS):
        raise ValueError("degenerate group (fewer than 2 values)")
    return results


METRIC_ORDER = (
    "vocabulary_size",
    "mttr",
    "ngram_diversity",
    "ngram_entropy",
    "iss",
    "bertscore_f1",
)


def _ordered_metrics(names: Sequence[str]) -> list[str]:
    known = [m for m in METRIC_ORDER if m in names]
    extra = sorted(n for n in names if n not in METRIC_ORDER)
    return known + extra


def compare_all(
    metric_groups: Mapping[str, Mapping[str, Sequence[float]]],
    family: str = "per-metric",
) -> list[ComparisonResult]:
    """Comparisons for every metric; ``family`` selects the BH adjustment
    scope: "per-metric" adjusts within each metric's comparisons, "joint"
    across all comparisons of the call."""
    if family not in ("per-metric", "joint"):
        raise ValueError(f"unknown family scope {family!r}")
    names = _ordered_metrics(list(metric_groups))
    if family == "per-metric":
        out: list[ComparisonResult] = []
        for name in names:
            out.extend(compare_metric(name, metric_groups[name]))
        return out
    results: list[ComparisonResult] = []
    p_raws: list[float] = []
    for name in names:
        for group_a, group_b in GROUP_PAIRS:
            a = metric_groups[name].get(group_a)
            b = metric_groups[name].get(group_b)
            if a is None or b is None or len(a) < 2 or len(b) < 2:
                continue
            result, p_raw = _pair_result(name, group_a, a, group_b, b)
            results.append(result)
            p_raws.append(p_raw)
    return _apply_adjustment(results, p_raws)


def group_metric_values(
    records: Sequence[MetricValue],
    corpus: PairedCorpus,
    group_map: Mapping[str, str] | None = None,
) -> dict[str, dict[str, list[float]]]:
    """Bucket metric records by metric name and group (via source -> group map),
    dropping not-applicable values.  Unknown sources raise KeyError."""
    group_map = group_map if group_map is not None else DEFAULT_GROUP_MAP
    source_of = {s.id: s.source for s in corpus.samples}
    out: dict[str, dict[str, list[float]]] = {}
    for record in records:
        if record.value is None:
            continue
        source = source_of.get(record.sample_id)
        if source is None:
            raise KeyError(f"metric record for unknown sample id {record.sample_id!r}")
        if source not in group_map:
            raise KeyError(f"no group assigned for source {source!r}")
        group = group_map[source]
        out.setdefault(record.metric_name, {}).setdefault(group, []).append(record.value)
    return out
