"""Nonparametric and ANOVA statistics used by the study harness and the
explanation score reports.

Everything here is self-contained: the Mann-Whitney U test switches between
exact permutation enumeration (both sides <= 8 observations) and the
tie-corrected normal approximation; the F-distribution tail is computed from
an internal regularized incomplete beta; Tukey's HSD reads shipped
studentized-range critical-value tables.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from faultdx.errors import StatsError

#: per-side sample size at or below which the MWU p-value is exact
EXACT_MWU_THRESHOLD = 8


def rank_midranks(values: Sequence[float]) -> list[float]:
    """Fractional ranks (1-based); tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _u_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    ranks = rank_midranks(list(a) + list(b))
    r_a = sum(ranks[: len(a)])
    return r_a - len(a) * (len(a) + 1) / 2


@dataclass(frozen=True)
class MwuResult:
    u: float  # U statistic of the first sample
    p_value: float  # two-sided
    cles: float  # common-language effect size, U_b / (n_a * n_b)
    method: str  # "exact" or "normal-approximation"

    def __iter__(self):
        return iter((self.u, self.p_value, self.cles))


def mann_whitney_u(
    a: Sequence[float],
    b: Sequence[float],
    exact_threshold: int = EXACT_MWU_THRESHOLD,
) -> MwuResult:
    """Two-sided Mann-Whitney U test with midrank tie handling.

    Exact enumeration of all pooled assignments when the pooled sample holds
    at most ``2 * exact_threshold`` observations, tie-corrected normal
    approximation otherwise. The reported CLES is the probability that a value drawn from
    ``b`` exceeds one drawn from ``a`` (ties counted half).
    """
    if not a or not b:
        raise StatsError("empty sample")
    n_a, n_b = len(a), len(b)
    u_a = _u_statistic(a, b)
    u_b = n_a * n_b - u_a
    if n_a + n_b <= 2 * exact_threshold:
        p = _exact_mwu_p(list(a) + list(b), n_a, u_a)
        method = "exact"
    else:
        p = _normal_mwu_p(list(a) + list(b), n_a, n_b, u_a)
        method = "normal-approximation"
    return MwuResult(u=u_a, p_value=p, cles=u_b / (n_a * n_b), method=method)


def _exact_mwu_p(pooled: list[float], n_a: int, u_obs: float) -> float:
    """Two-sided exact p over every assignment of pooled values to group a:
    the fraction of assignments whose U is at least as far from n_a*n_b/2."""
    n = len(pooled)
    center = n_a * (n - n_a) / 2
    threshold = abs(u_obs - center) - 1e-12
    extreme = 0
    total = 0
    indices = range(n)
    for combo in itertools.combinations(indices, n_a):
        in_a = set(combo)
        a = [pooled[i] for i in combo]
        b = [pooled[i] for i in indices if i not in in_a]
        u = _u_statistic(a, b)
        total += 1
        if abs(u - center) >= threshold:
            extreme += 1
    return extreme / total


def _normal_mwu_p(pooled: list[float], n_a: int, n_b: int, u_a: float) -> float:
    n = n_a + n_b
    tie_term = 0.0
    seen: dict[float, int] = {}
    for v in pooled:
        seen[v] = seen.get(v, 0) + 1
    for t in seen.values():
        tie_term += t**3 - t
    sigma_sq = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0:
        return 1.0
    mean = n_a * n_b / 2
    # continuity correction toward the mean
    diff = abs(u_a - mean)
    z = max(diff - 0.5, 0.0) / math.sqrt(sigma_sq)
    return min(1.0, math.erfc(z / math.sqrt(2)))


# --- incomplete beta / F tail ------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise StatsError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df_between: float, df_within: float) -> float:
    """Upper tail P(F > f) of the F distribution."""
    if f <= 0:
        return 1.0
    x = df_within / (df_within + df_between * f)
    return regularized_incomplete_beta(df_within / 2.0, df_between / 2.0, x)


@dataclass(frozen=True)
class AnovaResult:
    f: float
    p_value: float
    df_between: int
    df_within: int
    ms_within: float
    group_means: tuple[float, ...]
    group_sizes: tuple[int, ...]

    def __iter__(self):
        return iter((self.f, self.p_value))


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Standard between/within decomposition with an F-tail p-value."""
    if len(groups) < 2:
        raise StatsError("need at least two groups")
    for g in groups:
        if len(g) < 2:
            raise StatsError("every group needs at least two values")
    sizes = [len(g) for g in groups]
    means = [sum(g) / len(g) for g in groups]
    n = sum(sizes)
    grand = sum(sum(g) for g in groups) / n
    ss_between = sum(m * (mean - grand) ** 2 for m, mean in zip(sizes, means))
    ss_within = sum(
        sum((x - mean) ** 2 for x in g) for g, mean in zip(groups, means)
    )
    df_between = len(groups) - 1
    df_within = n - len(groups)
    ms_within = ss_within / df_within
    if ms_within == 0:
        if ss_between == 0:
            return AnovaResult(
                0.0, 1.0, df_between, df_within, 0.0, tuple(means), tuple(sizes)
            )
        raise StatsError("zero within-group variance with unequal means")
    f = (ss_between / df_between) / ms_within
    return AnovaResult(
        f, f_sf(f, df_between, df_within), df_between, df_within, ms_within,
        tuple(means), tuple(sizes),
    )


# --- Tukey's HSD -------------------------------------------------------------

@dataclass(frozen=True)
class PairComparison:
    group_a: int
    group_b: int
    q: float
    critical: float
    significant: bool


@functools.lru_cache(maxsize=1)
def _critical_table() -> dict:
    text = (
        resources.files("faultdx") / "assets" / "studentized_range.json"
    ).read_text()
    return json.loads(text)


def studentized_range_critical(k: int, df: int, alpha: float) -> float:
    """Shipped critical value q(k, df, alpha); df rounds down to the next
    tabulated value (conservative)."""
    table = _critical_table()
    key = f"{alpha:g}"
    if key not in table["alphas"]:
        raise StatsError(f"alpha {alpha} not tabulated")
    ks = table["k"]
    if k < ks[0] or k > ks[-1]:
        raise StatsError(f"number of groups {k} not tabulated")
    dfs = table["df"]
    if df < dfs[0]:
        raise StatsError(f"within degrees of freedom {df} not tabulated")
    df_idx = max(i for i, d in enumerate(dfs) if d <= df)
    return table["alphas"][key][ks.index(k)][df_idx]


def tukey_hsd(
    groups: Sequence[Sequence[float]], alpha: float = 0.05
) -> list[PairComparison]:
    """Pairwise studentized-range comparisons after a one-way ANOVA.

    ``alpha`` must be one of the tabulated levels (0.05, 0.01, 0.001).
    Unequal group sizes use the Tukey-Kramer denominator.
    """
    anova = one_way_anova(groups)
    k = len(groups)
    critical_of_df = studentized_range_critical(k, anova.df_within, alpha)
    out: list[PairComparison] = []
    for i, j in itertools.combinations(range(k), 2):
        se = math.sqrt(
            anova.ms_within
            / 2.0
            * (1.0 / anova.group_sizes[i] + 1.0 / anova.group_sizes[j])
        )
        if se == 0:
            q = 0.0 if anova.group_means[i] == anova.group_means[j] else math.inf
        else:
            q = abs(anova.group_means[i] - anova.group_means[j]) / se
        out.append(
            PairComparison(
                group_a=i,
                group_b=j,
                q=q,
                critical=critical_of_df,
                significant=q > critical_of_df,
            )
        )
    return out
