"""Inference for the daily up-move probability from return data.

The up indicator counts strictly positive returns. Interval estimation
uses the Wilson score interval (at the sample sizes of interest it agrees
with the plain normal approximation to four decimals but stays sane for
small counts); testing p = p0 uses the exact two-sided binomial test with
the minimum-likelihood convention, and equality of proportions across
groups uses the Pearson chi-square statistic with the tail probability
from the regularized incomplete gamma.
"""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .special import log_binomial_pmf, normal_ppf, regularized_gamma_q

__all__ = [
    "UpDownCounts",
    "up_proportion",
    "proportion_ci",
    "exact_binomial_test",
    "HomogeneityResult",
    "homogeneity_test",
    "chi2_sf",
    "YearEstimate",
    "grouped_estimates",
]


@dataclass(frozen=True)
class UpDownCounts:
    """Count of up days out of a total."""

    ups: int
    total: int

    def __post_init__(self) -> None:
        if self.total < 1:
            raise DomainError(f"total must be >= 1, got {self.total}")
        if not 0 <= self.ups <= self.total:
            raise DomainError(
                f"ups must be between 0 and total, got {self.ups}/{self.total}")

    @property
    def proportion(self) -> float:
        return self.ups / self.total


def up_proportion(returns: Sequence[float]) -> UpDownCounts:
    """Counts of strictly positive returns; zeros count as not-up."""
    if len(returns) == 0:
        raise DomainError("return sequence must be non-empty")
    ups = sum(1 for r in returns if r > 0.0)
    return UpDownCounts(ups=ups, total=len(returns))


def proportion_ci(counts: UpDownCounts, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for the up proportion at the given level."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must be in (0, 1), got {level}")
    z = normal_ppf(0.5 + level / 2.0)
    n = counts.total
    p_hat = counts.proportion
    z2_n = z * z / n
    center = (p_hat + z2_n / 2.0) / (1.0 + z2_n)
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)) / (1.0 + z2_n)
    return (max(0.0, center - half), min(1.0, center + half))


# Exact-integer pmf path is used while C(n, n/2) stays inside float range.
_EXACT_PMF_MAX_N = 1000
# Relative slack when comparing pmf values, matching the convention of the
# widely used implementations of the minimum-likelihood two-sided test.
_PMF_REL_SLACK = 1.0 + 1e-7


def exact_binomial_test(counts: UpDownCounts, p0: float) -> float:
    """Two-sided exact binomial p-value for H0: p = p0.

    Sums the probabilities of all outcomes no more likely than the
    observed count (minimum-likelihood convention), clipped to [0, 1].
    """
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"null probability must be in (0, 1), got {p0}")
    n, k = counts.total, counts.ups
    if n <= _EXACT_PMF_MAX_N:
        pmf = [math.comb(n, i) * p0 ** i * (1.0 - p0) ** (n - i)
               for i in range(n + 1)]
        cutoff = pmf[k] * _PMF_REL_SLACK
        p_value = sum(prob for prob in pmf if prob <= cutoff)
    else:
        log_pmf = [log_binomial_pmf(i, n, p0) for i in range(n + 1)]
        log_cutoff = log_pmf[k] + math.log(_PMF_REL_SLACK)
        p_value = sum(math.exp(lp) for lp in log_pmf if lp <= log_cutoff)
    return min(1.0, max(0.0, p_value))


def chi2_sf(x: float, df: int) -> float:
    """Chi-square upper tail P(X >= x) with df degrees of freedom."""
    if df < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    if x < 0.0:
        return 1.0
    return regularized_gamma_q(df / 2.0, x / 2.0)


@dataclass(frozen=True)
class HomogeneityResult:
    statistic: float
    df: int
    p_value: float


def homogeneity_test(groups: Sequence[UpDownCounts]) -> HomogeneityResult:
    """Pearson chi-square test of equal proportions across groups.

    The k x 2 contingency table of (ups, downs) is compared against the
    pooled proportion; df = k - 1.
    """
    if len(groups) < 2:
        raise DomainError("homogeneity test needs at least two groups")
    total = sum(g.total for g in groups)
    ups = sum(g.ups for g in groups)
    pooled = ups / total
    if pooled == 0.0 or pooled == 1.0:
        raise DomainError(
            "pooled proportion is degenerate (0 or 1); expected counts vanish")
    statistic = 0.0
    for g in groups:
        expected_up = g.total * pooled
        expected_down = g.total * (1.0 - pooled)
        statistic += (g.ups - expected_up) ** 2 / expected_up
        statistic += ((g.total - g.ups) - expected_down) ** 2 / expected_down
    df = len(groups) - 1
    return HomogeneityResult(statistic=statistic, df=df,
                             p_value=chi2_sf(statistic, df))


@dataclass(frozen=True)
class YearEstimate:
    """Per-year counts, point estimate, and Wilson interval."""

    year: int
    counts: UpDownCounts
    p_hat: float
    ci_low: float
    ci_high: float


def grouped_estimates(dated_returns: Sequence[tuple[_dt.date, float]],
                      level: float = 0.95) -> list[YearEstimate]:
    """Estimate the up proportion per calendar year, ordered by year."""
    if len(dated_returns) == 0:
        raise DomainError("dated return sequence must be non-empty")
    by_year: dict[int, list[float]] = {}
    for date, value in dated_returns:
        by_year.setdefault(date.year, []).append(value)
    estimates = []
    for year in sorted(by_year):
        counts = up_proportion(by_year[year])
        lo, hi = proportion_ci(counts, level)
        estimates.append(YearEstimate(year=year, counts=counts,
                                      p_hat=counts.proportion,
                                      ci_low=lo, ci_high=hi))
    return estimates
