"""Classical statistics used across the toolkit.

Descriptive moments, relative change in mean/variance between an original and
an aggregated variable, Welch's two-sample t-test, the (mean-centered) Levene
test for equality of variances, and the empirical pseudo-p of a statistic
against a simulated null vector.

Conventions: variances are sample variances (divisor n-1) everywhere. The
relative-change-in-mean ratio divides by the signed original mean exactly as
defined; a warning is emitted when that mean is negative, since the ratio is
then negative and usually not what the caller wants (the experiment harness
divides by |mean| instead and flags the deviation in its metadata).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    UndefinedRatioError,
)

__all__ = [
    "STANDARD_ALPHAS",
    "TestOutcome",
    "descriptives",
    "rcm",
    "rcv",
    "mean_over_repeats",
    "welch_t_test",
    "levene_test",
    "pseudo_p",
]

STANDARD_ALPHAS = (0.01, 0.05, 0.1)


@dataclass(frozen=True)
class TestOutcome:
    """Statistic, two-sided p-value, and reject decisions at standard levels."""

    statistic: float
    p_value: float
    rejected_at: dict[float, bool]

    def rejects(self, alpha: float) -> bool:
        return self.p_value < alpha


def _outcome(statistic: float, p_value: float) -> TestOutcome:
    p = float(min(max(p_value, 0.0), 1.0))
    return TestOutcome(
        statistic=float(statistic),
        p_value=p,
        rejected_at={a: p < a for a in STANDARD_ALPHAS},
    )


def descriptives(x) -> tuple[float, float]:
    """Arithmetic mean and sample variance (divisor n-1) of a vector."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size < 2:
        raise InsufficientDataError(
            f"need at least 2 observations for a variance, got {arr.size}"
        )
    return float(arr.mean()), float(arr.var(ddof=1))


def rcm(original, aggregated) -> float:
    """Relative change in the mean: |mean_o - mean_ag| / mean_o.

    The divisor is the signed original mean. A zero mean is an error; a
    negative mean triggers a warning because the ratio flips sign.
    """
    mu_o = float(np.mean(original))
    mu_ag = float(np.mean(aggregated))
    if mu_o == 0.0:
        raise UndefinedRatioError("relative change in mean is undefined for a zero original mean")
    if mu_o < 0.0:
        warnings.warn(
            "original mean is negative; the signed-divisor relative change is negative "
            "(consider dividing by |mean| for near-zero-mean fields)",
            stacklevel=2,
        )
    return abs(mu_o - mu_ag) / mu_o


def rcv(original, aggregated) -> float:
    """Relative change in the variance: |var_o - var_ag| / var_o."""
    _, var_o = descriptives(original)
    _, var_ag = descriptives(aggregated)
    if var_o == 0.0:
        raise UndefinedRatioError("relative change in variance is undefined for zero original variance")
    return abs(var_o - var_ag) / var_o


def mean_over_repeats(values) -> float:
    """Mean of per-repeat metric values (the repeat-averaged RCM or RCV)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("cannot average zero repeats")
    return float(arr.mean())


def welch_t_test(a, b) -> TestOutcome:
    """Welch's two-sample t-test (unequal variances), two-sided p.

    Degrees of freedom follow Welch-Satterthwaite. Used to compare the mean
    of a disaggregated variable with the mean of an aggregated one, whose
    lengths and variances differ.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InsufficientDataError("both samples need at least 2 observations")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DegenerateSampleError("samples must be finite")
    if a.var(ddof=1) == 0.0 and b.var(ddof=1) == 0.0:
        raise DegenerateSampleError("both samples have zero variance")
    stat, p = scipy.stats.ttest_ind(a, b, equal_var=False)
    return _outcome(stat, p)


def levene_test(a, b, center: str = "mean") -> TestOutcome:
    """Levene's test for equality of variances of two samples.

    Classic Levene scores are absolute deviations from the group mean; the
    one-way F statistic on those scores has (1, n_a + n_b - 2) degrees of
    freedom. ``center="median"`` switches to Brown-Forsythe scoring for
    sensitivity checks.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InsufficientDataError("both samples need at least 2 observations")
    if center not in ("mean", "median"):
        raise ValueError(f"center must be 'mean' or 'median', got {center!r}")
    za = np.abs(a - (a.mean() if center == "mean" else np.median(a)))
    zb = np.abs(b - (b.mean() if center == "mean" else np.median(b)))
    if np.ptp(np.concatenate([za, zb])) == 0.0:
        raise DegenerateSampleError("all deviation scores are identical in both groups")
    stat, p = scipy.stats.levene(a, b, center=center)
    return _outcome(stat, p)


def pseudo_p(null_values, m: float) -> float:
    """Fraction of simulated null statistics strictly greater than ``m``."""
    arr = np.asarray(null_values, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("empty null distribution")
    return float(np.count_nonzero(arr > m)) / arr.size
