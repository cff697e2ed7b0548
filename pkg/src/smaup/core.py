"""The MAUP-sensitivity statistic and hypothesis test.

The statistic M(rho, theta) maps the spatial autocorrelation of a variable
(rho) and its aggregation ratio (theta = k/N) to (0, 1): values near one mean
the variable's distribution will be badly distorted by aggregating N areas
into k regions, values near zero mean it is safe. The closed form is an
inverted logistic in rho whose ceiling, onset, and decline speed are
themselves functions of theta:

    M(rho, theta) = L(theta) / (1 + eta(theta) * exp(tau(theta) * rho))

with L an inverse logistic in theta, eta a power law, and tau affine. The
six constants were calibrated once against large-scale aggregation
simulations and ship as frozen defaults in :class:`SmaupParams`.

The one-sided test rejects the null of non-sensitivity when M exceeds the
tabulated critical value for (N, rho) at the requested level, and can also
report an empirical pseudo-p against a user-supplied simulated null vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__ as _toolkit_version
from .critical_values import (
    ALPHA_GRID,
    DEFAULT_TABLE,
    CriticalValueTable,
)
from .errors import InvalidAlphaError, InvalidKError
from .sar import AreaVariable, estimate_rho
from .stats import pseudo_p as _pseudo_p
from .weights import SpatialWeights

__all__ = [
    "SmaupParams",
    "DEFAULT_PARAMS",
    "SmaupResult",
    "l_of_theta",
    "eta_of_theta",
    "tau_of_theta",
    "m_statistic",
    "smaup_test",
    "scan_k",
    "min_safe_k",
]


@dataclass(frozen=True)
class SmaupParams:
    """Calibrated constants of the statistic's closed form.

    ``logistic_intercept``/``logistic_slope`` shape the ceiling L(theta),
    ``power_scale``/``power_exponent`` the onset eta(theta), and
    ``tau_intercept``/``tau_slope`` the decline speed tau(theta). Override
    only through explicit configuration; the defaults are the published
    calibration.
    """

    logistic_intercept: float = -2.188  # b
    logistic_slope: float = 7.031       # m
    power_scale: float = 0.516          # p
    power_exponent: float = 1.287       # a
    tau_intercept: float = 5.319        # beta0
    tau_slope: float = -5.532           # beta1

    def to_dict(self) -> dict:
        return {
            "logistic_intercept": self.logistic_intercept,
            "logistic_slope": self.logistic_slope,
            "power_scale": self.power_scale,
            "power_exponent": self.power_exponent,
            "tau_intercept": self.tau_intercept,
            "tau_slope": self.tau_slope,
        }


DEFAULT_PARAMS = SmaupParams()


def l_of_theta(theta, params: SmaupParams = DEFAULT_PARAMS):
    """Ceiling of the statistic: inverse logistic 1 / (1 + e^(b + m*theta)).

    Strictly decreasing in theta for positive slope: heavy aggregation
    (small theta) allows sensitivity near 0.9, no aggregation (theta = 1)
    caps it near zero.
    """
    theta = np.asarray(theta, dtype=np.float64)
    out = 1.0 / (1.0 + np.exp(params.logistic_intercept + params.logistic_slope * theta))
    return float(out) if out.ndim == 0 else out


def eta_of_theta(theta, params: SmaupParams = DEFAULT_PARAMS):
    """Decline-onset factor: power law p * theta^a, increasing on (0, 1]."""
    theta = np.asarray(theta, dtype=np.float64)
    out = params.power_scale * np.power(theta, params.power_exponent)
    return float(out) if out.ndim == 0 else out


def tau_of_theta(theta, params: SmaupParams = DEFAULT_PARAMS):
    """Decline-speed factor: affine beta0 + beta1 * theta.

    Positive for theta below ~0.9615 with default constants, negative above;
    its sign sets whether M falls or rises in rho.
    """
    theta = np.asarray(theta, dtype=np.float64)
    out = params.tau_intercept + params.tau_slope * theta
    return float(out) if out.ndim == 0 else out


def m_statistic(rho, theta, params: SmaupParams = DEFAULT_PARAMS):
    """The sensitivity statistic M(rho, theta) = L / (1 + eta * e^(tau*rho)).

    Always strictly inside (0, L(theta)) because the denominator exceeds 1.
    Accepts scalars or broadcastable arrays.
    """
    rho = np.asarray(rho, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    num = 1.0 / (1.0 + np.exp(params.logistic_intercept + params.logistic_slope * theta))
    den = 1.0 + (
        params.power_scale
        * np.power(theta, params.power_exponent)
        * np.exp((params.tau_intercept + params.tau_slope * theta) * rho)
    )
    out = num / den
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SmaupResult:
    """Outcome of one MAUP-sensitivity test.

    ``decision[alpha]`` is True iff ``m_value > critical_values[alpha]``.
    ``pseudo_p`` and ``pseudo_p_decision`` are present only when a simulated
    null vector was supplied.
    """

    m_value: float
    theta: float
    rho_used: float
    n: int
    k: int
    critical_values: dict[float, float]
    decision: dict[float, bool]
    pseudo_p: float | None = None
    pseudo_p_decision: dict[float, bool] | None = None
    params: SmaupParams = field(default=DEFAULT_PARAMS, compare=False)

    def rejects(self, alpha: float) -> bool:
        if alpha not in self.decision:
            raise InvalidAlphaError(f"no decision recorded at alpha={alpha}")
        return self.decision[alpha]

    def significance_stars(self) -> str:
        """Publication convention: *** / ** / * for rejection at 0.01 / 0.05 / 0.1."""
        if self.decision.get(0.01):
            return "***"
        if self.decision.get(0.05):
            return "**"
        if self.decision.get(0.1):
            return "*"
        return ""

    def to_dict(self) -> dict:
        d = {
            "toolkit_version": _toolkit_version,
            "m_value": self.m_value,
            "theta": self.theta,
            "rho_used": self.rho_used,
            "n": self.n,
            "k": self.k,
            "critical_values": {str(a): v for a, v in self.critical_values.items()},
            "decision": {str(a): bool(v) for a, v in self.decision.items()},
            "pseudo_p": self.pseudo_p,
            "pseudo_p_decision": (
                None
                if self.pseudo_p_decision is None
                else {str(a): bool(v) for a, v in self.pseudo_p_decision.items()}
            ),
            "params": self.params.to_dict(),
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _null_values(null) -> np.ndarray | None:
    if null is None:
        return None
    values = getattr(null, "values", null)
    return np.asarray(values, dtype=np.float64)


def smaup_test(
    y: AreaVariable,
    w: SpatialWeights,
    k: int,
    alpha: float = 0.05,
    null=None,
    rho: float | None = None,
    params: SmaupParams = DEFAULT_PARAMS,
    table: CriticalValueTable = DEFAULT_TABLE,
    cv_mode: str = "nearest",
) -> SmaupResult:
    """Test whether aggregating ``y`` into k regions distorts its distribution.

    The variable's autocorrelation is estimated by maximum likelihood unless
    ``rho`` overrides it; theta is k/n. The result carries critical values
    and reject/not-reject decisions at all tabulated levels. When ``null``
    (a simulated null vector or NullDistribution) is given, an empirical
    pseudo-p and the matching decisions are attached as well.

    Parameters
    ----------
    y : AreaVariable
        The disaggregated variable.
    w : SpatialWeights
        Contiguity structure that y lives on.
    k : int
        Number of regions the areas would be aggregated into, in [1, n].
    alpha : float
        Headline significance level; must be one of the tabulated levels.
    null : NullDistribution or array, optional
        Simulated null statistic values for pseudo-p computation.
    rho : float, optional
        Skip estimation and use this autocorrelation value.
    """
    if not 1 <= k <= w.n:
        raise InvalidKError(f"k must be in [1, {w.n}], got {k}")
    if alpha not in ALPHA_GRID:
        raise InvalidAlphaError(f"alpha must be one of {ALPHA_GRID}, got {alpha}")
    if cv_mode not in ("nearest", "bilinear"):
        raise ValueError(f"cv_mode must be 'nearest' or 'bilinear', got {cv_mode!r}")
    rho_used = float(rho) if rho is not None else estimate_rho(w, y)
    theta = k / w.n
    m = m_statistic(rho_used, theta, params)
    crit = {a: table.lookup(w.n, rho_used, a) if cv_mode == "nearest"
            else table.lookup_bilinear(w.n, rho_used, a)
            for a in ALPHA_GRID}
    decision = {a: bool(m > crit[a]) for a in ALPHA_GRID}
    nv = _null_values(null)
    if nv is None:
        pp, pp_decision = None, None
    else:
        pp = _pseudo_p(nv, m)
        pp_decision = {a: bool(pp < a) for a in ALPHA_GRID}
    return SmaupResult(
        m_value=float(m),
        theta=float(theta),
        rho_used=rho_used,
        n=w.n,
        k=k,
        critical_values=crit,
        decision=decision,
        pseudo_p=pp,
        pseudo_p_decision=pp_decision,
        params=params,
    )


def scan_k(
    y: AreaVariable,
    w: SpatialWeights,
    alpha: float = 0.05,
    k_min: int = 1,
    k_max: int | None = None,
    null=None,
    rho: float | None = None,
    params: SmaupParams = DEFAULT_PARAMS,
    table: CriticalValueTable = DEFAULT_TABLE,
) -> list[SmaupResult]:
    """Test every aggregation level from k_max down to k_min.

    The autocorrelation is estimated once and reused across levels (it does
    not depend on k). Results are ordered by descending k.
    """
    k_max = w.n if k_max is None else k_max
    if not 1 <= k_min <= k_max <= w.n:
        raise InvalidKError(
            f"need 1 <= k_min <= k_max <= {w.n}, got [{k_min}, {k_max}]"
        )
    rho_used = float(rho) if rho is not None else estimate_rho(w, y)
    return [
        smaup_test(y, w, k, alpha=alpha, null=null, rho=rho_used, params=params, table=table)
        for k in range(k_max, k_min - 1, -1)
    ]


def min_safe_k(
    y: AreaVariable,
    w: SpatialWeights,
    alpha: float = 0.05,
    k_min: int = 1,
    k_max: int | None = None,
    null=None,
    rho: float | None = None,
    params: SmaupParams = DEFAULT_PARAMS,
    table: CriticalValueTable = DEFAULT_TABLE,
) -> int | None:
    """Smallest aggregation level in [k_min, k_max] the test deems safe.

    Scans k descending from k_max and stops at the first rejection; the
    previous (larger) k is the answer — e.g. if the first rejection happens
    at k = 135 the minimum safe level is 136. Returns k_min when no level
    rejects, and None when every level rejects (no safe k in range).

    The rejection rule is the critical-value comparison, or the pseudo-p
    comparison when a simulated null vector is supplied.
    """
    k_max = w.n if k_max is None else k_max
    if not 1 <= k_min <= k_max <= w.n:
        raise InvalidKError(
            f"need 1 <= k_min <= k_max <= {w.n}, got [{k_min}, {k_max}]"
        )
    rho_used = float(rho) if rho is not None else estimate_rho(w, y)
    previous: int | None = None
    for k in range(k_max, k_min - 1, -1):
        result = smaup_test(y, w, k, alpha=alpha, null=null, rho=rho_used, params=params, table=table)
        if null is not None:
            rejected = result.pseudo_p_decision[alpha]
        else:
            rejected = result.decision[alpha]
        if rejected:
            return previous
        previous = k
    return previous
