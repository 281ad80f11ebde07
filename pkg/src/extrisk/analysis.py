"""Discount factors, time profiles, and belief-update comparative statics.

The per-period discount factor of each aggregation perspective is the ratio of
consecutive series weights. It is constant for every case except social
welfare, whose ratio starts higher and falls geometrically to the long-run
value (1-M)(1-m)(1+b), the dynasty factor.

Sensitivities of the factor to the perceived hazards are computed in two
regimes: b-fixed (the birth rate stays put when m moves, so n moves) and
n-fixed (b is adjusted to hold the population growth rate constant). Closed
forms are primary; central finite differences are reported alongside as a
cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .model import (
    ConsumptionPath,
    DegenerateHazardError,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    UtilitySpec,
)
from .series import (
    DEFAULT_TOLERANCE,
    Scenario,
    SeriesResult,
    evaluate,
    finiteness_check,
    weight_ratio,
    weight_sequence,
)

__all__ = [
    "DiscountReport",
    "DiscountProfile",
    "RegimeSensitivity",
    "SensitivityReport",
    "SweepRow",
    "discount_factor",
    "factor_from_weights",
    "discount_profile",
    "belief_update_response",
    "scenario_sweep",
]


@dataclass(frozen=True)
class DiscountReport:
    """Per-period discount factor of a case, with both rate conventions.

    For social welfare the per-period ratio is not constant; factor is then
    the long-run limit and constant is False. rate_simple = 1 - factor and
    rate_log = -ln(factor) are always derived from factor.
    """

    case: Scenario
    factor: float
    rate_simple: float
    rate_log: float
    factor_n0: float
    constant: bool
    note: Optional[str] = None


@dataclass(frozen=True)
class DiscountProfile:
    """Consecutive weight ratios r_t of the social welfare series.

    r_t = (1-M)(1-m)(1+b) * (1 - q**(t+2)) / (1 - q**(t+1)) with q = 1/(1+b):
    strictly decreasing, always above the long-run limit (1-M)(1-m)(1+b),
    which it approaches at geometric speed q**t. In float64 the ratios merge
    with the limit once q**t drops below machine resolution.
    """

    ratios: np.ndarray
    long_run: float


def _factor_general(case: Scenario, params: HazardParams) -> float:
    """Discount factor in terms of (m, M, b); social welfare takes its long-run value."""
    if case.kind == "social_welfare":
        return (1.0 - params.M) * params.gross_growth
    return weight_ratio(case, params)


def _factor_n0(case: Scenario, params: HazardParams) -> float:
    """Discount factor under the constant-population restriction (1+b)(1-m) = 1."""
    sM = 1.0 - params.M
    if case.kind == "individual":
        return sM * (1.0 - params.m)
    if case.kind in ("dynasty", "dynasty_theta", "social_welfare"):
        return sM
    if case.kind == "lineage":
        return sM * (1.0 - params.m) ** (1.0 - params.alpha)
    return 1.0 - params.m


def discount_factor(case: Scenario, params: HazardParams) -> DiscountReport:
    """Closed-form discount factor of the case plus its n = 0 restriction.

    known_extinction carries a note: with the extinction date fixed, only the
    individual death hazard discounts and the factor ignores M entirely.
    """
    factor = _factor_general(case, params)
    note = None
    if case.kind == "known_extinction":
        note = (
            "fixed extinction date: only individual mortality discounts; "
            "extinction prospects carry no weight"
        )
    elif case.kind == "social_welfare":
        note = "per-period ratio varies with t; factor is the long-run limit"
    return DiscountReport(
        case=case,
        factor=factor,
        rate_simple=1.0 - factor,
        rate_log=-math.log(factor) if factor > 0.0 else math.inf,
        factor_n0=_factor_n0(case, params),
        constant=case.kind != "social_welfare",
        note=note,
    )


def factor_from_weights(
    case: Scenario, params: HazardParams, horizon: int = 51
) -> float:
    """Per-period factor recovered as w_{t+1}/w_t from the series weights.

    Constant-factor cases only; the ratios over t < horizon must be constant
    to 1e-12, which ties the series engine back to the closed-form factor.
    """
    if case.kind == "social_welfare":
        raise ValueError("social welfare has no constant factor; use discount_profile")
    if case.kind == "known_extinction":
        horizon = min(horizon, case.T + 1)
        if horizon < 2:
            raise ValueError("known_extinction with T = 0 has no consecutive weights")
    w = weight_sequence(case, params, horizon)
    ratios = w[1:] / w[:-1]
    if np.ptp(ratios) > 1e-12:
        raise AssertionError(f"weight ratios are not constant: spread {np.ptp(ratios):.3g}")
    return float(ratios[0])


def discount_profile(params: HazardParams, horizon: int) -> DiscountProfile:
    """Social-welfare weight-ratio profile r_0, ..., r_{horizon-1}. Needs b > 0."""
    if params.b <= 0.0:
        raise ValueError("the social-welfare profile is undefined at b = 0")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    long_run = (1.0 - params.M) * params.gross_growth
    t = np.arange(horizon)
    q = 1.0 / (1.0 + params.b)
    ratios = long_run * (1.0 - np.power(q, t + 2)) / (1.0 - np.power(q, t + 1))
    return DiscountProfile(ratios=ratios, long_run=long_run)


# --- belief-update comparative statics --------------------------------------


@dataclass(frozen=True)
class RegimeSensitivity:
    """Factor derivatives wrt the perceived hazards under one adjustment regime."""

    regime: str
    d_factor_d_M: float
    d_factor_d_m: float
    fd_d_factor_d_M: float
    fd_d_factor_d_m: float


@dataclass(frozen=True)
class SensitivityReport:
    case: Scenario
    b_fixed: RegimeSensitivity
    n_fixed: RegimeSensitivity


def _closed_derivatives(case: Scenario, params: HazardParams, regime: str):
    m, M, b = params.m, params.M, params.b
    sM, sm = 1.0 - M, 1.0 - m
    g = params.gross_growth
    th, al = params.theta, params.alpha
    kind = case.kind
    if kind == "individual":
        return -sm, -sM
    if kind == "known_extinction":
        return 0.0, -1.0
    if kind in ("dynasty", "social_welfare"):
        if regime == "n-fixed":
            return -g, 0.0
        return -g, -sM * (1.0 + b)
    if kind == "dynasty_theta":
        if regime == "n-fixed":
            return -(g**th), 0.0
        return -(g**th), -th * sM * (1.0 + b) * g ** (th - 1.0)
    # lineage
    if regime == "n-fixed":
        return (
            -(sm ** (1.0 - al)) * g**al,
            -(1.0 - al) * sM * sm ** (-al) * g**al,
        )
    return -(1.0 + b) ** al * sm, -sM * (1.0 + b) ** al


def _factor_in_regime(
    case: Scenario, m: float, M: float, base: HazardParams, regime: str
) -> float:
    """Factor as a function of the perceived hazards, holding b or n at its base value."""
    if regime == "b-fixed":
        return _factor_general(case, replace(base, m=m, M=M))
    sM, sm = 1.0 - M, 1.0 - m
    g = base.gross_growth  # n held fixed: the growth factor does not move
    kind = case.kind
    if kind == "individual":
        return sM * sm
    if kind == "known_extinction":
        return sm
    if kind in ("dynasty", "social_welfare"):
        return sM * g
    if kind == "dynasty_theta":
        return sM * g**base.theta
    return sM * sm ** (1.0 - base.alpha) * g**base.alpha


def belief_update_response(
    case: Scenario,
    params: HazardParams,
    dM: float = 1e-6,
    dm: float = 1e-6,
) -> SensitivityReport:
    """How the discount factor responds to belief updates about M and about m.

    Reports closed-form derivatives and central finite differences (steps dM,
    dm) under both regimes. Perturbed hazards must stay inside [0, 1); steps
    that cross a boundary are rejected.
    """
    for name, x, h in (("M", params.M, dM), ("m", params.m, dm)):
        if h <= 0.0:
            raise ValueError(f"d{name} must be > 0")
        if x - h < 0.0 or x + h >= 1.0:
            raise ValueError(
                f"finite-difference step d{name}={h!r} crosses the boundary at {name}={x!r}"
            )
    regimes = []
    for regime in ("b-fixed", "n-fixed"):
        cd_M, cd_m = _closed_derivatives(case, params, regime)
        f = lambda m, M: _factor_in_regime(case, m, M, params, regime)
        fd_M = (f(params.m, params.M + dM) - f(params.m, params.M - dM)) / (2.0 * dM)
        fd_m = (f(params.m + dm, params.M) - f(params.m - dm, params.M)) / (2.0 * dm)
        regimes.append(
            RegimeSensitivity(
                regime=regime,
                d_factor_d_M=cd_M,
                d_factor_d_m=cd_m,
                fd_d_factor_d_M=fd_M,
                fd_d_factor_d_m=fd_m,
            )
        )
    return SensitivityReport(case=case, b_fixed=regimes[0], n_fixed=regimes[1])


# --- scenario sweeps ---------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    """One (parameter point, case) evaluation; divergent points are flagged, kept."""

    params: HazardParams
    case: Scenario
    report: DiscountReport
    finite: bool
    finiteness_product: float
    finiteness_margin: float
    series: Optional[SeriesResult]
    status: str  # "ok" | "divergent" | "rejected: <reason>"

    def to_dict(self) -> dict:
        p = self.params
        row = {
            "m": p.m,
            "M": p.M,
            "b": p.b,
            "theta": p.theta,
            "alpha": p.alpha,
            "N0": p.N0,
            "n": p.n,
            "case": self.case.label(),
            "factor": self.report.factor,
            "rate_simple": self.report.rate_simple,
            "rate_log": self.report.rate_log,
            "factor_n0": self.report.factor_n0,
            "constant_factor": self.report.constant,
            "finite": self.finite,
            "finiteness_product": self.finiteness_product,
            "finiteness_margin": self.finiteness_margin,
            "status": self.status,
        }
        if self.series is not None:
            row.update(
                value=self.series.value,
                tail_bound=self.series.tail_bound,
                truncation_index=self.series.truncation_index,
                converged=self.series.converged,
            )
        else:
            row.update(value=None, tail_bound=None, truncation_index=None, converged=None)
        return row


def scenario_sweep(
    points: Iterable[HazardParams],
    cases: Sequence[Scenario],
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> List[SweepRow]:
    """Evaluate every case at every parameter point; one row per (point, case)."""
    rows: List[SweepRow] = []
    for params in points:
        for case in cases:
            chk = finiteness_check(case, params)
            report = discount_factor(case, params)
            series = None
            status = "ok"
            if not chk.finite:
                status = "divergent"
            else:
                try:
                    series = evaluate(case, params, path, u, tol)
                except DivergenceError:
                    status = "divergent"
                except (NoExtinctionError, DegenerateHazardError, ValueError) as exc:
                    status = f"rejected: {exc}"
            rows.append(
                SweepRow(
                    params=params,
                    case=case,
                    report=report,
                    finite=chk.finite,
                    finiteness_product=chk.product,
                    finiteness_margin=chk.margin,
                    series=series,
                    status=status,
                )
            )
    return rows
