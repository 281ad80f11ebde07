"""Expected-utility functionals as truncated series with rigorous tail bounds.

Every functional here has the shape  sum_t w_t u(c_t)  where the weights w_t
encode survival odds and population weighting:

    individual        w_t = ((1-m)(1-M))**t
    dynasty           w_t = ((1-M)(1+n))**t                 with (1+n)=(1+b)(1-m)
    dynasty, theta    w_t = ((1-M)(1+n)**theta)**t
    lineage           w_t = ((1-M)(1+b)**alpha (1-m))**t
    social welfare    w_t = N0 (1+b)/b ((1-M)(1+n))**t (1 - (1+b)**-(t+1))
    known date T      w_t = (1-m)**t  for t <= T, finite sum

Infinite sums are truncated once a rigorous bound on the omitted tail falls
below the requested absolute tolerance. The bound combines the geometric
weight envelope with an envelope on |u(c_t)| of the form a + b*k + c*gamma**k,
which covers constant tails (bounded u), geometric tails under log utility
(linear growth of |u|) and under CRRA (geometric growth when sigma > 1). A
small rounding envelope, 16*eps*sum|w_t u_t|, is folded into the reported
bound so it also dominates floating-point accumulation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import (
    ConsumptionPath,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    UtilitySpec,
)

__all__ = [
    "DEFAULT_TOLERANCE",
    "MAX_TERMS",
    "SeriesResult",
    "Scenario",
    "INDIVIDUAL",
    "DYNASTY",
    "DYNASTY_THETA",
    "LINEAGE",
    "SOCIAL_WELFARE",
    "known_extinction",
    "FinitenessResult",
    "finiteness_check",
    "weight_ratio",
    "weight_sequence",
    "eu_individual",
    "ev_dynasty",
    "ev_dynasty_theta",
    "eg_lineage",
    "eu_known_T",
    "welfare_window",
    "welfare_window_direct",
    "welfare_window_terms",
    "ew_social",
    "ew_social_n0_form",
    "ew_social_mixture",
    "evaluate",
]

DEFAULT_TOLERANCE = 1e-10
MAX_TERMS = 1_000_000
_BLOCK = 512
_EPS = float(np.finfo(float).eps)

_CASE_KINDS = (
    "individual",
    "dynasty",
    "dynasty_theta",
    "lineage",
    "social_welfare",
    "known_extinction",
)


@dataclass(frozen=True)
class Scenario:
    """One of the aggregation perspectives; known_extinction carries its date."""

    kind: str
    T: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in _CASE_KINDS:
            raise ValueError(f"kind must be one of {_CASE_KINDS}, got {self.kind!r}")
        if self.kind == "known_extinction":
            if self.T is None or self.T < 0:
                raise ValueError("known_extinction needs a finite date T >= 0")
        elif self.T is not None:
            raise ValueError(f"{self.kind} takes no extinction date")

    def label(self) -> str:
        if self.kind == "known_extinction":
            return f"known_extinction(T={self.T})"
        return self.kind


INDIVIDUAL = Scenario("individual")
DYNASTY = Scenario("dynasty")
DYNASTY_THETA = Scenario("dynasty_theta")
LINEAGE = Scenario("lineage")
SOCIAL_WELFARE = Scenario("social_welfare")


def known_extinction(T: int) -> Scenario:
    return Scenario("known_extinction", T=int(T))


@dataclass(frozen=True)
class SeriesResult:
    """Truncated series value.

    tail_bound is a rigorous upper bound on |true value - value|: analytic
    bound on the omitted terms plus the rounding envelope of the summation.
    converged means tail_bound <= the requested tolerance.
    """

    value: float
    truncation_index: int
    tail_bound: float
    converged: bool


@dataclass(frozen=True)
class FinitenessResult:
    finite: bool
    product: float
    margin: float  # 1 - product; positive means finite


def weight_ratio(case: Scenario, params: HazardParams) -> float:
    """Constant per-period weight ratio of the case (social welfare excluded)."""
    if case.kind == "individual":
        return (1.0 - params.m) * (1.0 - params.M)
    if case.kind == "dynasty":
        return (1.0 - params.M) * params.gross_growth
    if case.kind == "dynasty_theta":
        return (1.0 - params.M) * params.gross_growth**params.theta
    if case.kind == "lineage":
        return (1.0 - params.M) * (1.0 + params.b) ** params.alpha * (1.0 - params.m)
    if case.kind == "known_extinction":
        return 1.0 - params.m
    raise ValueError("social_welfare has no constant weight ratio; see weight_sequence")


def finiteness_check(case: Scenario, params: HazardParams) -> FinitenessResult:
    """Convergence product for the case and its distance from 1.

    known_extinction is a finite sum and is always finite; for the other cases
    the series converges iff the product is < 1.
    """
    if case.kind == "social_welfare":
        product = (1.0 - params.M) * params.gross_growth
    else:
        product = weight_ratio(case, params)
    margin = 1.0 - product
    finite = True if case.kind == "known_extinction" else product < 1.0
    return FinitenessResult(finite=finite, product=product, margin=margin)


def weight_sequence(case: Scenario, params: HazardParams, length: int) -> np.ndarray:
    """First ``length`` series weights w_0, w_1, ... of the case.

    Constant-ratio cases are built by cumulative multiplication so consecutive
    computed ratios equal the per-period factor to machine precision. The
    social-welfare weights include the N0 (1+b)/b prefactor; known_extinction
    weights are zero strictly after T.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if case.kind == "social_welfare":
        if params.b <= 0.0:
            raise ValueError("social welfare weights need b > 0")
        t = np.arange(length)
        rho = (1.0 - params.M) * params.gross_growth
        q = 1.0 / (1.0 + params.b)
        pref = params.N0 * (1.0 + params.b) / params.b
        return pref * np.power(rho, t) * (1.0 - np.power(q, t + 1))
    rho = weight_ratio(case, params)
    w = np.empty(length)
    if length > 0:
        w[0] = 1.0
        for t in range(1, length):
            w[t] = w[t - 1] * rho
    if case.kind == "known_extinction" and length > case.T + 1:
        w[case.T + 1 :] = 0.0
    return w


# --- tail machinery ---------------------------------------------------------


class _KahanAccumulator:
    """Compensated running sum; per-element error stays ~2 eps of the partial sum."""

    def __init__(self) -> None:
        self.total = 0.0
        self._carry = 0.0

    def extend(self, terms: np.ndarray) -> np.ndarray:
        out = np.empty(len(terms))
        s, c = self.total, self._carry
        for i in range(len(terms)):
            y = float(terms[i]) - c
            t = s + y
            c = (t - s) - y
            s = t
            out[i] = s
        self.total, self._carry = s, c
        return out


class _TailBounder:
    """Rigorous bound on prefactor * sum_{t >= t0} rho**t |u(c_t)|.

    |u| along the tail rule is enveloped at the prefix end by
    a + lin*j + geo*gamma**j (j periods past the anchor). Bounds at later
    truncation points reuse the anchored coefficients, so no intermediate
    quantity is evaluated at a consumption level that has decayed past
    floating-point range.
    """

    def __init__(self, rho: float, path: ConsumptionPath, u: UtilitySpec, prefactor: float):
        self.rho = rho
        self.prefactor = prefactor
        self.anchor = path.prefix_len
        a, lin, geo, gamma = self._envelope(path, u)
        if geo > 0.0 and rho * gamma >= 1.0:
            raise DivergenceError(
                f"utility tail grows at rate {gamma:.6g} against weight ratio "
                f"{rho:.6g}: rho*gamma = {rho * gamma:.6g} >= 1, the series diverges"
            )
        self.a, self.lin, self.geo, self.gamma = a, lin, geo, gamma

    @staticmethod
    def _envelope(path: ConsumptionPath, u: UtilitySpec):
        c0 = path.value(path.prefix_len)
        if path.tail == "constant":
            return abs(float(u(c0))), 0.0, 0.0, 0.0
        g = path.ratio
        if u.family == "linear":
            return 0.0, 0.0, c0, g
        if g == 0.0:
            raise ValueError(f"{u.family} utility is undefined on a ratio-0 tail (c = 0)")
        if u.family == "log":
            return abs(math.log(c0)), abs(math.log(g)), 0.0, 0.0
        s = u.sigma
        return 1.0 / abs(1.0 - s), 0.0, c0 ** (1.0 - s) / abs(1.0 - s), g ** (1.0 - s)

    def bound(self, t0: int) -> float:
        if t0 < self.anchor:
            raise ValueError("bound anchor must be at or beyond the prefix end")
        rho = self.rho
        k = t0 - self.anchor
        flat = (self.a + self.lin * k) / (1.0 - rho) + self.lin * rho / (1.0 - rho) ** 2
        total = rho**t0 * flat
        if self.geo > 0.0:
            # geo * gamma**k * rho**t0, regrouped so no factor overflows alone
            total += (
                self.geo * rho**self.anchor * (rho * self.gamma) ** k
                / (1.0 - rho * self.gamma)
            )
        return self.prefactor * total

    @property
    def evaluation_limit(self) -> int:
        """Largest date whose u value provably stays inside float range."""
        if self.geo <= 0.0 or self.gamma <= 1.0:
            return MAX_TERMS
        # geo * gamma**j overflows past j ~ log(huge/geo)/log(gamma)
        j_max = (math.log(1e300) - math.log(max(self.geo, 1e-300))) / math.log(self.gamma)
        return min(MAX_TERMS, self.anchor + max(int(j_max), 1))


def _truncated_sum(
    rho: float,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float,
    prefactor: float = 1.0,
    modifier: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> SeriesResult:
    """Sum prefactor * rho**t * modifier(t) * u(c_t) until the tail bound <= tol.

    modifier, when given, must map into [0, 1] so the geometric envelope stays
    valid. The bound is checked before each block past the prefix, so terms
    beyond the stopping point are never evaluated. Capped at MAX_TERMS; a
    capped sum is returned with converged=False.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be > 0")
    if rho >= 1.0:
        raise DivergenceError(f"weight ratio {rho:.6g} >= 1")
    bounder = _TailBounder(rho, path, u, prefactor)
    limit = max(bounder.evaluation_limit, path.prefix_len)
    block_sums = []
    abs_sum = 0.0
    t0 = 0
    block = 32
    bound = math.inf
    while True:
        if t0 >= path.prefix_len:
            bound = float(bounder.bound(t0) + 16.0 * _EPS * abs_sum)
            if bound <= tol or t0 >= limit:
                break
        stop = min(max(t0 + block, path.prefix_len), limit)
        block = min(2 * block, _BLOCK)
        t = np.arange(t0, stop)
        uu = np.asarray(u(path.values(t0, stop)), dtype=float)
        w = prefactor * np.power(rho, t)
        if modifier is not None:
            w = w * modifier(t)
        block_sums.append(float(np.dot(w, uu)))
        abs_sum += float(np.dot(np.abs(w), np.abs(uu)))
        t0 = stop
    value = math.fsum(block_sums)
    return SeriesResult(
        value=value,
        truncation_index=t0 - 1,
        tail_bound=bound,
        converged=bound <= tol,
    )


# --- the functionals ---------------------------------------------------------


def eu_individual(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Expected lifetime utility of a single individual.

    EU = sum_t ((1-m)(1-M))**t u(c_t): the mixture over the random death date
    D of cumulative utility u(c_0) + ... + u(c_D). Rejects the degenerate
    m = M = 0 case, whose lifetime distribution is defective.
    """
    if params.is_degenerate:
        raise DivergenceError(
            "m = M = 0: joint survival is 1 and expected lifetime utility diverges"
        )
    return _truncated_sum(weight_ratio(INDIVIDUAL, params), path, u, tol)


def _require_extinction(params: HazardParams) -> None:
    if params.M == 0.0:
        raise NoExtinctionError(
            "M = 0: the extinction-date mixture is defective and the functional undefined"
        )


def _require_finite(case: Scenario, params: HazardParams) -> float:
    chk = finiteness_check(case, params)
    if not chk.finite:
        raise DivergenceError(
            f"{case.kind}: finiteness requires the weight product < 1, got "
            f"{chk.product:.6g} (margin {chk.margin:.3g})"
        )
    return chk.product


def ev_dynasty(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Expected total utility of a dynasty growing at (1+n) = (1+b)(1-m).

    EV = sum_t ((1-M)(1+n))**t u(c_t); finite iff (1-M)(1+n) < 1. With b = 0
    this reduces exactly to the individual functional.
    """
    _require_extinction(params)
    rho = _require_finite(DYNASTY, params)
    return _truncated_sum(rho, path, u, tol)


def ev_dynasty_theta(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Dynasty utility with population-size weighting (1+n)**(theta*t).

    theta = 1 is total (Benthamite) weighting and reproduces ev_dynasty;
    theta = 0 is per-capita (Millian) weighting, leaving only (1-M)**t.
    Finite iff (1-M)(1+n)**theta < 1.
    """
    _require_extinction(params)
    rho = _require_finite(DYNASTY_THETA, params)
    return _truncated_sum(rho, path, u, tol)


def eg_lineage(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Expected utility accruing to a genetic lineage.

    EG = sum_t ((1-M)(1+b)**alpha (1-m))**t u(c_t): reproduction only passes
    on a fraction alpha of the ancestor's weighting, so mortality is hedged
    only partially. Finite iff (1-M)(1+b)**alpha (1-m) < 1.
    """
    _require_extinction(params)
    rho = _require_finite(LINEAGE, params)
    return _truncated_sum(rho, path, u, tol)


def eu_known_T(
    m: float, T: int, path: ConsumptionPath, u: UtilitySpec
) -> float:
    """Individual expected utility when the extinction date T is known.

    Exact finite sum sum_{t=0}^{T} (1-m)**t u(c_t): only the individual death
    hazard discounts, independently of when extinction is scheduled.
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"m must lie in [0, 1], got {m!r}")
    if T < 0:
        raise ValueError("T must be >= 0")
    pieces = []
    for start in range(0, T + 1, 4096):
        stop = min(start + 4096, T + 1)
        t = np.arange(start, stop)
        uu = np.asarray(u(path.values(start, stop)), dtype=float)
        pieces.append(float(np.dot(np.power(1.0 - m, t), uu)))
    return math.fsum(pieces)


def _window_terms_range(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    start: int,
    stop: int,
) -> np.ndarray:
    t = np.arange(start, stop)
    uu = np.asarray(u(path.values(start, stop)), dtype=float)
    q = 1.0 / (1.0 + params.b)
    pref = params.N0 * (1.0 + params.b) / params.b
    return pref * uu * np.power(params.gross_growth, t) * (1.0 - np.power(q, t + 1))


def welfare_window_terms(
    params: HazardParams, path: ConsumptionPath, u: UtilitySpec, length: int
) -> np.ndarray:
    """Per-date contributions to W(0, T): W(0, T) = sum of the first T+1 terms.

    term_t = N0 (1+b)/b * u(c_t) (1+n)**t (1 - (1+b)**-(t+1)); requires b > 0.
    """
    if params.b <= 0.0:
        raise ValueError("the closed-form window terms need b > 0")
    return _window_terms_range(params, path, u, 0, length)


def welfare_window_direct(
    params: HazardParams, T: int, path: ConsumptionPath, u: UtilitySpec
) -> float:
    """W(0, T) straight from its definition sum_t N_t sum_{tau>=t} (1-m)**(tau-t) u(c_tau).

    The inner remaining-utility sums use the exact backward recurrence
    inner_t = u(c_t) + (1-m) inner_{t+1}. Works for any b >= 0.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    uu = np.asarray(u(path.values(0, T + 1)), dtype=float)
    inner = np.empty(T + 1)
    inner[T] = uu[T]
    for t in range(T - 1, -1, -1):
        inner[t] = uu[t] + (1.0 - params.m) * inner[t + 1]
    pop = params.N0 * np.power(params.gross_growth, np.arange(T + 1))
    return math.fsum(pop * inner)


def welfare_window(
    params: HazardParams,
    T: int,
    path: ConsumptionPath,
    u: UtilitySpec,
    check: bool = False,
) -> float:
    """Total welfare W(0, T) of everyone present between 0 and the extinction date T.

    Uses the closed form for b > 0 and falls back to the direct double sum at
    b = 0 (the closed form divides by b). With check=True both routes are
    computed and must agree to 1e-10 relative.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    if params.b <= 0.0:
        return welfare_window_direct(params, T, path, u)
    value = math.fsum(welfare_window_terms(params, path, u, T + 1))
    if check:
        direct = welfare_window_direct(params, T, path, u)
        scale = max(abs(value), abs(direct), 1.0)
        if abs(value - direct) > 1e-10 * scale:
            raise AssertionError(
                f"welfare window closed form {value!r} and double sum {direct!r} "
                f"disagree beyond 1e-10 relative"
            )
    return value


def _ew_preconditions(params: HazardParams) -> float:
    if params.b <= 0.0:
        raise ValueError("social welfare needs b > 0; use welfare_window at b = 0")
    _require_extinction(params)
    return _require_finite(SOCIAL_WELFARE, params)


def ew_social(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Expected social welfare EW = sum_T P_X(T) W(0, T) in closed series form.

    EW = N0 (1+b)/b sum_t u(c_t) ((1-M)(1+n))**t (1 - (1+b)**-(t+1)); finite
    iff (1-M)(1+n) < 1, and requires b > 0, M > 0. When n = 0 the constant
    population simplification is evaluated as well and must agree to 1e-10
    relative.
    """
    rho = _ew_preconditions(params)
    q = 1.0 / (1.0 + params.b)
    pref = params.N0 * (1.0 + params.b) / params.b
    result = _truncated_sum(
        rho, path, u, tol, prefactor=pref,
        modifier=lambda t: 1.0 - np.power(q, t + 1),
    )
    if abs(params.n) <= 1e-12:
        simplified = ew_social_n0_form(params, path, u, tol)
        scale = max(abs(result.value), abs(simplified.value), 1.0)
        slack = result.tail_bound + simplified.tail_bound
        if abs(result.value - simplified.value) > 1e-10 * scale + slack:
            raise AssertionError(
                f"general form {result.value!r} and n=0 simplification "
                f"{simplified.value!r} disagree beyond 1e-10 relative"
            )
    return result


def ew_social_n0_form(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Constant-population social welfare, (N0/m) sum_t u(c_t) (1-M)**t (1-(1-m)**(t+1)).

    Matches ew_social when n = 0, i.e. (1+b)(1-m) = 1; evaluated as written
    for any m > 0, M > 0.
    """
    if params.m <= 0.0:
        raise ValueError("the n = 0 simplification divides by m; needs m > 0")
    _require_extinction(params)
    sm = 1.0 - params.m
    return _truncated_sum(
        1.0 - params.M, path, u, tol,
        prefactor=params.N0 / params.m,
        modifier=lambda t: 1.0 - np.power(sm, t + 1),
    )


def ew_social_mixture(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = 1e-8,
) -> SeriesResult:
    """EW evaluated from its definition, sum_T P_X(T) W(0, T).

    Independent route used to cross-check ew_social. The omitted tail after
    truncating at T* splits exactly into
      (1-M)**(T*+1) * sum_{t<=T*} term_t  +  sum_{t>T*} term_t (1-M)**t,
    both of which are bounded rigorously (the second with the same envelope
    machinery as the closed series).

    The default tolerance is looser than the closed form's: this route sums
    P_X(T)-many cumulative windows whose power-function rounding grows with
    the term index, and that rounding envelope is folded into tail_bound, so
    certifying 1e-10 absolute is generally not possible for long mixtures.
    """
    rho = _ew_preconditions(params)
    if tol <= 0.0:
        raise ValueError("tolerance must be > 0")
    pref = params.N0 * (1.0 + params.b) / params.b
    sM = 1.0 - params.M
    bounder = _TailBounder(rho, path, u, pref)
    limit = max(bounder.evaluation_limit, path.prefix_len)
    # pow(base, t) loses about t*|ln base| ulps; tracked per summed index below
    g = params.gross_growth
    q = 1.0 / (1.0 + params.b)
    ln_scale = abs(math.log(q))
    if g > 0.0:
        ln_scale += abs(math.log(g))
    if sM > 0.0:
        ln_scale += abs(math.log(sM))
    block_sums = []
    abs_sum = 0.0
    cum_abs_terms = 0.0
    abs_env = 0.0  # sum of P_X(T) * cumulative |terms|, weights the cumsum rounding
    kahan = _KahanAccumulator()
    t0 = 0
    block = 32
    bound = math.inf
    while True:
        if t0 >= path.prefix_len:
            rounding = 16.0 * _EPS * abs_sum + _EPS * abs_env * (
                4.0 + 2.0 * t0 * ln_scale
            )
            bound = float(sM**t0 * cum_abs_terms + bounder.bound(t0) + rounding)
            if bound <= tol or t0 >= limit:
                break
        stop = min(max(t0 + block, path.prefix_len), limit)
        block = min(2 * block, _BLOCK)
        terms = _window_terms_range(params, path, u, t0, stop)
        windows = kahan.extend(terms)  # W(0, T) for T in [t0, stop)
        cum_abs = cum_abs_terms + np.cumsum(np.abs(terms))
        cum_abs_terms = float(cum_abs[-1])
        px = np.power(sM, np.arange(t0, stop)) * params.M
        block_sums.append(float(np.dot(px, windows)))
        abs_sum += float(np.dot(px, np.abs(windows)))
        abs_env += float(np.dot(px, cum_abs))
        t0 = stop
    return SeriesResult(
        value=math.fsum(block_sums),
        truncation_index=t0 - 1,
        tail_bound=bound,
        converged=bound <= tol,
    )


def evaluate(
    case: Scenario,
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    tol: float = DEFAULT_TOLERANCE,
) -> SeriesResult:
    """Evaluate any scenario; finite known-date sums come back exact with zero tail."""
    if case.kind == "individual":
        return eu_individual(params, path, u, tol)
    if case.kind == "dynasty":
        return ev_dynasty(params, path, u, tol)
    if case.kind == "dynasty_theta":
        return ev_dynasty_theta(params, path, u, tol)
    if case.kind == "lineage":
        return eg_lineage(params, path, u, tol)
    if case.kind == "social_welfare":
        return ew_social(params, path, u, tol)
    value = eu_known_T(params.m, case.T, path, u)
    return SeriesResult(value=value, truncation_index=case.T, tail_bound=0.0, converged=True)
