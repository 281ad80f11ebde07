"""Monte Carlo verification of the analytic functionals, plus an agent-based mode.

Smoothed-mode estimators draw the random date (death date D or extinction date
T), look up the realized discounted sum in a precomputed cumulative table, and
average. Replications are processed in fixed-size chunks, each with its own
``SeedSequence([seed, op_tag, chunk_index])`` stream, and chunk partial sums
are reduced in a fixed order: estimates are bit-for-bit reproducible from
(seed, config) and do not depend on how chunks might be farmed out to workers.

The agent-based mode keeps an integer population with Bernoulli deaths and
stochastic births per survivor, and quantifies the error of the smooth
population approximation as a function of the starting head count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .model import (
    ConsumptionPath,
    DegenerateHazardError,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    UtilitySpec,
    sample_extinction_times,
    sample_lifetimes,
)
from .series import (
    eu_individual,
    ev_dynasty,
    ev_dynasty_theta,
    eg_lineage,
    ew_social,
    welfare_window_terms,
)

__all__ = [
    "SimulationConfig",
    "SimEstimate",
    "AbmTrajectory",
    "SmoothingGapRow",
    "VerifyRow",
    "VERIFY_GRID",
    "VERIFY_PATH",
    "VERIFY_UTILITY",
    "default_horizon_cap",
    "mc_eu_individual",
    "mc_ev_dynasty",
    "mc_eg_lineage",
    "mc_ew_social",
    "abm_population_run",
    "abm_smoothing_study",
    "verify_oracle_grid",
    "reproducibility_selfcheck",
]

_CHUNK = 1 << 17  # fixed chunk size keeps estimates independent of worker farming
_CAP_LIMIT = 1 << 21
_TAG_EU, _TAG_EV, _TAG_EG, _TAG_EW, _TAG_ABM_T, _TAG_ABM = 1, 2, 3, 4, 5, 6


@dataclass(frozen=True)
class SimulationConfig:
    """Run description: replication count, master seed, horizon cap, mode.

    horizon_cap=None derives the smallest cap H with survival**H < 1e-12 for
    the sampled date; draws beyond the cap are clipped and their frequency
    reported as truncated_mass, never silently dropped.
    """

    replications: int = 1_000_000
    seed: int = 0
    horizon_cap: Optional[int] = None
    mode: str = "smoothed"
    offspring_law: str = "poisson"

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.horizon_cap is not None and self.horizon_cap < 1:
            raise ValueError("horizon_cap must be >= 1")
        if self.mode not in ("smoothed", "agent"):
            raise ValueError(f"mode must be 'smoothed' or 'agent', got {self.mode!r}")
        if self.offspring_law not in ("poisson", "bernoulli-pair"):
            raise ValueError(f"unknown offspring law {self.offspring_law!r}")


@dataclass(frozen=True)
class SimEstimate:
    """Estimate with its standard error (sample std / sqrt(replications))."""

    mean: float
    standard_error: float
    replications: int
    truncated_mass: float


def default_horizon_cap(survival: float, tiny: float = 1e-12) -> int:
    """Smallest H with survival**H < tiny, clamped to a sane array size."""
    if survival <= 0.0:
        return 1
    if survival >= 1.0:
        return _CAP_LIMIT
    need = int(math.ceil(math.log(tiny) / math.log(survival)))
    return int(min(max(need, 1), _CAP_LIMIT))


def _require_smoothed(config: SimulationConfig) -> None:
    if config.mode != "smoothed":
        raise ValueError("this estimator runs in smoothed mode; set mode='smoothed'")


def _estimate_from_dates(
    config: SimulationConfig,
    tag: int,
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    cum_values: np.ndarray,
    cap: int,
) -> SimEstimate:
    """Average cum_values[min(date, cap)] over sampled dates, chunk by chunk."""
    total = config.replications
    sums: List[float] = []
    sumsqs: List[float] = []
    truncated = 0
    start = 0
    idx = 0
    shift = None  # center on the first draw so constant outcomes get SE exactly 0
    while start < total:
        size = min(_CHUNK, total - start)
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, tag, idx]))
        dates = sampler(rng, size)
        truncated += int(np.count_nonzero(dates > cap))
        vals = cum_values[np.minimum(dates, cap)]
        if shift is None:
            shift = float(vals[0])
        centered = vals - shift
        sums.append(float(np.sum(centered)))
        sumsqs.append(float(np.sum(centered * centered)))
        start += size
        idx += 1
    mean_centered = math.fsum(sums) / total
    mean = shift + mean_centered
    if total > 1:
        var = max(math.fsum(sumsqs) - total * mean_centered * mean_centered, 0.0) / (total - 1)
        se = math.sqrt(var / total)
    else:
        se = 0.0
    return SimEstimate(
        mean=mean,
        standard_error=se,
        replications=total,
        truncated_mass=truncated / total,
    )


def mc_eu_individual(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    config: SimulationConfig,
) -> SimEstimate:
    """Sample the death date D and average u(c_0) + ... + u(c_D).

    Unbiased for eu_individual up to the horizon-cap clipping reported in
    truncated_mass.
    """
    _require_smoothed(config)
    if params.is_degenerate:
        raise DegenerateHazardError("m = M = 0: lifetimes are infinite")
    cap = config.horizon_cap or default_horizon_cap(params.joint_survival)
    cum = np.cumsum(np.asarray(u(path.values(0, cap + 1)), dtype=float))
    return _estimate_from_dates(
        config, _TAG_EU, lambda rng, size: sample_lifetimes(params, size, rng), cum, cap
    )


def _mc_weighted_window(
    params: HazardParams,
    weights_base: float,
    path: ConsumptionPath,
    u: UtilitySpec,
    config: SimulationConfig,
    tag: int,
) -> SimEstimate:
    """Sample T and average sum_{t<=T} weights_base**t u(c_t)."""
    if params.M <= 0.0:
        raise NoExtinctionError("M = 0: there is no extinction date to sample")
    if (1.0 - params.M) * weights_base >= 1.0:
        raise DivergenceError(
            f"(1-M) * {weights_base:.6g} >= 1: the expectation is infinite"
        )
    cap = config.horizon_cap or default_horizon_cap(1.0 - params.M)
    t = np.arange(cap + 1)
    uu = np.asarray(u(path.values(0, cap + 1)), dtype=float)
    cum = np.cumsum(np.power(weights_base, t) * uu)
    return _estimate_from_dates(
        config, tag, lambda rng, size: sample_extinction_times(params.M, size, rng), cum, cap
    )


def mc_ev_dynasty(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    theta: Optional[float],
    config: SimulationConfig,
) -> SimEstimate:
    """Estimate dynasty utility: T ~ extinction law, inner sum weights (1+n)**(theta t).

    theta defaults to params.theta; theta = 1 targets ev_dynasty. Smoothed
    mode: the dynasty path conditional on T is deterministic.
    """
    _require_smoothed(config)
    th = params.theta if theta is None else theta
    if not 0.0 <= th <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {th!r}")
    return _mc_weighted_window(
        params, params.gross_growth**th, path, u, config, _TAG_EV
    )


def mc_eg_lineage(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    config: SimulationConfig,
) -> SimEstimate:
    """Estimate lineage utility: inner sum weights ((1+b)**alpha (1-m))**t."""
    _require_smoothed(config)
    base = (1.0 + params.b) ** params.alpha * (1.0 - params.m)
    return _mc_weighted_window(params, base, path, u, config, _TAG_EG)


def mc_ew_social(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    config: SimulationConfig,
) -> SimEstimate:
    """Estimate social welfare: T ~ extinction law, value W(0, T)."""
    _require_smoothed(config)
    if params.b <= 0.0:
        raise ValueError("social welfare needs b > 0")
    if params.M <= 0.0:
        raise NoExtinctionError("M = 0: there is no extinction date to sample")
    if (1.0 - params.M) * params.gross_growth >= 1.0:
        raise DivergenceError("(1-M)(1+n) >= 1: expected social welfare is infinite")
    cap = config.horizon_cap or default_horizon_cap(1.0 - params.M)
    cum = np.cumsum(welfare_window_terms(params, path, u, cap + 1))
    return _estimate_from_dates(
        config, _TAG_EW, lambda rng, size: sample_extinction_times(params.M, size, rng), cum, cap
    )


# --- agent-based mode --------------------------------------------------------


def _offspring(
    rng: np.random.Generator, survivors: np.ndarray, b: float, law: str
) -> np.ndarray:
    if law == "poisson":
        return rng.poisson(b * survivors)
    if b > 2.0:
        raise ValueError("bernoulli-pair needs b <= 2 (pair probability b/2)")
    return 2 * rng.binomial(survivors, b / 2.0)


@dataclass(frozen=True)
class AbmTrajectory:
    """One integer-population run up to its (possibly capped) extinction date.

    welfare is the realized population path weighted by per-capita expected
    remaining utility: sum_t N_t * sum_{tau=t..T} (1-m)**(tau-t) u(c_tau),
    the integer-population counterpart of the smoothed window W(0, T).
    """

    population: np.ndarray
    extinction_date: int
    welfare: float
    died_off_early: bool
    hit_cap: bool


def _draw_extinction_date(
    params: HazardParams, config: SimulationConfig, rng: np.random.Generator
) -> Tuple[int, bool]:
    if params.M <= 0.0:
        if config.horizon_cap is None:
            raise NoExtinctionError(
                "M = 0 never draws an extinction date; set an explicit horizon_cap"
            )
        return config.horizon_cap, True
    cap = config.horizon_cap or default_horizon_cap(1.0 - params.M)
    raw = int(sample_extinction_times(params.M, 1, rng)[0])
    return min(raw, cap), raw > cap


def abm_population_run(
    params: HazardParams,
    n0: int,
    path: ConsumptionPath,
    u: UtilitySpec,
    config: SimulationConfig,
    rng: Optional[np.random.Generator] = None,
) -> AbmTrajectory:
    """Simulate one integer dynasty: extinction check, then deaths, then births.

    Each period the survivors are Binomial(N_t, 1-m) and births follow the
    configured offspring law per survivor; the sampled extinction date T wipes
    the population after date T. Early die-off (population hits zero at some
    t <= T) is possible and reported, unlike in the smoothed calculation.
    """
    if config.mode != "agent":
        raise ValueError("agent-based run needs mode='agent'")
    if n0 < 1 or n0 != int(n0):
        raise ValueError("n0 must be a positive integer head count")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, _TAG_ABM]))
    T, hit_cap = _draw_extinction_date(params, config, rng)
    uu = np.asarray(u(path.values(0, T + 1)), dtype=float)
    pop = np.empty(T + 1, dtype=np.int64)
    n = int(n0)
    f = 0.0  # F_t = sum_{s<=t} N_s (1-m)**(t-s), so welfare = sum_t u_t F_t
    welfare_parts: List[float] = []
    died = False
    for t in range(T + 1):
        pop[t] = n
        f = (1.0 - params.m) * f + n
        welfare_parts.append(uu[t] * f)
        if t < T:
            survivors = int(rng.binomial(n, 1.0 - params.m))
            births = int(_offspring(rng, np.int64(survivors), params.b, config.offspring_law))
            n = survivors + births
            if n == 0:
                died = True
    return AbmTrajectory(
        population=pop,
        extinction_date=T,
        welfare=math.fsum(welfare_parts),
        died_off_early=died,
        hit_cap=hit_cap,
    )


@dataclass(frozen=True)
class SmoothingGapRow:
    """Smooth-population approximation error at one starting head count.

    mean_abs_gap averages, over runs sharing extinction-date draws across head
    counts, |per-capita realized welfare - per-capita smoothed W(0, T_run)|.
    """

    n0: int
    runs: int
    mean_abs_gap: float
    die_off_frequency: float
    mean_welfare_per_capita: float
    smoothed_mean_per_capita: float
    cap_hit_fraction: float


def abm_smoothing_study(
    params: HazardParams,
    path: ConsumptionPath,
    u: UtilitySpec,
    n0_values: Sequence[int],
    config: SimulationConfig,
) -> List[SmoothingGapRow]:
    """Quantify the smooth-population approximation across starting head counts.

    Extinction dates are drawn once and shared by every head count (common
    random numbers), so the rows differ only through integer-population noise,
    which shrinks as 1/sqrt(n0).
    """
    if config.mode != "agent":
        raise ValueError("the smoothing study needs mode='agent'")
    if params.b <= 0.0:
        raise ValueError("the smoothed comparison needs b > 0")
    reps = config.replications
    rng_T = np.random.default_rng(np.random.SeedSequence([config.seed, _TAG_ABM_T]))
    if params.M <= 0.0:
        raise NoExtinctionError("the study mixes over extinction dates; needs M > 0")
    cap = config.horizon_cap or default_horizon_cap(1.0 - params.M)
    raw = sample_extinction_times(params.M, reps, rng_T)
    hit = raw > cap
    T = np.minimum(raw, cap)
    t_max = int(T.max())
    uu = np.asarray(u(path.values(0, t_max + 1)), dtype=float)
    smooth_cum = np.cumsum(
        welfare_window_terms(replace(params, N0=1.0), path, u, t_max + 1)
    )
    smooth_pc = smooth_cum[T]
    sm = 1.0 - params.m
    rows: List[SmoothingGapRow] = []
    for n0 in n0_values:
        if n0 < 1:
            raise ValueError("head counts must be positive integers")
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, _TAG_ABM, int(n0)])
        )
        n = np.full(reps, int(n0), dtype=np.int64)
        f = np.zeros(reps)
        welfare = np.zeros(reps)
        died = np.zeros(reps, dtype=bool)
        for t in range(t_max + 1):
            alive = T >= t
            f[alive] = sm * f[alive] + n[alive]
            welfare[alive] += uu[t] * f[alive]
            trans = T > t  # these runs see period t+1 before extinction
            if np.any(trans):
                survivors = rng.binomial(n[trans], sm)
                births = _offspring(rng, survivors, params.b, config.offspring_law)
                n_new = survivors + births
                n[trans] = n_new
                died[trans] |= n_new == 0
        percap = welfare / n0
        rows.append(
            SmoothingGapRow(
                n0=int(n0),
                runs=reps,
                mean_abs_gap=float(np.mean(np.abs(percap - smooth_pc))),
                die_off_frequency=float(np.mean(died)),
                mean_welfare_per_capita=float(np.mean(percap)),
                smoothed_mean_per_capita=float(np.mean(smooth_pc)),
                cap_hit_fraction=float(np.mean(hit)),
            )
        )
    return rows


# --- the analytic-vs-Monte-Carlo verification grid ---------------------------

VERIFY_GRID: Tuple[HazardParams, ...] = (
    HazardParams(m=0.02, M=0.01, b=0.02 / 0.98, theta=1.0, alpha=0.5),
    HazardParams(m=0.02, M=0.01, b=0.025, theta=0.5, alpha=0.5),
    HazardParams(m=0.10, M=0.05, b=0.05, theta=0.3, alpha=0.25),
    HazardParams(m=0.005, M=0.002, b=0.004, theta=1.0, alpha=0.9),
    HazardParams(m=0.30, M=0.20, b=0.5, theta=0.8, alpha=0.75),
    HazardParams(m=0.05, M=0.10, b=0.02, theta=0.0, alpha=0.5),
    HazardParams(m=0.02, M=0.20, b=0.1, theta=0.6, alpha=0.33),
    HazardParams(m=0.25, M=0.004, b=0.2, theta=0.9, alpha=0.6),
    HazardParams(m=0.004, M=0.05, b=0.02, theta=0.4, alpha=0.8),
    HazardParams(m=0.12, M=0.03, b=0.12 / 0.88, theta=0.2, alpha=0.15),
    HazardParams(m=0.08, M=0.008, b=0.04, theta=0.7, alpha=0.45),
    HazardParams(m=0.50, M=0.30, b=0.8, theta=1.0, alpha=0.95),
)
# Every point satisfies (1-M)(1+n)**2 < 1 (and the theta/alpha analogues), so
# the per-draw sums have finite variance and +-3 SE comparisons are sound.

VERIFY_PATH = ConsumptionPath(prefix=(0.8, 1.1, 1.25, 1.18, 1.3), tail="constant")
VERIFY_UTILITY = UtilitySpec.log()


@dataclass(frozen=True)
class VerifyRow:
    functional: str
    point: int
    params: HazardParams
    analytic: float
    mc_mean: float
    mc_se: float
    abs_error: float
    ok: bool
    truncated_mass: float

    def to_dict(self) -> dict:
        p = self.params
        return {
            "functional": self.functional,
            "point": self.point,
            "m": p.m,
            "M": p.M,
            "b": p.b,
            "theta": p.theta,
            "alpha": p.alpha,
            "analytic": self.analytic,
            "mc_mean": self.mc_mean,
            "mc_se": self.mc_se,
            "abs_error": self.abs_error,
            "ok": self.ok,
            "truncated_mass": self.truncated_mass,
        }


def verify_oracle_grid(
    replications: int = 1_000_000,
    seed: int = 20240613,
    points: Optional[Sequence[HazardParams]] = None,
    path: Optional[ConsumptionPath] = None,
    u: Optional[UtilitySpec] = None,
    tol: float = 1e-10,
    se_multiple: float = 3.0,
) -> List[VerifyRow]:
    """Compare every analytic functional with its Monte Carlo estimate per grid point.

    A row is ok when |mc - analytic| <= se_multiple * SE. Statistically about
    1 in 370 honest comparisons lands outside +-3 SE, so a full run tolerates
    one stray failure.
    """
    pts = tuple(points) if points is not None else VERIFY_GRID
    path = path or VERIFY_PATH
    u = u or VERIFY_UTILITY
    rows: List[VerifyRow] = []
    for i, params in enumerate(pts):
        cfg = SimulationConfig(replications=replications, seed=seed + 1_000_003 * i)
        targets = [
            ("eu_individual", eu_individual(params, path, u, tol).value,
             mc_eu_individual(params, path, u, cfg)),
            ("ev_dynasty", ev_dynasty(params, path, u, tol).value,
             mc_ev_dynasty(params, path, u, 1.0, cfg)),
            ("ev_dynasty_theta", ev_dynasty_theta(params, path, u, tol).value,
             mc_ev_dynasty(params, path, u, None, cfg)),
            ("eg_lineage", eg_lineage(params, path, u, tol).value,
             mc_eg_lineage(params, path, u, cfg)),
            ("ew_social", ew_social(params, path, u, tol).value,
             mc_ew_social(params, path, u, cfg)),
        ]
        for name, analytic, est in targets:
            err = abs(est.mean - analytic)
            rows.append(
                VerifyRow(
                    functional=name,
                    point=i,
                    params=params,
                    analytic=analytic,
                    mc_mean=est.mean,
                    mc_se=est.standard_error,
                    abs_error=err,
                    ok=err <= se_multiple * est.standard_error + 1e-12,
                    truncated_mass=est.truncated_mass,
                )
            )
    return rows


def reproducibility_selfcheck(config: Optional[SimulationConfig] = None) -> bool:
    """Run one estimator twice with the same seed; True when bit-identical."""
    cfg = config or SimulationConfig(replications=50_000, seed=97)
    params = VERIFY_GRID[0]
    a = mc_eu_individual(params, VERIFY_PATH, VERIFY_UTILITY, cfg)
    b = mc_eu_individual(params, VERIFY_PATH, VERIFY_UTILITY, cfg)
    return a == b
