"""Hazard parameters, survival and extinction distributions, population processes.

Time is discrete, t = 0, 1, 2, ... . Each period an individual alive at t dies
with probability m, and humanity as a whole is wiped out with probability M;
both hazards are constant (no ageing). Births arrive at rate b per survivor,
so the population gross growth factor is (1+n) = (1+b)(1-m).

Everything in this module is a pure function of its inputs. Random sampling
takes an explicitly passed ``numpy.random.Generator``; parameter bundles are
frozen dataclasses and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

__all__ = [
    "DegenerateHazardError",
    "NoExtinctionError",
    "DivergenceError",
    "HazardParams",
    "ConsumptionPath",
    "UtilitySpec",
    "LifetimePmf",
    "ExtinctionPmf",
    "PopulationProcess",
    "lifetime_pmf",
    "lifetime_cdf",
    "lifetime_pmf_known_T",
    "extinction_pmf",
    "population_at",
    "sample_lifetime",
    "sample_lifetimes",
    "sample_extinction_times",
]

ArrayLike = Union[float, np.ndarray]


class DegenerateHazardError(ValueError):
    """Both hazards are zero: lifetimes are infinite and the pmf is defective."""


class NoExtinctionError(ValueError):
    """M = 0 was passed to a functional that mixes over extinction dates."""


class DivergenceError(ArithmeticError):
    """An infinite series violates its finiteness condition."""


def _check_prob(name: str, value: float, *, closed_top: bool = True) -> None:
    hi_ok = value <= 1.0 if closed_top else value < 1.0
    if not (0.0 <= value and hi_ok):
        top = "1]" if closed_top else "1)"
        raise ValueError(f"{name} must lie in [0, {top}, got {value!r}")


@dataclass(frozen=True)
class HazardParams:
    """Risk and demography parameters.

    m      per-period individual death hazard, in [0, 1]
    M      per-period extinction hazard, in [0, 1]
    b      per-period birth rate per survivor, >= 0
    theta  population-size weighting exponent (0 = per-capita, 1 = total), in [0, 1]
    alpha  generational transmission exponent of a genetic lineage, in (0, 1)
    N0     initial population size, > 0 (real valued; integer sizes only
           matter in the agent-based simulation mode)

    The net growth rate n is always derived: (1+n) = (1+b)(1-m). It is never
    stored, so b and m remain the single source of truth.
    """

    m: float
    M: float
    b: float = 0.0
    theta: float = 1.0
    alpha: float = 0.5
    N0: float = 1.0

    def __post_init__(self) -> None:
        _check_prob("m", self.m)
        _check_prob("M", self.M)
        if self.b < 0.0:
            raise ValueError(f"b must be >= 0, got {self.b!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.N0 > 0.0:
            raise ValueError(f"N0 must be > 0, got {self.N0!r}")

    @property
    def gross_growth(self) -> float:
        """(1+n) = (1+b)(1-m), the per-period population growth factor."""
        return (1.0 + self.b) * (1.0 - self.m)

    @property
    def n(self) -> float:
        return self.gross_growth - 1.0

    @property
    def joint_survival(self) -> float:
        """Per-period probability an individual survives both hazards."""
        return (1.0 - self.m) * (1.0 - self.M)

    @property
    def death_hazard(self) -> float:
        """Per-period probability of dying from either cause, M + m - M*m."""
        return self.M + self.m - self.M * self.m

    @property
    def is_degenerate(self) -> bool:
        """True when m = M = 0: nobody ever dies and the lifetime pmf is defective."""
        return self.m == 0.0 and self.M == 0.0

    def with_n_zero(self) -> "HazardParams":
        """Return a copy with b replaced so that (1+b)(1-m) = 1 exactly."""
        if self.m >= 1.0:
            raise ValueError("n = 0 is unattainable at m = 1 (requires infinite b)")
        return replace(self, b=self.m / (1.0 - self.m))


@dataclass(frozen=True)
class ConsumptionPath:
    """Per-period consumption: an explicit positive prefix plus a tail rule.

    Beyond the prefix the path either stays at the last prefix value
    (tail="constant") or decays geometrically, c_t = c_last * ratio**(t-last),
    with ratio in [0, 1). The ratio bound keeps every implemented utility
    integrable against geometric survival weights, so truncated sums get
    rigorous tail bounds.
    """

    prefix: tuple
    tail: str = "constant"
    ratio: Optional[float] = None

    def __post_init__(self) -> None:
        prefix = tuple(float(c) for c in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        if len(prefix) == 0:
            raise ValueError("prefix must contain at least one period")
        if any(not c > 0.0 for c in prefix):
            raise ValueError("all prefix consumptions must be strictly positive")
        if self.tail == "constant":
            if self.ratio is not None:
                raise ValueError("constant tail takes no ratio")
        elif self.tail == "geometric":
            if self.ratio is None or not 0.0 <= self.ratio < 1.0:
                raise ValueError("geometric tail needs ratio in [0, 1)")
        else:
            raise ValueError(f"unknown tail rule {self.tail!r}")

    @classmethod
    def constant(cls, level: float) -> "ConsumptionPath":
        return cls(prefix=(level,))

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    def value(self, t: int) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        if t < len(self.prefix):
            return self.prefix[t]
        last = self.prefix[-1]
        if self.tail == "constant":
            return last
        return last * self.ratio ** (t - (len(self.prefix) - 1))

    def values(self, start: int, stop: int) -> np.ndarray:
        """Consumption for t = start, ..., stop-1 as a float array."""
        if start < 0 or stop < start:
            raise ValueError("need 0 <= start <= stop")
        out = np.empty(stop - start, dtype=float)
        p = len(self.prefix)
        head = min(max(p - start, 0), stop - start)
        if head > 0:
            out[:head] = self.prefix[start : start + head]
        if stop > max(start, p):
            t = np.arange(max(start, p), stop)
            last = self.prefix[-1]
            if self.tail == "constant":
                out[head:] = last
            else:
                out[head:] = last * np.power(self.ratio, t - (p - 1))
        return out


@dataclass(frozen=True)
class UtilitySpec:
    """Period utility u(c). Families: log, crra (sigma != 1), linear.

    crra uses u(c) = (c**(1-sigma) - 1) / (1-sigma); log is its sigma -> 1
    limit, linear is u(c) = c. log and crra require c > 0.
    """

    family: str = "log"
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        if self.family not in ("log", "crra", "linear"):
            raise ValueError(f"unknown utility family {self.family!r}")
        if self.family == "crra":
            if self.sigma is None or self.sigma <= 0.0:
                raise ValueError("crra needs sigma > 0")
            if self.sigma == 1.0:
                raise ValueError("crra sigma = 1 is the log family; use log")
        elif self.sigma is not None:
            raise ValueError(f"{self.family} utility takes no sigma")

    @classmethod
    def log(cls) -> "UtilitySpec":
        return cls(family="log")

    @classmethod
    def crra(cls, sigma: float) -> "UtilitySpec":
        return cls(family="crra", sigma=sigma)

    @classmethod
    def linear(cls) -> "UtilitySpec":
        return cls(family="linear")

    def __call__(self, c: ArrayLike) -> ArrayLike:
        arr = np.asarray(c, dtype=float)
        if self.family == "linear":
            out = arr
        else:
            if np.any(arr <= 0.0):
                raise ValueError(f"{self.family} utility needs consumption > 0")
            if self.family == "log":
                out = np.log(arr)
            else:
                s = self.sigma
                out = (np.power(arr, 1.0 - s) - 1.0) / (1.0 - s)
        if np.isscalar(c) or getattr(c, "ndim", 1) == 0:
            return float(out)
        return out


# --- lifetime and extinction distributions -------------------------------


def lifetime_pmf(params: HazardParams, t: int) -> float:
    """P(D = t) = (1-m)**t (1-M)**t (M+m-Mm) under both hazards.

    Degenerate m = M = 0 gives 0 for every t (check ``params.is_degenerate``).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    return params.joint_survival**t * params.death_hazard


def lifetime_cdf(params: HazardParams, t: int) -> float:
    """P(D <= t) = 1 - ((1-m)(1-M))**(t+1)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return 1.0 - params.joint_survival ** (t + 1)


def lifetime_pmf_known_T(m: float, T: int, t: int) -> float:
    """Lifetime pmf when the extinction date T is known and certain.

    P(D = t) = (1-m)**t m for t < T; the atom P(D = T) = (1-m)**T collects
    everyone still alive when extinction strikes. Sums to 1 exactly for every
    finite T.
    """
    _check_prob("m", m)
    if T < 0:
        raise ValueError("T must be >= 0")
    if t < 0 or t > T:
        raise ValueError(f"t must lie in [0, T={T}], got {t}")
    if t == T:
        return (1.0 - m) ** T
    return (1.0 - m) ** t * m


def extinction_pmf(M: float, T: int) -> float:
    """P_X(T) = (1-M)**T M, the geometric extinction-date law (0 for all T if M=0)."""
    _check_prob("M", M)
    if T < 0:
        raise ValueError("T must be >= 0")
    return (1.0 - M) ** T * M


@dataclass(frozen=True)
class LifetimePmf:
    """Lifetime distribution, unconditional or conditional on a known extinction date."""

    params: HazardParams
    T: Optional[int] = None

    def pmf(self, t: int) -> float:
        if self.T is None:
            return lifetime_pmf(self.params, t)
        return lifetime_pmf_known_T(self.params.m, self.T, t)

    def cdf(self, t: int) -> float:
        if self.T is None:
            return lifetime_cdf(self.params, t)
        t = min(t, self.T)
        return math.fsum(self.pmf(k) for k in range(t + 1))


@dataclass(frozen=True)
class ExtinctionPmf:
    M: float

    def pmf(self, T: int) -> float:
        return extinction_pmf(self.M, T)


# --- population processes -------------------------------------------------

_PROCESS_KINDS = ("dynasty", "population", "lineage")


@dataclass(frozen=True)
class PopulationProcess:
    """Deterministic (smoothed) population path up to a fixed extinction date T.

    dynasty / population: N0 * ((1+b)(1-m))**t for t <= T, 0 after.
    lineage: (1+b)**(alpha*t) * (1-m)**t, normalised to 1 at t = 0.
    """

    kind: str
    params: HazardParams
    T: int

    def __post_init__(self) -> None:
        if self.kind not in _PROCESS_KINDS:
            raise ValueError(f"kind must be one of {_PROCESS_KINDS}, got {self.kind!r}")
        if self.T < 0:
            raise ValueError("T must be >= 0")


def population_at(process: PopulationProcess, t: int) -> float:
    """Size of the process at date t; zero strictly after the extinction date."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t > process.T:
        return 0.0
    p = process.params
    if process.kind == "lineage":
        return (1.0 + p.b) ** (p.alpha * t) * (1.0 - p.m) ** t
    return p.N0 * p.gross_growth**t


# --- sampling --------------------------------------------------------------


def _geometric_from_zero(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    """Failure-count geometric: support {0, 1, ...}, P(k) = (1-p)**k p. Needs p > 0."""
    return rng.geometric(p, size=size).astype(np.int64) - 1


def sample_lifetimes(
    params: HazardParams, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw lifetimes D = min(extinction date, natural death date).

    Both components are geometric from 0 with successes M and m; their minimum
    has the law of ``lifetime_pmf``. Rejects the degenerate m = M = 0 case
    (infinite lifetimes).
    """
    if params.is_degenerate:
        raise DegenerateHazardError("m = M = 0: lifetimes are infinite")
    if params.m > 0.0 and params.M > 0.0:
        d_nat = _geometric_from_zero(rng, params.m, size)
        d_ext = _geometric_from_zero(rng, params.M, size)
        return np.minimum(d_nat, d_ext)
    p = params.m if params.m > 0.0 else params.M
    return _geometric_from_zero(rng, p, size)


def sample_lifetime(params: HazardParams, rng: np.random.Generator) -> int:
    return int(sample_lifetimes(params, 1, rng)[0])


def sample_extinction_times(
    M: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw extinction dates T with P_X(T) = (1-M)**T M. Requires M > 0."""
    if M <= 0.0:
        raise NoExtinctionError("M = 0: the extinction date is never drawn")
    return _geometric_from_zero(rng, M, size)
