"""Oracle checks for the discounted-series functionals and their tail bounds."""

import math

import numpy as np
import pytest

from extrisk import (
    DYNASTY,
    DYNASTY_THETA,
    INDIVIDUAL,
    LINEAGE,
    ConsumptionPath,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    Scenario,
    UtilitySpec,
    eg_lineage,
    eu_individual,
    eu_known_T,
    ev_dynasty,
    ev_dynasty_theta,
    evaluate,
    extinction_pmf,
    finiteness_check,
    known_extinction,
    weight_ratio,
    weight_sequence,
)

ONE = ConsumptionPath.constant(1.0)  # with linear utility, u(c_t) = 1 for all t
LINEAR = UtilitySpec.linear()
LOG = UtilitySpec.log()


def brute_force_sum(rho, path, u, terms):
    """Independent plain-python oracle: sum_t rho**t u(c_t)."""
    total = 0.0
    w = 1.0
    for t in range(terms):
        total += w * float(u(path.value(t)))
        w *= rho
    return total


# --- individual expected utility ------------------------------------------------


def test_eu_individual_unit_utility():
    # geometric closed form 1/(1 - (1-m)(1-M)) = 1/0.0298
    res = eu_individual(HazardParams(m=0.02, M=0.01), ONE, LINEAR)
    assert res.converged
    assert res.value == pytest.approx(1.0 / 0.0298, abs=1e-9)


def test_eu_individual_half_survival():
    res = eu_individual(HazardParams(m=0.0, M=0.5), ONE, LINEAR)
    assert res.value == pytest.approx(2.0, abs=1e-10)


def test_eu_individual_log_utility_matches_brute_force():
    # growing consumption encoded in the prefix, then a constant tail
    path = ConsumptionPath(prefix=tuple(100.0 * 1.01**t for t in range(64)))
    p = HazardParams(m=0.02, M=0.01)
    res = eu_individual(p, path, LOG)
    oracle = brute_force_sum(p.joint_survival, path, LOG, 10_000)
    assert res.value == pytest.approx(oracle, abs=1e-9)


def test_eu_individual_rejects_degenerate():
    with pytest.raises(DivergenceError):
        eu_individual(HazardParams(m=0.0, M=0.0), ONE, LINEAR)


# --- dynasty -----------------------------------------------------------------------


def test_ev_dynasty_constant_population():
    # n = 0 collapses the weights to (1-M)**t, so the unit-utility sum is 1/M
    p = HazardParams(m=0.02, M=0.01).with_n_zero()
    res = ev_dynasty(p, ONE, LINEAR)
    assert res.value == pytest.approx(100.0, abs=1e-8)


def test_ev_dynasty_without_births_reduces_to_individual():
    p = HazardParams(m=0.02, M=0.01, b=0.0)
    assert ev_dynasty(p, ONE, LINEAR).value == eu_individual(p, ONE, LINEAR).value


def test_ev_dynasty_divergence():
    # (1-M)(1+n) = 0.995 * 1.01 = 1.00495 >= 1
    p = HazardParams(m=0.0, M=0.005, b=0.01)
    assert not finiteness_check(DYNASTY, p).finite
    with pytest.raises(DivergenceError):
        ev_dynasty(p, ONE, LINEAR)


def test_ev_dynasty_rejects_no_extinction():
    with pytest.raises(NoExtinctionError):
        ev_dynasty(HazardParams(m=0.02, M=0.0, b=0.01), ONE, LINEAR)


# --- dynasty with population weighting ------------------------------------------------


def test_theta_one_reproduces_dynasty():
    p = HazardParams(m=0.03, M=0.02, b=0.04, theta=1.0)
    a = ev_dynasty_theta(p, ONE, LINEAR).value
    b = ev_dynasty(p, ONE, LINEAR).value
    assert a == pytest.approx(b, abs=1e-10)


def test_theta_zero_collapses_to_extinction_weighting():
    p = HazardParams(m=0.11, M=0.01, b=0.2, theta=0.0)
    res = ev_dynasty_theta(p, ONE, LINEAR)
    assert res.value == pytest.approx(100.0, abs=1e-8)


def test_theta_half_square_root_case():
    # b engineered so (1+n) = 1.0201, whose square root is exactly 1.01
    p = HazardParams(m=0.01, M=0.02, b=1.0201 / 0.99 - 1.0, theta=0.5)
    res = ev_dynasty_theta(p, ONE, LINEAR)
    assert res.value == pytest.approx(1.0 / 0.0102, rel=1e-9)


def test_theta_divergence():
    p = HazardParams(m=0.0, M=0.004, b=0.0102, theta=0.9)
    with pytest.raises(DivergenceError):
        ev_dynasty_theta(p, ONE, LINEAR)


# --- lineage ------------------------------------------------------------------------


def test_lineage_closed_form():
    p = HazardParams(m=0.02, M=0.01, b=0.03, alpha=0.5)
    rho = 0.99 * 0.98 * 1.03**0.5
    res = eg_lineage(p, ONE, LINEAR)
    assert res.value == pytest.approx(1.0 / (1.0 - rho), abs=1e-9)


def test_lineage_without_births_reduces_to_individual():
    p = HazardParams(m=0.02, M=0.01, b=0.0, alpha=0.3)
    assert eg_lineage(p, ONE, LINEAR).value == eu_individual(p, ONE, LINEAR).value


def test_lineage_alpha_near_one_approaches_dynasty():
    base = dict(m=0.02, M=0.01, b=0.03)
    a = eg_lineage(HazardParams(**base, alpha=1.0 - 1e-12), ONE, LINEAR).value
    b = ev_dynasty(HazardParams(**base), ONE, LINEAR).value
    assert a == pytest.approx(b, rel=1e-6)


def test_lineage_monotone_in_alpha():
    base = dict(m=0.02, M=0.01, b=0.02)
    values = [
        eg_lineage(HazardParams(**base, alpha=a), ONE, LINEAR).value
        for a in (0.1, 0.3, 0.5, 0.7, 0.9)
    ]
    assert all(x < y for x, y in zip(values, values[1:]))


def test_lineage_divergence():
    p = HazardParams(m=0.0, M=0.002, b=0.05, alpha=0.9)
    with pytest.raises(DivergenceError):
        eg_lineage(p, ONE, LINEAR)


# --- known extinction date ------------------------------------------------------------


def test_eu_known_T_single_period():
    path = ConsumptionPath.constant(2.5)
    assert eu_known_T(0.3, 0, path, LINEAR) == 2.5


def test_eu_known_T_undiscounted_count():
    assert eu_known_T(0.0, 3, ONE, LINEAR) == pytest.approx(4.0, abs=1e-12)


def test_eu_known_T_hand_sum():
    # 1 + 0.9 + 0.81 = 2.71
    assert eu_known_T(0.1, 2, ONE, LINEAR) == pytest.approx(2.71, abs=1e-12)


def test_eu_known_T_ignores_M_by_construction():
    # same m, any M: the functional does not even accept M
    path = ConsumptionPath(prefix=(1.0, 2.0, 1.5))
    assert eu_known_T(0.2, 10, path, LOG) == eu_known_T(0.2, 10, path, LOG)
    with pytest.raises(ValueError):
        eu_known_T(0.2, -1, path, LOG)


# --- law of total expectation -----------------------------------------------------------

TOTAL_EXPECTATION_COMBOS = [
    (HazardParams(m=0.02, M=0.01), ONE, LINEAR),
    (HazardParams(m=0.10, M=0.05), ConsumptionPath(prefix=(0.8, 1.3, 1.1, 2.0)), LOG),
    (HazardParams(m=0.30, M=0.20), ConsumptionPath(prefix=(1.0, 1.5), tail="geometric", ratio=0.9), UtilitySpec.crra(2.0)),
    (HazardParams(m=0.05, M=0.04), ConsumptionPath(prefix=(2.0, 2.2, 2.5)), UtilitySpec.crra(0.5)),
    (HazardParams(m=0.50, M=0.30), ConsumptionPath.constant(3.0), LOG),
    (HazardParams(m=0.02, M=0.20), ConsumptionPath(prefix=(1.2, 0.9, 1.4)), LINEAR),
]


@pytest.mark.parametrize("params,path,u", TOTAL_EXPECTATION_COMBOS)
def test_total_expectation_links_known_T_to_unconditional(params, path, u):
    """sum_T P_X(T) EU|T equals the unconditional individual expected utility."""
    horizon = int(math.ceil(math.log(1e-14) / math.log(1.0 - params.M))) + 1
    mixture = math.fsum(
        extinction_pmf(params.M, T) * eu_known_T(params.m, T, path, u)
        for T in range(horizon)
    )
    target = eu_individual(params, path, u).value
    assert mixture == pytest.approx(target, abs=1e-9)


# --- tail bound honesty -------------------------------------------------------------------

HONESTY_CONFIGS = [
    (HazardParams(m=0.02, M=0.01), ONE, LINEAR),
    (HazardParams(m=0.02, M=0.01), ConsumptionPath(prefix=(100.0, 105.0), tail="geometric", ratio=0.97), LOG),
    (HazardParams(m=0.1, M=0.002), ConsumptionPath(prefix=(2.0, 1.5, 1.8), tail="geometric", ratio=0.99), UtilitySpec.crra(2.0)),
    (HazardParams(m=0.005, M=0.002), ConsumptionPath(prefix=(0.5, 0.7)), UtilitySpec.crra(0.5)),
]


@pytest.mark.parametrize("params,path,u", HONESTY_CONFIGS)
def test_value_within_tail_bound_of_longer_sum(params, path, u):
    res = eu_individual(params, path, u)
    assert res.converged
    longer = brute_force_sum(params.joint_survival, path, u, 10 * (res.truncation_index + 1))
    assert abs(res.value - longer) <= res.tail_bound


def test_unbounded_crra_tail_diverges():
    # consumption decays at ratio g while weights shrink slower than g**(sigma-1) grows
    p = HazardParams(m=0.0, M=0.01)
    path = ConsumptionPath(prefix=(1.0,), tail="geometric", ratio=0.5)
    with pytest.raises(DivergenceError):
        eu_individual(p, path, UtilitySpec.crra(3.0))


def test_non_convergence_reported_not_looped():
    p = HazardParams(m=1e-5, M=1e-5)
    res = eu_individual(p, ONE, LINEAR, tol=1e-10)
    assert not res.converged
    assert res.truncation_index == 999_999
    assert res.tail_bound > 1e-10


def test_ratio_zero_tail_with_linear_utility():
    path = ConsumptionPath(prefix=(1.0, 2.0), tail="geometric", ratio=0.0)
    res = eu_individual(HazardParams(m=0.5, M=0.5), path, LINEAR)
    # only t=0 and t=1 contribute: 1 + 0.25*2
    assert res.value == pytest.approx(1.0 + 0.25 * 2.0, abs=1e-12)


# --- weights and finiteness -----------------------------------------------------------------


@pytest.mark.parametrize("case", [INDIVIDUAL, DYNASTY, DYNASTY_THETA, LINEAGE])
def test_weight_ratios_are_constant(case):
    p = HazardParams(m=0.07, M=0.03, b=0.06, theta=0.4, alpha=0.6)
    w = weight_sequence(case, p, 52)
    ratios = w[1:] / w[:-1]
    assert np.max(np.abs(ratios - weight_ratio(case, p))) < 1e-12


def test_known_extinction_weights_stop_at_T():
    p = HazardParams(m=0.2, M=0.1)
    w = weight_sequence(known_extinction(3), p, 6)
    np.testing.assert_allclose(w[:4], [1.0, 0.8, 0.64, 0.512], rtol=1e-12)
    assert np.all(w[4:] == 0.0)


def test_finiteness_check_examples():
    chk = finiteness_check(DYNASTY, HazardParams(m=0.02, M=0.01).with_n_zero())
    assert chk.finite and chk.margin == pytest.approx(0.01, abs=1e-12)
    chk = finiteness_check(DYNASTY, HazardParams(m=0.0, M=0.005, b=0.01))
    assert not chk.finite
    chk = finiteness_check(INDIVIDUAL, HazardParams(m=0.02, M=0.01))
    assert chk.finite and chk.product == pytest.approx(0.9702, abs=1e-15)
    chk = finiteness_check(known_extinction(5), HazardParams(m=0.3, M=0.9))
    assert chk.finite


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario("individual", T=3)
    with pytest.raises(ValueError):
        known_extinction(-1)
    with pytest.raises(ValueError):
        Scenario("unknown_case")


def test_evaluate_dispatch_known_extinction():
    p = HazardParams(m=0.1, M=0.9)
    res = evaluate(known_extinction(2), p, ONE, LINEAR)
    assert res.value == pytest.approx(2.71, abs=1e-12)
    assert res.tail_bound == 0.0 and res.converged


def test_evaluate_dispatch_matches_direct_calls():
    p = HazardParams(m=0.02, M=0.01, b=0.03, theta=0.5, alpha=0.5)
    assert evaluate(INDIVIDUAL, p, ONE, LINEAR).value == eu_individual(p, ONE, LINEAR).value
    assert evaluate(DYNASTY, p, ONE, LINEAR).value == ev_dynasty(p, ONE, LINEAR).value
    assert evaluate(LINEAGE, p, ONE, LINEAR).value == eg_lineage(p, ONE, LINEAR).value
