"""Monte Carlo estimators against their analytic targets, plus the agent-based mode."""

import numpy as np
import pytest

from extrisk import (
    VERIFY_GRID,
    VERIFY_PATH,
    VERIFY_UTILITY,
    ConsumptionPath,
    DegenerateHazardError,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    SimulationConfig,
    UtilitySpec,
    abm_population_run,
    abm_smoothing_study,
    default_horizon_cap,
    eg_lineage,
    eu_individual,
    ev_dynasty_theta,
    ew_social,
    mc_eg_lineage,
    mc_eu_individual,
    mc_ev_dynasty,
    mc_ew_social,
    reproducibility_selfcheck,
    verify_oracle_grid,
)
from extrisk.simulate import _offspring

ONE = ConsumptionPath.constant(1.0)
LINEAR = UtilitySpec.linear()
CFG = SimulationConfig(replications=200_000, seed=20240915)


def within_3se(est, target):
    return abs(est.mean - target) <= 3.0 * est.standard_error + 1e-12


# --- exact degenerate cases ------------------------------------------------------


def test_mc_eu_certain_immediate_death_is_exact():
    est = mc_eu_individual(
        HazardParams(m=1.0, M=0.0), ONE, LINEAR,
        SimulationConfig(replications=10_000, seed=1),
    )
    assert est.mean == 1.0
    assert est.standard_error == 0.0
    assert est.truncated_mass == 0.0


def test_mc_dynasty_certain_immediate_extinction_is_exact():
    p = HazardParams(m=0.1, M=1.0, b=0.2)
    path = ConsumptionPath.constant(2.0)
    est = mc_ev_dynasty(p, path, LINEAR, 1.0, SimulationConfig(replications=5_000, seed=2))
    assert est.mean == 2.0 and est.standard_error == 0.0


def test_mc_lineage_certain_immediate_extinction():
    p = HazardParams(m=0.1, M=1.0, b=0.2, alpha=0.4)
    est = mc_eg_lineage(p, ONE, LINEAR, SimulationConfig(replications=5_000, seed=3))
    assert est.mean == 1.0 and est.standard_error == 0.0


def test_mc_ew_certain_immediate_extinction_is_initial_welfare():
    p = HazardParams(m=0.1, M=1.0, b=0.2, N0=7.0)
    est = mc_ew_social(p, ONE, LINEAR, SimulationConfig(replications=5_000, seed=4))
    assert est.mean == pytest.approx(7.0, rel=1e-12)
    assert est.standard_error == pytest.approx(0.0, abs=1e-12)


# --- agreement with the analytic engine ---------------------------------------------


def test_mc_eu_geometric_lifetime():
    est = mc_eu_individual(HazardParams(m=0.0, M=0.5), ONE, LINEAR, CFG)
    assert within_3se(est, 2.0)


def test_mc_eu_matches_analytic():
    p = HazardParams(m=0.02, M=0.01)
    est = mc_eu_individual(p, VERIFY_PATH, VERIFY_UTILITY, CFG)
    assert within_3se(est, eu_individual(p, VERIFY_PATH, VERIFY_UTILITY).value)


def test_mc_dynasty_constant_population():
    p = HazardParams(m=0.02, M=0.01).with_n_zero()
    est = mc_ev_dynasty(p, ONE, LINEAR, 1.0, CFG)
    assert within_3se(est, 100.0)


def test_mc_dynasty_theta_case():
    p = HazardParams(m=0.01, M=0.02, b=1.0201 / 0.99 - 1.0, theta=0.5)
    est = mc_ev_dynasty(p, ONE, LINEAR, None, CFG)
    assert within_3se(est, 1.0 / 0.0102)
    target = ev_dynasty_theta(p, ONE, LINEAR).value
    assert within_3se(est, target)


def test_mc_lineage_matches_analytic():
    p = HazardParams(m=0.02, M=0.01, b=0.03, alpha=0.5)
    est = mc_eg_lineage(p, VERIFY_PATH, VERIFY_UTILITY, CFG)
    assert within_3se(est, eg_lineage(p, VERIFY_PATH, VERIFY_UTILITY).value)


def test_mc_lineage_without_births_targets_individual():
    p = HazardParams(m=0.05, M=0.02, b=0.0, alpha=0.5)
    est = mc_eg_lineage(p, VERIFY_PATH, VERIFY_UTILITY, CFG)
    assert within_3se(est, eu_individual(p, VERIFY_PATH, VERIFY_UTILITY).value)


def test_mc_ew_constant_population_benchmark():
    p = HazardParams(m=0.02, M=0.01).with_n_zero()
    est = mc_ew_social(p, ONE, LINEAR, CFG)
    assert within_3se(est, 3355.7046979865804)


def test_mc_ew_general_point():
    p = HazardParams(m=0.1, M=0.05, b=0.05, N0=2.0)
    est = mc_ew_social(p, VERIFY_PATH, VERIFY_UTILITY, CFG)
    assert within_3se(est, ew_social(p, VERIFY_PATH, VERIFY_UTILITY).value)


# --- rejections ------------------------------------------------------------------------


def test_mc_rejections():
    with pytest.raises(DegenerateHazardError):
        mc_eu_individual(HazardParams(m=0.0, M=0.0), ONE, LINEAR, CFG)
    with pytest.raises(NoExtinctionError):
        mc_ev_dynasty(HazardParams(m=0.1, M=0.0, b=0.1), ONE, LINEAR, 1.0, CFG)
    with pytest.raises(DivergenceError):
        mc_ev_dynasty(HazardParams(m=0.0, M=0.005, b=0.01), ONE, LINEAR, 1.0, CFG)
    with pytest.raises(DivergenceError):
        mc_ew_social(HazardParams(m=0.02, M=0.004, b=0.05), ONE, LINEAR, CFG)
    with pytest.raises(ValueError):
        mc_ew_social(HazardParams(m=0.02, M=0.01, b=0.0), ONE, LINEAR, CFG)
    with pytest.raises(ValueError):
        mc_ev_dynasty(HazardParams(m=0.1, M=0.1, b=0.1), ONE, LINEAR, 1.5, CFG)
    agent_cfg = SimulationConfig(replications=10, seed=0, mode="agent")
    with pytest.raises(ValueError):
        mc_eu_individual(HazardParams(m=0.1, M=0.1), ONE, LINEAR, agent_cfg)


def test_simulation_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(replications=0)
    with pytest.raises(ValueError):
        SimulationConfig(seed=-1)
    with pytest.raises(ValueError):
        SimulationConfig(mode="hybrid")
    with pytest.raises(ValueError):
        SimulationConfig(offspring_law="fibonacci")
    with pytest.raises(ValueError):
        SimulationConfig(horizon_cap=0)


# --- reproducibility --------------------------------------------------------------------


def test_estimates_are_bit_identical_for_same_seed():
    p = HazardParams(m=0.02, M=0.01)
    cfg = SimulationConfig(replications=150_000, seed=77)
    a = mc_eu_individual(p, VERIFY_PATH, VERIFY_UTILITY, cfg)
    b = mc_eu_individual(p, VERIFY_PATH, VERIFY_UTILITY, cfg)
    assert a == b


def test_different_seeds_differ():
    p = HazardParams(m=0.02, M=0.01)
    a = mc_eu_individual(p, ONE, LINEAR, SimulationConfig(replications=50_000, seed=1))
    b = mc_eu_individual(p, ONE, LINEAR, SimulationConfig(replications=50_000, seed=2))
    assert a.mean != b.mean


def test_chunk_boundary_replication_counts():
    p = HazardParams(m=0.3, M=0.2)
    for reps in (1, 131072, 131072 + 17):
        est = mc_eu_individual(p, ONE, LINEAR, SimulationConfig(replications=reps, seed=5))
        assert est.replications == reps


def test_reproducibility_selfcheck_passes():
    assert reproducibility_selfcheck()


# --- horizon cap -----------------------------------------------------------------------


def test_default_horizon_cap():
    assert default_horizon_cap(0.0) == 1
    cap = default_horizon_cap(0.99)
    assert 0.99**cap < 1e-12 <= 0.99 ** (cap - 1)


def test_truncated_mass_reported():
    p = HazardParams(m=0.1, M=0.1, b=0.0)
    cfg = SimulationConfig(replications=20_000, seed=9, horizon_cap=5)
    est = mc_ev_dynasty(p, ONE, LINEAR, 1.0, cfg)
    expected = 0.9**6  # P(T > 5)
    se = (expected * (1 - expected) / 20_000) ** 0.5
    assert abs(est.truncated_mass - expected) < 4 * se


# --- offspring laws ----------------------------------------------------------------------


@pytest.mark.parametrize("law", ["poisson", "bernoulli-pair"])
def test_offspring_mean_preserved(law):
    rng = np.random.default_rng(42)
    survivors = np.full(50_000, 40, dtype=np.int64)
    births = _offspring(rng, survivors, 0.03, law)
    mean_per_survivor = births.sum() / survivors.sum()
    assert mean_per_survivor == pytest.approx(0.03, abs=0.002)


def test_bernoulli_pair_rejects_large_birth_rate():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        _offspring(rng, np.int64(10), 2.5, "bernoulli-pair")


# --- agent-based runs ---------------------------------------------------------------------


def test_abm_total_mortality_without_births_dies_at_one():
    p = HazardParams(m=1.0, M=0.001, b=0.0)
    cfg = SimulationConfig(replications=1, seed=31, mode="agent")
    rng = np.random.default_rng(0)
    traj = abm_population_run(p, 4, ONE, LINEAR, cfg, rng=rng)
    assert traj.population[0] == 4
    if traj.extinction_date >= 1:
        assert traj.population[1] == 0
        assert traj.died_off_early


def test_abm_single_agent_certain_absorption_without_extinction():
    p = HazardParams(m=0.5, M=0.0, b=0.0)
    cfg = SimulationConfig(replications=1, seed=3, mode="agent", horizon_cap=200)
    traj = abm_population_run(p, 1, ONE, LINEAR, cfg)
    assert traj.hit_cap
    assert traj.died_off_early
    assert traj.population[-1] == 0


def test_abm_requires_agent_mode_and_integer_head_count():
    p = HazardParams(m=0.1, M=0.1)
    with pytest.raises(ValueError):
        abm_population_run(p, 5, ONE, LINEAR, SimulationConfig(replications=1, seed=0))
    cfg = SimulationConfig(replications=1, seed=0, mode="agent")
    with pytest.raises(ValueError):
        abm_population_run(p, 0, ONE, LINEAR, cfg)


def test_abm_welfare_matches_smoothed_window_in_expectation():
    # with n = 0 the per-capita realized welfare is unbiased for W(0,T)/N0
    p = HazardParams(m=0.02, M=0.05).with_n_zero()
    cfg = SimulationConfig(replications=4_000, seed=13, mode="agent")
    rows = abm_smoothing_study(p, ONE, LINEAR, [50], cfg)
    row = rows[0]
    # crude z-test: the gap magnitude bounds the standard error from above
    se_proxy = row.mean_abs_gap / (cfg.replications ** 0.5) * 3
    assert abs(row.mean_welfare_per_capita - row.smoothed_mean_per_capita) < max(se_proxy, 0.5)


def test_abm_study_gap_shrinks_with_head_count():
    p = HazardParams(m=0.02, M=0.01).with_n_zero()
    cfg = SimulationConfig(replications=2_000, seed=7, mode="agent")
    rows = abm_smoothing_study(p, ONE, LINEAR, [1, 10, 100], cfg)
    gaps = [r.mean_abs_gap for r in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    die_offs = [r.die_off_frequency for r in rows]
    assert die_offs[0] > 0.0
    assert die_offs[0] >= die_offs[1] >= die_offs[2]


def test_abm_study_is_reproducible():
    p = HazardParams(m=0.02, M=0.02).with_n_zero()
    cfg = SimulationConfig(replications=500, seed=123, mode="agent")
    a = abm_smoothing_study(p, ONE, LINEAR, [1, 10], cfg)
    b = abm_smoothing_study(p, ONE, LINEAR, [1, 10], cfg)
    assert a == b


def test_abm_bernoulli_pair_law_runs():
    p = HazardParams(m=0.02, M=0.05).with_n_zero()
    cfg = SimulationConfig(replications=300, seed=5, mode="agent", offspring_law="bernoulli-pair")
    rows = abm_smoothing_study(p, ONE, LINEAR, [20], cfg)
    assert rows[0].runs == 300
    assert rows[0].mean_welfare_per_capita > 0.0


# --- verification grid -------------------------------------------------------------------


def test_verify_grid_satisfies_preconditions():
    for p in VERIFY_GRID:
        assert p.M > 0.0 and p.b > 0.0
        assert (1.0 - p.M) * p.gross_growth < 1.0
        assert (1.0 - p.M) * p.gross_growth**2 < 1.0  # finite MC variance


def test_verify_oracle_grid_smoke():
    rows = verify_oracle_grid(replications=60_000, seed=20240613, points=VERIFY_GRID[:2])
    assert len(rows) == 10
    assert sum(not r.ok for r in rows) <= 1
    assert all(r.mc_se > 0 for r in rows)
