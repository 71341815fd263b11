import numpy as np
import pytest

import config

from analysis.simulator import (
    RNG_ALGORITHM,
    SimParams,
    empirical_vs_expected,
    reconstruct_campaign,
    run_campaign,
    simulate,
    write_simulation,
)
from analysis.temporal import first_occurrence, period_generation_matrix
from core.errors import InfeasibleReconstructionError, InvalidParamsError
from core.events import format_events, read_events
from core.forest import build_forest
from core.series import GenerationSeries, generation_counts


def test_no_forwarding_gives_only_seeds():
    log = simulate(SimParams(p=0.0, lam=5.0, N=100, seeds=3, rng_seed=7))
    assert len(log) == 3
    assert all(r.is_seed for r in log)


def test_saturation_with_heavy_contact():
    for rng_seed in range(5):
        campaign = run_campaign(SimParams(p=1.0, lam=400.0, N=50, seeds=1, rng_seed=rng_seed))
        assert len(campaign.generation) == 50


def test_same_seed_same_log():
    params = SimParams(p=0.5, lam=3.0, N=300, seeds=2, rng_seed=42)
    assert format_events(simulate(params)) == format_events(simulate(params))


def test_different_seeds_differ():
    a = simulate(SimParams(p=0.5, lam=3.0, N=300, seeds=2, rng_seed=1))
    b = simulate(SimParams(p=0.5, lam=3.0, N=300, seeds=2, rng_seed=2))
    assert a != b


def test_forest_matches_simulator_ground_truth():
    campaign = run_campaign(SimParams(p=0.4, lam=4.0, N=1000, seeds=2, mean_delay=600.0, rng_seed=42))
    forest = build_forest(campaign.log)
    assert {a: n.generation for a, n in forest.nodes.items()} == dict(campaign.generation)
    assert generation_counts(forest).infected.tolist() == campaign.generation_counts().tolist()
    assert np.array_equal(first_occurrence(forest), campaign.first_occurrence())


def test_chain_accounting_holds_across_random_campaigns():
    rng = np.random.default_rng(2024)
    for rng_seed in range(100):
        params = SimParams(
            p=float(rng.uniform(0.1, 1.0)),
            lam=float(rng.uniform(0.5, 5.0)),
            N=int(rng.integers(20, 400)),
            seeds=int(rng.integers(1, 4)),
            max_generations=20,
            rng_seed=rng_seed,
        )
        campaign = run_campaign(params)
        series = generation_counts(build_forest(campaign.log))
        assert np.array_equal(series.sent[:-1], series.infected[1:])
        assert series.reach <= params.N


def test_infection_times_increase_along_chains():
    campaign = run_campaign(SimParams(p=0.6, lam=3.0, N=500, seeds=1, rng_seed=3))
    forest = build_forest(campaign.log)
    for node in forest.nodes.values():
        if node.infector is not None:
            assert node.infected_at > forest.nodes[node.infector].infected_at


def test_generation_cap():
    campaign = run_campaign(SimParams(p=1.0, lam=2.0, N=10_000, seeds=1, max_generations=3, rng_seed=5))
    assert max(campaign.generation.values()) <= 3


def test_single_member_population():
    campaign = run_campaign(SimParams(p=1.0, lam=3.0, N=1, seeds=1))
    assert len(campaign.log) == 1


@pytest.mark.parametrize("kwargs", [
    dict(p=1.2, lam=1.0, N=10),
    dict(p=0.5, lam=-1.0, N=10),
    dict(p=0.5, lam=1.0, N=10, seeds=11),
    dict(p=0.5, lam=1.0, N=0),
    dict(p=0.5, lam=1.0, N=10, mean_delay=0.0),
    dict(p=0.5, lam=1.0, N=10, rng_seed=-1),
])
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParamsError):
        SimParams(**kwargs)


def test_params_from_mapping_and_file(tmp_path):
    params = SimParams.from_mapping({"p": "0.3", "lambda": "4", "n": "1000", "rng-seed": "42"})
    assert params == SimParams(p=0.3, lam=4.0, N=1000, rng_seed=42)
    path = tmp_path / "sim.env"
    path.write_text("p=0.3\nlambda=4\nn=1000\nseeds=2\n", encoding="utf-8")
    assert SimParams.from_file(path, {"seeds": 5}).seeds == 5
    defaults = SimParams.from_mapping({"p": "0", "seeds": "3"})
    assert (defaults.lam, defaults.N) == (config.SIM_LAMBDA, config.SIM_POPULATION)
    with pytest.raises(InvalidParamsError):
        SimParams.from_mapping({"lambda": "4", "n": "10"})
    with pytest.raises(InvalidParamsError):
        SimParams.from_mapping({"p": "0.3", "lambda": "4", "n": "10", "colour": "red"})


def test_written_file_records_parameters(tmp_path):
    params = SimParams(p=0.3, lam=4.0, N=1000, seeds=1, rng_seed=42)
    log = simulate(params)
    path = tmp_path / "sim.csv"
    write_simulation(log, params, path)
    again = read_events(path)
    assert again == log
    assert "rng_seed=42" in again.comments[0]
    assert RNG_ALGORITHM in again.comments[0]


def test_no_spread_matches_expectation_exactly():
    table = empirical_vs_expected(SimParams(p=1.0, lam=0.0, N=100, seeds=4), runs=20)
    assert table["empirical_mean"].tolist() == [4.0]
    assert table["rel_deviation"].tolist() == [0.0]


@pytest.mark.slow
def test_sub_critical_means_follow_mean_law():
    params = SimParams(p=0.5, lam=1.0, N=1_000_000, seeds=20, max_generations=6, rng_seed=11)
    table = empirical_vs_expected(params, runs=10_000)
    head = table[table["generation"] <= 5]
    expected = 20 * 0.5 ** (head["generation"] - 1)
    assert np.allclose(head["expected"], expected, rtol=1e-3)
    assert np.all(np.abs(head["empirical_mean"] / expected - 1) < 0.05)


@pytest.mark.slow
def test_super_critical_small_population_reach():
    params = SimParams(p=0.5, lam=4.0, N=500, seeds=1, max_generations=4, rng_seed=5)
    table = empirical_vs_expected(params, runs=4000)
    empirical = table["empirical_cumulative"].iloc[-1]
    expected = table["expected_cumulative"].iloc[-1]
    assert empirical == pytest.approx(expected, rel=0.10)


def test_reconstructed_v1_matches_both_tables(v1_series, v1_matrix, v1_events):
    forest = build_forest(v1_events)
    assert generation_counts(forest) == v1_series
    matrix = period_generation_matrix(forest, 86400)
    assert matrix.T == 31
    assert np.array_equal(matrix.counts[:, :10], v1_matrix.counts)
    assert matrix.column_fractions()[0] == pytest.approx(0.1956, abs=5e-4)


def test_reconstruction_is_deterministic(v1_series, v1_matrix):
    a = reconstruct_campaign(v1_series, v1_matrix, total_periods=31, rng_seed=3)
    b = reconstruct_campaign(v1_series, v1_matrix, total_periods=31, rng_seed=3)
    assert format_events(a) == format_events(b)


def test_reconstruction_without_matrix(v2_series):
    trimmed = GenerationSeries(v2_series.infected[:11], np.append(v2_series.decisions[:10], 0),
                               np.append(v2_series.sent[:10], 0))
    # everything lands in one period, so each generation needs room for 782 infections
    log = reconstruct_campaign(trimmed, generation_spacing=1000)
    assert generation_counts(build_forest(log)) == trimmed


def test_v2_last_generation_cannot_be_reconstructed(v2_series):
    # generation 12 has two deciders but sends nothing
    with pytest.raises(InfeasibleReconstructionError):
        reconstruct_campaign(v2_series)


def test_matrix_needs_room_for_uncovered_infections(v1_series, v1_matrix):
    with pytest.raises(InfeasibleReconstructionError):
        reconstruct_campaign(v1_series, v1_matrix)
