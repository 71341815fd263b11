import numpy as np
import pytest

from analysis.branching import (
    ModelParams,
    grid_mse,
    predicted_reach,
    project,
    trajectory_mse,
)
from core.errors import InvalidParamsError, KOutOfRangeError, UptoZeroError
from core.series import GenerationSeries


def test_zero_r0_stops_after_seeds():
    traj = project(ModelParams(p=0.0, lam=0.0, N=100.0), seeds=5)
    assert traj.expected_infected.tolist() == [5.0]
    assert traj.extinct_at == 1
    assert predicted_reach(ModelParams(p=0.0, lam=0.0, N=100.0), 5) == 5.0


def test_first_generations_follow_the_recursion():
    traj = project(ModelParams(p=1.0, lam=2.0, N=1000.0), seeds=1)
    assert traj.expected_infected[:3] == pytest.approx([1.0, 1.998, 3.984019992], rel=1e-6)


def test_cumulative_never_exceeds_population():
    for r0 in (0.5, 1.5, 3.0, 10.0, 30.0):
        traj = project(ModelParams.from_r0(r0, 200.0), seeds=3)
        assert traj.reach <= 200.0 + 3 + 1e-9
        assert np.all(traj.expected_infected >= 0)


def test_super_critical_growth_saturates():
    traj = project(ModelParams.from_r0(4.0, 500.0), seeds=1)
    assert traj.extinct_at is not None
    assert traj.reach == pytest.approx(500.0, rel=0.02)


def test_horizon_truncates_without_extinction():
    traj = project(ModelParams.from_r0(1.0, 1e9), seeds=10, horizon=7)
    assert traj.H == 7
    assert traj.extinct_at is None


def test_invalid_params():
    with pytest.raises(InvalidParamsError):
        ModelParams(p=1.5, lam=1.0, N=10.0)
    with pytest.raises(InvalidParamsError):
        ModelParams(p=0.5, lam=-1.0, N=10.0)
    with pytest.raises(InvalidParamsError):
        ModelParams(p=0.5, lam=1.0, N=0.5)
    with pytest.raises(InvalidParamsError):
        project(ModelParams(p=0.5, lam=1.0, N=10.0), seeds=0)


def test_from_r0_splits_on_p():
    params = ModelParams.from_r0(1.2, 1000.0, p=0.4)
    assert params.lam == pytest.approx(3.0)
    assert params.r0 == pytest.approx(1.2)


def test_mse_against_own_trajectory_is_zero():
    traj = project(ModelParams.from_r0(1.2, 1000.0), seeds=1)
    observed = GenerationSeries.from_trajectory(traj.expected_infected)
    assert trajectory_mse(traj, observed, observed.G) == pytest.approx(0.0, abs=1e-12)


def test_mse_at_one_generation_is_zero_for_any_model(v1_series):
    traj = project(ModelParams.from_r0(25.0, 50.0), seeds=v1_series.seeds)
    assert trajectory_mse(traj, v1_series, 1) == 0.0


def test_mse_pads_model_after_extinction():
    traj = project(ModelParams(p=0.0, lam=0.0, N=100.0), seeds=1)
    observed = GenerationSeries([1, 2], [1, 0], [2, 0])
    # model cumulative stays at 1, observed reaches 3
    assert trajectory_mse(traj, observed, 2) == pytest.approx(2.0)


def test_mse_range_errors(v1_series):
    traj = project(ModelParams.from_r0(1.0, 100.0), seeds=1)
    with pytest.raises(UptoZeroError):
        trajectory_mse(traj, v1_series, 0)
    with pytest.raises(KOutOfRangeError):
        trajectory_mse(traj, v1_series, v1_series.G + 1)


@pytest.mark.parametrize("r0,N", [(0.0, 700.0), (0.9, 639.0), (1.7, 800.0), (4.5, 650.0), (11.0, 5000.0)])
def test_grid_objective_matches_scalar_path(v1_series, r0, N):
    for k in (1, 3, 8, 14):
        scalar = trajectory_mse(project(ModelParams.from_r0(r0, N), v1_series.seeds), v1_series, k)
        vector = grid_mse(np.array([r0]), np.array([N]), v1_series.seeds, v1_series.cumulative[:k])
        assert vector[0] == pytest.approx(scalar, rel=1e-9, abs=1e-9)


def test_grid_objective_broadcasts():
    target = np.array([1.0, 2.0, 4.0])
    out = grid_mse(np.linspace(0, 3, 4)[:, None], np.array([10.0, 100.0])[None, :], 1.0, target)
    assert out.shape == (4, 2)


def test_trajectory_frame_precision():
    frame = project(ModelParams.from_r0(2.0, 1000.0), seeds=1).to_frame()
    assert frame.loc[1, "expected_infected"] == "1.9980"


def test_doubling_in_a_huge_population():
    traj = project(ModelParams(p=1.0, lam=2.0, N=1e9), seeds=1, horizon=5)
    assert traj.expected_infected == pytest.approx([1.0, 2.0, 4.0, 8.0, 16.0], rel=1e-6)


def test_depletion_in_a_small_population():
    traj = project(ModelParams(p=0.5, lam=4.0, N=100.0), seeds=1)
    assert traj.expected_infected[1] == pytest.approx(1.98)
    assert traj.to_frame().loc[2, "expected_infected"] == "3.8420"


def test_population_of_seeds_only_never_grows():
    for seeds in (1, 7, 250):
        assert predicted_reach(ModelParams.from_r0(5.0, float(seeds)), seeds) == seeds


def test_only_the_product_of_p_and_lambda_matters():
    a = project(ModelParams(p=0.5, lam=4.0, N=300.0), seeds=2)
    b = project(ModelParams(p=1.0, lam=2.0, N=300.0), seeds=2)
    c = project(ModelParams(p=0.25, lam=8.0, N=300.0), seeds=2)
    assert np.array_equal(a.expected_infected, b.expected_infected)
    assert np.array_equal(a.expected_infected, c.expected_infected)


# the eps cut-off drops the sub-threshold tail, which can shave a little
# reach when r0 or N grows; the drop stays within four times the threshold
REACH_SLACK = 4 * 0.5


@pytest.mark.slow
def test_reach_is_monotone_up_to_the_extinction_cut_off():
    r0_values = np.linspace(0.0, 30.0, 301)
    n_values = np.geomspace(1.0, 1e6, 121)
    reach = np.array([[predicted_reach(ModelParams.from_r0(r0, N), 1, eps=0.5) for N in n_values]
                      for r0 in r0_values])
    assert np.diff(reach, axis=0).min() >= -REACH_SLACK
    assert np.diff(reach, axis=1).min() >= -REACH_SLACK
