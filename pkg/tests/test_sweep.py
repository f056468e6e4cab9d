#  Copyright (c) 2021 robfit
import numpy as np
import pandas as pd
import pytest

import robfit
from robfit.minimizers.config import SolverConfig
from robfit.models.bundle import synthetic_scene
from robfit.models.sweep import (DEFAULT_POLICIES, SUMMARY_COLUMNS, SWEEP_COLUMNS, basin_sweep, perturb_poses,
                                 success_rates, summarize_sweep)
from robfit.util.exception import DomainError


@pytest.fixture
def small_scene():
    return synthetic_scene(n_cameras=4, n_landmarks=30, seed=0)


def test_perturb_poses(small_scene):
    rng = np.random.default_rng(1)
    poses = perturb_poses(small_scene, 0.5, rng, frozen_axis=2)
    assert poses[0] == small_scene.poses[0]
    assert poses[1].translation[2] == small_scene.poses[1].translation[2]
    for pose, true in zip(poses[1:], small_scene.poses[1:]):
        np.testing.assert_array_equal(pose.rotation, true.rotation)
        assert not np.allclose(pose.center(), true.center())
    unchanged = perturb_poses(small_scene, 0., rng)
    for pose, true in zip(unchanged, small_scene.poses):
        np.testing.assert_allclose(pose.as_matrix(), true.as_matrix(), atol=1e-12)
    rotated = perturb_poses(small_scene, 0., rng, rotation_sigma=0.01)
    assert not np.allclose(rotated[2].rotation, small_scene.poses[2].rotation)


def test_zero_noise_always_succeeds(small_scene, table):
    records, summary = basin_sweep(small_scene, sigmas=[0.], samples=2, seed=3, table=table)
    assert list(records.columns) == SWEEP_COLUMNS
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert len(records) == 2 * len(DEFAULT_POLICIES)
    assert records['success'].all()
    assert list(summary['policy']) == list(DEFAULT_POLICIES)
    np.testing.assert_array_equal(summary['success_rate'], 1.)


def test_policies_share_initial_state(small_scene, table):
    records, _ = basin_sweep(small_scene, sigmas=[0.1, 0.3], samples=2, policies=['squared', 'adaptive'], seed=4,
                             table=table)
    seeds = records.groupby(['sigma', 'sample'])['seed'].nunique()
    assert np.all(seeds == 1)
    assert records['seed'].nunique() == 4


def test_deterministic(small_scene, table):
    kwargs = dict(sigmas=[0.2, 1.], samples=2, policies=['huber', 'adaptive'], seed=5, table=table)
    robfit.run.set_n_cpu(1)
    first, first_summary = basin_sweep(small_scene, **kwargs)
    robfit.run.set_n_cpu(3)
    second, second_summary = basin_sweep(small_scene, **kwargs)
    pd.testing.assert_frame_equal(first, second)
    pd.testing.assert_frame_equal(first_summary, second_summary)


def test_summary():
    records = pd.DataFrame({'policy': ['a', 'a', 'b', 'b'], 'sigma': [1., 1., 1., 1.],
                            'sample': [0, 1, 0, 1], 'seed': [1, 2, 1, 2], 'success': [True, False, True, True],
                            'rms_error': [0.001, 0.5, 0.002, 0.004], 'final_alpha': [np.nan] * 4,
                            'iterations': [3, 4, 5, 6]}, columns=SWEEP_COLUMNS)
    summary = summarize_sweep(records)
    assert list(summary['success_rate']) == [0.5, 1.]
    assert list(summary['median_rms_error']) == pytest.approx([0.2505, 0.003])
    assert success_rates(records).to_dict() == {'a': 0.5, 'b': 1.}


def test_invalid_sweep(small_scene):
    with pytest.raises(DomainError):
        basin_sweep(small_scene, sigmas=[-1.], samples=1, policies=['squared'])
    with pytest.raises(DomainError):
        basin_sweep(small_scene, sigmas=[1.], samples=1, policies=[])


def test_adaptive_basin(pytestconfig, table):
    if not pytestconfig.getoption("longtests"):
        pytest.skip("Convergence basin comparison only with --longtests")
    scene = synthetic_scene(seed=7, pixel_noise=0.5)
    records, _ = basin_sweep(scene, sigmas=[0.1, 0.5, 1., 2., 5.], samples=20, seed=7,
                             config=SolverConfig(c=1.), table=table)
    rates = success_rates(records)
    for policy in ('squared', 'huber', 'geman_mcclure'):
        assert rates['adaptive'] >= rates[policy] + 0.05
