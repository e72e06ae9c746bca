import numpy as np
import pytest

from otk.algorithms import Algorithm, RecoveryConfig
from otk.experiments import (
    DEFAULT_M_VALUES,
    DEFAULT_P_VALUES,
    PhaseGrid,
    PhaseGridSpec,
    count_increases,
    log_error_tail_fit,
    minimal_m_curve,
    run_phase_grid,
    run_single,
    run_trial,
)


def small_spec(**kw):
    base = dict(n=30, k=2, m_values=(4, 10, 20), p_values=(1, 2, 5, 10), trials=6,
                algorithm="rotp", master_seed=3)
    base.update(kw)
    return PhaseGridSpec(**base)


def test_default_grid_shape():
    assert len(DEFAULT_M_VALUES) == 24 and DEFAULT_M_VALUES[0] == 4 and DEFAULT_M_VALUES[-1] == 50
    assert len(DEFAULT_P_VALUES) == 18 and DEFAULT_P_VALUES[-1] == 50


def test_spec_validation():
    for bad in (dict(m_values=()), dict(p_values=(3, 2)), dict(trials=0), dict(k=40),
                dict(epsilon=0.0)):
        with pytest.raises(ValueError):
            small_spec(**bad)


def test_square_dense_system_always_succeeds():
    spec = PhaseGridSpec(n=6, k=6, m_values=(6,), p_values=(1, 2, 5), trials=10,
                         ensemble="gaussian", algorithm="rotp", master_seed=1)
    grid = run_phase_grid(spec)
    np.testing.assert_array_equal(grid.rates, 1.0)


def test_counts_bounded_and_conserved():
    grid = run_phase_grid(small_spec())
    assert grid.successes.min() >= 0 and grid.successes.max() <= grid.spec.trials
    failures = grid.spec.trials - grid.successes
    np.testing.assert_array_equal(grid.successes + failures, grid.spec.trials)
    assert np.all((grid.rates >= 0) & (grid.rates <= 1))
    assert grid.wall_times.shape == grid.successes.shape
    assert np.all(np.diff(grid.wall_times, axis=1) >= 0)


def test_schedule_invariance_and_reproducibility():
    spec = small_spec(algorithm="rot")
    serial = run_phase_grid(spec, workers=1)
    parallel = run_phase_grid(spec, workers=2)
    again = run_phase_grid(spec, workers=1)
    np.testing.assert_array_equal(serial.successes, parallel.successes)
    np.testing.assert_array_equal(serial.successes, again.successes)


def test_progress_sink_called():
    seen = []
    run_phase_grid(small_spec(trials=2), progress_sink=lambda d, t: seen.append((d, t)))
    assert seen[-1] == (6, 6)


def test_stalled_trials_are_frozen_in_p():
    spec = small_spec(p_values=tuple(range(1, 31)), trials=8, algorithm="rot")
    violations = 0
    for m in spec.m_values:
        for t in range(spec.trials):
            ok, _ = run_trial(spec, m, t)
            run = run_single(m, spec.n, spec.k, RecoveryConfig(spec.algorithm, spec.k, max_iters=30),
                             spec.ensemble, master_seed=spec.master_seed, trial=t)
            stop = run.result.trace.n_iter
            assert len(set(ok[stop - 1:])) <= 1
            violations += np.any(np.diff(ok.astype(int)) < 0)
    assert violations <= 1


def _grid_with(rates, m_values=(4, 6, 8), p_values=(1, 2, 3), trials=10):
    spec = PhaseGridSpec(m_values=m_values, p_values=p_values, trials=trials)
    return PhaseGrid(spec, np.rint(np.asarray(rates) * trials))


def test_minimal_m_curve_trivial_grids():
    assert minimal_m_curve(_grid_with(np.ones((3, 3))), 0.9) == [(1, 4), (2, 4), (3, 4)]
    assert minimal_m_curve(_grid_with(np.zeros((3, 3))), 0.9) == []


def test_minimal_m_curve_tradeoff():
    rates = [[0.0, 0.0, 0.2], [0.1, 0.95, 1.0], [0.9, 1.0, 1.0]]
    curve = minimal_m_curve(_grid_with(rates), 0.9)
    assert curve == [(1, 8), (2, 6), (3, 6)]
    assert count_increases(curve) == 0
    assert count_increases([(1, 6), (2, 8), (3, 6)]) == 1
    with pytest.raises(ValueError):
        minimal_m_curve(_grid_with(rates), 0.0)


def test_run_single_fixed_point_one_row():
    run = run_single(20, 30, 3, RecoveryConfig("rotp", 3), x0_truth=True, master_seed=4)
    assert len(run.trace_rows()) == 1
    assert run.result.success


def test_run_single_error_strictly_decreasing():
    good = 0
    for seed in range(10):
        errs = run_single(45, 50, 3, RecoveryConfig("rot", 3), master_seed=seed).result.trace.errors()
        start = np.flatnonzero(errs <= 1e-2)
        if start.size and np.all(np.diff(errs[start[0]:]) < 0):
            good += 1
    assert good >= 8


def test_noise_does_not_help():
    for seed in range(5):
        cfg = RecoveryConfig("rotp", 3)
        clean = run_single(40, 50, 3, cfg, master_seed=seed).result.trace.records[-1].error_to_truth
        noisy = run_single(40, 50, 3, cfg, noise_sigma=0.05, master_seed=seed)
        assert noisy.result.trace.records[-1].error_to_truth >= clean


def test_tail_fit_geometric_sequence():
    errs = [1.0, 0.5] + [0.05 * 0.3 ** j for j in range(6)]
    fit = log_error_tail_fit(errs)
    assert fit.start == 2 and fit.points == 6
    assert fit.slope == pytest.approx(np.log10(0.3))
    assert fit.r_squared == pytest.approx(1.0)


def test_tail_fit_degenerate_cases():
    assert log_error_tail_fit([1.0, 0.5, 0.2]) is None
    assert log_error_tail_fit([1.0, 1e-3]).r_squared == 1.0
    assert log_error_tail_fit([1.0, 0.0, 0.0]).r_squared == 1.0
    zigzag = log_error_tail_fit([0.05, 1e-3, 0.05, 1e-3, 0.05, 1e-3])
    assert zigzag.r_squared < 0.5


def test_rot_tail_is_close_to_linear():
    # ROT contracts over several iterations at this size, unlike ROTP,
    # which usually lands on the support in a single step
    cfg = RecoveryConfig(Algorithm.ROT, 3, epsilon=1e-2, max_iters=50)
    fits = [log_error_tail_fit(run_single(45, 50, 3, cfg, master_seed=s).result.trace.errors())
            for s in range(10)]
    assert sum(f.points >= 3 for f in fits) >= 5
    assert sum(f.r_squared >= 0.9 for f in fits) >= 8
