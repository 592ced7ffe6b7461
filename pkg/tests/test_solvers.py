import math

import numpy as np
import pytest
from scipy import stats

from slamopt import (
    BatchSchedule,
    BoxIndicator,
    CycleSchedule,
    LinesearchConfig,
    RunConfig,
    TRACE_COLUMNS,
    UnsupportedConfigurationError,
    pick_random_index,
    rng,
    run,
    run_adam,
    run_sgd,
    run_slam,
    run_sls0,
)
from slamopt.problems import QuadraticProblem, RosenbrockProblem, noisy_quadratic


def _config(**kw):
    base = dict(batches=BatchSchedule.constant(4), K=60, metrics="every")
    base.update(kw)
    return RunConfig(**base)


def test_noise_free_strongly_convex_rate():
    # Armijo plus a PL bound: f+ <= (1 - 2 alpha lam_min t) f with t >= min(s, 2 beta (1 - alpha)/L)
    ev = [0.5, 1.0, 2.0, 4.0]
    p = noisy_quadratic(4, ev, 0.0, seed=3, start=np.full(4, 2.0))
    trace = run_slam(p, None, _config(K=40))
    f = trace["f_est"]
    t_min = min(1.0, 2 * 0.9 * 0.9 / 4.0)
    q = 1 - 2 * 0.1 * 0.5 * t_min
    assert np.all(trace["t_k"] >= t_min * (1 - 1e-12))
    assert np.all(f[1:] <= q * f[:-1] * (1 + 1e-12))


def test_deterministic_descent_certificate():
    p = RosenbrockProblem(2, noise=0.0)
    trace = run_slam(p, None, _config(K=200))
    f = trace["f_est"]
    assert np.all(np.diff(f) <= 0)
    np.testing.assert_array_equal(trace["f_batch"], f)


def test_trace_invariants():
    p = noisy_quadratic(5, np.linspace(1, 6, 5), 1.0, seed=0, start=np.ones(5))
    cfg = _config(batches=BatchSchedule.linear(), K=30, cycles=CycleSchedule.constant(7))
    trace = run_slam(p, None, cfg)
    assert tuple(trace.columns) == TRACE_COLUMNS
    np.testing.assert_array_equal(trace["k"], np.arange(30))
    np.testing.assert_array_equal(trace["N_k"], np.arange(1, 31))
    np.testing.assert_array_equal(trace["samples_cum"], np.cumsum(np.arange(1, 31)))
    assert trace["step_changed"].sum() == trace.change_count
    np.testing.assert_allclose(trace["t_k"], trace["t_init"] * 0.9 ** trace["backtracks"], rtol=1e-12)
    assert np.all(trace["t_init"][::7] == 1.0)


def test_change_count_from_start():
    # a step accepted at s on the first iteration is not a change
    p = noisy_quadratic(2, [0.1, 0.2], 0.0, seed=0, start=np.ones(2))
    trace = run_slam(p, None, _config(K=10))
    assert trace.change_count == 0 and np.all(trace["t_k"] == 1.0)


def test_sls0_equals_single_cycle_slam():
    p = noisy_quadratic(6, np.linspace(-1, 5, 6), 1.0, seed=2, regularizer=BoxIndicator(-1, 1),
                        start=np.full(6, 0.5))
    K = 80
    a = run_sls0(p, None, _config(K=K, solver="sls0"))
    b = run_slam(p, None, _config(K=K, cycles=CycleSchedule.single(K)))
    for c in TRACE_COLUMNS:
        np.testing.assert_array_equal(a[c], b[c])
    np.testing.assert_array_equal(a.x_final, b.x_final)


def test_same_seed_same_trace_and_separate_metrics():
    p = noisy_quadratic(3, [1, 2, 3], 1.0, seed=0, start=np.ones(3))
    a = run_slam(p, None, _config(seed=4))
    b = run_slam(p, None, _config(seed=4, metrics="none"))
    np.testing.assert_array_equal(a["t_k"], b["t_k"])
    np.testing.assert_array_equal(a.x_final, b.x_final)
    assert np.isnan(b.final_f_est)


def test_slam_con_reports_average():
    p = noisy_quadratic(3, [1, 2, 3], 0.5, seed=0, start=np.ones(3))
    cfg = _config(solver="slam_con", linesearch=LinesearchConfig(alpha=0.5, convex=True), keep_iterates=True)
    trace = run(p, None, cfg)
    np.testing.assert_allclose(trace.x_bar, trace.iterates[1:].mean(axis=0), rtol=1e-12)
    assert trace.f_bar_est is not None


def test_sgd_diminishing_schedule():
    p = noisy_quadratic(3, [1, 2, 3], 1.0, seed=0, start=np.ones(3))
    trace = run_sgd(p, None, _config(solver="sgd_dimin", step=0.3, K=10))
    t = trace["t_k"]
    assert t[3] / t[0] == pytest.approx(0.5)
    np.testing.assert_allclose(t, 0.3 / np.sqrt(np.arange(1, 11)))


def test_sgd_respects_box():
    p = noisy_quadratic(4, [1, 2, 3, 4], 5.0, seed=0, regularizer=BoxIndicator(-0.2, 0.2),
                        center=np.full(4, 3.0), start=np.zeros(4))
    trace = run_sgd(p, None, _config(solver="sgd_const", step=0.5, keep_iterates=True))
    assert np.all(np.abs(trace.iterates) <= 0.2 + 1e-15)


def test_sgd_divergence_is_reported():
    p = noisy_quadratic(2, [1.0, 100.0], 0.0, seed=0, start=np.ones(2))
    trace = run_sgd(p, None, _config(solver="sgd_const", step=1.0, K=400))
    assert trace.status == "diverged" and trace.K < 400


def test_adam_zero_gradient_stays_put():
    p = QuadraticProblem(np.eye(3), center=np.full(3, 0.7), start=np.full(3, 0.7))
    trace = run_adam(p, None, _config(solver="adam", step=0.1, K=5, keep_iterates=True))
    np.testing.assert_array_equal(trace.iterates, 0.7)


def test_adam_first_step_has_length_s():
    p = QuadraticProblem(np.diag([1.0, 10.0, 0.1]), start=np.array([1.0, -2.0, 3.0]))
    trace = run_adam(p, None, _config(solver="adam", step=0.01, K=1, keep_iterates=True))
    move = trace.iterates[1] - trace.iterates[0]
    np.testing.assert_allclose(np.abs(move), 0.01, rtol=1e-6)
    np.testing.assert_array_equal(np.sign(move), -np.sign(trace.iterates[0]))


def test_adam_rejects_regularizer():
    p = noisy_quadratic(2, [1, 2], 0.0, regularizer=BoxIndicator(-1, 1))
    with pytest.raises(UnsupportedConfigurationError):
        run_adam(p, None, _config(solver="adam"))


def test_start_outside_domain():
    p = noisy_quadratic(2, [1, 2], 0.0, regularizer=BoxIndicator(-1, 1))
    with pytest.raises(ValueError):
        run_slam(p, None, _config(), x0=np.array([2.0, 0.0]))


def test_pick_random_index_is_uniform():
    p = noisy_quadratic(2, [1, 2], 0.0)
    trace = run_slam(p, None, _config(K=8, metrics="none"))
    g = rng.stream(0, rng.METRICS)
    counts = np.bincount([pick_random_index(trace, g) for _ in range(8000)], minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(solver="lbfgs")
    with pytest.raises(ValueError):
        RunConfig(K=0)
    with pytest.raises(ValueError):
        RunConfig(metrics="sometimes")
    assert RunConfig(solver="slam_con", linesearch=LinesearchConfig(alpha=0.5)).linesearch.convex


@pytest.mark.parametrize("s", [0.3, 1.0])
def test_half_squared_norm_closed_form(s):
    # f = 1/2 |x|^2 without noise: t = s is always accepted and x+ = (1 - s) x
    p = QuadraticProblem(np.eye(3), start=np.array([1.0, -2.0, 0.5]))
    cfg = _config(K=6, linesearch=LinesearchConfig(s=s), keep_iterates=True)
    trace = run_slam(p, None, cfg)
    assert np.all(trace["t_k"] == s)
    expected = p.default_start() * (1 - s) ** np.arange(7)[:, None]
    np.testing.assert_allclose(trace.iterates, expected, rtol=1e-15, atol=1e-300)


def _reset_armijo_loop(K, p=50):
    """Plain re-implementation: reset to 1 every ``p`` steps, Armijo from (6, 6)."""
    def f(z):
        return 100 * (z[1] - z[0] ** 2) ** 2 + (1 - z[0]) ** 2

    def g(z):
        return np.array([-400 * z[0] * (z[1] - z[0] ** 2) - 2 * (1 - z[0]), 200 * (z[1] - z[0] ** 2)])

    x, t_prev = np.array([6.0, 6.0]), 1.0
    for k in range(K):
        t = 1.0 if k % p == 0 else t_prev
        gx = g(x)
        while True:
            z = x - t * gx
            if f(z) - f(x) <= -(0.1 / t) * float((x - z) @ (x - z)):
                break
            t *= 0.9
        x, t_prev = z, t
    return f(x)


def _deterministic_rosenbrock(K):
    cfg = RunConfig(batches=BatchSchedule.constant(128), K=K, metrics="final")
    return run_slam(RosenbrockProblem(2, noise=0.0), None, cfg).final_f_est


def test_deterministic_rosenbrock_matches_plain_loop():
    f = _deterministic_rosenbrock(1500)
    assert f == _reset_armijo_loop(1500) == 1.6893601656112903e-05
    assert _deterministic_rosenbrock(6000) < 1e-6


@pytest.mark.xfail(strict=True, reason="Armijo gradient steps need between 3000 and 6000 iterations to reach 1e-6 from (6, 6)")
def test_deterministic_rosenbrock_1e6_at_1500():
    assert _deterministic_rosenbrock(1500) < 1e-6


def test_single_cycle_steps_are_non_increasing():
    p = noisy_quadratic(5, np.linspace(1, 20, 5), 2.0, seed=1, start=np.ones(5))
    trace = run_slam(p, None, _config(K=200, cycles=CycleSchedule.single(200), metrics="none"))
    assert np.all(np.diff(trace["t_k"]) <= 0)
