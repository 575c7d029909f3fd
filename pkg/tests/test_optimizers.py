import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from proxsvrg.constants import DIVERGENCE_BOUND
from proxsvrg.datasets import synthetic_samples
from proxsvrg.optimizers import (
    Algorithm,
    OptimizerConfig,
    OutputMode,
    configure_theorem1,
    configure_theorem3,
    default_step_size,
    default_stride,
    prox_svrg_plus,
    run,
    run_baseline,
    select_output,
)
from proxsvrg.problems import QuadraticProblem, build_nnpca, random_pl_quadratic, random_quadratic
from proxsvrg.prox import IndicatorBallNonneg, L1, Zero
from proxsvrg.sampling import Replacement


@pytest.fixture(scope="module")
def nnpca():
    return build_nnpca(synthetic_samples(200, 10, seed=0).rows)


def _iterates(algo, prob, cfg, x0):
    xs = []
    run(algo, prob, cfg, x0, callback=lambda s, t, x: xs.append(x.copy()))
    return np.array(xs)


# -- reductions ------------------------------------------------------------------


@pytest.mark.parametrize("h", [Zero(), L1(0.3), IndicatorBallNonneg()], ids=["zero", "l1", "ball"])
def test_full_batch_proxsvrg_plus_is_proxgd(h):
    rng = np.random.default_rng(1)
    prob = random_quadratic(rng, 6, 4, h, indefinite=True)
    eta = 0.5 / prob.L
    x0 = np.abs(rng.standard_normal(4)) * 0.2
    n = prob.n
    a = _iterates("proxsvrg+", prob, OptimizerConfig(B=n, b=n, m=1, eta=eta, epochs=50,
                                                      replacement=Replacement.WITHOUT), x0)
    b = _iterates("proxgd", prob, OptimizerConfig(B=n, b=n, m=1, eta=eta, epochs=50), x0)
    assert a.shape == b.shape == (50, 4)
    np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)


def test_full_batch_proxsgd_is_proxgd():
    rng = np.random.default_rng(2)
    prob = random_quadratic(rng, 5, 3, L1(0.1))
    x0 = rng.standard_normal(3)
    cfg = OptimizerConfig(B=5, b=5, m=3, eta=0.3 / prob.L, epochs=10, replacement=Replacement.WITHOUT)
    a = _iterates("proxsgd", prob, cfg, x0)
    b = _iterates("proxgd", prob, OptimizerConfig(B=5, b=5, m=1, eta=cfg.eta, epochs=30), x0)
    np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)


def test_proxgd_exact_quadratic_step():
    prob = QuadraticProblem(np.eye(1)[None], np.zeros(1))
    res = run_baseline("proxgd", prob, OptimizerConfig(B=1, b=1, m=1, eta=1.0, epochs=1), [1.0])
    assert res.last_point[0] == 0.0


def test_anchor_first_inner_step_uses_snapshot_gradient(nnpca):
    # at x = snapshot the minibatch differences vanish, so step 1 of every epoch is a ProxGD step
    cfg = OptimizerConfig(B=nnpca.n, b=7, m=5, eta=1 / 6, epochs=6, seed=3)
    seen = {}
    run("proxsvrg+", nnpca, cfg, callback=lambda s, t, x: seen.__setitem__((s, t), x.copy()))
    prev = nnpca.initial_point(3)
    for s in range(1, 7):
        expected = nnpca.h.prox(prev - cfg.eta * nnpca.full_gradient(prev), cfg.eta)
        assert np.array_equal(seen[(s, 1)], expected)
        prev = seen[(s, 5)]


# -- accounting -----------------------------------------------------------------


@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 6), st.integers(0, 5), st.integers(0, 99))
def test_budget_exactness(B, b, m, S, seed):
    prob = build_nnpca(synthetic_samples(40, 3, seed=1).rows)
    res = prox_svrg_plus(prob, OptimizerConfig(B=B, b=b, m=m, eta=1 / 6, epochs=S, seed=seed))
    assert res.counter.sfo == S * B + S * m * b
    assert res.counter.po == S * m
    assert res.counter.raw_grad_evals == S * B + 2 * S * m * b


def test_proxgd_and_proxsgd_budgets(nnpca):
    n = nnpca.n
    gd = run_baseline("proxgd", nnpca, OptimizerConfig(B=n, b=n, m=1, eta=1.0, epochs=7))
    assert (gd.counter.sfo, gd.counter.po) == (7 * n, 7)
    sgd = run_baseline("proxsgd", nnpca, OptimizerConfig(B=n, b=8, m=4, eta=0.5, epochs=3))
    assert (sgd.counter.sfo, sgd.counter.po) == (3 * 4 * 8, 12)


def test_proxsvrg_forces_full_snapshot(nnpca):
    res = run_baseline("proxsvrg", nnpca, OptimizerConfig(B=10, b=4, m=2, eta=0.1, epochs=2))
    assert res.counter.sfo == 2 * nnpca.n + 2 * 2 * 4


def test_diagnostic_tally_is_separate(nnpca):
    res = prox_svrg_plus(nnpca, OptimizerConfig(B=50, b=4, m=4, eta=1 / 6, epochs=2), stride=2)
    rows = [(r.epoch, r.iter) for r in res.trace]
    assert rows == [(0, 0), (1, 2), (1, 4), (2, 2), (2, 4)]
    assert res.trace[-1].diag_sfo == len(rows) * nnpca.n
    assert res.counter.sfo == 2 * 50 + 2 * 4 * 4
    sfo = [r.sfo for r in res.trace]
    assert sfo == sorted(sfo)


def test_empty_run(nnpca):
    x0 = nnpca.initial_point(0)
    res = prox_svrg_plus(nnpca, OptimizerConfig(B=10, b=2, m=2, eta=0.1, epochs=0), x0)
    assert np.array_equal(res.output_point, x0)
    assert (res.counter.sfo, res.counter.po) == (0, 0)
    assert len(res.trace) == 1


# -- behaviour -------------------------------------------------------------------


def test_descent_in_aggregate():
    prob = build_nnpca(synthetic_samples(500, 20, seed=4).rows)
    b = 16
    curves = []
    for seed in range(10):
        x0 = prob.initial_point(seed)
        cfg = configure_theorem1(prob.n, prob.L, 1.0, 1e-3, b, seed=seed)
        cfg = OptimizerConfig(B=cfg.B, b=cfg.b, m=cfg.m, eta=cfg.eta, epochs=25, output_mode="last", seed=seed)
        res = prox_svrg_plus(prob, cfg, x0, stride=cfg.m)
        curves.append([r.objective for r in res.trace])
    mean = np.mean(curves, axis=0)
    slack = 1e-3 * abs(np.mean([c[0] for c in curves]))
    assert np.all(np.diff(mean) <= slack)
    assert mean[-1] < mean[0]


def test_divergence_is_aborted():
    prob = QuadraticProblem(-np.eye(2)[None], np.zeros(2))
    res = run_baseline("proxgd", prob, OptimizerConfig(B=1, b=1, m=1, eta=10.0, epochs=100), [1.0, 1.0])
    assert res.status == "diverged" and res.diverged
    assert res.trace[-1].objective == np.inf
    assert res.epochs_run < 100


@pytest.mark.parametrize("algo", list(Algorithm))
def test_default_configurations_stay_bounded(algo, nnpca):
    n, b = nnpca.n, 16
    eta = default_step_size(algo, nnpca.L, n, b)
    cfg = OptimizerConfig(B=n // 5, b=b, m=4, eta=eta, epochs=5, seed=1)
    peak = []
    res = run(algo, nnpca, cfg, callback=lambda s, t, x: peak.append(np.abs(x).max()))
    assert res.status == "completed"
    assert max(peak) <= DIVERGENCE_BOUND


def test_eps_target_stops_early(nnpca):
    cfg = OptimizerConfig(B=nnpca.n, b=16, m=4, eta=1 / 6, epochs=500, eps_target=1e-5)
    res = prox_svrg_plus(nnpca, cfg)
    assert res.status == "converged"
    assert res.epochs_run < 500
    # one full gradient per epoch for the stopping test plus one per trace row
    assert res.counter.diag_sfo == nnpca.n * (res.epochs_run + len(res.trace))


def test_pl_quadratic_geometric_decay():
    prob = random_pl_quadratic(64, 10, mu=1.0, L=4.0, lam=0.1, seed=0)
    x0 = prob.initial_point(0)
    eta = 1 / (6 * prob.L)

    def gaps(cfg):
        res = prox_svrg_plus(prob, cfg, x0, stride=cfg.m)
        return np.array([r.objective for r in res.trace]) - prob.phi_star

    g = gaps(OptimizerConfig(B=64, b=16, m=4, eta=eta, epochs=60, output_mode="last", seed=0))
    ratios = g[1:] / g[:-1]
    assert np.count_nonzero(ratios < 1) >= 55
    # reference: the same schedule with exact gradients (b = n without replacement)
    ref = gaps(OptimizerConfig(B=64, b=64, m=4, eta=eta, epochs=10, output_mode="last",
                               replacement=Replacement.WITHOUT))
    ref_rate = np.median(ref[1:] / ref[:-1])
    assert np.median(ratios) <= math.sqrt(ref_rate)


def test_metric_eta_override(nnpca):
    cfg = OptimizerConfig(B=nnpca.n, b=8, m=2, eta=1 / 6, epochs=1)
    a = prox_svrg_plus(nnpca, cfg)
    b = prox_svrg_plus(nnpca, cfg, metric_eta=1.0)
    assert a.trace[-1].objective == b.trace[-1].objective
    assert a.trace[-1].grad_map_sq != b.trace[-1].grad_map_sq


def test_run_is_deterministic(nnpca):
    cfg = OptimizerConfig(B=40, b=8, m=3, eta=1 / 6, epochs=4, seed=9)
    r1, r2 = prox_svrg_plus(nnpca, cfg), prox_svrg_plus(nnpca, cfg)
    assert np.array_equal(r1.output_point, r2.output_point)
    assert [(t.objective, t.grad_map_sq) for t in r1.trace] == [(t.objective, t.grad_map_sq) for t in r2.trace]


# -- output selection ----------------------------------------------------------------


def test_select_output_single_and_empty():
    x = [np.array([1.0])]
    rng = np.random.default_rng(0)
    assert select_output(x, "uniform", rng)[0] == 1.0
    assert select_output(x, "last", rng)[0] == 1.0
    with pytest.raises(ValueError):
        select_output([], "uniform", rng)


def test_select_output_uniform_frequencies():
    hist = [np.array([float(k)]) for k in range(4)]
    rng = np.random.default_rng(17)
    picks = np.array([select_output(hist, OutputMode.UNIFORM, rng)[0] for _ in range(10_000)], dtype=int)
    counts = np.bincount(picks, minlength=4)
    assert np.all(np.abs(counts - 2500) <= 3 * np.sqrt(10_000 * 0.25 * 0.75))
    a = [select_output(hist, "uniform", np.random.default_rng(3))[0] for _ in range(5)]
    assert len(set(a)) == 1


def test_reservoir_output_is_uniform_over_pre_step_iterates():
    prob = QuadraticProblem(np.eye(1)[None], np.zeros(1))
    # iterates 1, 1/2, 1/4, 1/8 precede the four steps of eta = 1/2
    N = 4000
    picks = []
    for seed in range(N):
        res = run_baseline("proxgd", prob, OptimizerConfig(B=1, b=1, m=1, eta=0.5, epochs=4, seed=seed), [1.0])
        picks.append(int(round(-math.log2(res.output_point[0]))))
    counts = np.bincount(picks, minlength=4)
    assert counts.size == 4
    assert np.all(np.abs(counts - N / 4) <= 3 * np.sqrt(N * 0.25 * 0.75))


def test_default_stride():
    assert default_stride(1) == 1 and default_stride(32) == 1
    assert default_stride(33) == 2 and default_stride(100) == 4


# -- configuration rules ---------------------------------------------------------------


def test_default_step_sizes():
    assert default_step_size("proxsvrg", 1.0, 4096, 16) == pytest.approx(5.208333e-3, rel=1e-6)
    assert default_step_size("proxsvrg", 1.0, 4096, 16) == 64 / 12288
    assert default_step_size("proxgd", 2.0, 10, 1) == 0.5
    assert default_step_size("proxsgd", 2.0, 10, 1) == 0.25
    assert default_step_size("proxsvrg+", 2.0, 10, 1) == 1 / 12


def test_configure_theorem1():
    cfg = configure_theorem1(1000, 1.0, 2.0, 0.01, 64)
    assert cfg.eta == 1 / 6 and cfg.m == 8 and cfg.B == 1000
    assert cfg.epochs * cfg.m >= math.ceil(36 * 2.0 / 0.01)
    assert (cfg.epochs - 1) * cfg.m < math.ceil(36 * 2.0 / 0.01)
    online = configure_theorem1(10**6, 1.0, 1.0, 0.01, 16, sigma=1.0, case="online")
    assert online.B == 600
    with pytest.raises(ValueError):
        configure_theorem1(100, 1.0, 1.0, 0.01, 4, case="online")
    with pytest.raises(ValueError):
        configure_theorem1(100, 1.0, 1.0, 0.01, 200)


def test_configure_theorem3():
    assert configure_theorem3(8, 64, 1.0, 1000, 1.0, 0.1).eta == 1 / 6
    assert configure_theorem3(10, 4, 1.0, 1000, 1.0, 0.1).eta == pytest.approx(1 / 30, rel=1e-15)
    assert configure_theorem3(1, 1, 1.0, 1000, 1.0, 0.1).eta == pytest.approx(1 / 6, rel=1e-15)
    cfg = configure_theorem3(10, 4, 1.0, 1000, 1.0, 0.1)
    assert cfg.epochs * cfg.m >= 6 * 1.0 / (0.1 * cfg.eta) - 1e-9
    with pytest.raises(ValueError):
        configure_theorem3(0, 4, 1.0, 1000, 1.0, 0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(B=0, b=1, m=1, eta=0.1, epochs=1)
    with pytest.raises(ValueError):
        OptimizerConfig(B=1, b=1, m=1, eta=0.0, epochs=1)
    with pytest.raises(ValueError):
        OptimizerConfig(B=1, b=1, m=1, eta=0.1, epochs=-1)
    with pytest.raises(ValueError):
        run_baseline("proxsvrg+", None, OptimizerConfig(B=1, b=1, m=1, eta=0.1, epochs=1))
