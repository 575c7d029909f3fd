"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into the pytest terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, central_difference
from proxsvrg import cli, suites
from proxsvrg.complexity import BoundQuery, bounds_theorem1, bounds_theorem3, optimal_minibatch
from proxsvrg.constants import FD_REL_TOL, ORACLE_TOL, SLACK_ABS
from proxsvrg.datasets import synthetic_samples
from proxsvrg.diagnostics import InequalityReport
from proxsvrg.optimizers import OptimizerConfig, default_step_size, run
from proxsvrg.problems import build_nnpca, random_pl_quadratic, random_quadratic
from proxsvrg.prox import IndicatorBallNonneg, compute_D_h, grad_map_sq, project_ball_nonneg
from proxsvrg.sampling import Replacement


def verdict(number, title, ok, elapsed, limit, detail=""):
    ok = bool(ok) and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail} ({elapsed:.2f}s < {limit:g}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- 1 ---------------------------------------------------------------------------------


def test_criterion_01_formula_exactness():
    t0 = time.perf_counter()
    q = BoundQuery(n=10**4, b=100, eps=0.01, L=1.0, delta_phi=1.0)
    r1 = bounds_theorem1(q, "finite")
    r3 = bounds_theorem3(q, math.sqrt(q.b), "finite")
    ok = r1.sfo == 3.96e6 and r1.po == 3600.0 and (r3.sfo, r3.po) == (r1.sfo, r1.po)
    ok &= np.float64(r3.sfo).tobytes() == np.float64(r1.sfo).tobytes()
    verdict(1, "formula exactness", ok, time.perf_counter() - t0, 1.0,
            f"SFO={r1.sfo!r} PO={r1.po!r}, m=sqrt(b) SFO={r3.sfo!r}")


# -- 2 ---------------------------------------------------------------------------------


def test_criterion_02_optimal_minibatch():
    t0 = time.perf_counter()
    offs = []
    for n in (10**3, 10**4, 10**5):
        choice = optimal_minibatch(BoundQuery(n=n, b=1, eps=0.01))
        offs.append(choice.b_star - (n / 2) ** (2 / 3))
    pos = {bounds_theorem1(BoundQuery(n=10**4, b=b, eps=0.01)).po for b in range(1, 10**4 + 1, 37)}
    ok = all(abs(o) <= 1 for o in offs) and len(pos) == 1
    verdict(2, "optimal minibatch", ok, time.perf_counter() - t0, 5.0,
            f"b* - (n/2)^(2/3) = {[round(o, 3) for o in offs]}, distinct PO values = {len(pos)}")


# -- 3 ---------------------------------------------------------------------------------


def test_criterion_03_reduction_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for k in range(10):
        h = suites._random_h(rng, k)
        prob = random_quadratic(rng, int(rng.integers(2, 9)), int(rng.integers(1, 6)), h)
        x0 = rng.standard_normal(prob.d)
        if isinstance(h, IndicatorBallNonneg):
            x0 = project_ball_nonneg(x0)
        eta = float(rng.uniform(0.1, 1.0)) / prob.L
        n = prob.n
        paths = []
        for algo, cfg in (
            ("proxsvrg+", OptimizerConfig(B=n, b=n, m=1, eta=eta, epochs=50, replacement=Replacement.WITHOUT)),
            ("proxgd", OptimizerConfig(B=n, b=n, m=1, eta=eta, epochs=50)),
        ):
            xs = []
            run(algo, prob, cfg, x0, callback=lambda s, t, x: xs.append(x.copy()))
            paths.append(np.array(xs))
        assert paths[0].shape == (50, prob.d)
        worst = max(worst, float(np.max(np.abs(paths[0] - paths[1]))))
    verdict(3, "reduction identity", worst <= 1e-12, time.perf_counter() - t0, 10.0,
            f"max iterate deviation {worst:.3g} over 10 problems x 50 steps")


# -- 4 ---------------------------------------------------------------------------------


def test_criterion_04_lemma_suite():
    t0 = time.perf_counter()
    reps = {r.name: r for r in suites.lemma_suite(seed=4, trials=1000)}
    l1, l2 = reps["lemma1"], reps["lemma2"]
    ok = l1.trials == l2.trials == 1000 and l1.violations == l2.violations == 0
    ok &= l1.tolerance == l2.tolerance == SLACK_ABS == 1e-9
    verdict(4, "lemma suite", ok, time.perf_counter() - t0, 30.0,
            f"lemma1 {l1.violations}/{l1.trials} (worst {l1.worst_residual:.3g}), "
            f"lemma2 {l2.violations}/{l2.trials} (worst {l2.worst_residual:.3g})")


# -- 5 ---------------------------------------------------------------------------------


def test_criterion_05_variance_bound():
    t0 = time.perf_counter()
    bound, agree = suites.variance_suite(seed=0, mc_trials=100_000, sizes=(1, 2, 4, 6))
    ok = bound.trials == agree.trials == 16 and bound.ok and agree.ok
    verdict(5, "variance bound", ok, time.perf_counter() - t0, 60.0,
            f"exact<=bound violations {bound.violations}/16, MC outside 3 SE {agree.violations}/16")


# -- 6 ---------------------------------------------------------------------------------


def test_criterion_06_prox_oracle_equivalence():
    t0 = time.perf_counter()
    reps = {r.name: r for r in suites.prox_suite(seed=6, trials=100)}
    oracle = reps["prox_matches_oracle"]
    ok = oracle.tolerance == ORACLE_TOL and oracle.trials == 400 and all(r.ok for r in reps.values())
    verdict(6, "prox oracle equivalence", ok, time.perf_counter() - t0, 30.0,
            f"oracle mismatches {oracle.violations}/{oracle.trials} (largest error {-oracle.worst_residual:.2g}), "
            f"lattice certificate {reps['projection_beats_lattice'].violations} violations")


# -- 7 ---------------------------------------------------------------------------------


def test_criterion_07_gradient_checks():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    probs = {"nnpca": build_nnpca(synthetic_samples(50, 6, seed=7).rows),
             "pl_quadratic": random_pl_quadratic(32, 6, lam=0.2, seed=7)}
    worst = {}
    for name, prob in probs.items():
        w = 0.0
        for _ in range(100):
            x = rng.standard_normal(prob.d)
            i = int(rng.integers(prob.n))
            g = prob.component_gradient(i, x)
            fd = central_difference(lambda y: prob.component_value(i, y), x)
            w = max(w, float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1.0)))
        worst[name] = w
    ok = all(w <= FD_REL_TOL for w in worst.values())
    verdict(7, "gradient checks", ok, time.perf_counter() - t0, 10.0,
            ", ".join(f"{k} worst rel err {v:.2g}" for k, v in worst.items()))


# -- 8 ---------------------------------------------------------------------------------

BENCH_N, BENCH_D, BENCH_B = 5000, 100, 256
BENCH_SFO_BUDGET = 4_000_000
BENCH_TARGET = 0.1  # relative objective gap (Phi - Phi*) / (Phi(x0) - Phi*)


def _first_crossing(trace, threshold):
    for row in trace:
        if row.objective <= threshold:
            return row.sfo, row.po
    return math.inf, math.inf


def _benchmark_seed(seed):
    prob = build_nnpca(synthetic_samples(BENCH_N, BENCH_D, seed).rows)
    x0 = prob.initial_point(seed)
    n, b, L = prob.n, BENCH_B, prob.L
    m = math.ceil(math.sqrt(b))

    def epochs(cost):
        return math.ceil(BENCH_SFO_BUDGET / cost)

    specs = {
        "proxsvrg+": OptimizerConfig(B=n // 5, b=b, m=m, eta=default_step_size("proxsvrg+", L, n, b),
                                     epochs=epochs(n // 5 + m * b), output_mode="last", seed=seed),
        "proxgd": OptimizerConfig(B=n, b=n, m=1, eta=default_step_size("proxgd", L, n, b),
                                  epochs=epochs(n), output_mode="last", seed=seed),
        "proxsgd": OptimizerConfig(B=n, b=b, m=m, eta=default_step_size("proxsgd", L, n, b),
                                   epochs=epochs(m * b), output_mode="last", seed=seed),
        "proxsvrg": OptimizerConfig(B=n, b=b, m=m, eta=default_step_size("proxsvrg", L, n, b),
                                    epochs=epochs(n + m * b), output_mode="last", seed=seed),
    }
    traces = {a: run(a, prob, cfg, x0, stride=4).trace for a, cfg in specs.items()}
    # reference optimum: best objective seen by any method within the common budget
    phi_star = min(r.objective for tr in traces.values() for r in tr)
    phi0 = prob.objective_value(x0)
    thr = phi_star + BENCH_TARGET * (phi0 - phi_star)
    return {a: _first_crossing(tr, thr) for a, tr in traces.items()}


@pytest.mark.slow
def test_criterion_08_benchmark_ordering():
    t0 = time.perf_counter()
    wins = {"sfo<proxgd": 0, "sfo<proxsgd": 0, "po<=proxsvrg": 0}
    seeds_ok = 0
    detail = []
    for seed in range(5):
        hit = _benchmark_seed(seed)
        plus_sfo, plus_po = hit["proxsvrg+"]
        checks = {"sfo<proxgd": plus_sfo < hit["proxgd"][0],
                  "sfo<proxsgd": plus_sfo < hit["proxsgd"][0],
                  "po<=proxsvrg": plus_po <= hit["proxsvrg"][1]}
        for k, v in checks.items():
            wins[k] += v
        seeds_ok += all(checks.values())
        detail.append(f"s{seed}: " + " ".join(f"{a}={hit[a][0]:.0f}/{hit[a][1]:.0f}" for a in hit))
    print("\n".join(detail))
    verdict(8, "benchmark ordering", seeds_ok >= 4, time.perf_counter() - t0, 300.0,
            f"seeds with full ordering {seeds_ok}/5; per-comparison wins {wins}")


# -- 9 ---------------------------------------------------------------------------------


def _log_gap_slope(gaps, floor):
    k = np.flatnonzero(gaps > floor)
    return float(np.polyfit(k, np.log(gaps[k]), 1)[0])


def test_criterion_09_pl_linear_convergence():
    t0 = time.perf_counter()
    rows = []
    ok = True
    for seed in range(5):
        prob = random_pl_quadratic(64, 10, mu=1.0, L=4.0, lam=0.1, seed=seed)
        x0 = prob.initial_point(seed)
        # gaps below this are dominated by rounding in Phi and Phi*
        floor = 1e-11 * max(1.0, abs(prob.phi_star))
        plus = run("proxsvrg+", prob, OptimizerConfig(B=64, b=16, m=4, eta=1 / (6 * prob.L), epochs=60,
                                                       output_mode="last", seed=seed), x0, stride=4)
        gd = run("proxgd", prob, OptimizerConfig(B=64, b=64, m=1, eta=1 / prob.L, epochs=60,
                                                 output_mode="last", seed=seed), x0)
        g_plus = np.array([r.objective for r in plus.trace]) - prob.phi_star
        g_gd = np.array([r.objective for r in gd.trace]) - prob.phi_star
        frac = float(np.mean(g_plus[1:] < g_plus[:-1]))
        s_plus, s_gd = _log_gap_slope(g_plus, floor), _log_gap_slope(g_gd, floor)
        ok &= frac >= 0.9 and s_plus < 0 and abs(s_plus) >= 0.5 * abs(s_gd)
        rows.append(f"{frac:.2f}/{s_plus:.3f}/{s_gd:.3f}")
    verdict(9, "PL linear convergence", ok, time.perf_counter() - t0, 60.0,
            "per instance ratio<1 fraction/slope/ProxGD slope: " + ", ".join(rows))


# -- 10 --------------------------------------------------------------------------------


def test_criterion_10_dh_cross_relation():
    t0 = time.perf_counter()
    rep = InequalityReport("dh_cross")
    kinds = set()
    for prob, x, _, _, eta in suites.random_composite_instances(10, 1000):
        if isinstance(prob.h, IndicatorBallNonneg):
            x = project_ball_nonneg(x)
        kinds.add(type(prob.h).__name__)
        g = prob.full_gradient(x)
        rep.add(grad_map_sq(g, x, eta, prob.h), compute_D_h(x, g, 1.0 / eta, prob.h))
    ok = rep.trials == 1000 and rep.violations == 0 and len(kinds) == 3
    verdict(10, "D_h cross relation", ok, time.perf_counter() - t0, 30.0,
            f"violations {rep.violations}/{rep.trials} (worst residual {rep.worst_residual:.3g})")


# -- 11 --------------------------------------------------------------------------------


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    specs = [
        ["--algo", "proxsvrg+", "--synthetic", "n=500,d=20", "--b", "16", "--B", "n/5", "--epochs", "5"],
        ["--algo", "proxsvrg", "--synthetic", "n=500,d=20", "--b", "16", "--epochs", "3", "--output-mode", "uniform"],
        ["--algo", "proxsgd", "--synthetic", "n=500,d=20", "--b", "8", "--epochs", "4", "--replacement", "without"],
        ["--algo", "proxgd", "--problem", "pl_quadratic", "--synthetic", "n=64,d=10", "--epochs", "20"],
    ]
    same = 0
    for k, spec in enumerate(specs):
        outs = []
        for rep in range(2):
            cli._PROBLEM_CACHE.clear()
            path = tmp_path / f"{k}_{rep}.csv"
            assert cli.main(["run", *spec, "--seed", "3", "--out", str(path)]) == 0
            lines = path.read_bytes().split(b"\n")
            outs.append([line.rsplit(b",", 1)[0] for line in lines])
        same += outs[0] == outs[1]
    verdict(11, "determinism", same == len(specs), time.perf_counter() - t0, 30.0,
            f"{same}/{len(specs)} specs byte-identical except elapsed_ms")
