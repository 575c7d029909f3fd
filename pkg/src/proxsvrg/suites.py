"""Randomized property suites behind ``proxsvrg-bench validate``.

Every suite returns a list of :class:`InequalityReport`; a suite passes when
no report with ``asserted=True`` has violations.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import constants, oracles
from .datasets import synthetic_samples
from .diagnostics import (
    InequalityReport,
    estimator_variance_empirical,
    estimator_variance_exact,
    lemma1_sides,
    lemma2_distance_sides,
    lemma2_sides,
    pl_certificate,
    young_sides,
)
from .problems import build_nnpca, random_pl_quadratic, random_quadratic
from .prox import IndicatorBallNonneg, L1, Zero, compute_D_h, grad_map_sq, project_ball_nonneg, prox_l1, prox_linearized
from .sampling import MinibatchSampler, philox

SUITES = ("prox", "lemmas", "variance", "pl", "all")


def _random_h(rng, k: int):
    kind = k % 3
    if kind == 0:
        return Zero()
    if kind == 1:
        return L1(float(rng.uniform(0.0, 2.0)))
    return IndicatorBallNonneg()


def random_composite_instances(seed: int, trials: int, *, n: int = 3, max_d: int = 5):
    """Yield (problem, x, v, z, eta) across h in {Zero, L1, indicator} and indefinite quadratics.

    For the indicator, z is projected into C so Phi(z) is finite.
    """
    rng = philox(seed, 0x1E)
    for k in range(trials):
        d = int(rng.integers(1, max_d + 1))
        h = _random_h(rng, k)
        prob = random_quadratic(rng, n, d, h, indefinite=True)
        x = rng.standard_normal(d)
        v = rng.standard_normal(d)
        z = rng.standard_normal(d)
        if isinstance(h, IndicatorBallNonneg):
            z = project_ball_nonneg(z)
        eta = float(rng.uniform(0.01, 2.0)) / prob.L
        yield prob, x, v, z, eta


def lemma_suite(seed: int, trials: int) -> list[InequalityReport]:
    reps = {name: InequalityReport(name) for name in ("lemma1", "lemma2", "lemma2_distance", "young")}
    for prob, x, v, z, eta in random_composite_instances(seed, trials):
        reps["lemma1"].add(*lemma1_sides(prob, x, v, z, eta))
        reps["lemma2"].add(*lemma2_sides(prob, x, v, eta))
        reps["lemma2_distance"].add(*lemma2_distance_sides(prob, x, v, eta))
        x_t = prob.h.prox(x - eta * v, eta)
        x_bar = prob.h.prox(x - eta * prob.full_gradient(x), eta)
        reps["young"].add(*young_sides(x_t, x, x_bar, 3.0))
    return list(reps.values())


def prox_suite(seed: int, trials: int) -> list[InequalityReport]:
    """Nonexpansiveness, membership, idempotence and agreement with the brute-force oracles."""
    rng = philox(seed, 0x9A)
    nonexp = InequalityReport("prox_nonexpansive", tolerance=constants.NONEXPANSIVE_TOL)
    member = InequalityReport("projection_membership", tolerance=constants.IDENTITY_TOL)
    idem = InequalityReport("projection_idempotent", tolerance=constants.IDENTITY_TOL)
    oracle = InequalityReport("prox_matches_oracle", tolerance=constants.ORACLE_TOL)
    lattice = InequalityReport("projection_beats_lattice", tolerance=constants.IDENTITY_TOL)
    for k in range(trials):
        d = int(rng.integers(1, 4))
        eta = float(rng.uniform(0.1, 2.0))
        lam = float(rng.uniform(0.0, 2.0))
        x, y, g = 2 * rng.standard_normal((3, d))
        for h in (Zero(), L1(lam), IndicatorBallNonneg()):
            nonexp.add(float(np.linalg.norm(h.prox(x, eta) - h.prox(y, eta))), float(np.linalg.norm(x - y)))
        p = project_ball_nonneg(x)
        member.add(-float(np.min(p)), 0.0)
        member.add(float(np.linalg.norm(p)), 1.0)
        idem.add(float(np.max(np.abs(project_ball_nonneg(p) - p))), 0.0)
        # brute-force agreement: max abs coordinate error must stay within ORACLE_TOL
        errs = [
            prox_l1(x, eta, lam) - oracles.grid_prox_l1(x, eta, lam),
            p - oracles.enumerate_prox_ball_nonneg(x),
            prox_linearized(x, g, eta, L1(lam)) - oracles.grid_prox_l1(x, eta, lam, g),
            prox_linearized(x, g, eta, IndicatorBallNonneg()) - oracles.enumerate_prox_ball_nonneg(x, eta, g),
        ]
        for e in errs:
            oracle.add(float(np.max(np.abs(e))), 0.0)
        if k < 20:
            q = prox_linearized(x, g, eta, IndicatorBallNonneg())
            _, best = oracles.grid_min_ball_nonneg(x, eta, g)
            lattice.add(oracles.ball_objective(q, x, eta, g), best)
    return [nonexp, member, idem, oracle, lattice]


def toy_nnpca(n: int = 6, d: int = 4, seed: int = 0):
    prob = build_nnpca(synthetic_samples(n, d, seed).rows)
    rng = philox(seed, 0x70)
    x = project_ball_nonneg(np.abs(rng.standard_normal(d)))
    xs = project_ball_nonneg(np.abs(rng.standard_normal(d)))
    return prob, x, xs


def variance_suite(seed: int, mc_trials: int, sizes=(1, 2, 4, 6)) -> list[InequalityReport]:
    """Exact estimator variance vs its bound, and vs Monte Carlo within 3 standard errors."""
    prob, x, xs = toy_nnpca(seed=seed)
    bound = InequalityReport("variance_exact_le_bound")
    agree = InequalityReport("variance_mc_within_3se")
    for j, (b, B) in enumerate(itertools.product(sizes, sizes)):
        ex = estimator_variance_exact(prob, x, xs, b, B)
        bound.add(ex.exact, ex.bound)
        emp = estimator_variance_empirical(prob, x, xs, b, B, mc_trials, MinibatchSampler(seed, stream=100 + j))
        agree.add(abs(emp.mean - ex.exact), constants.MC_SE_MULTIPLIER * emp.stderr)
    return [bound, agree]


def pl_suite(seed: int, trials: int) -> list[InequalityReport]:
    """PL forms on strongly convex quadratics (lambda = 0 asserted, lambda > 0 reported)
    and D_h(x, 1/eta) >= ||G_eta(x)||^2 on random composite instances."""
    out = []
    rng = philox(seed, 0x91)
    for lam, asserted in ((0.0, True), (0.5, False)):
        prob = random_pl_quadratic(16, 5, mu=1.0, L=4.0, lam=lam, seed=seed)
        pts = [prob.x_star] + [prob.x_star + rng.standard_normal(prob.d) * rng.uniform(0.01, 3.0)
                               for _ in range(trials - 1)]
        cert = pl_certificate(prob, pts, 1.0 / (6.0 * prob.L))
        for rep in cert.reports:
            rep.name = f"{rep.name}_lam{lam:g}"
            rep.asserted = asserted or rep.name.startswith("dh_dominates")
        out.extend(cert.reports)
    dom = InequalityReport("dh_dominance_random")
    for prob, x, _, _, eta in random_composite_instances(seed + 1, trials):
        if isinstance(prob.h, IndicatorBallNonneg):
            x = project_ball_nonneg(x)
        g = prob.full_gradient(x)
        dom.add(grad_map_sq(g, x, eta, prob.h), compute_D_h(x, g, 1.0 / eta, prob.h))
    out.append(dom)
    return out


def run_named(suite: str, seed: int, trials: int, mc_trials: int = 100_000) -> list[tuple[str, InequalityReport]]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    names = ("prox", "lemmas", "variance", "pl") if suite == "all" else (suite,)
    rows = []
    for name in names:
        if name == "prox":
            reps = prox_suite(seed, min(trials, 100) if suite == "all" else trials)
        elif name == "lemmas":
            reps = lemma_suite(seed, trials)
        elif name == "variance":
            reps = variance_suite(seed, mc_trials)
        else:
            reps = pl_suite(seed, trials)
        rows.extend((name, r) for r in reps)
    return rows
