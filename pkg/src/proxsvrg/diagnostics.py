"""Runtime checks of the inequalities behind the ProxSVRG+ analysis.

Each ``check_*`` returns ``rhs - lhs``; a valid inequality gives a residual
that is nonnegative up to rounding. ``run_suite`` aggregates residuals into
an :class:`InequalityReport`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import constants
from .problems import FiniteSumProblem
from .prox import InvalidInputError, as_point, compute_D_h, grad_map_sq
from .sampling import MinibatchSampler, Replacement, population_variance


@dataclass
class InequalityReport:
    name: str
    trials: int = 0
    violations: int = 0
    worst_residual: float = float("inf")
    tolerance: float = constants.SLACK_ABS
    asserted: bool = True

    def add(self, lhs: float, rhs: float) -> None:
        """Record one instance of ``lhs <= rhs``."""
        self.trials += 1
        if np.isinf(rhs) and rhs > 0:
            return
        residual = rhs - lhs
        scale = max(abs(lhs), abs(rhs))
        if residual < -(self.tolerance + constants.SLACK_REL * scale):
            self.violations += 1
        self.worst_residual = min(self.worst_residual, residual)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _sides_lemma1(problem: FiniteSumProblem, x, v, z, eta):
    x, v, z = as_point(x), as_point(v, "v"), as_point(z, "z")
    L, h = problem.L, problem.h
    xp = h.prox(x - eta * v, eta)
    g = problem.full_gradient(x)
    lhs = problem.objective_value(xp)
    rhs = (problem.objective_value(z) + np.dot(g - v, xp - z) - np.dot(xp - x, xp - z) / eta
           + 0.5 * L * np.dot(xp - x, xp - x) + 0.5 * L * np.dot(z - x, z - x))
    return float(lhs), float(rhs)


def check_lemma1(problem: FiniteSumProblem, x, v, z, eta: float) -> float:
    """Residual of Phi(x+) <= Phi(z) + <grad f(x) - v, x+ - z> - <x+ - x, x+ - z>/eta
    + L/2 ||x+ - x||^2 + L/2 ||z - x||^2, with x+ = prox_{eta h}(x - eta v)."""
    lhs, rhs = _sides_lemma1(problem, x, v, z, eta)
    return rhs - lhs


def _lemma2_points(problem, x, v, eta):
    x, v = as_point(x), as_point(v, "v")
    g = problem.full_gradient(x)
    xt = problem.h.prox(x - eta * v, eta)
    xbar = problem.h.prox(x - eta * g, eta)
    return g - v, xt - xbar


def _sides_lemma2(problem, x, v, eta):
    e, dx = _lemma2_points(problem, x, v, eta)
    return float(np.dot(e, dx)), float(eta * np.dot(e, e))


def check_lemma2(problem: FiniteSumProblem, x, v, eta: float) -> float:
    """Residual of <grad f(x) - v, x_t - xbar_t> <= eta ||grad f(x) - v||^2."""
    lhs, rhs = _sides_lemma2(problem, x, v, eta)
    return rhs - lhs


def _sides_lemma2_distance(problem, x, v, eta):
    e, dx = _lemma2_points(problem, x, v, eta)
    return float(np.linalg.norm(dx)), float(eta * np.linalg.norm(e))


def lemma2_distance_residual(problem: FiniteSumProblem, x, v, eta: float) -> float:
    """Residual of the intermediate step ||x_t - xbar_t|| <= eta ||grad f(x) - v||."""
    lhs, rhs = _sides_lemma2_distance(problem, x, v, eta)
    return rhs - lhs


def _sides_young(x_t, x_prev, x_bar, alpha):
    a = np.dot(x_t - x_prev, x_t - x_prev)
    rhs = (1 + 1 / alpha) * np.dot(x_bar - x_prev, x_bar - x_prev) + (1 + alpha) * np.dot(x_t - x_bar, x_t - x_bar)
    return float(a), float(rhs)


def check_young(x_t, x_prev, x_bar, alpha: float) -> float:
    """Residual of ||x_t - x_prev||^2 <= (1 + 1/alpha)||x_bar - x_prev||^2 + (1 + alpha)||x_t - x_bar||^2."""
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    lhs, rhs = _sides_young(as_point(x_t), as_point(x_prev), as_point(x_bar), alpha)
    return rhs - lhs


# -- estimator variance ----------------------------------------------------------


@dataclass
class VarianceResult:
    exact: float
    bound: float
    within_term: float
    snapshot_term: float


def _fpc(n: int, k: int, replacement: Replacement) -> float:
    if replacement is Replacement.WITH or n == 1:
        return 1.0
    return (n - k) / (n - 1)


def estimator_variance_exact(problem: FiniteSumProblem, x, x_snapshot, b: int, B: int,
                             replacement: Replacement | str = Replacement.WITH) -> VarianceResult:
    """E||grad f(x) - v||^2 for the ProxSVRG+ estimator, in closed form.

    With independent I_b and I_B drawn with replacement this is
    ``popvar(grad f_i(x) - grad f_i(xs)) / b + [B < n] popvar(grad f_i(xs)) / B``.
    Without replacement each term gets the finite-population factor
    (n - k)/(n - 1). ``bound`` is ``L^2/b ||x - xs||^2 + [B < n] sigma^2/B``
    with sigma^2 taken as the exact variance at the snapshot.
    """
    replacement = Replacement(replacement)
    x, xs = as_point(x), as_point(x_snapshot, "x_snapshot")
    n = problem.n
    if b < 1 or B < 1:
        raise ValueError("b and B must be >= 1")
    gx = problem.all_component_gradients(x)
    gs = problem.all_component_gradients(xs)
    within = population_variance(gx - gs) / b * _fpc(n, b, replacement)
    var_s = population_variance(gs)
    snap = var_s / B * _fpc(n, B, replacement) if B < n else 0.0
    dx = x - xs
    bound = problem.L**2 / b * float(np.dot(dx, dx)) + (var_s / B if B < n else 0.0)
    return VarianceResult(within + snap, bound, within, snap)


@dataclass
class EmpiricalVariance:
    mean: float
    stderr: float
    trials: int


def estimator_variance_empirical(problem: FiniteSumProblem, x, x_snapshot, b: int, B: int, trials: int,
                                 sampler: MinibatchSampler) -> EmpiricalVariance:
    """Monte Carlo mean of ||grad f(x) - v||^2 with fresh I_b, I_B per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x, xs = as_point(x), as_point(x_snapshot, "x_snapshot")
    n = problem.n
    gx = problem.all_component_gradients(x)
    gs = problem.all_component_gradients(xs)
    full_x = gx.mean(axis=0)
    full_s = gs.mean(axis=0)
    diff = gx - gs
    samples = np.empty(trials)
    # chunks bound memory at (chunk, b, d)
    chunk = max(1, 2_000_000 // max(1, (b + B) * problem.d))
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        Ib = np.stack([sampler.sample(b, n) for _ in range(k)]) if sampler.replacement is Replacement.WITHOUT \
            else sampler.sample(k * b, n).reshape(k, b)
        v = diff[Ib].mean(axis=1)
        if B < n:
            IB = np.stack([sampler.sample(B, n) for _ in range(k)]) if sampler.replacement is Replacement.WITHOUT \
                else sampler.sample(k * B, n).reshape(k, B)
            v = v + gs[IB].mean(axis=1)
        else:
            v = v + full_s
        err = full_x - v
        samples[done:done + k] = np.einsum("ij,ij->i", err, err)
        done += k
    se = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan")
    return EmpiricalVariance(float(samples.mean()), se, trials)


# -- PL quantities -----------------------------------------------------------------


@dataclass
class PLCertificate:
    gradient_mapping_form: InequalityReport
    dh_form: InequalityReport
    cross_relation: InequalityReport

    @property
    def reports(self) -> list[InequalityReport]:
        return [self.gradient_mapping_form, self.dh_form, self.cross_relation]


def pl_certificate(problem: FiniteSumProblem, points: Iterable, eta: float) -> PLCertificate:
    """Evaluate both PL forms and D_h(x, 1/eta) >= ||G_eta(x)||^2 at each point.

    Form (gradient mapping): ||G_eta(x)||^2 >= 2 mu (Phi(x) - Phi*).
    Form (D_h):              D_h(x, 1/eta) >= 2 mu (Phi(x) - Phi*).
    """
    if problem.mu is None or problem.phi_star is None:
        raise ValueError("PL certificate needs a problem with mu and phi_star")
    cert = PLCertificate(InequalityReport("pl_gradient_mapping"), InequalityReport("pl_dh"),
                         InequalityReport("dh_dominates_gradient_mapping"))
    for x in points:
        x = as_point(x)
        g = problem.full_gradient(x)
        gm = grad_map_sq(g, x, eta, problem.h)
        dh = compute_D_h(x, g, 1.0 / eta, problem.h)
        gap = 2.0 * problem.mu * (problem.objective_value(x) - problem.phi_star)
        cert.gradient_mapping_form.add(gap, gm)
        cert.dh_form.add(gap, dh)
        cert.cross_relation.add(gm, dh)
    return cert


def run_suite(name: str, instances: Iterable, sides: Callable[..., tuple[float, float]],
              *, asserted: bool = True) -> InequalityReport:
    """Apply ``sides(*instance) -> (lhs, rhs)`` to each instance and tally."""
    rep = InequalityReport(name, asserted=asserted)
    for inst in instances:
        rep.add(*sides(*inst))
    return rep


lemma1_sides = _sides_lemma1
lemma2_sides = _sides_lemma2
lemma2_distance_sides = _sides_lemma2_distance
young_sides = _sides_young
