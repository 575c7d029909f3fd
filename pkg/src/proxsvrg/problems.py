"""Finite-sum composite objectives Phi(x) = (1/n) sum_i f_i(x) + h(x).

Two families are provided:

* NN-PCA: f_i(x) = -1/2 (z_i^T x)^2 with h the indicator of the nonnegative
  part of the unit ball.
* Quadratics: f_i(x) = 1/2 x^T A_i x - c^T x, optionally with an l1 term.
  ``build_pl_quadratic`` restricts to a positive-definite average and stores
  mu = lambda_min(A) and a reference optimal value.

Gradients of a batch of components are returned as a ``(len(idx), d)``
array so the optimizers can average them in one reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants
from .prox import (
    IndicatorBallNonneg,
    InvalidInputError,
    L1,
    NonsmoothTerm,
    Zero,
    as_point,
)


class FiniteSumProblem:
    """Base class. Subclasses implement ``component_gradients`` and ``component_values``."""

    n: int
    d: int
    h: NonsmoothTerm
    L: float
    mu: float | None = None
    phi_star: float | None = None

    def component_gradients(self, idx: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_values(self, idx: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"component index {i} out of range [0, {self.n})")
        return i

    def component_gradient(self, i: int, x) -> np.ndarray:
        i = self._check_index(i)
        return self.component_gradients(np.array([i]), as_point(x))[0]

    def component_value(self, i: int, x) -> float:
        i = self._check_index(i)
        return float(self.component_values(np.array([i]), as_point(x))[0])

    def all_component_gradients(self, x) -> np.ndarray:
        return self.component_gradients(np.arange(self.n), as_point(x))

    def full_gradient(self, x) -> np.ndarray:
        return self.all_component_gradients(x).mean(axis=0)

    def f_value(self, x) -> float:
        return float(self.component_values(np.arange(self.n), as_point(x)).mean())

    def objective_value(self, x) -> float:
        """Phi(x) = f(x) + h(x); +inf when x is outside the domain of h."""
        x = as_point(x)
        hx = self.h.value(x)
        if not np.isfinite(hx):
            return float("inf")
        return self.f_value(x) + hx

    def initial_point(self, seed: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x5EED])))
        return rng.standard_normal(self.d)


# -- NN-PCA --------------------------------------------------------------------


@dataclass(eq=False)
class NnPcaProblem(FiniteSumProblem):
    samples: np.ndarray
    h: NonsmoothTerm = field(default_factory=IndicatorBallNonneg)

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        self.n, self.d = self.samples.shape
        self.L = float(np.max(np.einsum("ij,ij->i", self.samples, self.samples)))
        if not self.L > 0.0:
            raise InvalidInputError("all samples are zero; Lipschitz constant would be 0")
        self.mu = None
        self.phi_star = None

    def component_gradients(self, idx, x):
        z = self.samples[idx]
        return -(z @ x)[:, None] * z

    def component_values(self, idx, x):
        return -0.5 * (self.samples[idx] @ x) ** 2

    def full_gradient(self, x):
        x = as_point(x)
        return -(self.samples.T @ (self.samples @ x)) / self.n

    def initial_point(self, seed: int) -> np.ndarray:
        """Seeded point in the interior of C: |gaussian| direction with norm 1/2."""
        g = np.abs(super().initial_point(seed))
        return 0.5 * g / np.linalg.norm(g)


def build_nnpca(samples) -> NnPcaProblem:
    rows = [np.asarray(s, dtype=np.float64) for s in samples]
    if not rows:
        raise InvalidInputError("NN-PCA needs at least one sample")
    d = rows[0].shape
    if any(r.ndim != 1 for r in rows) or any(r.shape != d for r in rows):
        raise InvalidInputError("samples must be 1-D vectors of one common dimension")
    Z = np.vstack(rows)
    if not np.all(np.isfinite(Z)):
        raise InvalidInputError("samples contain non-finite values")
    return NnPcaProblem(Z)


# -- quadratics ------------------------------------------------------------------


@dataclass(eq=False)
class QuadraticProblem(FiniteSumProblem):
    """f_i(x) = 1/2 x^T A_i x - c^T x. ``A_components`` has shape (n, d, d)."""

    A_components: np.ndarray
    c: np.ndarray
    h: NonsmoothTerm = field(default_factory=Zero)
    mu: float | None = None
    phi_star: float | None = None
    x_star: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.A_components, dtype=np.float64)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise InvalidInputError(f"A_components must be (n, d, d), got {A.shape}")
        A = 0.5 * (A + A.transpose(0, 2, 1))
        self.A_components = A
        self.n, self.d, _ = A.shape
        self.c = as_point(self.c, "c")
        if self.c.shape != (self.d,):
            raise InvalidInputError("c has the wrong dimension")
        self.A_mean = A.mean(axis=0)
        self.L = float(np.max(np.linalg.norm(A, ord=2, axis=(1, 2))))
        if not self.L > 0.0:
            raise InvalidInputError("all components are zero")

    def component_gradients(self, idx, x):
        return self.A_components[idx] @ x - self.c

    def component_values(self, idx, x):
        Ax = self.A_components[idx] @ x
        return 0.5 * (Ax @ x) - self.c @ x

    def full_gradient(self, x):
        return self.A_mean @ as_point(x) - self.c


def reference_solve(problem: FiniteSumProblem, x0=None, *, tol: float = constants.REFERENCE_STEP_TOL,
                    max_iters: int = constants.REFERENCE_MAX_ITERS) -> tuple[np.ndarray, float, int]:
    """Deterministic ProxGD at eta = 1/L until successive iterates are within ``tol``.

    Returns (x, Phi(x), iterations used).
    """
    eta = 1.0 / problem.L
    x = np.zeros(problem.d) if x0 is None else as_point(x0).copy()
    for k in range(1, max_iters + 1):
        x_new = problem.h.prox(x - eta * problem.full_gradient(x), eta)
        step = np.linalg.norm(x_new - x)
        x = x_new
        if step <= tol:
            break
    return x, problem.objective_value(x), k


def build_pl_quadratic(A_components, c, lam: float) -> QuadraticProblem:
    """Quadratic + l1 problem with a positive-definite average Hessian.

    Stores mu = lambda_min(mean A_i), L = max_i ||A_i||_2 and phi_star from a
    long ProxGD reference run.
    """
    prob = QuadraticProblem(A_components, c, h=L1(lam) if lam > 0 else Zero())
    eigs = np.linalg.eigvalsh(prob.A_mean)
    if not eigs[0] > 0.0:
        raise InvalidInputError(f"average Hessian is not positive definite (lambda_min={eigs[0]:.3g})")
    prob.mu = float(eigs[0])
    x_star, phi_star, _ = reference_solve(prob)
    prob.x_star = x_star
    prob.phi_star = phi_star
    return prob


def random_pl_quadratic(n: int, d: int, *, mu: float = 1.0, L: float = 4.0, lam: float = 0.1,
                        seed: int = 0) -> QuadraticProblem:
    """Seeded PL instance with lambda_min(A) = mu and max_i ||A_i|| = L exactly.

    The average A has spectrum in [mu, (mu+L)/2]; the components are A plus
    mean-zero symmetric perturbations scaled (by bisection) until the largest
    component norm equals L.
    """
    if not 0 < mu < L:
        raise InvalidInputError("need 0 < mu < L")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xA11])))
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    spec = np.linspace(mu, 0.5 * (mu + L), d)
    A = (Q * spec) @ Q.T
    A = 0.5 * (A + A.T)
    E = rng.standard_normal((n, d, d))
    E = 0.5 * (E + E.transpose(0, 2, 1))
    E -= E.mean(axis=0)

    def worst(t):
        return np.max(np.linalg.norm(A + t * E, ord=2, axis=(1, 2)))

    lo, hi = 0.0, 1.0
    while worst(hi) < L:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if worst(mid) < L:
            lo = mid
        else:
            hi = mid
    comps = A + lo * E
    c = rng.standard_normal(d)
    return build_pl_quadratic(comps, c, lam)


def random_quadratic(rng: np.random.Generator, n: int, d: int, h: NonsmoothTerm,
                     *, indefinite: bool = True) -> QuadraticProblem:
    """Random quadratic finite sum with |eigenvalues| in [0.1, 5] per component.

    With ``indefinite`` each eigenvalue gets a random sign, so f may be nonconvex.
    """
    comps = np.empty((n, d, d))
    for i in range(n):
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        ev = rng.uniform(0.1, 5.0, size=d)
        if indefinite:
            ev *= rng.choice([-1.0, 1.0], size=d)
        comps[i] = (Q * ev) @ Q.T
    return QuadraticProblem(comps, rng.standard_normal(d), h=h)
