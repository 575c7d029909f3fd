"""Brute-force reference solvers for the prox subproblems.

They minimize  h(y) + ||y - x||^2 / (2 eta) + <g, y>  directly and share no
code with :mod:`proxsvrg.prox`:

* ``grid_prox_1d``: per-coordinate grid search with zooming (separable h).
* ``enumerate_prox_ball_nonneg``: exhaustive enumeration of the faces of
  C = {||y|| <= 1, y >= 0} (which coordinates are zero, whether the sphere
  is active); exact up to rounding.
* ``grid_min_ball_nonneg``: dense lattice over C; used as an upper-bound
  certificate (a correct prox must do at least as well as every lattice point).
"""

from __future__ import annotations

import itertools

import numpy as np


def _objective_1d(y, x, eta, lam, g):
    return lam * np.abs(y) + (y - x) ** 2 / (2 * eta) + g * y


def grid_prox_1d(x: float, eta: float, lam: float, g: float = 0.0, *, step: float = 1e-4,
                 final_step: float = 1e-10) -> float:
    """argmin_y lam|y| + (y - x)^2/(2 eta) + g y by successively refined grids."""
    radius = abs(x) + eta * (abs(lam) + abs(g)) + 1.0
    lo, hi = -radius, radius
    best = 0.0
    while True:
        ys = np.arange(lo, hi + step / 2, step)
        best = float(ys[np.argmin(_objective_1d(ys, x, eta, lam, g))])
        if step <= final_step:
            return best
        lo, hi = best - 2 * step, best + 2 * step
        step /= 20.0


def grid_prox_l1(x, eta: float, lam: float, g=None, **kw) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x) if g is None else np.asarray(g, dtype=float)
    return np.array([grid_prox_1d(xi, eta, lam, gi, **kw) for xi, gi in zip(x, g)])


def _ball_objective(y, x, eta, g):
    return np.dot(y - x, y - x) / (2 * eta) + np.dot(g, y)


def enumerate_prox_ball_nonneg(x, eta: float = 1.0, g=None) -> np.ndarray:
    """Exact minimizer over C by enumerating all faces (2^d zero patterns x sphere on/off)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    g = np.zeros(d) if g is None else np.asarray(g, dtype=float)
    target = x - eta * g  # unconstrained stationary point of the quadratic
    best, best_val = np.zeros(d), _ball_objective(np.zeros(d), x, eta, g)
    for free in itertools.product([False, True], repeat=d):
        free = np.array(free)
        if not free.any():
            continue
        cands = []
        y = np.where(free, target, 0.0)
        cands.append(y)
        nrm = np.linalg.norm(y)
        if nrm > 0:
            cands.extend([y / nrm, -y / nrm])
        for y in cands:
            if np.min(y) >= -1e-15 and np.dot(y, y) <= 1 + 1e-12:
                y = np.maximum(y, 0.0)
                val = _ball_objective(y, x, eta, g)
                if val < best_val:
                    best, best_val = y, val
    return best


def grid_min_ball_nonneg(x, eta: float = 1.0, g=None, *, step: float | None = None) -> tuple[np.ndarray, float]:
    """Best lattice point of C for the prox objective; default step 1e-3 (d <= 2) or 1e-2 (d = 3)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    if d > 3:
        raise ValueError("lattice oracle is limited to d <= 3")
    g = np.zeros(d) if g is None else np.asarray(g, dtype=float)
    if step is None:
        step = 1e-3 if d <= 2 else 1e-2
    axis = np.arange(0.0, 1.0 + step / 2, step)
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    pts = pts[np.einsum("ij,ij->i", pts, pts) <= 1.0]
    diff = pts - x
    vals = np.einsum("ij,ij->i", diff, diff) / (2 * eta) + pts @ g
    k = int(np.argmin(vals))
    return pts[k], float(vals[k])


def ball_objective(y, x, eta: float = 1.0, g=None) -> float:
    g = np.zeros_like(np.asarray(x, dtype=float)) if g is None else g
    return float(_ball_objective(np.asarray(y, dtype=float), np.asarray(x, dtype=float), eta, np.asarray(g)))
