"""Proximal operators, the gradient mapping and the D_h quantity.

Every function here is pure: inputs are never modified and the result is a
fresh array. Points are 1-D float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised for non-finite points, bad step sizes or mismatched shapes."""


def as_point(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite 1-D float64 array or raise InvalidInputError."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite coordinates")
    return arr


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (eta > 0.0 and np.isfinite(eta)):
        raise InvalidInputError(f"step size must be positive and finite, got {eta}")
    return eta


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")


# -- nonsmooth terms ---------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    """h(x) = 0."""

    def value(self, x) -> float:
        return 0.0

    def prox(self, x, eta: float) -> np.ndarray:
        _check_eta(eta)
        return as_point(x).copy()


@dataclass(frozen=True)
class L1:
    """h(x) = lam * ||x||_1 with lam >= 0."""

    lam: float

    def __post_init__(self):
        if not (self.lam >= 0.0 and np.isfinite(self.lam)):
            raise InvalidInputError(f"l1 weight must be nonnegative, got {self.lam}")

    def value(self, x) -> float:
        return float(self.lam * np.sum(np.abs(x)))

    def prox(self, x, eta: float) -> np.ndarray:
        return prox_l1(x, eta, self.lam)


@dataclass(frozen=True)
class IndicatorBallNonneg:
    """Indicator of C = {x : ||x|| <= 1, x >= 0}.

    The prox of an indicator is the Euclidean projection, so ``eta`` only
    has to be valid; it does not change the result.
    """

    def value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if np.min(x) >= 0.0 and np.dot(x, x) <= 1.0 + 2e-12:
            return 0.0
        return float("inf")

    def prox(self, x, eta: float) -> np.ndarray:
        _check_eta(eta)
        return project_ball_nonneg(x)


NonsmoothTerm = Zero | L1 | IndicatorBallNonneg


# -- operators ---------------------------------------------------------------


def prox_l1(x, eta: float, lam: float) -> np.ndarray:
    """Soft thresholding: ``sign(x) * max(|x| - eta*lam, 0)``."""
    x = as_point(x)
    eta = _check_eta(eta)
    if not lam >= 0.0:
        raise InvalidInputError(f"l1 weight must be nonnegative, got {lam}")
    thresh = eta * lam
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def project_ball_nonneg(x) -> np.ndarray:
    """Euclidean projection onto {||y|| <= 1, y >= 0}: clip, then rescale."""
    p = np.maximum(as_point(x), 0.0)
    nrm = np.linalg.norm(p)
    if nrm > 1.0:
        p = p / nrm
    return p


def prox_linearized(x, grad, eta: float, h: NonsmoothTerm) -> np.ndarray:
    """prox_{eta h}(x - eta * grad)."""
    x = as_point(x)
    grad = as_point(grad, "grad")
    _check_same_dim(x, grad)
    eta = _check_eta(eta)
    return h.prox(x - eta * grad, eta)


def gradient_mapping(full_grad, x, eta: float, h: NonsmoothTerm) -> np.ndarray:
    """G_eta(x) = (x - prox_{eta h}(x - eta * grad f(x))) / eta.

    For ``h = Zero()`` the gradient is returned unchanged instead of going
    through the subtract/divide round trip.
    """
    x = as_point(x)
    full_grad = as_point(full_grad, "full_grad")
    _check_same_dim(x, full_grad)
    eta = _check_eta(eta)
    if isinstance(h, Zero):
        return full_grad.copy()
    return (x - h.prox(x - eta * full_grad, eta)) / eta


def grad_map_sq(full_grad, x, eta: float, h: NonsmoothTerm) -> float:
    g = gradient_mapping(full_grad, x, eta, h)
    return float(np.dot(g, g))


def compute_D_h(x, full_grad, alpha: float, h: NonsmoothTerm) -> float:
    """Evaluate D_h(x, alpha) = -2 alpha min_y {<g, y-x> + alpha/2 ||y-x||^2 + h(y) - h(x)}.

    The inner minimum is attained at ``y = prox_{h/alpha}(x - g/alpha)``.
    Returns ``inf`` when h(x) is infinite (x outside the domain of h).
    """
    alpha = float(alpha)
    if not alpha > 0.0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    x = as_point(x)
    g = as_point(full_grad, "full_grad")
    _check_same_dim(x, g)
    hx = h.value(x)
    if not np.isfinite(hx):
        return float("inf")
    if isinstance(h, Zero):
        return float(np.dot(g, g))
    y = h.prox(x - g / alpha, 1.0 / alpha)
    dy = y - x
    inner = float(np.dot(g, dy) + 0.5 * alpha * np.dot(dy, dy) + h.value(y) - hx)
    return -2.0 * alpha * inner
