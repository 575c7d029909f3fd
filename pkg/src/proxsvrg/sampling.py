"""Minibatch index sampling, oracle-call accounting and sigma estimation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

_COUNT_MAX = 2**63 - 1


class Replacement(str, enum.Enum):
    WITH = "with"
    WITHOUT = "without"


def philox(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the substream ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


@dataclass
class MinibatchSampler:
    """Seeded index sampler with one Philox substream per epoch.

    Draws within an epoch come from ``philox(seed, stream, epoch)``, so the
    indices of epoch ``s`` do not depend on how many draws earlier epochs made.
    """

    seed: int
    replacement: Replacement = Replacement.WITH
    stream: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.replacement = Replacement(self.replacement)
        self.start_epoch(0)

    def start_epoch(self, epoch: int) -> None:
        self._rng = philox(self.seed, self.stream, epoch)

    def sample(self, b: int, n: int) -> np.ndarray:
        b, n = int(b), int(n)
        if b < 1 or n < 1:
            raise ValueError(f"need b >= 1 and n >= 1, got b={b}, n={n}")
        if self.replacement is Replacement.WITH:
            return self._rng.integers(0, n, size=b)
        if b > n:
            raise ValueError(f"cannot draw {b} indices without replacement from {n}")
        return self._rng.choice(n, size=b, replace=False)


def sample_indices(sampler: MinibatchSampler, b: int, n: int) -> np.ndarray:
    return sampler.sample(b, n)


@dataclass
class OracleCounter:
    """Monotone SFO/PO tallies.

    ``sfo`` follows the budget convention (b per inner iteration even though
    the estimator evaluates each sampled component at two points);
    ``raw_grad_evals`` counts actual component-gradient evaluations and
    ``diag_sfo`` the full gradients spent on trace metrics.
    """

    sfo: int = 0
    po: int = 0
    diag_sfo: int = 0
    raw_grad_evals: int = 0

    def record(self, sfo_delta: int = 0, po_delta: int = 0, *, diag_delta: int = 0,
               raw_delta: int | None = None) -> "OracleCounter":
        deltas = (int(sfo_delta), int(po_delta), int(diag_delta))
        if min(deltas) < 0 or (raw_delta is not None and raw_delta < 0):
            raise ValueError("oracle deltas must be nonnegative")
        raw = deltas[0] if raw_delta is None else int(raw_delta)
        new = (self.sfo + deltas[0], self.po + deltas[1], self.diag_sfo + deltas[2], self.raw_grad_evals + raw)
        if max(new) > _COUNT_MAX:
            raise OverflowError("oracle counter exceeds 64-bit range")
        self.sfo, self.po, self.diag_sfo, self.raw_grad_evals = new
        return self

    def merge(self, other: "OracleCounter") -> "OracleCounter":
        return self.record(other.sfo, other.po, diag_delta=other.diag_sfo, raw_delta=other.raw_grad_evals)


def record_oracle_calls(counter: OracleCounter, sfo_delta: int, po_delta: int) -> OracleCounter:
    return counter.record(sfo_delta, po_delta)


def population_variance(grads: np.ndarray) -> float:
    """(1/n) sum_i ||g_i - mean(g)||^2 for an (n, d) array."""
    centered = grads - grads.mean(axis=0)
    return float(np.einsum("ij,ij->", centered, centered) / grads.shape[0])


def estimate_sigma(problem, x, trials: int, sampler: MinibatchSampler) -> float:
    """sigma at x: exact when ``trials >= n``, otherwise a Monte Carlo estimate.

    The estimate averages ``||grad f_i(x) - grad f(x)||^2`` over ``trials``
    indices drawn by ``sampler``.
    """
    if trials < 2:
        raise ValueError("estimate_sigma needs at least 2 trials")
    x = np.asarray(x, dtype=np.float64)
    if trials >= problem.n:
        return float(np.sqrt(population_variance(problem.all_component_gradients(x))))
    idx = sampler.sample(trials, problem.n)
    diff = problem.component_gradients(idx, x) - problem.full_gradient(x)
    return float(np.sqrt(np.einsum("ij,ij->", diff, diff) / trials))
