"""ProxSVRG+ and the ProxGD / ProxSGD / ProxSVRG baselines.

All four share one driver. Oracle accounting:

* full gradient: n SFO
* snapshot g^s over I_B: B SFO (the exact full gradient when B >= n)
* variance-reduced inner step: b SFO (2b raw evaluations) and 1 PO
* plain minibatch step: b SFO and 1 PO

Trace metrics (objective, squared gradient mapping) need a full gradient;
those are tallied in ``counter.diag_sfo`` and never in ``counter.sfo``.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import constants
from .problems import FiniteSumProblem
from .prox import as_point, grad_map_sq
from .sampling import MinibatchSampler, OracleCounter, Replacement, philox


class OutputMode(str, enum.Enum):
    UNIFORM = "uniform"
    LAST = "last"


class Algorithm(str, enum.Enum):
    PROXSVRG_PLUS = "proxsvrg+"
    PROXSVRG = "proxsvrg"
    PROXGD = "proxgd"
    PROXSGD = "proxsgd"


# substream tags for philox(seed, tag, ...)
_STREAM_MINIBATCH = 1
_STREAM_OUTPUT = 2


@dataclass
class OptimizerConfig:
    B: int
    b: int
    m: int
    eta: float
    epochs: int
    output_mode: OutputMode = OutputMode.UNIFORM
    seed: int = 0
    eps_target: float | None = None
    replacement: Replacement = Replacement.WITH

    def __post_init__(self):
        self.output_mode = OutputMode(self.output_mode)
        self.replacement = Replacement(self.replacement)
        for name in ("B", "b", "m"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
            setattr(self, name, int(getattr(self, name)))
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive, got {self.eta}")


@dataclass
class TraceRecord:
    epoch: int
    iter: int
    sfo: int
    po: int
    diag_sfo: int
    objective: float
    grad_map_sq: float
    elapsed_ms: float


@dataclass
class RunResult:
    algo: Algorithm
    config: OptimizerConfig
    output_point: np.ndarray
    last_point: np.ndarray
    trace: list[TraceRecord]
    counter: OracleCounter
    status: str = "completed"  # or "converged" (eps target hit) / "diverged"
    epochs_run: int = 0

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"


# -- step-size and batch rules ------------------------------------------------


def default_step_size(algo: Algorithm | str, L: float, n: int, b: int) -> float:
    """Untuned step sizes used in the NN-PCA comparison."""
    algo = Algorithm(algo)
    if algo is Algorithm.PROXGD:
        return 1.0 / L
    if algo is Algorithm.PROXSGD:
        return 1.0 / (2.0 * L)
    if algo is Algorithm.PROXSVRG:
        return b**1.5 / (3.0 * L * n)
    return 1.0 / (6.0 * L)


def _snapshot_batch(case: str, n: int, eps: float, sigma: float | None, mu: float = 1.0) -> int:
    if case == "finite":
        return n
    if case != "online":
        raise ValueError(f"unknown case {case!r}")
    if sigma is None:
        raise ValueError("the online case needs sigma (bounded-variance constant)")
    return int(min(math.ceil(6.0 * sigma**2 / (mu * eps)), n))


def configure_theorem1(n: int, L: float, delta_phi: float, eps: float, b: int,
                       sigma: float | None = None, *, case: str = "finite", seed: int = 0) -> OptimizerConfig:
    """eta = 1/(6L), m = ceil(sqrt b), B = n or min(6 sigma^2/eps, n), S*m >= 36 L delta/eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 1 <= b <= n:
        raise ValueError("need 1 <= b <= n")
    m = math.ceil(math.sqrt(b))
    T = math.ceil(36.0 * L * delta_phi / eps)
    return OptimizerConfig(B=_snapshot_batch(case, n, eps, sigma), b=b, m=m, eta=1.0 / (6.0 * L),
                           epochs=math.ceil(T / m), seed=seed, eps_target=eps)


def configure_theorem3(m: int, b: int, L: float, n: int, delta_phi: float, eps: float,
                       sigma: float | None = None, *, case: str = "finite", seed: int = 0) -> OptimizerConfig:
    """General epoch length: eta = min(1/(6L), sqrt(b)/(6 m L)), T = 6 delta/(eps eta)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 1 <= b <= n:
        raise ValueError("need 1 <= b <= n")
    eta = min(1.0 / (6.0 * L), math.sqrt(b) / (6.0 * m * L))
    T = math.ceil(6.0 * delta_phi / (eps * eta))
    return OptimizerConfig(B=_snapshot_batch(case, n, eps, sigma), b=b, m=m, eta=eta,
                           epochs=math.ceil(T / m), seed=seed, eps_target=eps)


def select_output(history: Sequence[np.ndarray], mode: OutputMode | str, rng: np.random.Generator,
                  final: np.ndarray | None = None) -> np.ndarray:
    """Pick the returned point from the pre-step iterates ``history``.

    UNIFORM draws one of them uniformly; LAST returns ``final`` (the last
    snapshot) or, if not given, the last element of ``history``.
    """
    if len(history) == 0:
        raise ValueError("empty iterate history")
    if OutputMode(mode) is OutputMode.LAST:
        return history[-1] if final is None else final
    return history[int(rng.integers(len(history)))]


def default_stride(m: int) -> int:
    return 1 if m <= 32 else math.ceil(m / 32)


# -- driver ----------------------------------------------------------------------


class _Tracer:
    def __init__(self, problem: FiniteSumProblem, eta: float, counter: OracleCounter):
        self.problem = problem
        self.eta = eta
        self.counter = counter
        self.rows: list[TraceRecord] = []
        self.t0 = time.perf_counter()

    def metric(self, x) -> float:
        g = self.problem.full_gradient(x)
        self.counter.record(diag_delta=self.problem.n, raw_delta=0)
        return grad_map_sq(g, x, self.eta, self.problem.h)

    def record(self, s: int, t: int, x) -> TraceRecord:
        row = TraceRecord(s, t, self.counter.sfo, self.counter.po, 0,
                          self.problem.objective_value(x), self.metric(x), 0.0)
        row.diag_sfo = self.counter.diag_sfo
        row.elapsed_ms = (time.perf_counter() - self.t0) * 1e3
        self.rows.append(row)
        return row

    def abort(self, s: int, t: int) -> None:
        self.rows.append(TraceRecord(s, t, self.counter.sfo, self.counter.po, self.counter.diag_sfo,
                                     float("inf"), float("inf"), (time.perf_counter() - self.t0) * 1e3))


def _blown_up(x: np.ndarray) -> bool:
    return not np.all(np.isfinite(x)) or float(np.max(np.abs(x))) > constants.DIVERGENCE_BOUND


class _Reservoir:
    """Size-one reservoir over the pre-step iterates (uniform output)."""

    def __init__(self, seed: int, enabled: bool):
        self.rng = philox(seed, _STREAM_OUTPUT) if enabled else None
        self.seen = 0
        self.point = None

    def offer(self, x: np.ndarray) -> None:
        if self.rng is None:
            return
        self.seen += 1
        if self.rng.random() * self.seen < 1.0:
            self.point = x


def run(algo: Algorithm | str, problem: FiniteSumProblem, config: OptimizerConfig, x0=None, *,
        stride: int | None = None, metric_eta: float | None = None,
        callback: Callable[[int, int, np.ndarray], None] | None = None) -> RunResult:
    """Run one algorithm for ``config.epochs`` epochs.

    An epoch is m inner iterations for the stochastic methods and a single
    full-gradient step for ProxGD. ``callback(s, t, x)`` sees each new
    iterate. Trace rows are written at (0, 0), every ``stride`` inner
    iterations, and at the end of each epoch.
    """
    algo = Algorithm(algo)
    n = problem.n
    cfg = config
    h, eta = problem.h, cfg.eta
    x = problem.initial_point(cfg.seed) if x0 is None else as_point(x0).copy()
    m = 1 if algo is Algorithm.PROXGD else cfg.m
    stride = default_stride(m) if stride is None else int(stride)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    counter = OracleCounter()
    tracer = _Tracer(problem, eta if metric_eta is None else float(metric_eta), counter)
    sampler = MinibatchSampler(cfg.seed, cfg.replacement, stream=_STREAM_MINIBATCH)
    reservoir = _Reservoir(cfg.seed, cfg.output_mode is OutputMode.UNIFORM)
    variance_reduced = algo in (Algorithm.PROXSVRG_PLUS, Algorithm.PROXSVRG)
    B = n if algo is Algorithm.PROXSVRG else min(cfg.B, n)
    full_batch = cfg.b >= n and cfg.replacement is Replacement.WITHOUT

    tracer.record(0, 0, x)
    status, epochs_run = "completed", 0
    for s in range(1, cfg.epochs + 1):
        sampler.start_epoch(s)
        if variance_reduced:
            snap = x
            if B >= n:
                g_snap = problem.full_gradient(snap)
                counter.record(n)
            else:
                idx_B = np.sort(sampler.sample(B, n))
                g_snap = problem.component_gradients(idx_B, snap).mean(axis=0)
                counter.record(B)
        for t in range(1, m + 1):
            reservoir.offer(x)
            if algo is Algorithm.PROXGD:
                v = problem.full_gradient(x)
                counter.record(n, raw_delta=n)
            elif algo is Algorithm.PROXSGD:
                if full_batch:
                    v = problem.full_gradient(x)
                else:
                    v = problem.component_gradients(np.sort(sampler.sample(cfg.b, n)), x).mean(axis=0)
                counter.record(cfg.b)
            else:
                idx = np.sort(sampler.sample(cfg.b, n))
                diff = problem.component_gradients(idx, x) - problem.component_gradients(idx, snap)
                v = diff.mean(axis=0) + g_snap
                counter.record(cfg.b, raw_delta=2 * cfg.b)
            x = h.prox(x - eta * v, eta)
            counter.record(po_delta=1, raw_delta=0)
            if _blown_up(x):
                tracer.abort(s, t)
                status = "diverged"
                break
            if callback is not None:
                callback(s, t, x)
            if t % stride == 0 or t == m:
                tracer.record(s, t, x)
        epochs_run = s
        if status == "diverged":
            break
        if cfg.eps_target is not None:
            gsq = grad_map_sq(problem.full_gradient(x), x, eta, h)
            counter.record(diag_delta=n, raw_delta=0)
            if gsq <= cfg.eps_target:
                status = "converged"
                break

    if cfg.output_mode is OutputMode.UNIFORM and reservoir.point is not None:
        out = reservoir.point
    else:
        out = x
    return RunResult(algo, cfg, out.copy(), x.copy(), tracer.rows, counter, status, epochs_run)


def prox_svrg_plus(problem: FiniteSumProblem, config: OptimizerConfig, x0=None, **kw) -> RunResult:
    """ProxSVRG+: snapshot gradient over I_B, then m variance-reduced prox steps per epoch."""
    return run(Algorithm.PROXSVRG_PLUS, problem, config, x0, **kw)


def run_baseline(kind: Algorithm | str, problem: FiniteSumProblem, config: OptimizerConfig,
                 x0=None, **kw) -> RunResult:
    kind = Algorithm(kind)
    if kind is Algorithm.PROXSVRG_PLUS:
        raise ValueError("use prox_svrg_plus for ProxSVRG+")
    return run(kind, problem, config, x0, **kw)
