"""SFO / PO oracle-complexity bounds.

``bounds_theorem1`` and ``bounds_theorem3`` evaluate the ProxSVRG+ bounds
with their exact constants (36 and 6). The PL bounds and the comparison rows
for other methods are only known up to O(.), so they are evaluated with unit
constants and labelled ``asymptotic``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

CONSTANTS_EXACT = "exact constants"
CONSTANTS_ASYMPTOTIC = "asymptotic, constants not specified"


@dataclass(frozen=True)
class BoundQuery:
    n: int
    b: float
    eps: float
    L: float = 1.0
    delta_phi: float = 1.0
    B: float | None = None
    sigma: float | None = None
    mu: float | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.n < 1 or self.b < 1:
            raise ValueError("n and b must be >= 1")
        if self.L <= 0 or self.delta_phi < 0:
            raise ValueError("L must be positive and delta_phi nonnegative")


@dataclass(frozen=True)
class BoundResult:
    sfo: float
    po: float
    regime: str
    dominant: str
    constants: str = CONSTANTS_EXACT
    valid: bool = True  # False when the method's own side condition (e.g. b <= n^{2/3}) fails


def snapshot_size(q: BoundQuery, case: str, mu: float = 1.0) -> float:
    """B = n (finite-sum) or min(6 sigma^2/(mu eps), n) (online)."""
    if case == "finite":
        return float(q.n)
    if case != "online":
        raise ValueError(f"unknown case {case!r}")
    if q.sigma is None:
        raise ValueError("online case needs sigma")
    return min(6.0 * q.sigma**2 / (mu * q.eps), float(q.n))


def _general_bounds(q: BoundQuery, B: float, inv_eta: float, m: float, regime: str) -> BoundResult:
    # SFO = 6 delta * (1/eta) * (B/(eps m) + b/eps), PO = 6 delta / (eps eta)
    snap = B / (q.eps * m)
    inner = q.b / q.eps
    scale = 6.0 * q.delta_phi * inv_eta
    return BoundResult(sfo=scale * (snap + inner), po=scale / q.eps, regime=regime,
                       dominant="snapshot" if snap >= inner else "minibatch")


def _inv_eta(L: float, b: float, m: float) -> float:
    # 1/eta for eta = min(1/(6L), sqrt(b)/(6 m L)); branch keeps m = sqrt(b) identical to 6L
    return 6.0 * L if m <= math.sqrt(b) else 6.0 * m * L / math.sqrt(b)


def bounds_theorem1(q: BoundQuery, case: str = "finite") -> BoundResult:
    """36 L delta (B/(eps sqrt b) + b/eps) SFO and 36 L delta / eps PO."""
    B = snapshot_size(q, case)
    return _general_bounds(q, B, _inv_eta(q.L, q.b, math.sqrt(q.b)), math.sqrt(q.b), f"ProxSVRG+ {case}")


def bounds_theorem3(q: BoundQuery, m: float, case: str = "finite") -> BoundResult:
    """6 delta (B/(eps eta m) + b/(eps eta)) SFO, eta = min(1/(6L), sqrt(b)/(6 m L))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    B = snapshot_size(q, case)
    return _general_bounds(q, B, _inv_eta(q.L, q.b, m), m, f"ProxSVRG+ {case} m={m:g}")


def bounds_theorem2_pl(q: BoundQuery, case: str = "finite") -> BoundResult:
    """Linear-rate bounds under PL, unit constants:
    SFO (B/(mu sqrt b) + b/mu) log(1/eps), PO log(1/eps)/mu,
    with B = n or min(6 sigma^2/(mu eps), n)."""
    if q.mu is None:
        raise ValueError("PL bounds need mu")
    B = snapshot_size(q, case, mu=q.mu)
    log_term = math.log(1.0 / q.eps)
    snap = B / (q.mu * math.sqrt(q.b))
    inner = q.b / q.mu
    return BoundResult(sfo=(snap + inner) * log_term, po=log_term / q.mu, regime=f"ProxSVRG+ PL {case}",
                       dominant="snapshot" if snap >= inner else "minibatch", constants=CONSTANTS_ASYMPTOTIC)


@dataclass(frozen=True)
class MinibatchChoice:
    b_star: int
    b_continuous: float
    sfo: float


def _sfo_shape(B: float, b: float) -> float:
    return B / math.sqrt(b) + b


def optimal_minibatch(q: BoundQuery, case: str = "finite") -> MinibatchChoice:
    """Integer b in [1, n] minimizing the exact-constant SFO bound of `bounds_theorem1`.

    The bound is proportional to B/sqrt(b) + b, convex in b with stationary
    point (B/2)^{2/3}; the integer scan covers a log grid plus the
    neighbourhood of that point.
    """
    B = snapshot_size(q, case)
    b_cont = (B / 2.0) ** (2.0 / 3.0)
    cands = {1, q.n}
    k = 1
    while k <= q.n:
        cands.add(k)
        k *= 2
    centre = int(math.floor(b_cont))
    cands.update(range(centre - 2, centre + 4))
    cands = sorted(c for c in cands if 1 <= c <= q.n)
    best = min(cands, key=lambda c: (_sfo_shape(B, c), c))
    # walk downhill from the best candidate; convexity makes the local minimum global
    for step in (-1, 1):
        while 1 <= best + step <= q.n and _sfo_shape(B, best + step) < _sfo_shape(B, best):
            best += step
    res = bounds_theorem1(replace(q, b=best), case)
    return MinibatchChoice(best, b_cont, res.sfo)


# -- comparison rows (unit constants) ------------------------------------------------


def comparison_rows(q: BoundQuery) -> dict[str, BoundResult]:
    """Stationarity-target complexities of the compared methods, unit constants."""
    n, b, eps = q.n, q.b, q.eps
    A = CONSTANTS_ASYMPTOTIC
    rows = {
        "ProxGD": BoundResult(n / eps, 1 / eps, "full gradient", "n/eps", A),
        "ProxSGD": BoundResult(b / eps, 1 / eps, "minibatch SGD", "b/eps", A, valid=b >= 1 / eps),
        "ProxSVRG": BoundResult(n / (eps * math.sqrt(b)) + n, n / (eps * b**1.5), "ProxSVRG/SAGA",
                                "n/(eps sqrt b)", A, valid=b <= n ** (2 / 3)),
        "ProxSVRG+": BoundResult(n / (eps * math.sqrt(b)) + b / eps, 1 / eps, "ProxSVRG+ finite",
                                 "n/(eps sqrt b)" if n / math.sqrt(b) >= b else "b/eps", A),
    }
    if q.sigma is not None:
        nm = min(n, 1 / eps)
        rows["SCSG"] = BoundResult(b ** (1 / 3) / eps * nm ** (2 / 3), float("nan"), "SCSG (h = 0)",
                                   "b^{1/3}/eps (n ^ 1/eps)^{2/3}", A)
        rows["Natasha1.5"] = BoundResult(eps ** (-5 / 3), eps ** (-5 / 3), "Natasha1.5", "1/eps^{5/3}", A)
        rows["ProxSVRG+ online"] = BoundResult(nm / (eps * math.sqrt(b)) + b / eps, 1 / eps, "ProxSVRG+ online",
                                               "(n ^ 1/eps)/(eps sqrt b)" if nm / math.sqrt(b) >= b else "b/eps", A)
    return rows


def comparison_rows_pl(q: BoundQuery) -> dict[str, BoundResult]:
    """Linear-rate complexities under PL, unit constants."""
    if q.mu is None:
        raise ValueError("PL comparison needs mu")
    n, b, eps, mu = q.n, q.b, q.eps, q.mu
    lg = math.log(1 / eps)
    A = CONSTANTS_ASYMPTOTIC
    rows = {
        "ProxGD": BoundResult(n / mu * lg, lg / mu, "full gradient", "n/mu", A),
        "ProxSVRG": BoundResult((n / (mu * math.sqrt(b)) + n) * lg, n / (mu * b**1.5) * lg, "ProxSVRG/SAGA",
                                "n/(mu sqrt b)", A, valid=b <= n ** (2 / 3)),
        "ProxSVRG+": bounds_theorem2_pl(q),
    }
    if q.sigma is not None:
        nm = min(n, 1 / (mu * eps))
        rows["SCSG"] = BoundResult((b ** (1 / 3) / mu * nm ** (2 / 3) + nm) * lg, float("nan"), "SCSG (h = 0)",
                                   "b^{1/3}/mu (n ^ 1/(mu eps))^{2/3}", A)
        rows["ProxSVRG+ online"] = bounds_theorem2_pl(q, "online")
    return rows


def table2_minibatches(n: int, eps: float) -> dict[str, float]:
    """Recommended minibatch sizes: 1, eps^{-2/3}, n^{2/3}, n."""
    return {"b=1": 1.0, "b=1/eps^{2/3}": eps ** (-2 / 3), "b=n^{2/3}": n ** (2 / 3), "b=n": float(n)}


def beats_proxgd(n: int, b: float) -> bool:
    """Whether the unit-constant ProxSVRG+ SFO bound (B = n) is below ProxGD's n/eps."""
    return n / math.sqrt(b) + b < n
