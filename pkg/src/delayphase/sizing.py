"""Minimum delay-element count for a guaranteed array gain.

Two routes to the same question: a closed form built on a second-order
approximation of the subarray gain (conservative for small squint offsets),
and an exact greedy search over the divisors of the antenna count. Both
round up to a divisor of n_tx so the array splits into equal subarrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import dirichlet_gain
from .model import SystemConfig, freq_ratios


def divisors(n: int) -> list:
    """All positive divisors of n, ascending (trial division up to sqrt(n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def divisor_ceiling(x: float, n: int) -> int:
    """Smallest divisor of n that is >= x. Requires x <= n."""
    if x > n:
        raise ValueError(f"no divisor of {n} is >= {x}")
    for d in divisors(n):
        if d >= x:
            return d
    return n  # unreachable: n itself qualifies


def taylor_gain(n_tx: int, m: int, delta) -> np.ndarray | float:
    """Second-order gain surrogate q(delta) = 1 + (1/6) (1 - (n_tx/m)^2) delta^2.

    Equals 1 identically when every antenna has its own delay element (m = n_tx).
    """
    delta = np.asarray(delta, float)
    q = 1.0 + (1.0 - (n_tx / m) ** 2) / 6.0 * delta * delta
    return float(q) if q.ndim == 0 else q


def gain_margin(g0: float, bandwidth: float, f_c: float, n_subcarriers: int,
                psi_max: float) -> float:
    """Gain headroom constant: 6 (1 - g0) / ((pi/2) (B/f_c) (K-1)/(2K))^2 / psi_max^2."""
    if not 0 < g0 < 1:
        raise ValueError("g0 must lie strictly between 0 and 1")
    if psi_max <= 0:
        raise ValueError("psi_max must be positive")
    edge = (np.pi / 2.0) * (bandwidth / f_c) * (n_subcarriers - 1) / (2.0 * n_subcarriers)
    return 6.0 * (1.0 - g0) / (edge * edge * psi_max * psi_max)


def min_ttds(cfg: SystemConfig, g0: float, psi_max: float) -> int:
    """Closed-form minimum per-chain delay-element count for worst-subcarrier gain >= g0.

    Divisor-ceiling of sqrt(n_tx^2 / (1 + margin)).
    """
    omega = gain_margin(g0, cfg.bandwidth, cfg.f_c, cfg.n_subcarriers, psi_max)
    return divisor_ceiling(math.sqrt(cfg.n_tx**2 / (1.0 + omega)), cfg.n_tx)


def worst_subarray_gain(cfg: SystemConfig, m: int, psi_set) -> float:
    """Minimum over subcarriers and directions of the (n_tx/m)-element subarray gain."""
    deltas = 0.5 * np.pi * (freq_ratios(cfg) - 1.0)
    worst = 1.0
    for psi in np.atleast_1d(psi_set):
        g = dirichlet_gain(cfg.n_tx // m, deltas * psi)
        worst = min(worst, float(np.min(g)))
    return worst


def min_ttds_exact(cfg: SystemConfig, g0: float, psi_set) -> int:
    """Greedy oracle: smallest divisor m of n_tx whose subarray gain is >= g0
    at every subcarrier for every supplied direction."""
    for m in divisors(cfg.n_tx):
        if worst_subarray_gain(cfg, m, psi_set) >= g0:
            return m
    return cfg.n_tx  # unreachable: m = n_tx gives gain 1 everywhere


def min_ttds_linear(cfg: SystemConfig, g0: float, psi_max: float) -> float:
    """Large-K relaxation: (pi n_tx / (4 f_c)) sqrt(psi_max^2 / (6 (1-g0))) * B.

    Not rounded; linear in the bandwidth. Diverges as g0 -> 1 (returns inf).
    """
    if psi_max < 0:
        raise ValueError("psi_max must be non-negative")
    if g0 >= 1.0:
        return math.inf
    return (np.pi * cfg.n_tx / (4.0 * cfg.f_c)) * math.sqrt(
        psi_max**2 / (6.0 * (1.0 - g0))) * cfg.bandwidth


def power_consumption_mw(n_rf: int, m: int, n_tx: int,
                         p_ttd_mw: float = 100.0, p_ps_mw: float = 20.0) -> float:
    """Analog front-end power: n_rf*m delay elements plus n_rf*n_tx phase shifters."""
    return n_rf * m * p_ttd_mw + n_rf * n_tx * p_ps_mw


@dataclass(frozen=True)
class SizingResult:
    """Sizing outcome with an audit trace of worst-case gain per candidate divisor."""

    m_star: int
    omega: float
    m_exact: int
    g0: float
    psi_max: float
    worst_gain_by_divisor: dict = field(default_factory=dict)
    power_mw: float = 0.0

    def to_dict(self) -> dict:
        return {
            "m_star": self.m_star,
            "omega": self.omega,
            "m_exact": self.m_exact,
            "g0": self.g0,
            "psi_max": self.psi_max,
            "worst_gain_by_divisor": {str(k): v for k, v in self.worst_gain_by_divisor.items()},
            "power_mw": self.power_mw,
        }


def size_ttds(cfg: SystemConfig, g0: float, psi_max: float) -> SizingResult:
    """Run both sizing routes and collect the per-divisor gain trace for audit."""
    omega = gain_margin(g0, cfg.bandwidth, cfg.f_c, cfg.n_subcarriers, psi_max)
    m_star = min_ttds(cfg, g0, psi_max)
    trace = {m: worst_subarray_gain(cfg, m, psi_max) for m in divisors(cfg.n_tx)}
    m_exact = min(m for m, worst in trace.items() if worst >= g0)
    return SizingResult(
        m_star=m_star,
        omega=omega,
        m_exact=m_exact,
        g0=g0,
        psi_max=psi_max,
        worst_gain_by_divisor=trace,
        power_mw=power_consumption_mw(cfg.n_rf, m_star, cfg.n_tx),
    )
