"""Array-gain and achievable-rate evaluation plus empirical CDFs.

Array gain is always computed as a direct inner product with the subcarrier's
steering vector, so it applies to arbitrary unit-norm precoder columns; the
closed-form Dirichlet-kernel ratio is provided separately and agrees with the
inner product on unclamped joint designs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import jacobi_eigh
from .model import SystemConfig, _readonly, freq_ratio, ula_response


def squint_offset(cfg: SystemConfig, k: int, psi: float) -> float:
    """Phase-slope mismatch (pi/2) * (f_k/f_c - 1) * psi of subcarrier k at direction psi."""
    return 0.5 * np.pi * (freq_ratio(cfg, k) - 1.0) * psi


def array_gain(f: np.ndarray, cfg: SystemConfig, k: int, psi: float) -> float:
    """|v_k(psi)^H f| for a unit-norm precoder column f (norm enforced to 1e-9)."""
    f = np.asarray(f)
    if abs(np.linalg.norm(f) - 1.0) > 1e-9:
        raise ValueError("precoder column must have unit 2-norm")
    v = ula_response(cfg, k, psi)
    return float(abs(np.vdot(v, f)))


def dirichlet_gain(n: int, delta) -> np.ndarray | float:
    """|sin(n*delta) / (n*sin(delta))|, the gain envelope of an n-element subarray.

    The removable singularity at sin(delta) -> 0 evaluates to 1 (guard at
    |sin(delta)| < 1e-9).
    """
    if n < 1:
        raise ValueError("subarray size must be >= 1")
    delta = np.asarray(delta, float)
    s = np.sin(delta)
    tiny = np.abs(s) < 1e-9
    safe = np.where(tiny, 1.0, s)
    out = np.where(tiny, 1.0, np.abs(np.sin(n * delta) / (n * safe)))
    return float(out) if out.ndim == 0 else out


def achievable_rate(h_k: np.ndarray, f_k: np.ndarray, w_k: np.ndarray,
                    rho: float, n_streams: int) -> float:
    """Per-subcarrier rate log2 det(I + (rho/n_streams) * (HFW)(HFW)^H) [bits/s/Hz].

    Evaluated through the Hermitian eigenvalues of the receive-side Gram matrix
    for numerical stability.
    """
    g = h_k @ f_k @ w_k
    eig, _ = jacobi_eigh(g @ g.conj().T)
    eig = np.clip(eig, 0.0, None)
    return float(np.sum(np.log2(1.0 + (rho / n_streams) * eig)))


def rate_lower_bound(h_k: np.ndarray, f_k: np.ndarray, w_k: np.ndarray,
                     rho: float, n_streams: int, sv_tol: float = 1e-12) -> float:
    """Determinant-based lower bound on the per-subcarrier rate.

    log2(1 + rho * det(S^2 V^H F W W^H F^H V)^(1/n_streams)) with H = U S V^H.
    The singular factors come from the eigendecomposition of the small matrix
    H H^H; right singular vectors are recovered as H^H U / S, with
    zero-singular-value columns dropped (a rank-deficient channel sends the
    determinant, and hence the bound, to zero). Never exceeds achievable_rate
    on the same inputs.
    """
    h_k = np.asarray(h_k)
    eig, u = jacobi_eigh(h_k @ h_k.conj().T)
    eig = np.clip(eig, 0.0, None)
    keep = eig > sv_tol * max(float(eig[0]), 1e-300)
    if np.count_nonzero(keep) < n_streams:
        return 0.0
    sv = np.sqrt(eig[keep])
    u = u[:, keep]
    v = (h_k.conj().T @ u) / sv
    core = v.conj().T @ f_k @ w_k
    det = float(np.prod(sv**2).real * abs(np.linalg.det(core)) ** 2)
    return float(np.log2(1.0 + rho * max(det, 0.0) ** (1.0 / n_streams)))


def empirical_cdf(values, grid=None):
    """Empirical CDF of a sample: fraction of entries <= x.

    Evaluated at the sorted sample points plus any supplied grid points;
    returns (x, cdf) arrays with cdf non-decreasing and ending at 1.
    """
    values = np.asarray(values, float).ravel()
    if values.size == 0:
        raise ValueError("empirical_cdf needs at least one value")
    xs = np.unique(values if grid is None else np.concatenate([values, np.asarray(grid, float).ravel()]))
    sorted_vals = np.sort(values)
    cdf = np.searchsorted(sorted_vals, xs, side="right") / values.size
    return xs, cdf


@dataclass(frozen=True)
class GainProfile:
    """Per-subcarrier array gains g[k] in [0, 1] at one direction, with their CDF."""

    psi: float
    gains: np.ndarray
    cdf_x: np.ndarray
    cdf_y: np.ndarray

    def __post_init__(self):
        for name in ("gains", "cdf_x", "cdf_y"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), float)))

    def fraction_at_least(self, threshold: float) -> float:
        return float(np.mean(self.gains >= threshold))


@dataclass(frozen=True)
class RateProfile:
    """Per-subcarrier (or pooled) rates with their mean and CDF."""

    rates: np.ndarray
    mean_rate: float
    cdf_x: np.ndarray
    cdf_y: np.ndarray

    def __post_init__(self):
        for name in ("rates", "cdf_x", "cdf_y"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), float)))


def gain_profile(cfg: SystemConfig, columns: np.ndarray, psi: float,
                 grid=None) -> GainProfile:
    """Evaluate one precoder column per subcarrier (shape (K, n_tx)) at direction psi."""
    columns = np.asarray(columns)
    if columns.shape != (cfg.n_subcarriers, cfg.n_tx):
        raise ValueError("columns must have shape (K, n_tx)")
    gains = np.array([array_gain(columns[k - 1], cfg, k, psi)
                      for k in range(1, cfg.n_subcarriers + 1)])
    if np.any(gains > 1.0 + 1e-12) or np.any(gains < 0.0):
        raise ValueError("array gain outside [0, 1]")
    xs, cdf = empirical_cdf(gains, grid)
    return GainProfile(psi=float(psi), gains=gains, cdf_x=xs, cdf_y=cdf)


def rate_profile(rates, grid=None) -> RateProfile:
    """Wrap a rate sample (any shape) into a profile with mean and CDF."""
    rates = np.asarray(rates, float).ravel()
    if np.any(rates < 0):
        raise ValueError("rates must be non-negative")
    xs, cdf = empirical_cdf(rates, grid)
    return RateProfile(rates=rates, mean_rate=float(rates.mean()), cdf_x=xs, cdf_y=cdf)
