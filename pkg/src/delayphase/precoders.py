"""Materialization of the analog precoding chain and the baseband digital precoder.

The analog precoder factors into a frequency-flat phase-shifter matrix and a
subcarrier-dependent delay matrix; their product has constant entry modulus
1/sqrt(n_tx) by construction. Phase-shifter settings are stored in units of pi
radians and converted to complex exponentials only here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import fix_phase, jacobi_eigh
from .model import SystemConfig, _readonly, subcarrier_frequency, ula_response


@dataclass(frozen=True)
class AnalogDesign:
    """Phase-shifter table (units of pi) and TTD delay table (seconds).

    Shapes: phases (n_rf, ttds_per_rf, ps_per_ttd), delays (n_rf, ttds_per_rf).
    """

    phases: np.ndarray
    delays: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, float)
        delays = np.asarray(self.delays, float)
        if phases.ndim != 3 or delays.ndim != 2 or phases.shape[:2] != delays.shape:
            raise ValueError("phases must be (n_rf, M, N) and delays (n_rf, M)")
        object.__setattr__(self, "phases", _readonly(phases))
        object.__setattr__(self, "delays", _readonly(delays))

    @property
    def n_rf(self) -> int:
        return self.phases.shape[0]

    def normalized_delays(self, f_c: float) -> np.ndarray:
        """Dimensionless delay table 2 * f_c * delays."""
        return 2.0 * f_c * self.delays

    def validate(self, cfg: SystemConfig) -> None:
        """Check shapes against cfg and the per-device delay range [0, t_max]."""
        expect = (cfg.n_rf, cfg.ttds_per_rf, cfg.ps_per_ttd)
        if self.phases.shape != expect:
            raise ValueError(f"phase table shape {self.phases.shape} != {expect}")
        if np.any(self.delays < 0) or np.any(self.delays > cfg.t_max):
            raise ValueError("delays must lie within [0, t_max]")

    def to_dict(self) -> dict:
        return {"phases": self.phases.tolist(), "delays": self.delays.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "AnalogDesign":
        return cls(phases=np.asarray(data["phases"], float),
                   delays=np.asarray(data["delays"], float))


def build_ps_matrix(design: AnalogDesign, cfg: SystemConfig) -> np.ndarray:
    """Phase-shifter precoding matrix, shape (n_tx, M * n_rf).

    Concatenation of n_rf block-diagonal submatrices; subarray m of chain l
    holds the unit-modulus column exp(j*pi*phases[l, m]) / sqrt(n_tx). Exactly
    n_tx * n_rf entries are nonzero.
    """
    design.validate(cfg)
    n_tx, m_ttd, n_ps = cfg.n_tx, cfg.ttds_per_rf, cfg.ps_per_ttd
    f1 = np.zeros((n_tx, m_ttd * cfg.n_rf), dtype=complex)
    scale = 1.0 / np.sqrt(n_tx)
    for l in range(cfg.n_rf):
        for m in range(m_ttd):
            rows = slice(m * n_ps, (m + 1) * n_ps)
            f1[rows, l * m_ttd + m] = scale * np.exp(1j * np.pi * design.phases[l, m])
    return f1


def build_ttd_matrix(design: AnalogDesign, cfg: SystemConfig, k: int) -> np.ndarray:
    """Delay precoding matrix at subcarrier k, shape (M * n_rf, n_rf).

    Block diagonal of the per-chain vectors exp(-j*2*pi*f_k*delays[l]); every
    entry has modulus 1 on the block diagonal and 0 elsewhere.
    """
    design.validate(cfg)
    f_k = subcarrier_frequency(cfg, k)
    m_ttd = cfg.ttds_per_rf
    f2 = np.zeros((m_ttd * cfg.n_rf, cfg.n_rf), dtype=complex)
    for l in range(cfg.n_rf):
        f2[l * m_ttd:(l + 1) * m_ttd, l] = np.exp(-2j * np.pi * f_k * design.delays[l])
    return f2


def composite_precoder(design: AnalogDesign, cfg: SystemConfig, k: int) -> np.ndarray:
    """Analog precoder F1 @ F2_k at subcarrier k; all entries have modulus 1/sqrt(n_tx)."""
    return build_ps_matrix(design, cfg) @ build_ttd_matrix(design, cfg, k)


def ideal_precoder(cfg: SystemConfig, psi: np.ndarray, k: int) -> np.ndarray:
    """Per-subcarrier matched steering matrix, shape (n_tx, n_rf).

    Column l is the array response toward psi[l] at subcarrier k, so the array
    gain of every column is exactly 1. Physically realizable only with one
    delay element per antenna.
    """
    psi = np.atleast_1d(np.asarray(psi, float))
    cols = [ula_response(cfg, k, p) for p in psi]
    return np.stack(cols, axis=1)


def digital_precoder(h_k: np.ndarray, f_k: np.ndarray, n_streams: int,
                     tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Baseband precoder: dominant eigenvectors of (H F)^H (H F), power-normalized.

    The returned W satisfies ||F W||_F^2 = n_streams via a single global scale
    (only the Frobenius norm is constrained). Eigenvector phases are fixed for
    determinism; with a degenerate spectrum any orthonormal basis of the
    dominant eigenspace is a valid result.
    """
    h_eff = h_k @ f_k
    gram = h_eff.conj().T @ h_eff
    _, vecs = jacobi_eigh(gram, tol=tol, max_sweeps=max_sweeps)
    w = fix_phase(vecs[:, :n_streams])
    norm = np.linalg.norm(f_k @ w)
    if norm == 0:
        raise np.linalg.LinAlgError("analog precoder annihilates every stream")
    return w * (np.sqrt(n_streams) / norm)


@dataclass(frozen=True)
class PrecoderSet:
    """Materialized precoders for all subcarriers.

    ``ttd``, ``analog``, ``ideal`` and ``digital`` are stacked along the
    subcarrier axis; ``ideal`` and ``digital`` are None unless directions or a
    channel were supplied at build time.
    """

    f1: np.ndarray
    ttd: np.ndarray
    analog: np.ndarray
    ideal: np.ndarray | None = None
    digital: np.ndarray | None = None

    def __post_init__(self):
        for name in ("f1", "ttd", "analog", "ideal", "digital"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _readonly(value))

    def to_dict(self) -> dict:
        def cplx(a):
            return None if a is None else {"re": a.real.tolist(), "im": a.imag.tolist()}

        return {"f1": cplx(self.f1), "ttd": cplx(self.ttd), "analog": cplx(self.analog),
                "ideal": cplx(self.ideal), "digital": cplx(self.digital)}


def materialize(cfg: SystemConfig, design: AnalogDesign, psi=None,
                channel=None) -> PrecoderSet:
    """Build the full precoder stack for every subcarrier.

    psi enables the matched ideal precoder; a ChannelRealization enables the
    digital precoders (computed against the composite analog precoder).
    """
    f1 = build_ps_matrix(design, cfg)
    ttd = np.stack([build_ttd_matrix(design, cfg, k) for k in range(1, cfg.n_subcarriers + 1)])
    analog = np.einsum("ij,kjl->kil", f1, ttd)
    ideal = None
    if psi is not None:
        ideal = np.stack([ideal_precoder(cfg, psi, k) for k in range(1, cfg.n_subcarriers + 1)])
    digital = None
    if channel is not None:
        digital = np.stack([
            digital_precoder(channel.h[k - 1], analog[k - 1], cfg.n_streams)
            for k in range(1, cfg.n_subcarriers + 1)
        ])
    return PrecoderSet(f1=f1, ttd=ttd, analog=analog, ideal=ideal, digital=digital)
