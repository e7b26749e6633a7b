"""Small dense linear-algebra kernels: a cyclic-Jacobi Hermitian eigensolver and a
pivoted Gaussian-elimination solve that preserves extended-precision dtypes.

The matrices handled here are tiny (RF-chain scale, typically 4x4), so simple
O(n^3) routines with deterministic behaviour beat any external dependency; the
Jacobi core runs on Python scalars, which is several times faster than sliced
numpy updates at these sizes.
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, v) with eigenvalues ``w`` sorted in descending order and the
    matching eigenvector columns in ``v``. Each column is phase-fixed so its
    largest-magnitude entry is real and positive, which makes results
    deterministic for tests.

    Convergence: off-diagonal Frobenius mass below ``tol`` relative to the
    Frobenius norm of the input, within ``max_sweeps`` full sweeps; otherwise
    raises ``numpy.linalg.LinAlgError`` with the residual.
    """
    a_in = np.asarray(a)
    n = a_in.shape[0]
    if a_in.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return np.array([float(a_in[0, 0].real)]), np.eye(1, dtype=complex)

    m = [[complex(a_in[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = math.sqrt(sum(abs(m[i][j]) ** 2 for i in range(n) for j in range(n)))
    if scale == 0.0:
        return np.zeros(n), np.eye(n, dtype=complex)
    threshold = tol * scale

    def offdiag() -> float:
        return math.sqrt(sum(abs(m[i][j]) ** 2
                             for i in range(n) for j in range(n) if i != j))

    converged = False
    for _ in range(max_sweeps):
        if offdiag() <= threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                r = abs(apq)
                if r == 0.0:
                    continue
                beta = apq / r
                tau = (m[q][q].real - m[p][p].real) / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sb = s * beta
                sbc = s * beta.conjugate()
                # m <- J^H m J with J[p,p]=J[q,q]=c, J[p,q]=s*beta, J[q,p]=-s*conj(beta)
                for i in range(n):
                    mip, miq = m[i][p], m[i][q]
                    m[i][p] = c * mip - sbc * miq
                    m[i][q] = sb * mip + c * miq
                for i in range(n):
                    mpi, mqi = m[p][i], m[q][i]
                    m[p][i] = c * mpi - sb * mqi
                    m[q][i] = sbc * mpi + c * mqi
                m[p][q] = 0j
                m[q][p] = 0j
                for i in range(n):
                    vip, viq = v[i][p], v[i][q]
                    v[i][p] = c * vip - sbc * viq
                    v[i][q] = sb * vip + c * viq
    else:
        converged = offdiag() <= threshold
    if not converged:
        raise np.linalg.LinAlgError(
            f"Jacobi sweep limit {max_sweeps} reached; off-diagonal mass "
            f"{offdiag():.3e} above {threshold:.3e}"
        )

    w = np.array([m[i][i].real for i in range(n)])
    vecs = np.array(v, dtype=complex)
    order = np.argsort(w)[::-1]
    return w[order], fix_phase(vecs[:, order])


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    v = np.array(v, dtype=complex)
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        pivot = v[i, j]
        if abs(pivot) > 0:
            v[:, j] *= np.conj(pivot) / abs(pivot)
    return v


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting.

    Works in the dtype of the inputs, so longdouble systems are solved in
    extended precision (LAPACK-backed solvers would silently downcast).
    """
    a = np.array(a)
    b = np.array(b)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise ValueError("expected square matrix and matching vector")
    for i in range(n):
        p = i + int(np.argmax(np.abs(a[i:, i])))
        if a[p, i] == 0:
            raise np.linalg.LinAlgError("singular matrix in solve_dense")
        if p != i:
            a[[i, p]] = a[[p, i]]
            b[[i, p]] = b[[p, i]]
        factors = a[i + 1:, i] / a[i, i]
        a[i + 1:, i:] -= factors[:, None] * a[i, i:]
        b[i + 1:] -= factors * b[i]
    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x
