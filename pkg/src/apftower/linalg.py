"""Dense Hermitian eigenvalues for small complex matrices.

The cyclic Jacobi method is used up to ``JACOBI_MAX``; beyond that the
LAPACK driver behind :func:`numpy.linalg.eigvalsh` takes over, because a
Python-level sweep over a 4096 x 4096 matrix would take hours.
"""

from __future__ import annotations

import math

import numpy as np

JACOBI_MAX = 256
JACOBI_TOL = 1e-13
MAX_SWEEPS = 60


class EigenError(RuntimeError):
    """Jacobi sweeps did not converge within the iteration cap."""


def jacobi_eigvalsh(a, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues (ascending) of a Hermitian matrix by cyclic complex Jacobi.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary, then applies the real symmetric Jacobi rotation. Sweeps stop once
    the off-diagonal Frobenius norm drops below ``tol`` times the full norm.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    a = 0.5 * (a + a.conj().T)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.sort(np.diag(a).real)

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            return np.sort(np.diag(a).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * (aqq - app) / r
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] acting on columns p, q
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ u
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = u.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
    raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")


def eigvalsh(a, method: str = "auto") -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    a = np.asarray(a)
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX else "lapack"
    if method == "jacobi":
        return jacobi_eigvalsh(a)
    if method == "lapack":
        return np.linalg.eigvalsh(a)
    raise ValueError(f"unknown eigensolver {method!r}")


def extreme_singular_values(a, method: str = "auto") -> tuple[float, float]:
    """(sigma_min, sigma_max) of ``a`` from the eigenvalues of a^H a."""
    a = np.asarray(a)
    ev = eigvalsh(a.conj().T @ a, method)
    return math.sqrt(max(ev[0], 0.0)), math.sqrt(max(ev[-1], 0.0))


def operator_norm(a, method: str = "auto") -> float:
    return extreme_singular_values(a, method)[1]
