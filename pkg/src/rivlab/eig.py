"""Cyclic Jacobi eigenvalues for stacks of small symmetric matrices."""

from __future__ import annotations

import numpy as np

from .specfun import ConvergenceError


class SymmetryError(ValueError):
    pass


def jacobi_eigvalsh(G, tol: float = 1e-12, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues (ascending) of each symmetric matrix in ``G[..., K, K]``.

    Plain cyclic-by-row Jacobi: each sweep annihilates every off-diagonal
    pair once, applied to the whole stack at the same time.  Stops when the
    off-diagonal Frobenius norm of every matrix is below ``tol`` times its
    full norm (or below ``tol`` outright for near-zero matrices).
    """
    A = np.array(G, dtype=float, copy=True)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise SymmetryError("expected square matrices in the last two axes")
    scale = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    if np.any(np.abs(A - np.swapaxes(A, -1, -2)) > 1e-12 * np.maximum(scale, 1.0)[..., None, None]):
        raise SymmetryError("matrix is not symmetric")
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    n = A.shape[-1]
    thresh = tol * np.maximum(scale, 1.0)
    offmask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A[..., offmask] ** 2, axis=-1))
        if np.all(off <= thresh):
            return np.sort(np.diagonal(A, axis1=-2, axis2=-1), axis=-1)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[..., p, q]
                app = A[..., p, p]
                aqq = A[..., q, q]
                nz = apq != 0.0
                safe = np.where(nz, apq, 1.0)
                with np.errstate(over="ignore"):
                    theta = (aqq - app) / (2.0 * safe)
                    t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the rotation in the (p, q) plane
                cp = A[..., :, p].copy()
                cq = A[..., :, q].copy()
                A[..., :, p] = c[..., None] * cp - s[..., None] * cq
                A[..., :, q] = s[..., None] * cp + c[..., None] * cq
                rp = A[..., p, :].copy()
                rq = A[..., q, :].copy()
                A[..., p, :] = c[..., None] * rp - s[..., None] * rq
                A[..., q, :] = s[..., None] * rp + c[..., None] * rq
                A[..., p, q] = 0.0
                A[..., q, p] = 0.0
    raise ConvergenceError("Jacobi sweeps did not converge")
