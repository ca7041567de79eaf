"""Nearest Kronecker product via a rank-1 approximation of the rearranged matrix.

For ``A`` of shape ``(m1*m2, n1*n2)``, ``rearrange`` stacks the transposed,
column-stacked ``m2 x n2`` blocks so that
``||A - B x C||_F == ||R(A) - vec(B) vec(C)^T||_F``.  The leading singular
triple of ``R(A)`` then gives the minimizing ``B`` and ``C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricFactorError, BadFactorizationError, NoConvergenceError
from .graph import SimilarityMatrix, as_array
from .randnet import RngStream

ZERO_DUST = 1e-12


@dataclass(frozen=True)
class KronFactors:
    B: np.ndarray
    C: np.ndarray
    sigma1: float
    residual_fro: float


def vec(M) -> np.ndarray:
    """Stack the columns of M into one vector."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, shape) -> np.ndarray:
    return np.asarray(v).reshape(shape, order="F")


def rearrange(A, m1: int, n1: int, m2: int, n2: int) -> np.ndarray:
    """The permuted matrix R(A) of shape ``(m1*n1, m2*n2)``.

    Row ``j*m1 + i`` is ``vec(A_ij)^T`` where ``A_ij`` is block (i, j) of size
    ``m2 x n2``.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (m1 * m2, n1 * n2):
        raise BadFactorizationError(
            f"matrix of shape {A.shape} does not split into ({m1}x{m2}, {n1}x{n2})"
        )
    # A4[i, k, j, l] = A[i*m2 + k, j*n2 + l]; target index [(j, i), (l, k)].
    A4 = A.reshape(m1, m2, n1, n2)
    return A4.transpose(2, 0, 3, 1).reshape(n1 * m1, n2 * m2)


def dominant_singular_triple(M, tol: float = 1e-10, max_iter: int = 5000, rng=None):
    """Leading singular value and vectors by alternating power iteration.

    Stops once ``||M v - s u|| <= tol*s`` and ``||M^T u - s v|| <= tol*s``.
    """
    M = np.asarray(M, dtype=float)
    if rng is None:
        rng = RngStream(0)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if not np.any(M):
        raise NoConvergenceError("zero matrix has no dominant singular pair")

    v = gen.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        u = M @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            # Start vector orthogonal to the row space; restart.
            v = gen.standard_normal(M.shape[1])
            v /= np.linalg.norm(v)
            continue
        u /= nu
        w = M.T @ u
        sigma = np.linalg.norm(w)
        v = w / sigma
        # M^T u = sigma v holds by construction; test the other side.
        if np.linalg.norm(M @ v - sigma * u) <= tol * sigma:
            u = M @ v
            u /= np.linalg.norm(u)
            if np.linalg.norm(M.T @ u - sigma * v) <= tol * sigma:
                return float(sigma), u, v
    raise NoConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def nearest_kron(A, n1: int, n2: int, *, tol: float = 1e-10, max_iter: int = 5000, rng=None) -> KronFactors:
    """Square factors ``B`` (n1 x n1) and ``C`` (n2 x n2) minimizing ``||A - B x C||_F``."""
    A = as_array(A)
    RA = rearrange(A, n1, n1, n2, n2)
    sigma, u, v = dominant_singular_triple(RA, tol=tol, max_iter=max_iter, rng=rng)
    B = unvec(sigma * u, (n1, n1))
    C = unvec(v, (n2, n2))
    if B.sum() < 0:
        B, C = -B, -C
    residual = float(np.linalg.norm(RA - np.outer(vec(B), vec(C))))
    return KronFactors(B, C, sigma, residual)


def kron_residual(A, B, C) -> float:
    """``||A - B x C||_F`` computed through the rearrangement (no product formed)."""
    RA = rearrange(as_array(A), B.shape[0], B.shape[1], C.shape[0], C.shape[1])
    return float(np.linalg.norm(RA - np.outer(vec(B), vec(C))))


def _keep_strongest(M: np.ndarray, rho: float) -> np.ndarray:
    n = M.shape[0]
    iu, ju = np.triu_indices(n, 1)
    vals = M[iu, ju]
    keep = math.floor(rho * iu.size + 1e-9)
    # Stable descending sort: among ties, earlier (row-major) pairs win.
    order = np.argsort(-vals, kind="stable")[:keep]
    order = order[vals[order] > ZERO_DUST]
    out = np.zeros_like(M)
    out[iu[order], ju[order]] = vals[order]
    return out + out.T


def sparsify_factors(f: KronFactors, rho1: float, rho2: float, *, sym_tol: float = 1e-8,
                     neg_tol: float = 1e-10) -> tuple[SimilarityMatrix, SimilarityMatrix]:
    """Threshold the recovered factors back to the known edge densities.

    Keeps the ``floor(rho * n(n-1)/2)`` strongest off-diagonal pairs of each
    factor, zeroes the diagonal, and returns valid similarity matrices.
    """
    out = []
    for M, rho in ((f.B, rho1), (f.C, rho2)):
        M = np.asarray(M, dtype=float)
        if M.shape[0] != M.shape[1]:
            raise AsymmetricFactorError("factor is not square")
        scale = max(np.max(np.abs(M)), 1e-300)
        if np.max(np.abs(M - M.T)) > sym_tol * scale:
            raise AsymmetricFactorError("recovered factor is not symmetric")
        if np.min(M) < -neg_tol * scale:
            raise AsymmetricFactorError("recovered factor has negative entries")
        M = np.clip(0.5 * (M + M.T), 0.0, None)
        out.append(SimilarityMatrix(_keep_strongest(M, rho)))
    return out[0], out[1]
