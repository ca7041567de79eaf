"""GCRF learning and inference in a Laplacian eigenbasis.

With ``Q = alpha I + beta L`` and ``L ~ U diag(mu) U^T``, every quantity the
learner needs is a sum over the N eigen-coordinates:

    lam_i = alpha + beta * mu_i          (eigenvalues of Q)
    m_i   = alpha * r_i / lam_i          (mean, projected)
    log P = -sum lam_i (c_i - m_i)^2 + 1/2 sum log(2 lam_i) - N/2 log(2 pi)

where ``c = U^T y`` and ``r = U^T R`` are computed once up front.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NonPositiveParamError
from .spectral import SpectralBasis, back_project, project


@dataclass(frozen=True)
class GcrfProblem:
    c: np.ndarray
    r: np.ndarray
    mu_hat: np.ndarray
    basis: SpectralBasis | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.c.shape == self.r.shape == self.mu_hat.shape) or self.c.ndim != 1:
            raise DimensionMismatchError("c, r and mu_hat must be vectors of equal length")
        if np.any(self.mu_hat < 0):
            raise ValueError("eigenvalue estimates must be nonnegative")

    @property
    def n(self) -> int:
        return self.c.shape[0]


def build_problem(basis: SpectralBasis, y, R) -> GcrfProblem:
    """Project outputs and unstructured predictions onto the basis once."""
    return GcrfProblem(project(basis, y), project(basis, R), basis.eigenvalues, basis)


def _check_params(alpha, beta, allow_zero_beta=False):
    if not alpha > 0 or not (beta > 0 or (allow_zero_beta and beta == 0)):
        raise NonPositiveParamError(f"alpha and beta must be positive, got {alpha}, {beta}")


def _terms(p: GcrfProblem, alpha, beta):
    lam = alpha + beta * p.mu_hat
    m = alpha * p.r / lam
    return lam, m


def log_likelihood(p: GcrfProblem, alpha: float, beta: float) -> float:
    """Conditional log-density of the training outputs (normalization included)."""
    _check_params(alpha, beta, allow_zero_beta=True)
    lam, m = _terms(p, alpha, beta)
    quad = np.sum(lam * (p.c - m) ** 2)
    return float(-quad + 0.5 * np.sum(np.log(2.0 * lam)) - 0.5 * p.n * math.log(2.0 * math.pi))


def gradients(p: GcrfProblem, alpha: float, beta: float) -> tuple[float, float]:
    """Partial derivatives of ``log_likelihood`` with respect to alpha and beta.

    In matrix form (``mean = alpha Q^-1 R``)::

        d/dalpha = -y'y + 2 y'R - 2 R'mean + mean'mean + tr(Q^-1)/2
        d/dbeta  = -y'Ly + mean'L mean + tr(Q^-1 L)/2
    """
    _check_params(alpha, beta, allow_zero_beta=True)
    lam, m = _terms(p, alpha, beta)
    c, r, mu = p.c, p.r, p.mu_hat
    d_alpha = -(c @ c) + 2.0 * (c @ r) - 2.0 * (r @ m) + m @ m + 0.5 * np.sum(1.0 / lam)
    d_beta = mu @ (m * m) - mu @ (c * c) + 0.5 * np.sum(mu / lam)
    return float(d_alpha), float(d_beta)


# Beyond this, exp() of a log-parameter over- or underflows.
_LOG_MAX = 700.0


@dataclass(frozen=True)
class FitOptions:
    step: float = 0.1
    tol: float = 1e-6
    max_iter: int = 500
    alpha0: float = 1.0
    beta0: float = 1.0
    min_step: float = 1e-14


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: float
    iterations: int
    final_loglik: float
    converged: bool
    trajectory: tuple = ()


def fit(p: GcrfProblem, opts: FitOptions | None = None) -> FitResult:
    """Maximize the likelihood by gradient ascent on ``(log alpha, log beta)``.

    The objective is the per-node log-likelihood (same maximizer, step size
    independent of N). A step that lowers it is halved and retried; the step
    length carries over between iterations. Stops when the per-node change
    drops below ``opts.tol``.
    """
    opts = opts or FitOptions()
    n = p.n
    u, v = math.log(opts.alpha0), math.log(opts.beta0)

    def objective(u, v):
        if max(u, v) > _LOG_MAX or min(u, v) < -_LOG_MAX:
            return -math.inf
        a, b = math.exp(u), math.exp(v)
        val = log_likelihood(p, a, b) / n
        return val if math.isfinite(val) else -math.inf

    f = objective(u, v)
    trajectory = [f * n]
    step = opts.step
    converged = False
    iterations = 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        while iterations < opts.max_iter:
            a, b = math.exp(u), math.exp(v)
            ga, gb = gradients(p, a, b)
            gu, gv = a * ga / n, b * gb / n
            while step >= opts.min_step:
                nu, nv = u + step * gu, v + step * gv
                nf = objective(nu, nv)
                if nf >= f:
                    break
                step *= 0.5
            else:
                # No ascent possible at machine precision: stationary point.
                converged = True
                break
            iterations += 1
            change = nf - f
            u, v, f = nu, nv, nf
            trajectory.append(f * n)
            if abs(change) < opts.tol:
                converged = True
                break
    return FitResult(math.exp(u), math.exp(v), iterations, f * n, converged, tuple(trajectory))


def predict(basis: SpectralBasis, alpha: float, beta: float, R) -> np.ndarray:
    """GCRF mean ``(alpha I + beta L)^-1 alpha R`` in the given basis."""
    _check_params(alpha, beta, allow_zero_beta=True)
    r = project(basis, R)
    return back_project(basis, alpha * r / (alpha + beta * basis.eigenvalues))


def mse(yhat, y) -> float:
    yhat, y = np.asarray(yhat, dtype=float), np.asarray(y, dtype=float)
    if yhat.shape != y.shape:
        raise DimensionMismatchError(f"shapes {yhat.shape} and {y.shape} differ")
    return float(np.mean((yhat - y) ** 2))
