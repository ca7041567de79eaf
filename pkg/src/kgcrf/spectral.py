"""Eigen-systems for the Laplacian of a Kronecker product graph.

Four ways to get a (basis, eigenvalue) pair for ``L(S1 x S2)``:

* ``exact_kron_basis`` -- dense eigendecomposition of the full Laplacian.
* ``approx_laplace_vec`` -- Kronecker products of factor Laplacian
  eigenvectors, eigenvalues ``mu_i d_j + d_i mu_j - mu_i mu_j``.
* ``approx_norm_laplace_vec`` -- Kronecker products of factor
  normalized-adjacency eigenvectors, eigenvalues ``(1 - l_i l_j) d_i d_j``.
* ``approx_msn`` -- same vectors, eigenvalues ``1 - l_i l_j`` (exact for the
  normalized Laplacian of the product, used in place of ``L``).

Factored bases never build the ``N x N`` eigenvector matrix; ``project`` and
``back_project`` work on the ``n1 x n2`` reshaping of a vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NoConvergenceError
from .graph import as_array, degree, kronecker, laplacian, normalized_adjacency

PAIRINGS = ("sorted", "vertex-order", "rayleigh")


class BasisKind(str, Enum):
    EXACT_DENSE = "ExactDense"
    LAPLACE_VEC = "LaplaceVec"
    NORM_LAPLACE_VEC = "NormLaplaceVec"
    MSN = "MSN"


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of each column positive.
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(M) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix, values ascending."""
    A = np.asarray(M, dtype=float)
    try:
        w, V = scipy.linalg.eigh(A, driver="evd", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NoConvergenceError(str(exc)) from exc
    return EigenSystem(w, _fix_signs(V))


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal basis plus paired (possibly estimated) Laplacian eigenvalues.

    For factored kinds the implied basis is ``factor1 x factor2`` and
    ``eigenvalues[i * n2 + j]`` belongs to column ``factor1[:, i] x factor2[:, j]``.
    ``ExactDense`` stores the full matrix in ``dense``.
    """

    kind: BasisKind
    eigenvalues: np.ndarray
    factor1: np.ndarray | None = None
    factor2: np.ndarray | None = None
    dense: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def shape(self) -> tuple[int, int] | None:
        if self.factor1 is None:
            return None
        return self.factor1.shape[0], self.factor2.shape[0]

    def matrix(self) -> np.ndarray:
        """Materialize the full basis (tests and small problems only)."""
        if self.dense is not None:
            return self.dense
        return np.kron(self.factor1, self.factor2)

    def permuted(self, order) -> "SpectralBasis":
        """Dense basis with columns (and eigenvalues) reordered."""
        order = np.asarray(order)
        return SpectralBasis(BasisKind.EXACT_DENSE, self.eigenvalues[order], dense=self.matrix()[:, order])


def _clamp(mu: np.ndarray) -> np.ndarray:
    return np.maximum(mu, 0.0)


def exact_kron_basis(S1, S2, cap: int | None = None) -> SpectralBasis:
    """Dense eigendecomposition of ``L(S1 x S2)``; the reference for the estimates."""
    return exact_basis(kronecker(as_array(S1), as_array(S2), cap=cap))


def exact_basis(S) -> SpectralBasis:
    """Dense eigendecomposition of ``L(S)`` for an arbitrary similarity matrix."""
    es = sym_eig(laplacian(S))
    return SpectralBasis(BasisKind.EXACT_DENSE, _clamp(es.values), dense=es.vectors)


def _check_pairing(pairing: str) -> None:
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")


def _paired_degrees(S, vectors: np.ndarray, pairing: str) -> np.ndarray:
    d = degree(S)
    if pairing == "sorted":
        return np.sort(d)
    if pairing == "vertex-order":
        return d
    # Degree seen by each eigenvector: diagonal of V^T D V.
    return (vectors ** 2).T @ d


def approx_laplace_vec(S1, S2, pairing: str = "sorted") -> SpectralBasis:
    """Laplacian-eigenvector estimate.

    Factor spectra are sorted ascending (vectors follow); with the default
    ``sorted`` pairing the rank-i eigenvalue is matched with the rank-i
    degree.
    """
    _check_pairing(pairing)
    e1, e2 = sym_eig(laplacian(S1)), sym_eig(laplacian(S2))
    d1 = _paired_degrees(S1, e1.vectors, pairing)
    d2 = _paired_degrees(S2, e2.vectors, pairing)
    m1, m2 = e1.values, e2.values
    mu = np.outer(m1, d2) + np.outer(d1, m2) - np.outer(m1, m2)
    return SpectralBasis(BasisKind.LAPLACE_VEC, _clamp(mu.ravel()), e1.vectors, e2.vectors)


def _normalized_factor(S) -> EigenSystem:
    # Eigenpairs of I - normalized Laplacian, eigenvalues descending.
    es = sym_eig(normalized_adjacency(S))
    return EigenSystem(es.values[::-1].copy(), es.vectors[:, ::-1].copy())


def approx_norm_laplace_vec(S1, S2, pairing: str = "sorted") -> SpectralBasis:
    """Normalized-Laplacian-eigenvector estimate ``(1 - l_i l_j) d_i d_j``.

    ``sorted`` pairs descending ``l`` with ascending degree, so the
    degree-free factor and the degrees grow together.
    """
    _check_pairing(pairing)
    f1, f2 = _normalized_factor(S1), _normalized_factor(S2)
    d1 = _paired_degrees(S1, f1.vectors, pairing)
    d2 = _paired_degrees(S2, f2.vectors, pairing)
    mu = (1.0 - np.outer(f1.values, f2.values)) * np.outer(d1, d2)
    return SpectralBasis(BasisKind.NORM_LAPLACE_VEC, _clamp(mu.ravel()), f1.vectors, f2.vectors)


def approx_msn(S1, S2) -> SpectralBasis:
    f1, f2 = _normalized_factor(S1), _normalized_factor(S2)
    mu = 1.0 - np.outer(f1.values, f2.values)
    return SpectralBasis(BasisKind.MSN, _clamp(mu.ravel()), f1.vectors, f2.vectors)


def _check_len(basis: SpectralBasis, x: np.ndarray) -> None:
    if x.shape != (basis.size,):
        raise DimensionMismatchError(f"vector of shape {x.shape} does not match basis of size {basis.size}")


def project(basis: SpectralBasis, x) -> np.ndarray:
    """Coefficients ``U^T x`` in the basis."""
    x = np.asarray(x, dtype=float)
    _check_len(basis, x)
    if basis.dense is not None:
        return basis.dense.T @ x
    n1, n2 = basis.shape
    return (basis.factor1.T @ x.reshape(n1, n2) @ basis.factor2).ravel()


def back_project(basis: SpectralBasis, z) -> np.ndarray:
    """Inverse of ``project``: ``U z``."""
    z = np.asarray(z, dtype=float)
    _check_len(basis, z)
    if basis.dense is not None:
        return basis.dense @ z
    n1, n2 = basis.shape
    return (basis.factor1 @ z.reshape(n1, n2) @ basis.factor2.T).ravel()


BUILDERS = {
    "laplace_vec": approx_laplace_vec,
    "norm_laplace_vec": approx_norm_laplace_vec,
}


def factored_basis(model: str, S1, S2, pairing: str = "sorted") -> SpectralBasis:
    """Dispatch by benchmark model name."""
    if model == "msn":
        return approx_msn(S1, S2)
    return BUILDERS[model](S1, S2, pairing=pairing)
