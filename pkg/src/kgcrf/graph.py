"""Weighted graphs as dense similarity matrices.

Index convention for products: vertex ``(i, k)`` of ``G x H`` sits at row
``i * n2 + k``, which is what ``numpy.kron`` produces.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidSimilarityError,
    IsolatedVertexError,
    SizeOverflowError,
)

SYMMETRY_RTOL = 1e-12

# Largest product order (n1 * n2) that may be materialized densely. A
# 10000 x 10000 float64 matrix is 0.8 GB and its eigendecomposition needs
# roughly three times that.
DENSE_CAP = int(os.environ.get("KGCRF_DENSE_CAP", "10000"))


class SimilarityMatrix:
    """Symmetric nonnegative weight matrix with zero diagonal.

    The wrapped array is copied and frozen, so instances can be shared
    freely between threads.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, *, check: bool = True):
        arr = np.array(entries, dtype=float)
        if check:
            _validate(arr)
        arr.setflags(write=False)
        self._entries = arr

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __repr__(self):
        return f"SimilarityMatrix(n={self.n}, edges={edge_count(self)})"

    def __eq__(self, other):
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None


def _validate(arr: np.ndarray) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidSimilarityError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidSimilarityError("entries must be finite")
    if np.any(arr < 0):
        raise InvalidSimilarityError("entries must be nonnegative")
    if np.any(np.diag(arr) != 0):
        raise InvalidSimilarityError("diagonal must be zero")
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    if np.max(np.abs(arr - arr.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise InvalidSimilarityError("matrix is not symmetric")


def as_array(S) -> np.ndarray:
    if isinstance(S, SimilarityMatrix):
        return S.entries
    return np.asarray(S, dtype=float)


def degree(S) -> np.ndarray:
    """Weighted degrees (row sums)."""
    return as_array(S).sum(axis=1)


def laplacian(S) -> np.ndarray:
    """``L = D - S``."""
    A = as_array(S)
    L = -A.copy()
    L[np.diag_indices_from(L)] += A.sum(axis=1)
    return L


def normalized_adjacency(S) -> np.ndarray:
    """``D^-1/2 S D^-1/2``, i.e. ``I`` minus the normalized Laplacian."""
    A = as_array(S)
    d = A.sum(axis=1)
    if np.any(d <= 0):
        isolated = np.flatnonzero(d <= 0)
        raise IsolatedVertexError(f"isolated vertices: {isolated.tolist()}")
    s = 1.0 / np.sqrt(d)
    M = s[:, None] * A * s[None, :]
    return 0.5 * (M + M.T)


def normalized_laplacian(S) -> np.ndarray:
    """``I - D^-1/2 S D^-1/2``; raises IsolatedVertexError on zero degree."""
    M = normalized_adjacency(S)
    return np.eye(M.shape[0]) - M


def kronecker(A, B, cap: int | None = None):
    """Kronecker product, refusing products larger than ``cap`` rows.

    Two SimilarityMatrix inputs give a SimilarityMatrix.
    """
    a, b = as_array(A), as_array(B)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise DimensionMismatchError("kronecker expects square matrices")
    cap = DENSE_CAP if cap is None else cap
    order = a.shape[0] * b.shape[0]
    if order > cap:
        raise SizeOverflowError(
            f"product order {order} exceeds dense cap {cap}; use a factored path"
        )
    K = np.kron(a, b)
    if isinstance(A, SimilarityMatrix) and isinstance(B, SimilarityMatrix):
        return SimilarityMatrix(K, check=False)
    return K


def edge_count(S) -> int:
    A = as_array(S)
    return int(np.count_nonzero(np.triu(A, 1) > 0))


def edge_density(S) -> float:
    """Fraction of unordered vertex pairs joined by a positive weight."""
    A = as_array(S)
    n = A.shape[0]
    if n < 2:
        raise DimensionMismatchError("edge density needs at least two vertices")
    return edge_count(A) / (n * (n - 1) / 2)


def write_csv(path, M) -> None:
    np.savetxt(Path(path), np.atleast_2d(as_array(M)), delimiter=",", fmt="%.17g")


def read_csv(path) -> np.ndarray:
    return np.loadtxt(Path(path), delimiter=",", ndmin=2)


def read_similarity_csv(path) -> SimilarityMatrix:
    return SimilarityMatrix(read_csv(path))
