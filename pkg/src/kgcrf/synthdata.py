"""Synthetic GCRF instances on Kronecker (and near-Kronecker) networks.

Outputs are ``y1 x y2`` plus Gaussian noise. Factor edge weights come from
noisy copies of ``y1`` and ``y2``, so structure and outputs are related
but not identical. The unstructured predictor inverts the GCRF mean
equation at ``(alpha, beta) = (1, 5)``:

    R = (alpha I + beta L(S)) Y / alpha

so that the exact model at the generating parameters reproduces ``Y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, InsufficientZerosError
from .graph import (
    SimilarityMatrix,
    as_array,
    edge_count,
    kronecker,
    laplacian,
    read_csv,
    read_similarity_csv,
    write_csv,
)
from .randnet import DEFAULT_P_REWIRE, RngStream, assign_weights, edge_weight, gen_topology

TRUE_ALPHA = 1.0
TRUE_BETA = 5.0
DEFAULT_SIGMA1 = 0.33
DEFAULT_SIGMA2 = 0.25

# Sub-stream layout; fixed so that changing one knob (say sigma1) leaves
# every other draw of a repetition untouched.
_LATENT, _TOPO_G, _TOPO_H, _ATTR_NOISE, _TRAIN_NOISE, _TEST_NOISE, _VIOLATION = range(7)


@dataclass
class Dataset:
    S1: SimilarityMatrix
    S2: SimilarityMatrix
    y_train: np.ndarray
    y_test: np.ndarray
    R_train: np.ndarray
    R_test: np.ndarray
    meta: dict = field(default_factory=dict)
    y1p: np.ndarray | None = None
    y2p: np.ndarray | None = None
    S_explicit: SimilarityMatrix | None = None

    @property
    def n1(self) -> int:
        return self.S1.n

    @property
    def n2(self) -> int:
        return self.S2.n

    @property
    def is_kronecker(self) -> bool:
        return self.S_explicit is None

    @property
    def S(self) -> SimilarityMatrix:
        """The network similarity matrix (materialized on demand for products)."""
        if self.S_explicit is not None:
            return self.S_explicit
        return kronecker(self.S1, self.S2)

    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        write_csv(d / "S1.csv", self.S1)
        write_csv(d / "S2.csv", self.S2)
        write_csv(d / "S.csv", self.S)
        for name in ("y_train", "y_test", "R_train", "R_test"):
            write_csv(d / f"{name}.csv", getattr(self, name)[None, :])
        meta = dict(self.meta, kronecker=self.is_kronecker)
        (d / "meta.txt").write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
        return d

    @classmethod
    def load(cls, directory) -> "Dataset":
        d = Path(directory)
        meta = {}
        for line in (d / "meta.txt").read_text().splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                meta[key] = value
        kron = meta.pop("kronecker", "True") == "True"
        vectors = {name: read_csv(d / f"{name}.csv").ravel()
                   for name in ("y_train", "y_test", "R_train", "R_test")}
        S_explicit = None if kron else read_similarity_csv(d / "S.csv")
        return cls(read_similarity_csv(d / "S1.csv"), read_similarity_csv(d / "S2.csv"),
                   meta=meta, S_explicit=S_explicit, **vectors)


def kron_laplacian_apply(S1, S2, x) -> np.ndarray:
    """``L(S1 x S2) x`` without forming the product: ``(D1 x D2 - S1 x S2) x``."""
    A1, A2 = as_array(S1), as_array(S2)
    n1, n2 = A1.shape[0], A2.shape[0]
    X = np.asarray(x, dtype=float).reshape(n1, n2)
    D = np.outer(A1.sum(axis=1), A2.sum(axis=1))
    return (D * X - A1 @ X @ A2.T).ravel()


def predictor_from_outputs(y, alpha: float = TRUE_ALPHA, beta: float = TRUE_BETA, *,
                           S=None, factors=None) -> np.ndarray:
    """``(alpha I + beta L) y / alpha`` for a dense S or a factor pair."""
    y = np.asarray(y, dtype=float)
    if factors is not None:
        Ly = kron_laplacian_apply(factors[0], factors[1], y)
    else:
        Ly = laplacian(S) @ y
    return (alpha * y + beta * Ly) / alpha


def gen_outputs(n1: int, n2: int, sigma1: float, rng):
    """Latent factors ``y1, y2 ~ N(0, 1)`` and ``Y = y1 x y2 + N(0, sigma1^2)``."""
    if n1 < 2 or n2 < 2 or sigma1 < 0:
        raise ValueError("need n1, n2 >= 2 and sigma1 >= 0")
    stream = rng if isinstance(rng, RngStream) else None
    latent = stream.generator(_LATENT) if stream else rng
    noise = stream.generator(_TRAIN_NOISE) if stream else rng
    y1 = latent.standard_normal(n1)
    y2 = latent.standard_normal(n2)
    Y = np.kron(y1, y2) + sigma1 * noise.standard_normal(n1 * n2)
    return y1, y2, Y


def _draw(graph_type, n1, n2, rho, sigma1, sigma2, rng, rho2, p_rewire, connected):
    rho2 = rho if rho2 is None else rho2
    y1, y2, Y = gen_outputs(n1, n2, sigma1, rng)
    G = gen_topology(graph_type, n1, rho, rng.generator(_TOPO_G), p_rewire=p_rewire, connected=connected)
    H = gen_topology(graph_type, n2, rho2, rng.generator(_TOPO_H), p_rewire=p_rewire, connected=connected)
    attr = rng.generator(_ATTR_NOISE)
    y1p = y1 + sigma2 * attr.standard_normal(n1)
    y2p = y2 + sigma2 * attr.standard_normal(n2)

    test = rng.generator(_TEST_NOISE)
    latent = np.kron(y1, y2)
    y_test = latent + sigma1 * test.standard_normal(n1 * n2)
    y_pred_src = latent + sigma1 * test.standard_normal(n1 * n2)
    meta = dict(graph_type=graph_type, n1=n1, n2=n2, rho1=rho, rho2=rho2, sigma1=sigma1,
                sigma2=sigma2, seed=rng.seed, stream=rng.stream, p_rewire=p_rewire, nkp_noise=0.0)
    return assign_weights(G, y1p), assign_weights(H, y2p), Y, y_test, y_pred_src, y1p, y2p, meta


def gen_dataset(graph_type: str, n1: int, n2: int, rho: float, sigma1: float = DEFAULT_SIGMA1,
                sigma2: float = DEFAULT_SIGMA2, rng: RngStream | None = None, *, rho2: float | None = None,
                p_rewire: float = DEFAULT_P_REWIRE, connected: bool = True) -> Dataset:
    """One train/test instance on the Kronecker product of two random graphs.

    The test split reuses the network and the latent ``y1 x y2`` with fresh
    noise: ``y_test`` is one noisy draw and ``R_test`` is built from another,
    independent one, the same way ``R_train`` is built from ``y_train``.
    """
    rng = rng if rng is not None else RngStream(0)
    S1, S2, Y, y_test, y_src, y1p, y2p, meta = _draw(
        graph_type, n1, n2, rho, sigma1, sigma2, rng, rho2, p_rewire, connected)
    factors = (S1, S2)
    return Dataset(S1, S2, Y, y_test,
                   predictor_from_outputs(Y, factors=factors),
                   predictor_from_outputs(y_src, factors=factors),
                   meta, y1p, y2p)


def decode_pair(i: int, j: int, n2: int) -> tuple[int, int, int, int]:
    """Factor coordinates of product position (i, j).

    Returns ``(g_i, g_j, h_i, h_j)``: the first-factor vertices of i and j,
    then the second-factor vertices.
    """
    return i // n2, j // n2, i % n2, j % n2


def violate_kron(S, y1p, y2p, frac: float, rng) -> SimilarityMatrix:
    """Add ``floor(frac * |E|)`` edges at random zero positions of S.

    Each new weight is the product of the two factor kernels at the decoded
    vertex pairs, i.e. the value the edge would carry had both factor edges
    existed.
    """
    if frac < 0:
        raise ValueError("frac must be nonnegative")
    A = as_array(S)
    y1p, y2p = np.asarray(y1p, float), np.asarray(y2p, float)
    n1, n2 = y1p.size, y2p.size
    if A.shape != (n1 * n2, n1 * n2):
        raise DimensionMismatchError("S does not match the attribute vector lengths")
    count = math.floor(frac * edge_count(A) + 1e-9)
    if count == 0:
        return S if isinstance(S, SimilarityMatrix) else SimilarityMatrix(A)

    iu, ju = np.triu_indices(A.shape[0], 1)
    zero = A[iu, ju] == 0
    zi, zj = iu[zero], ju[zero]
    if count > zi.size:
        raise InsufficientZerosError(f"asked for {count} new edges, only {zi.size} zero positions")
    gen = rng.generator(_VIOLATION) if isinstance(rng, RngStream) else rng
    pick = gen.choice(zi.size, size=count, replace=False)
    i, j = zi[pick], zj[pick]
    gi, gj, hi, hj = decode_pair(i, j, n2)
    w = edge_weight(y1p[gi], y1p[gj]) * edge_weight(y2p[hi], y2p[hj])
    out = A.copy()
    out[i, j] = w
    out[j, i] = w
    return SimilarityMatrix(out)


def gen_nkp_dataset(graph_type: str, n1: int, n2: int, rho: float, frac: float,
                    sigma1: float = DEFAULT_SIGMA1, sigma2: float = DEFAULT_SIGMA2,
                    rng: RngStream | None = None, *, rho2: float | None = None,
                    p_rewire: float = DEFAULT_P_REWIRE, connected: bool = True) -> Dataset:
    """A near-Kronecker instance: the ``gen_dataset`` draw with ``violate_kron`` applied.

    Predictors are built from the violated network. With ``frac == 0`` the
    result equals ``gen_dataset`` for the same stream.
    """
    rng = rng if rng is not None else RngStream(0)
    if frac == 0:
        return gen_dataset(graph_type, n1, n2, rho, sigma1, sigma2, rng, rho2=rho2,
                           p_rewire=p_rewire, connected=connected)
    S1, S2, Y, y_test, y_src, y1p, y2p, meta = _draw(
        graph_type, n1, n2, rho, sigma1, sigma2, rng, rho2, p_rewire, connected)
    S_new = violate_kron(kronecker(S1, S2), y1p, y2p, frac, rng)
    meta["nkp_noise"] = frac
    return Dataset(S1, S2, Y, y_test,
                   predictor_from_outputs(Y, S=S_new),
                   predictor_from_outputs(y_src, S=S_new),
                   meta, y1p, y2p, S_explicit=S_new)
