"""Normalized adjacency, Laplacian spectrum and closed-form loss minimizers.

With ``F_tilde = D^{1/2} F`` the generalized loss is, up to a constant,
``sigma * ||F_tilde F_tilde^T - M||_F^2`` for ``M = A_bar / sigma + (1 - 1/sigma) I``,
so its minimizers are obtained from the top-k eigenpairs of ``M`` (equivalently the
bottom-k eigenpairs of the Laplacian).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCutWarning, DimensionMismatch, EigensolverFailure

DEGENERATE_TOL = 1e-8


def normalized_adjacency(graph) -> np.ndarray:
    w = graph.marginals
    return graph.weights / np.sqrt(np.outer(w, w))


def laplacian(graph) -> np.ndarray:
    return np.eye(graph.n) - normalized_adjacency(graph)


def smoothed_operator(graph) -> np.ndarray:
    """(I + A_bar) / 2, the lazy random-walk operator in symmetric form."""
    return 0.5 * (np.eye(graph.n) + normalized_adjacency(graph))


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column positive; near-ties go to the lowest index
    V = V.copy()
    mag = np.abs(V)
    top = mag.max(axis=0)
    for j in range(V.shape[1]):
        i = int(np.flatnonzero(mag[:, j] >= top[j] - 1e-12)[0])
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending Laplacian eigenvalues
    eigenvectors: np.ndarray  # columns match eigenvalues

    def lam(self, i: int) -> float:
        """1-based i-th smallest eigenvalue, as written lambda_i."""
        return float(self.eigenvalues[i - 1])


def symmetric_eigh(M: np.ndarray):
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    return vals, _fix_signs(vecs)


def decompose(graph) -> SpectralDecomposition:
    vals, vecs = symmetric_eigh(laplacian(graph))
    return SpectralDecomposition(vals, vecs)


@dataclass(frozen=True, eq=False)
class Representation:
    F: np.ndarray  # n x k, row x is f(x)
    F_tilde: np.ndarray  # D^{1/2} F
    k: int
    sigma: float
    eigenvalues: np.ndarray  # Laplacian spectrum of the graph it was fit on
    degenerate_cut: bool

    def lam(self, i: int) -> float:
        return float(self.eigenvalues[i - 1])

    @property
    def lambda_k1(self) -> float | None:
        """lambda_{k+1}, or None when k = n."""
        if self.k >= len(self.eigenvalues):
            return None
        return self.lam(self.k + 1)


def representation_from_features(graph, F, sigma: float = 2.0, eigenvalues=None) -> Representation:
    """Wrap an arbitrary feature matrix (e.g. a rotated or trained one)."""
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != graph.n:
        raise DimensionMismatch(f"F has {F.shape[0]} rows, graph has {graph.n} vertices")
    if eigenvalues is None:
        eigenvalues = decompose(graph).eigenvalues
    Ft = np.sqrt(graph.marginals)[:, None] * F
    return Representation(F, Ft, F.shape[1], float(sigma), np.asarray(eigenvalues), False)


def minimize_loss(graph, k: int, sigma: float = 2.0, decomposition=None) -> Representation:
    """Exact minimizer of the generalized spectral contrastive loss.

    ``F = D^{-1/2} V_k diag(max(1 - lambda_i / sigma, 0))^{1/2}`` where ``V_k`` holds
    the k smallest Laplacian eigenvectors.  Emits DegenerateCutWarning when
    ``lambda_k == lambda_{k+1}`` to within 1e-8.
    """
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    dec = decomposition if decomposition is not None else decompose(graph)
    lam = dec.eigenvalues
    degenerate = bool(k < n and abs(lam[k] - lam[k - 1]) <= DEGENERATE_TOL)
    if degenerate:
        warnings.warn(
            f"lambda_{k} = {lam[k - 1]:.3g} and lambda_{k + 1} = {lam[k]:.3g} coincide; "
            "the top-k eigenspace is not unique",
            DegenerateCutWarning,
            stacklevel=2,
        )
    scale = np.clip(1.0 - lam[:k] / sigma, 0.0, None)
    Ft = dec.eigenvectors[:, :k] * np.sqrt(scale)
    F = Ft / np.sqrt(graph.marginals)[:, None]
    return Representation(F, Ft, k, float(sigma), lam, degenerate)


def best_rank_k_psd(M: np.ndarray, k: int) -> np.ndarray:
    """Best Frobenius rank-k PSD approximation of a symmetric matrix."""
    vals, vecs = np.linalg.eigh(M)
    top = np.argsort(vals)[::-1][:k]
    s = np.clip(vals[top], 0.0, None)
    return (vecs[:, top] * s) @ vecs[:, top].T


def _features(graph, F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2 or F.shape[0] != graph.n:
        raise DimensionMismatch(f"expected {graph.n} rows, got shape {F.shape}")
    return F


def generalized_loss(graph, F, sigma: float) -> float:
    """E_{P+} ||f(x) - f(x+)||^2 + sigma * ||E_{P_X} f f^T - I||_F^2 as exact sums."""
    F = _features(graph, F)
    G = F @ F.T
    sq = np.diag(G)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * G
    positive = float((graph.weights * dist2).sum())
    cov = (F * graph.marginals[:, None]).T @ F
    reg = float(np.sum((cov - np.eye(F.shape[1])) ** 2))
    return positive + sigma * reg


def spectral_contrastive_loss(graph, F) -> float:
    """-2 E_{P+}[f(x)^T f(x+)] + E_{x, x' ~ P_X}[(f(x)^T f(x'))^2]."""
    F = _features(graph, F)
    G = F @ F.T
    w = graph.marginals
    return float(-2.0 * (graph.weights * G).sum() + (np.outer(w, w) * G**2).sum())
