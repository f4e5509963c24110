"""Preconditioned feature averaging heads and their target-domain error.

Class indices are 0-based: class ``i`` pairs source cluster ``i`` with target
cluster ``r + i`` of the domain spec.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySourceClass, RankDeficientRepresentation
from .graph import DomainSpec
from .metrics import clusters_of

THEOREM31_CONSTANT = 128.0

ERROR_REPORT_COLUMNS = (
    "t", "k", "sigma", "target_error", "bound_value", "bound_satisfied",
    "alpha", "rho", "gamma_lower", "gamma_upper", "lambda_k1",
)


@dataclass(frozen=True, eq=False)
class PfaClassifier:
    sigma_matrix: np.ndarray  # k x k, E_{P_X}[f f^T]
    class_means: np.ndarray  # r x k, row i is b_i
    _evals: np.ndarray
    _evecs: np.ndarray

    @property
    def r(self) -> int:
        return self.class_means.shape[0]

    def directions(self, t: int) -> np.ndarray:
        """Rows Sigma^{t-1} b_i, shape r x k."""
        if t < 1:
            raise ValueError(f"t must be >= 1, got {t}")
        if t == 1:
            return self.class_means
        U, s = self._evecs, self._evals
        return ((self.class_means @ U) * s ** (t - 1)) @ U.T

    def scores(self, F: np.ndarray, t: int) -> np.ndarray:
        """<f(x), Sigma^{t-1} b_i> for every row of F, shape n x r."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if F.shape[1] != self.sigma_matrix.shape[0]:
            raise DimensionMismatch("feature dimension does not match the classifier")
        return F @ self.directions(t).T


def fit_pfa(representation, graph, domain: DomainSpec) -> PfaClassifier:
    """Covariance and source class means as exact population sums."""
    F = representation.F
    if F.shape[0] != graph.n:
        raise DimensionMismatch(f"representation has {F.shape[0]} rows, graph has {graph.n}")
    if domain.r < 1:
        raise EmptySourceClass("domain spec has no source classes")
    w = graph.marginals
    sigma = (F * w[:, None]).T @ F
    sigma = 0.5 * (sigma + sigma.T)
    w_source = w[domain.source].sum()
    means = []
    for S_i in domain.source_classes:
        if w[S_i].sum() <= 0:
            raise EmptySourceClass("source class with zero mass")
        means.append((w[S_i] / w_source) @ F[S_i])
    evals, evecs = np.linalg.eigh(sigma)
    evals = np.clip(evals, 0.0, None)
    return PfaClassifier(sigma, np.array(means), evals, evecs)


def predict_all(classifier: PfaClassifier, representation, t: int) -> np.ndarray:
    """Predicted class for every vertex; ties go to the smallest class index."""
    return np.argmax(classifier.scores(representation.F, t), axis=1)


def predict(classifier: PfaClassifier, representation, x: int, t: int) -> int:
    return int(np.argmax(classifier.scores(representation.F[x], t)[0]))


@dataclass
class ErrorReport:
    t: int
    target_error: float
    per_class_errors: list[float]  # error rate within each T_i under P_T restricted to T_i
    class_masses: list[float]  # P_T(T_i)
    bound_value: float | None = None
    bound_satisfied: bool | None = None
    bound_status: str = "not_computed"

    def csv_row(self, k: int, sigma: float, stats) -> dict:
        return {
            "t": self.t,
            "k": k,
            "sigma": sigma,
            "target_error": self.target_error,
            "bound_value": self.bound_value if self.bound_value is not None else self.bound_status,
            "bound_satisfied": self.bound_status if self.bound_satisfied is None else self.bound_satisfied,
            "alpha": stats.alpha,
            "rho": stats.rho,
            "gamma_lower": stats.gamma_lower,
            "gamma_upper": stats.gamma_upper,
            "lambda_k1": stats.lambda_k1,
        }


def theorem31_range(stats) -> int | None:
    """Largest t with t <= rho / (8 alpha^2), or None when the theorem does not apply.

    Applicability: both cross-cluster and relative-expansion conditions hold
    with constant 8 (the proof needs c >= 8), rho > 0 and lambda_{k+1} > 0.
    Returns -1 for "no upper limit" (alpha = 0).
    """
    if stats.rho is None or stats.rho <= 0 or not stats.lambda_k1 or stats.lambda_k1 <= 0:
        return None
    c = max(stats.c, 8.0)
    if not (stats.alpha < 1 and stats.rho >= c * stats.alpha**2 and stats.rho >= c * stats.beta_max):
        return None
    if stats.alpha == 0:
        return -1
    return math.floor(stats.rho / (8 * stats.alpha**2))


def theorem31_bound(stats, t: int) -> float:
    """128 (1 - lambda_{k+1}/2)^{2t} r alpha^2 / (rho^2 lambda_{k+1}^2) * P(S)/P(T)."""
    lam = stats.lambda_k1
    eps_t = (1.0 - lam / 2.0) ** (2 * t)
    return (
        THEOREM31_CONSTANT * eps_t * stats.r * stats.alpha**2
        / (stats.rho**2 * lam**2) * stats.source_target_mass_ratio
    )


def theorem31_status(stats, t: int, sigma: float) -> tuple[float | None, str]:
    if sigma != 2:
        return None, "not_applicable"
    top = theorem31_range(stats)
    if top is None:
        return None, "not_applicable"
    if t < 1 or (top >= 0 and t > top):
        return None, "out_of_range"
    return theorem31_bound(stats, t), "in_range"


def theorem32_structural_bound(stats) -> float:
    """r log^2(1/alpha) / (tau gamma^8) with unit constant, gamma = lower bracket end."""
    if stats.tau is None or stats.alpha <= 0:
        return math.inf
    num = stats.r * math.log(1.0 / stats.alpha) ** 2
    den = stats.tau * stats.gamma_lower**8
    if den == 0:
        return math.inf
    return num / den


def theorem32_t_values(stats, multipliers=(1, 2, 4)) -> list[int]:
    """t = mult * ceil(log(1/alpha) / gamma^2) for each multiplier."""
    g = stats.gamma_lower
    if stats.alpha <= 0 or stats.alpha >= 1 or g <= 0:
        return []
    base = max(1, math.ceil(math.log(1.0 / stats.alpha) / g**2))
    return [m * base for m in multipliers]


def target_error(classifier, representation, graph, domain: DomainSpec, t: int, stats=None) -> ErrorReport:
    """Exact error of g_t under the target distribution P_T.

    When ``stats`` (a GraphStats) is supplied and the theorem applies at ``t``,
    the report carries the explicit-constant bound and whether it held.
    """
    pred = predict_all(classifier, representation, t)
    w = graph.marginals
    w_T = w[domain.target].sum()
    per_class, masses = [], []
    wrong = 0.0
    for i, T_i in enumerate(domain.target_classes):
        miss = w[T_i][pred[T_i] != i].sum()
        wrong += miss
        per_class.append(float(miss / w[T_i].sum()))
        masses.append(float(w[T_i].sum() / w_T))
    report = ErrorReport(t, float(wrong / w_T), per_class, masses)
    if stats is not None:
        bound, status = theorem31_status(stats, t, representation.sigma)
        report.bound_status = status
        if bound is not None:
            report.bound_value = bound
            report.bound_satisfied = bool(report.target_error <= bound)
    return report


def linear_probe(representation, graph, clusters):
    """Constructive probe: B_i with F_tilde B_i the projection of g_i onto span(F_tilde).

    Returns ``(error, B, predictions)``.  Ties in the argmax go to the heaviest
    cluster, then to the smallest index.  The error is an upper bound on the
    best error over all linear heads.
    """
    cl = clusters_of(clusters, graph.n)
    m = len(cl)
    Ft = representation.F_tilde
    k = Ft.shape[1]
    if k < m:
        warnings.warn(f"k={k} < m={m}; the probe cannot separate all clusters", RankDeficientRepresentation, stacklevel=2)
    if np.linalg.matrix_rank(Ft) < k:
        warnings.warn("representation has rank below k", RankDeficientRepresentation, stacklevel=2)
    sw = np.sqrt(graph.marginals)
    G = np.zeros((graph.n, m))
    labels = np.empty(graph.n, dtype=int)
    for i, c in enumerate(cl):
        G[c, i] = sw[c]
        labels[c] = i
    B, *_ = np.linalg.lstsq(Ft, G, rcond=None)
    scores = (Ft @ B) / sw[:, None]  # row x is B^T f(x)
    masses = np.array([graph.marginals[c].sum() for c in cl])
    order = np.lexsort((np.arange(m), -masses))
    pred = order[np.argmax(scores[:, order], axis=1)]
    error = float(graph.marginals[pred != labels].sum())
    return error, B, pred


def linear_probe_error(representation, graph, clusters) -> float:
    return linear_probe(representation, graph, clusters)[0]


def linear_probe_bound(m: int, alpha: float, lambda_k1: float) -> float:
    """4 m alpha^2 / lambda_{k+1}^2 (squared-loss bound 2 m alpha^2 / lambda^2 times Markov factor 2)."""
    if lambda_k1 <= 0:
        return math.inf
    return 4.0 * m * alpha**2 / lambda_k1**2
