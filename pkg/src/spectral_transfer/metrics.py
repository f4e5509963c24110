"""Expansion quantities and assumption checks on a partitioned graph.

Degenerate conventions: expansion into an empty set is 0, an empty max is 0,
and a ratio with zero denominator is +inf unless its numerator is also 0, in
which case it is 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DisconnectedVertexInRestriction,
    InvalidPartition,
    OverlappingSets,
)
from .graph import DomainSpec, complement, restrict, vertex_array
from .spectral import decompose

DEFAULT_C = 8.0
DEFAULT_EXACT_CAP = 22
_CHUNK = 1 << 15


def _ratio(num: float, den: float) -> float:
    if num == 0:
        return 0.0
    if den == 0:
        return math.inf
    return num / den


def _pair(graph, A, B):
    a = vertex_array(A, graph.n)
    b = vertex_array(B, graph.n)
    if np.intersect1d(a, b).size:
        raise OverlappingSets("expansion needs disjoint sets")
    return a, b


def vertex_expansions(graph, A, B) -> np.ndarray:
    """w(x, B) / w(x) for each x in A (sorted order)."""
    a, b = _pair(graph, A, B)
    return graph.weights[np.ix_(a, b)].sum(axis=1) / graph.marginals[a]


def expansion(graph, A, B) -> float:
    a, b = _pair(graph, A, B)
    return float(graph.weights[np.ix_(a, b)].sum() / graph.marginals[a].sum())


def max_expansion(graph, A, B) -> float:
    return float(vertex_expansions(graph, A, B).max())


def min_expansion(graph, A, B) -> float:
    return float(vertex_expansions(graph, A, B).min())


def clusters_of(clusters, n) -> list[np.ndarray]:
    if isinstance(clusters, DomainSpec):
        return [np.array(c) for c in clusters.clusters]
    out = [vertex_array(c, n) for c in clusters]
    flat = np.concatenate(out)
    if len(np.unique(flat)) != len(flat):
        raise InvalidPartition("clusters overlap")
    if len(flat) != n:
        raise InvalidPartition("clusters do not cover every vertex")
    return out


def compute_alpha(graph, clusters) -> float:
    """max_i of the max-expansion from C_i to its complement."""
    alpha = 0.0
    for c in clusters_of(clusters, graph.n):
        rest = complement(graph.n, c)
        if rest.size:
            alpha = max(alpha, max_expansion(graph, c, rest))
    return alpha


class Assumption3(NamedTuple):
    rho: float
    beta_max: float
    holds: bool
    margin: float  # min(rho - c alpha^2, rho - c beta_max)
    c: float


def compute_rho(graph, domain: DomainSpec, c: float = DEFAULT_C, alpha: float | None = None) -> Assumption3:
    if domain.r < 1:
        raise InvalidPartition("need at least one source/target class pair")
    if alpha is None:
        alpha = compute_alpha(graph, domain)
    S, T = domain.source_classes, domain.target_classes
    rho = min(min_expansion(graph, T[i], S[i]) for i in range(domain.r))
    beta = max(
        (max_expansion(graph, T[i], S[j]) for i in range(domain.r) for j in range(domain.r) if i != j),
        default=0.0,
    )
    margin = min(rho - c * alpha**2, rho - c * beta)
    return Assumption3(rho, beta, bool(margin >= 0), float(margin), float(c))


def tau_candidates(graph, domain: DomainSpec, alpha: float | None = None) -> list[dict]:
    if alpha is None:
        alpha = compute_alpha(graph, domain)
    S, T = domain.source_classes, domain.target_classes
    rows = []
    for i in range(domain.r):
        same = expansion(graph, T[i], S[i])
        rows.append({"i": i, "j": None, "ratio": _ratio(same, alpha**2)})
        for j in range(domain.r):
            if j != i:
                rows.append({"i": i, "j": j, "ratio": _ratio(same, expansion(graph, T[i], S[j]))})
    return rows


def compute_tau(graph, domain: DomainSpec, alpha: float | None = None) -> float:
    """Largest tau for which the average relative expansion condition holds."""
    return min(row["ratio"] for row in tau_candidates(graph, domain, alpha))


# ---------------------------------------------------------------------------
# Intra-cluster conductance
# ---------------------------------------------------------------------------


def restricted_gap(graph, cluster) -> float:
    """Second-smallest eigenvalue of the Laplacian of the graph restricted to ``cluster``."""
    sub = restrict(graph, cluster)
    if sub.n < 2:
        raise ValueError("restricted gap needs a cluster with at least 2 vertices")
    w = sub.marginals
    L = np.eye(sub.n) - sub.weights / np.sqrt(np.outer(w, w))
    vals = np.linalg.eigvalsh(L)
    return float(vals[1])


def exact_cluster_conductance(graph, cluster) -> float:
    """min phi(A, C \\ A) over nonempty A in C with w(A) <= w(C)/2, by enumeration.

    Uses global marginals in both the half-mass test and the denominator.
    A single-vertex cluster has no admissible A; its conductance is taken as 1.
    """
    c = vertex_array(cluster, graph.n)
    s = c.size
    if s > 30:
        raise ValueError(f"refusing to enumerate 2^{s} subsets")
    if s == 1:
        return 1.0
    W = graph.weights[np.ix_(c, c)]
    wv = graph.marginals[c]
    inner = W.sum(axis=1)
    half = wv.sum() / 2.0 * (1 + 1e-12)
    shifts = np.arange(s)
    best = math.inf
    total = 1 << s
    for start in range(1, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total))
        bits = ((codes[:, None] >> shifts) & 1).astype(float)
        mass = bits @ wv
        keep = mass <= half
        if not keep.any():
            continue
        bits, mass = bits[keep], mass[keep]
        cut = bits @ inner - np.einsum("ij,ij->i", bits @ W, bits)
        best = min(best, float((np.maximum(cut, 0.0) / mass).min()))
    return best


@dataclass
class GammaResult:
    lower: float
    upper: float
    exact: bool
    per_cluster: list[dict] = field(default_factory=list)

    @property
    def value(self) -> float | None:
        return self.lower if self.exact else None


def _cheeger_bracket(graph, c: np.ndarray) -> tuple[float, float]:
    # gamma uses global marginals; Cheeger uses restricted ones.  Since
    # w_hat >= (1 - a) w on the cluster, gamma >= (1 - a) * h_hat >= (1 - a) lam / 2.
    rest = complement(graph.n, c)
    a = max_expansion(graph, c, rest) if rest.size else 0.0
    try:
        lam = restricted_gap(graph, c)
    except DisconnectedVertexInRestriction:
        W = graph.weights[np.ix_(c, c)]
        wv = graph.marginals[c]
        isolated = W.sum(axis=1) <= 0
        upper = 0.0 if np.any(wv[isolated] <= wv.sum() / 2) else 1.0
        return 0.0, upper
    lam = max(lam, 0.0)
    return (1.0 - a) * lam / 2.0, min(math.sqrt(2.0 * lam), 1.0)


def conductance_gamma(graph, clusters, exact_cap: int = DEFAULT_EXACT_CAP) -> GammaResult:
    """Intra-cluster conductance, exact for clusters up to ``exact_cap`` vertices.

    Larger clusters contribute a Cheeger bracket; the result is the bracket of
    the per-cluster minima.
    """
    per = []
    for i, c in enumerate(clusters_of(clusters, graph.n)):
        if c.size <= exact_cap:
            g = exact_cluster_conductance(graph, c)
            per.append({"cluster": i, "lower": g, "upper": g, "exact": True})
        else:
            lo, hi = _cheeger_bracket(graph, c)
            per.append({"cluster": i, "lower": lo, "upper": hi, "exact": False})
    lower = min(p["lower"] for p in per)
    upper = min(p["upper"] for p in per)
    exact = all(p["exact"] for p in per)
    return GammaResult(lower, upper, exact, per)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------


@dataclass
class GraphStats:
    k: int
    c: float
    alpha: float
    rho: float | None
    beta_max: float | None
    tau: float | None
    tau_candidates: list[dict]
    gamma_lower: float
    gamma_upper: float
    gamma_exact: bool
    gamma_per_cluster: list[dict]
    restricted_gaps: list[float | None]
    lambda_spectrum: list[float]
    lambda_k1: float | None
    source_target_mass_ratio: float | None
    r: int
    m: int
    verdicts: dict[str, dict]

    def holds(self, name: str) -> bool:
        v = self.verdicts.get(name)
        return bool(v and v["holds"])

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(holds: bool | None, margin: float | None) -> dict:
    return {"holds": holds, "margin": margin}


def assumption_report(
    graph,
    domain: DomainSpec,
    k: int,
    c: float = DEFAULT_C,
    exact_gamma_cap: int = DEFAULT_EXACT_CAP,
    decomposition=None,
) -> GraphStats:
    if not 1 <= k < graph.n:
        raise ValueError(f"k must be in [1, {graph.n - 1}], got {k}")
    dec = decomposition if decomposition is not None else decompose(graph)
    alpha = compute_alpha(graph, domain)
    gamma = conductance_gamma(graph, domain, exact_gamma_cap)

    verdicts = {
        "assumption1": _verdict(alpha < 1.0, 1.0 - alpha),
        "assumption2": _verdict(gamma.lower > 0.0, gamma.lower),
    }
    rho = beta = tau = ratio = None
    cands: list[dict] = []
    gaps: list[float | None] = []
    if domain.r >= 1:
        a3 = compute_rho(graph, domain, c, alpha)
        rho, beta = a3.rho, a3.beta_max
        cands = tau_candidates(graph, domain, alpha)
        tau = min(row["ratio"] for row in cands)
        verdicts["assumption3"] = _verdict(a3.holds, a3.margin)
        verdicts["assumption4"] = _verdict(bool(tau >= c), tau - c)
        ratio = float(graph.marginals[domain.source].sum() / graph.marginals[domain.target].sum())
        for t_cls in domain.target_classes:
            try:
                gaps.append(restricted_gap(graph, t_cls) if t_cls.size >= 2 else None)
            except DisconnectedVertexInRestriction:
                gaps.append(None)
    else:
        verdicts["assumption3"] = _verdict(None, None)
        verdicts["assumption4"] = _verdict(None, None)

    return GraphStats(
        k=k,
        c=float(c),
        alpha=alpha,
        rho=rho,
        beta_max=beta,
        tau=tau,
        tau_candidates=cands,
        gamma_lower=gamma.lower,
        gamma_upper=gamma.upper,
        gamma_exact=gamma.exact,
        gamma_per_cluster=gamma.per_cluster,
        restricted_gaps=gaps,
        lambda_spectrum=[float(v) for v in dec.eigenvalues],
        lambda_k1=dec.lam(k + 1),
        source_target_mass_ratio=ratio,
        r=domain.r,
        m=domain.m,
        verdicts=verdicts,
    )
