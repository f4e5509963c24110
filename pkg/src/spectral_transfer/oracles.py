"""Brute-force reference computations and per-lemma inequality checkers.

Everything here is computed by direct repeated multiplication on dense
matrices, independently of the eigendecomposition path used for the
representations, and every check quantifies exhaustively over vertices,
clusters and steps.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DisconnectedVertexInRestriction
from .graph import DomainSpec, complement, restrict, vertex_array
from .metrics import (
    DEFAULT_C,
    DEFAULT_EXACT_CAP,
    compute_alpha,
    compute_rho,
    exact_cluster_conductance,
    expansion,
    restricted_gap,
)
from .spectral import normalized_adjacency

LEMMA_IDS = (
    "laplacian_square",
    "induction_in",
    "induction_out",
    "induction_target",
    "power_t_error",
    "restricted_cheeger",
    "multistep_rho",
    "multistep_beta",
)
T_CAP = 50
ATOL = 1e-12
MAX_WITNESSES = 10


def indicator_vector(graph, A) -> np.ndarray:
    """Entries sqrt(w(x)) on A and 0 elsewhere."""
    idx = vertex_array(A, graph.n)
    g = np.zeros(graph.n)
    g[idx] = np.sqrt(graph.marginals[idx])
    return g


def _smoothed_matrix(graph) -> np.ndarray:
    return 0.5 * (np.eye(graph.n) + normalized_adjacency(graph))


def smoothed_power(graph, v, t: int) -> np.ndarray:
    """((I + A_bar)/2)^t v by t explicit matrix-vector products."""
    if t < 0:
        raise ValueError("t must be >= 0")
    M = _smoothed_matrix(graph)
    out = np.array(v, dtype=float)
    for _ in range(t):
        out = M @ out
    return out


def _power_sequence(M: np.ndarray, V: np.ndarray, t_max: int) -> list[np.ndarray]:
    seq = [np.array(V, dtype=float)]
    for _ in range(t_max):
        seq.append(M @ seq[-1])
    return seq


def low_rank_power(representation, v, t: int) -> np.ndarray:
    """(F_tilde F_tilde^T)^t v, computed as F_tilde (F_tilde^T F_tilde)^{t-1} F_tilde^T v."""
    if t < 1:
        raise ValueError("t must be >= 1")
    Ft = representation.F_tilde
    core = np.linalg.matrix_power(Ft.T @ Ft, t - 1)
    return Ft @ (core @ (Ft.T @ np.asarray(v, dtype=float)))


def low_rank_power_naive(representation, v, t: int) -> np.ndarray:
    P = representation.F_tilde @ representation.F_tilde.T
    out = np.array(v, dtype=float)
    for _ in range(t):
        out = P @ out
    return out


def transition_matrix(graph) -> np.ndarray:
    """Row-stochastic kernel Pr[x -> y] = w(x, y) / w(x)."""
    return graph.weights / graph.marginals[:, None]


def walk_matrix(graph) -> np.ndarray:
    """Column-stochastic A D^{-1}."""
    return graph.weights / graph.marginals[None, :]


def random_walk_probability(graph, x: int, A, t: int) -> float:
    """Probability that a t-step walk started at x ends in A (dynamic programming)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    P = transition_matrix(graph)
    dist = np.zeros(graph.n)
    dist[x] = 1.0
    for _ in range(t):
        dist = dist @ P
    return float(dist[vertex_array(A, graph.n)].sum())


# ---------------------------------------------------------------------------
# Lemma checkers
# ---------------------------------------------------------------------------


@dataclass
class LemmaReport:
    lemma_id: str
    status: str  # "holds" | "violated" | "not_applicable"
    worst_margin: float | None = None
    instances: int = 0
    witnesses: list[dict] = field(default_factory=list)
    reason: str = ""
    atol: float = ATOL

    @property
    def holds(self) -> bool | None:
        """True iff worst_margin >= -atol over at least one instance; None if not applicable."""
        if self.status == "not_applicable":
            return None
        return self.status == "holds"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


class _Tally:
    def __init__(self, lemma_id: str, atol: float):
        self.lemma_id = lemma_id
        self.atol = atol
        self.worst = math.inf
        self.count = 0
        self.witnesses: list[dict] = []

    def add(self, margins, **where):
        margins = np.atleast_1d(np.asarray(margins, dtype=float))
        if margins.size == 0:
            return
        self.count += margins.size
        self.worst = min(self.worst, float(margins.min()))
        bad = np.flatnonzero(margins < -self.atol)
        for b in bad[: MAX_WITNESSES - len(self.witnesses)]:
            wit = dict(where)
            if "vertices" in wit:
                wit["x"] = int(wit.pop("vertices")[b])
            wit["margin"] = float(margins[b])
            self.witnesses.append(wit)

    def report(self) -> LemmaReport:
        if self.count == 0:
            return LemmaReport(self.lemma_id, "not_applicable", reason="no instances in range", atol=self.atol)
        status = "holds" if self.worst >= -self.atol else "violated"
        return LemmaReport(self.lemma_id, status, self.worst, self.count, self.witnesses, atol=self.atol)


def _na(lemma_id: str, reason: str) -> LemmaReport:
    return LemmaReport(lemma_id, "not_applicable", reason=reason)


def _step_cap(alpha: float) -> int:
    """floor(1/alpha) capped at T_CAP."""
    if alpha <= 0:
        return T_CAP
    return min(math.floor(1.0 / alpha), T_CAP)


def _t_values(t_range, lo: int, hi: int) -> list[int]:
    if t_range is None:
        return list(range(lo, hi + 1))
    return [int(t) for t in t_range if lo <= t <= hi]


class LemmaChecker:
    """Shared state for checking every lemma on one (graph, domain, representation)."""

    def __init__(self, graph, domain: DomainSpec, representation=None, c: float = DEFAULT_C,
                 exact_gamma_cap: int = DEFAULT_EXACT_CAP, atol: float = ATOL):
        self.graph = graph
        self.domain = domain
        self.rep = representation
        self.c = c
        self.cap = exact_gamma_cap
        self.atol = atol
        self.M = _smoothed_matrix(graph)
        self.A_bar = normalized_adjacency(graph)
        self.sw = np.sqrt(graph.marginals)
        self.alpha = compute_alpha(graph, domain)
        self.clusters = [np.array(c) for c in domain.clusters]
        self.G = np.column_stack([indicator_vector(graph, c) for c in self.clusters])

    # -- Laplacian square ---------------------------------------------------
    def laplacian_square(self, t_range=None) -> LemmaReport:
        tally = _Tally("laplacian_square", self.atol)
        LG = self.G - self.A_bar @ self.G
        for i in range(len(self.clusters)):
            g = self.G[:, i]
            tally.add(2 * self.alpha**2 * (g @ g) - LG[:, i] @ LG[:, i], cluster=i)
        return tally.report()

    # -- induction lemma ----------------------------------------------------
    def _induction(self, inside: bool, t_range) -> LemmaReport:
        lemma = "induction_in" if inside else "induction_out"
        if self.alpha >= 1:
            return _na(lemma, "alpha >= 1")
        ts = _t_values(t_range, 0, _step_cap(self.alpha))
        if not ts:
            return _na(lemma, "no t in [0, 1/alpha]")
        seq = _power_sequence(self.M, self.G, max(ts))
        tally = _Tally(lemma, self.atol)
        for t in ts:
            for i, c in enumerate(self.clusters):
                idx = c if inside else complement(self.graph.n, c)
                if idx.size == 0:
                    continue
                v, s = seq[t][idx, i], self.sw[idx]
                if inside:
                    margin = np.minimum(v - (1 - t * self.alpha) * s, s - v)
                else:
                    margin = np.minimum(v, t * self.alpha * s - v)
                tally.add(margin, cluster=i, t=t, vertices=idx)
        return tally.report()

    def induction_in(self, t_range=None) -> LemmaReport:
        return self._induction(True, t_range)

    def induction_out(self, t_range=None) -> LemmaReport:
        return self._induction(False, t_range)

    # -- target separation --------------------------------------------------
    def induction_target(self, t_range=None) -> LemmaReport:
        lemma = "induction_target"
        d = self.domain
        if d.r < 2:
            return _na(lemma, "needs r >= 2")
        a3 = compute_rho(self.graph, d, max(self.c, 8.0), self.alpha)
        rho = a3.rho
        if rho <= 0:
            return _na(lemma, "rho = 0")
        if not a3.holds:
            return _na(lemma, "relative expansion condition fails with c >= 8")
        if rho > self.alpha:
            return _na(lemma, "rho > alpha")
        top = T_CAP if self.alpha == 0 else min(math.floor(rho / (8 * self.alpha**2)), T_CAP)
        ts = _t_values(t_range, 1, top)
        if not ts:
            return _na(lemma, "no t in [1, rho/(8 alpha^2)]")
        Gs = self.G[:, : d.r]
        seq = _power_sequence(self.M, Gs, max(ts))
        tally = _Tally(lemma, self.atol)
        for t in ts:
            for i, T_i in enumerate(d.target_classes):
                for j in range(d.r):
                    if j == i:
                        continue
                    diff = seq[t][T_i, i] - seq[t][T_i, j]
                    tally.add(diff - 0.25 * rho * self.sw[T_i], i=i, j=j, t=t, vertices=T_i)
        return tally.report()

    # -- low-rank approximation of powers ------------------------------------
    def power_t_error(self, t_range=None) -> LemmaReport:
        lemma = "power_t_error"
        rep = self.rep
        if rep is None:
            return _na(lemma, "no representation")
        if rep.sigma != 2:
            return _na(lemma, "needs the sigma = 2 minimizer")
        lam = rep.lambda_k1
        if lam is None or lam <= 0:
            return _na(lemma, "lambda_{k+1} undefined or zero")
        ts = _t_values(t_range, 1, 20) if t_range is None else _t_values(t_range, 0, 10**6)
        if not ts:
            return _na(lemma, "empty t range")
        exact = _power_sequence(self.M, self.G, max(ts))
        Ft = rep.F_tilde
        P = Ft @ Ft.T
        approx = _power_sequence(P, self.G, max(ts))
        norms = (self.G**2).sum(axis=0)
        tally = _Tally(lemma, self.atol)
        for t in ts:
            err = ((exact[t] - approx[t]) ** 2).sum(axis=0)
            bound = (1 - lam / 2) ** (2 * t) * (2 * self.alpha**2 / lam**2) * norms
            for i in range(len(self.clusters)):
                tally.add(bound[i] - err[i], cluster=i, t=t)
        return tally.report()

    # -- restricted-graph Cheeger -------------------------------------------
    def restricted_cheeger(self, t_range=None) -> LemmaReport:
        tally = _Tally("restricted_cheeger", self.atol)
        for i, T_i in enumerate(self.domain.target_classes):
            if not 2 <= T_i.size <= self.cap:
                continue
            gamma = exact_cluster_conductance(self.graph, T_i)
            if gamma <= 0:
                # intra-class conductance fails; the bound would be vacuous
                continue
            lam = restricted_gap(self.graph, T_i)
            tally.add(lam - gamma**2 / 2, i=i)
        rep = tally.report()
        if rep.status == "not_applicable":
            rep.reason = "no target class with exact, positive conductance"
        return rep

    # -- multi-step lower bound ---------------------------------------------
    def multistep_rho(self, t_range=None) -> LemmaReport:
        lemma = "multistep_rho"
        d = self.domain
        if d.r < 1:
            return _na(lemma, "needs r >= 1")
        if self.alpha >= 1:
            return _na(lemma, "alpha >= 1")
        ts = _t_values(t_range, 1, _step_cap(self.alpha))
        if not ts:
            return _na(lemma, "empty t range")
        seq = _power_sequence(self.M, self.G[:, : d.r], max(ts))
        w = self.graph.marginals
        tally = _Tally(lemma, self.atol)
        for i, (S_i, T_i) in enumerate(zip(d.source_classes, d.target_classes)):
            if T_i.size < 2:
                continue
            try:
                sub = restrict(self.graph, T_i)
            except DisconnectedVertexInRestriction:
                continue
            rho_i = expansion(self.graph, T_i, S_i)
            lam_T = restricted_gap(self.graph, T_i)
            wh = sub.marginals
            M_T = 0.5 * (np.eye(sub.n) + sub.weights / np.sqrt(np.outer(wh, wh)))
            a = (self.A_bar @ self.G[:, i])[T_i]
            u_hat = np.sqrt(wh)
            v2 = a - (u_hat @ a) / (u_hat @ u_hat) * u_hat
            mass_T = w[T_i].sum()
            walked = v2
            for t in range(1, max(ts) + 1):
                if t > 1:
                    walked = M_T @ walked
                if t not in ts:
                    continue
                delta = 0.5 * (1 - self.alpha) ** (t - 1) * walked
                lhs = seq[t][T_i, i]
                entry_margin = lhs - (0.5 * (1 - self.alpha) ** t * rho_i * self.sw[T_i] + delta)
                norm_margin = (1 - lam_T / 2) ** (2 * (t - 1)) * mass_T - delta @ delta
                tally.add(entry_margin, i=i, t=t, kind="entrywise", vertices=T_i)
                tally.add(norm_margin, i=i, t=t, kind="delta_norm")
        rep = tally.report()
        if rep.status == "not_applicable":
            rep.reason = "no target class with a valid restriction"
        return rep

    # -- multi-step upper bound ---------------------------------------------
    def multistep_beta(self, t_range=None) -> LemmaReport:
        lemma = "multistep_beta"
        d = self.domain
        if d.r < 2:
            return _na(lemma, "needs r >= 2")
        if self.alpha >= 1:
            return _na(lemma, "alpha >= 1")
        ts = _t_values(t_range, 0, _step_cap(self.alpha))
        if not ts:
            return _na(lemma, "empty t range")
        seq = _power_sequence(self.M, self.G[:, : d.r], max(ts))
        w = self.graph.marginals
        tally = _Tally(lemma, self.atol)
        S, T = d.source_classes, d.target_classes
        for i in range(d.r):
            for j in range(d.r):
                if i == j:
                    continue
                beta_ij = expansion(self.graph, T[i], S[j])
                mass = w[T[i]].sum()
                for t in ts:
                    lhs = self.sw[T[i]] @ seq[t][T[i], j]
                    rhs = (t**2 * self.alpha**2 + t * beta_ij) * mass
                    tally.add(rhs - lhs, i=i, j=j, t=t)
        return tally.report()

    def check(self, lemma_id: str, t_range=None) -> LemmaReport:
        if lemma_id not in LEMMA_IDS:
            raise ValueError(f"unknown lemma {lemma_id!r}")
        return getattr(self, lemma_id)(t_range)


def check_lemma(graph, domain, representation, lemma_id: str, t_range=None, **kwargs) -> LemmaReport:
    return LemmaChecker(graph, domain, representation, **kwargs).check(lemma_id, t_range)


def check_all(graph, domain, representation, lemma_ids=LEMMA_IDS, t_range=None, **kwargs) -> list[LemmaReport]:
    checker = LemmaChecker(graph, domain, representation, **kwargs)
    return [checker.check(lid, t_range) for lid in lemma_ids]
