"""Synthetic source/target block graphs with controllable expansion quantities.

Clusters are laid out contiguously: ``S_1..S_r``, then ``T_1..T_r``, then any
extra clusters, each with ``cluster_size`` vertices.  Every pair of vertices in
two different clusters gets the weight of its block pair:

* ``q_same``  between S_i and T_i,
* ``q_cross`` between S_i and T_j (i != j),
* ``q_other`` for every other pair of distinct clusters.

Intra-cluster pairs follow ``intra_topology``.  Weights are normalized to total
ordered-pair mass 1 at the end.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DegenerateParams, GraphError
from .graph import DomainSpec, PositivePairGraph, graph_from_weights

TOPOLOGIES = ("complete", "ring_plus_chords", "two_communities")


@dataclass(frozen=True)
class SbmParams:
    r: int = 2
    cluster_size: int = 50
    p_intra: float = 1.0
    q_same: float = 0.018
    q_cross: float = 0.001
    q_other: float = 0.001
    extra_clusters: int = 0
    intra_topology: str = "complete"
    epsilon: float = 0.1  # across-half weight factor for two_communities
    chords: int = 2  # random chords per vertex (on average) for ring_plus_chords
    seed: int = 0

    @classmethod
    def from_json(cls, text: str) -> "SbmParams":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise DegenerateParams(f"unknown parameters: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def validate(self) -> None:
        if self.r < 1:
            raise DegenerateParams("r must be >= 1")
        if self.cluster_size < 2:
            raise DegenerateParams("cluster_size must be >= 2")
        if self.extra_clusters < 0:
            raise DegenerateParams("extra_clusters must be >= 0")
        weights = (self.p_intra, self.q_same, self.q_cross, self.q_other)
        if any(not math.isfinite(v) or v < 0 for v in weights):
            raise DegenerateParams("block weights must be finite and nonnegative")
        if self.p_intra <= 0:
            raise DegenerateParams("p_intra must be positive")
        if self.intra_topology not in TOPOLOGIES:
            raise DegenerateParams(f"intra_topology must be one of {TOPOLOGIES}")
        if self.intra_topology == "two_communities" and not self.epsilon >= 0:
            raise DegenerateParams("epsilon must be >= 0")
        if self.intra_topology == "ring_plus_chords" and self.cluster_size < 3:
            raise DegenerateParams("ring_plus_chords needs cluster_size >= 3")
        if self.chords < 0:
            raise DegenerateParams("chords must be >= 0")


def reference_params(cluster_size: int = 50, **overrides) -> SbmParams:
    """The designated reference instance: r = 2, complete blocks.

    Per-vertex ratios: alpha = 0.02, rho = 0.018, beta_max = 0.001 (for
    cluster_size = 50), so rho >= 8 alpha^2, rho >= 8 beta_max and
    rho / (8 alpha^2) = 5.625.
    """
    return replace(SbmParams(cluster_size=cluster_size), **overrides)


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    graph: PositivePairGraph
    domain_spec: DomainSpec
    params: SbmParams | None
    predicted_stats: dict | None


def _intra_block(p: SbmParams, rng: np.random.Generator) -> np.ndarray:
    s = p.cluster_size
    if p.intra_topology == "complete":
        B = np.full((s, s), p.p_intra)
    elif p.intra_topology == "two_communities":
        half = s // 2
        side = np.arange(s) < half
        B = np.where(side[:, None] == side[None, :], p.p_intra, p.p_intra * p.epsilon)
    else:
        B = np.zeros((s, s))
        ring = np.arange(s)
        B[ring, (ring + 1) % s] = p.p_intra
        n_chords = p.chords * s // 2
        pairs = np.array([(a, b) for a in range(s) for b in range(a + 2, s) if not (a == 0 and b == s - 1)])
        if n_chords and len(pairs):
            pick = rng.choice(len(pairs), size=min(n_chords, len(pairs)), replace=False)
            for a, b in pairs[np.sort(pick)]:
                B[a, b] = p.p_intra
        B = np.maximum(B, B.T)
    np.fill_diagonal(B, 0.0)
    return B


def _block_weight(p: SbmParams, a: int, b: int) -> float:
    r = p.r
    if a < r and r <= b < 2 * r or b < r and r <= a < 2 * r:
        return p.q_same if a % r == b % r else p.q_cross
    return p.q_other


def predicted_stats(p: SbmParams) -> dict | None:
    """Closed-form alpha, rho, beta_max, tau for the complete topology."""
    if p.intra_topology != "complete":
        return None
    s, r, e = p.cluster_size, p.r, p.extra_clusters
    m = 2 * r + e
    intra = (s - 1) * p.p_intra
    out_class = s * p.q_same + (r - 1) * s * p.q_cross + (r - 1 + e) * s * p.q_other
    d_class = intra + out_class
    alpha = out_class / d_class
    if e:
        out_extra = (m - 1) * s * p.q_other
        alpha = max(alpha, out_extra / (intra + out_extra))
    rho = s * p.q_same / d_class
    beta = s * p.q_cross / d_class if r >= 2 else 0.0

    def ratio(a, b):
        if a == 0:
            return 0.0
        return math.inf if b == 0 else a / b

    tau = ratio(rho, alpha**2)
    if r >= 2:
        tau = min(tau, ratio(rho, beta))
    return {"alpha": alpha, "rho": rho, "beta_max": beta, "tau": tau}


def generate_sbm(params: SbmParams) -> GeneratedInstance:
    params.validate()
    rng = np.random.default_rng(params.seed)
    s = params.cluster_size
    m = 2 * params.r + params.extra_clusters
    n = m * s
    W = np.zeros((n, n))
    for a in range(m):
        sl_a = slice(a * s, (a + 1) * s)
        W[sl_a, sl_a] = _intra_block(params, rng)
        for b in range(a + 1, m):
            sl_b = slice(b * s, (b + 1) * s)
            q = _block_weight(params, a, b)
            W[sl_a, sl_b] = q
            W[sl_b, sl_a] = q
    try:
        graph = graph_from_weights(W, normalize=True)
    except GraphError as exc:
        raise DegenerateParams(str(exc)) from exc
    clusters = tuple(tuple(range(a * s, (a + 1) * s)) for a in range(m))
    domain = DomainSpec(clusters, params.r, n)
    return GeneratedInstance(graph, domain, params, predicted_stats(params))


def perturb(instance: GeneratedInstance, noise_scale: float, seed: int = 0) -> GeneratedInstance:
    """Multiply each undirected edge weight by an independent factor in [1 - s, 1 + s]."""
    if noise_scale < 0:
        raise ValueError("noise_scale must be >= 0")
    if noise_scale == 0:
        return instance
    rng = np.random.default_rng(seed)
    W = instance.graph.weights
    n = W.shape[0]
    factors = rng.uniform(max(0.0, 1 - noise_scale), 1 + noise_scale, size=(n, n))
    upper = np.triu(factors)
    factors = upper + np.triu(upper, 1).T
    graph = graph_from_weights(W * factors, normalize=True)
    return GeneratedInstance(graph, instance.domain_spec, instance.params, None)


def calibrate_alpha(instance: GeneratedInstance, alpha: float) -> GeneratedInstance:
    """Rescale every cross-cluster weight by one common factor so that alpha hits a target.

    A vertex's expansion out of its cluster is ``s o / (i + s o)`` for inner
    weight ``i``, outer weight ``o`` and scale ``s``; the maximum is attained at
    the largest ``o / i``, which gives the scale in closed form.  Ratios among
    cross-cluster weights, and among within-cluster weights, are preserved.
    """
    if not 0 < alpha < 1:
        raise DegenerateParams("target alpha must lie in (0, 1)")
    W = np.array(instance.graph.weights)
    lab = instance.domain_spec.labels()
    cross = lab[:, None] != lab[None, :]
    inner = np.where(cross, 0.0, W).sum(axis=1)
    outer = np.where(cross, W, 0.0).sum(axis=1)
    if not outer.any():
        raise DegenerateParams("instance has no cross-cluster weight to rescale")
    if np.any(inner <= 0):
        raise DegenerateParams("a vertex has no weight inside its own cluster")
    scale = alpha / ((1 - alpha) * float(np.max(outer / inner)))
    graph = graph_from_weights(np.where(cross, scale * W, W), normalize=True)
    return GeneratedInstance(graph, instance.domain_spec, instance.params, None)


FAMILY_TOPOLOGIES = ("complete", "ring_plus_chords", "two_communities")


def alpha_family(count: int = 50, alpha_min: float = 1e-3, alpha_max: float = 0.3,
                 noise: float = 0.2) -> list[GeneratedInstance]:
    """Perturbed block instances with alpha log-spaced over [alpha_min, alpha_max].

    Topology, cluster size (6 to 18), r (1 or 2) and extra clusters cycle with
    the instance index, which is also the seed; every cluster stays small
    enough for exact conductance.
    """
    out = []
    for i, a in enumerate(np.geomspace(alpha_min, alpha_max, count)):
        p = SbmParams(r=1 + i % 2, cluster_size=6 + (i % 4) * 4, intra_topology=FAMILY_TOPOLOGIES[i % 3],
                      seed=i, epsilon=0.5, q_same=0.02, q_cross=0.002, q_other=0.001, extra_clusters=i % 2)
        out.append(calibrate_alpha(perturb(generate_sbm(p), noise, i), float(a)))
    return out
