"""Finite positive-pair graphs, vertex partitions and the JSON file format.

A graph stores the full symmetric matrix ``weights[x, y] = P+(x, y)``.  Total
mass is measured over ordered pairs, so an undirected edge ``(x, y, p)`` with
``x != y`` contributes ``2p`` and a self-loop ``(x, x, p)`` contributes ``p``.
Marginals are row sums, ``w(x) = sum_y P+(x, y)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetryConflict,
    DisconnectedVertexInRestriction,
    DuplicateEdge,
    EmptySet,
    GraphError,
    InvalidPartition,
    NonPositiveMarginal,
    NotNormalized,
    OverlappingSets,
    ParseError,
    SchemaValidationError,
    SchemaVersionMismatch,
)

MASS_TOL = 1e-9
FORMAT_VERSION = 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PositivePairGraph:
    weights: np.ndarray
    marginals: np.ndarray = field(init=False)

    def __post_init__(self):
        W = _frozen(self.weights)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "marginals", _frozen(W.sum(axis=1)))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class RestrictedGraph:
    """Subgraph on ``vertices`` keeping raw intra-set weights (not renormalized).

    ``marginals`` holds the restricted degrees ``w_hat(x) = sum_{y in A} w(x, y)``.
    """

    vertices: np.ndarray
    weights: np.ndarray
    marginals: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=int))
        W = _frozen(self.weights)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "marginals", _frozen(W.sum(axis=1)))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def vertex_array(A: Iterable[int], n: int | None = None) -> np.ndarray:
    """Sorted unique index array for a vertex set; raises EmptySet if empty."""
    idx = np.unique(np.fromiter((int(a) for a in A), dtype=int))
    if idx.size == 0:
        raise EmptySet("vertex set is empty")
    if n is not None and (idx[0] < 0 or idx[-1] >= n):
        raise GraphError(f"vertex index out of range [0, {n})")
    return idx


def _validate_weights(W: np.ndarray, normalize: bool) -> np.ndarray:
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise GraphError(f"weights must be square, got shape {W.shape}")
    if W.shape[0] < 2:
        raise GraphError("a positive-pair graph needs at least 2 vertices")
    if not np.all(np.isfinite(W)) or np.any(W < 0):
        raise GraphError("weights must be finite and nonnegative")
    if not np.array_equal(W, W.T):
        raise AsymmetryConflict("weight matrix is not symmetric")
    mass = W.sum()
    if normalize:
        if mass <= 0:
            raise NotNormalized("cannot normalize a graph with zero mass")
        W = W / mass
    elif abs(mass - 1.0) > MASS_TOL:
        raise NotNormalized(f"total ordered-pair mass is {mass!r}, expected 1")
    marg = W.sum(axis=1)
    bad = np.flatnonzero(marg <= 0)
    if bad.size:
        raise NonPositiveMarginal(f"vertices with zero marginal: {bad.tolist()}")
    return W


def graph_from_weights(W, normalize: bool = False) -> PositivePairGraph:
    return PositivePairGraph(_validate_weights(np.array(W, dtype=float), normalize))


def build_graph(
    edges: Iterable[Sequence],
    n: int | None = None,
    normalize: bool = False,
) -> PositivePairGraph:
    """Build a graph from undirected ``(x, y, weight)`` triples.

    Each pair is mirrored.  Supplying both orientations is allowed only with
    identical weights; repeating the same orientation is an error.
    """
    edges = [(int(a), int(b), float(p)) for a, b, p in edges]
    if n is None:
        n = 1 + max((max(a, b) for a, b, _ in edges), default=-1)
    W = np.zeros((n, n))
    seen: dict[tuple[int, int], tuple[int, int, float]] = {}
    for a, b, p in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"edge ({a}, {b}) out of range for n={n}")
        if p < 0 or not np.isfinite(p):
            raise GraphError(f"edge ({a}, {b}) has invalid weight {p!r}")
        key = (min(a, b), max(a, b))
        if key in seen:
            a0, b0, p0 = seen[key]
            if (a0, b0) == (a, b):
                raise DuplicateEdge(f"edge ({a}, {b}) listed twice")
            if p0 != p:
                raise AsymmetryConflict(
                    f"edge ({a}, {b}) given with weights {p0!r} and {p!r}"
                )
            continue
        seen[key] = (a, b, p)
        W[a, b] = p
        W[b, a] = p
    return graph_from_weights(W, normalize=normalize)


def set_weight(graph, A: Iterable[int]) -> float:
    """w(A): total marginal mass of the vertices in ``A``."""
    idx = vertex_array(A, graph.n)
    return float(graph.marginals[idx].sum())


def cut_weight(graph, A: Iterable[int], B: Iterable[int]) -> float:
    """w(A, B) = sum over x in A, y in B of w(x, y).  Sets may overlap."""
    a = np.unique(np.fromiter((int(v) for v in A), dtype=int))
    b = np.unique(np.fromiter((int(v) for v in B), dtype=int))
    if a.size == 0 or b.size == 0:
        return 0.0
    return float(graph.weights[np.ix_(a, b)].sum())


def complement(n: int, A: Iterable[int]) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[list(A)] = False
    return np.flatnonzero(mask)


def restrict(graph, A: Iterable[int]) -> RestrictedGraph:
    idx = vertex_array(A, graph.n)
    W = graph.weights[np.ix_(idx, idx)]
    bad = idx[W.sum(axis=1) <= 0]
    if bad.size:
        raise DisconnectedVertexInRestriction(
            f"vertices with no weight inside the restriction: {bad.tolist()}"
        )
    return RestrictedGraph(idx, W)


@dataclass(frozen=True)
class DomainSpec:
    """Partition into clusters; the first ``r`` are source classes, the next ``r`` targets."""

    clusters: tuple[tuple[int, ...], ...]
    r: int
    n: int

    def __post_init__(self):
        clusters = tuple(tuple(sorted(int(v) for v in c)) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        if any(len(c) == 0 for c in clusters):
            raise InvalidPartition("clusters must be nonempty")
        members = [v for c in clusters for v in c]
        if len(set(members)) != len(members):
            raise OverlappingSets("clusters overlap")
        if sorted(members) != list(range(self.n)):
            raise InvalidPartition(f"clusters do not cover vertices 0..{self.n - 1}")
        if self.r < 0 or 2 * self.r > len(clusters):
            raise InvalidPartition(f"r={self.r} needs 2r <= m={len(clusters)}")

    @property
    def m(self) -> int:
        return len(self.clusters)

    @property
    def source_classes(self) -> list[np.ndarray]:
        return [np.array(c) for c in self.clusters[: self.r]]

    @property
    def target_classes(self) -> list[np.ndarray]:
        return [np.array(c) for c in self.clusters[self.r : 2 * self.r]]

    @property
    def source(self) -> np.ndarray:
        return np.array(sorted(v for c in self.clusters[: self.r] for v in c), dtype=int)

    @property
    def target(self) -> np.ndarray:
        return np.array(
            sorted(v for c in self.clusters[self.r : 2 * self.r] for v in c), dtype=int
        )

    def labels(self) -> np.ndarray:
        """Cluster index per vertex."""
        lab = np.empty(self.n, dtype=int)
        for i, c in enumerate(self.clusters):
            lab[list(c)] = i
        return lab


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------


def graph_to_dict(graph: PositivePairGraph, domain: DomainSpec | None = None) -> dict:
    iu, ju = np.triu_indices(graph.n)
    W = graph.weights
    edges = [[int(i), int(j), float(W[i, j])] for i, j in zip(iu, ju) if W[i, j] != 0]
    out = {"version": FORMAT_VERSION, "n": graph.n, "edges": edges}
    if domain is not None:
        out["clusters"] = [list(c) for c in domain.clusters]
        out["r"] = domain.r
    return out


def save_graph(graph: PositivePairGraph, domain: DomainSpec | None, path) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(graph_to_dict(graph, domain)) + "\n")


def _field_error(field_name: str, msg: str) -> SchemaValidationError:
    return SchemaValidationError(f"field {field_name!r}: {msg}")


def graph_from_dict(data, normalize: bool = False):
    if not isinstance(data, dict):
        raise SchemaValidationError("top-level JSON value must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise SchemaVersionMismatch(
            f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION}"
        )
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise _field_error("n", f"expected integer >= 2, got {n!r}")
    raw_edges = data.get("edges")
    if not isinstance(raw_edges, list):
        raise _field_error("edges", "expected a list")
    edges = []
    for k, e in enumerate(raw_edges):
        ok = (
            isinstance(e, list)
            and len(e) == 3
            and all(isinstance(v, int) and not isinstance(v, bool) for v in e[:2])
            and isinstance(e[2], (int, float))
            and not isinstance(e[2], bool)
        )
        if not ok:
            raise _field_error(f"edges[{k}]", f"expected [int, int, number], got {e!r}")
        edges.append(tuple(e))
    try:
        graph = build_graph(edges, n=n, normalize=normalize)
    except GraphError as exc:
        raise SchemaValidationError(f"field 'edges': {exc}") from exc

    domain = None
    if "clusters" in data:
        clusters = data["clusters"]
        r = data.get("r", 0)
        if not isinstance(clusters, list) or not all(
            isinstance(c, list) and all(isinstance(v, int) for v in c) for c in clusters
        ):
            raise _field_error("clusters", "expected a list of integer lists")
        if not isinstance(r, int) or isinstance(r, bool):
            raise _field_error("r", f"expected integer, got {r!r}")
        try:
            domain = DomainSpec(tuple(tuple(c) for c in clusters), r, n)
        except GraphError as exc:
            raise SchemaValidationError(f"field 'clusters': {exc}") from exc
    return graph, domain


def load_graph(path, normalize: bool = False):
    """Read a graph file; returns ``(graph, domain_spec_or_None)``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return graph_from_dict(data, normalize=normalize)
