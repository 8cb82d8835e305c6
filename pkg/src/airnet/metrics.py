"""Per-snapshot topological statistics.

Degree, clustering, neighbour-degree, path-length and betweenness statistics
are taken on the undirected projection of a snapshot; in/out degrees and
reciprocity use the directed arcs.

All-pairs BFS and betweenness run one traversal per source vertex.  With
``workers > 1`` the sources are spread over a process pool, but partial
results are always reduced in source order so totals do not depend on the
worker count.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .distribution import DistributionTable, log_bin, pdf
from .errors import DegenerateError, InsufficientDataError
from .fitting import LinearFit, fit_linear
from .graph import GraphSnapshot, degree_sequences

CLUSTERING_CONVENTIONS = ("zero", "exclude")


@dataclass(frozen=True)
class NodeMetrics:
    node: str
    k: int
    k_in: int
    k_out: int
    c: float
    b: float
    knn: float | None


@dataclass(frozen=True)
class PathStats:
    """Shortest-path summary over the largest connected component.

    ``histogram`` rows are ``(length, count, percentage)`` over unordered
    pairs.  ``component_sizes`` lists every component, largest first.
    """

    d: float
    D: int
    histogram: tuple[tuple[int, int, float], ...]
    component_sizes: tuple[int, ...]

    @property
    def pair_count(self) -> int:
        return sum(c for _, c, _ in self.histogram)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "D": self.D,
            "histogram": [
                {"length": l, "count": c, "percentage": p} for l, c, p in self.histogram
            ],
            "component_sizes": list(self.component_sizes),
        }


@dataclass(frozen=True)
class ReciprocityResult:
    r: float
    a_bar: float


@dataclass(frozen=True)
class ClusteringResult:
    per_node: dict[str, float]
    by_degree: tuple[tuple[int, float], ...]
    mean: float


# --- index-based adjacency shared by the traversal kernels -------------------


def _indexed(g: GraphSnapshot) -> tuple[tuple[str, ...], list[tuple[int, ...]]]:
    nodes = g.sorted_nodes
    index = {n: i for i, n in enumerate(nodes)}
    adj = g.undirected.adjacency
    return nodes, [tuple(sorted(index[m] for m in adj[n])) for n in nodes]


def _bfs_counts(adj: Sequence[tuple[int, ...]], s: int) -> dict[int, int]:
    dist = {s: 0}
    queue = deque([s])
    counts: dict[int, int] = defaultdict(int)
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                counts[dist[w]] += 1
                queue.append(w)
    return dict(counts)


def _brandes_dependency(adj: Sequence[tuple[int, ...]], s: int) -> list[float]:
    n = len(adj)
    sigma = [0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s], dist[s] = 1, 0
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
    delta[s] = 0.0
    return delta


def _chunk_worker(args):
    kernel, adj, sources = args
    return [kernel(adj, s) for s in sources]


def _per_source(kernel: Callable, adj, sources: Sequence[int], workers: int) -> list:
    """Run ``kernel(adj, s)`` for every source, results in source order."""
    if workers <= 1 or len(sources) < 2:
        return [kernel(adj, s) for s in sources]
    size = math.ceil(len(sources) / workers)
    chunks = [sources[i : i + size] for i in range(0, len(sources), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_chunk_worker, [(kernel, adj, c) for c in chunks])
        return [r for part in parts for r in part]


# --- operations --------------------------------------------------------------


def degree_distribution(
    g: GraphSnapshot, binning: str | float = "raw", degree: str = "k"
) -> DistributionTable:
    """Empirical pdf of ``k`` (or ``k_in`` / ``k_out`` via ``degree``).

    ``binning`` is ``"raw"`` or a logarithmic base such as ``1.5``.
    """
    field = {"k": "k", "in": "k_in", "k_in": "k_in", "out": "k_out", "k_out": "k_out"}[degree]
    table = pdf(getattr(r, field) for r in degree_sequences(g))
    if binning == "raw":
        return table
    return log_bin(table, float(binning))


def in_out_correlation(g: GraphSnapshot) -> LinearFit:
    records = [r for r in degree_sequences(g) if r.k_in + r.k_out > 0]
    if len(records) < 2:
        raise InsufficientDataError(f"{g.period}: need at least 2 nodes with flights")
    if len({r.k_in for r in records}) == 1:
        raise DegenerateError(f"{g.period}: in-degree is constant, slope undefined")
    return fit_linear([(r.k_in, r.k_out) for r in records])


def node_knn(g: GraphSnapshot) -> dict[str, float]:
    """Mean undirected degree of each node's neighbours; isolated nodes omitted."""
    adj = g.undirected.adjacency
    return {
        n: math.fsum(len(adj[m]) for m in adj[n]) / len(adj[n])
        for n in g.sorted_nodes
        if adj[n]
    }


def nearest_neighbor_degree(g: GraphSnapshot) -> tuple[tuple[int, float], ...]:
    """``(k, mean knn)`` per degree class, isolated nodes excluded."""
    if g.undirected.edge_count == 0:
        raise InsufficientDataError(f"{g.period}: no edges, knn undefined")
    knn = node_knn(g)
    return _class_means((g.undirected.degree(n), v) for n, v in knn.items())


def _class_means(pairs) -> tuple[tuple[int, float], ...]:
    groups: dict[int, list[float]] = defaultdict(list)
    for k, v in pairs:
        groups[k].append(v)
    return tuple((k, math.fsum(vs) / len(vs)) for k, vs in sorted(groups.items()))


def local_clustering(g: GraphSnapshot) -> dict[str, float]:
    """Local clustering per node; nodes with ``k < 2`` get 0."""
    adj = g.undirected.adjacency
    out = {}
    for n in g.sorted_nodes:
        nbrs = adj[n]
        k = len(nbrs)
        if k < 2:
            out[n] = 0.0
            continue
        links = sum(len(adj[u] & nbrs) for u in nbrs) // 2
        out[n] = 2.0 * links / (k * (k - 1))
    return out


def clustering(g: GraphSnapshot, low_degree: str = "zero") -> ClusteringResult:
    """Local clustering, its degree-class means ``C(k)`` and the average ``C``.

    ``low_degree="zero"`` counts nodes with ``k < 2`` as ``c = 0`` in the
    average; ``"exclude"`` leaves them out of it.
    """
    if low_degree not in CLUSTERING_CONVENTIONS:
        raise ValueError(f"low_degree must be one of {CLUSTERING_CONVENTIONS}")
    c = local_clustering(g)
    deg = {n: g.undirected.degree(n) for n in c}
    by_degree = _class_means((deg[n], v) for n, v in c.items())
    used = [v for n, v in c.items() if low_degree == "zero" or deg[n] >= 2]
    mean = math.fsum(used) / len(used) if used else 0.0
    return ClusteringResult(c, by_degree, mean)


def connected_components(g: GraphSnapshot) -> list[list[str]]:
    """Components of the undirected projection, largest first.

    Equal-sized components are ordered by their smallest node code.
    """
    adj = g.undirected.adjacency
    seen: set[str] = set()
    comps = []
    for n in g.sorted_nodes:
        if n in seen:
            continue
        comp, queue = [n], deque([n])
        seen.add(n)
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def shortest_path_stats(g: GraphSnapshot, workers: int = 1) -> PathStats:
    comps = connected_components(g)
    giant = comps[0]
    sizes = tuple(len(c) for c in comps)
    if len(giant) < 2:
        return PathStats(0.0, 0, (), sizes)
    members = frozenset(giant)
    sub = GraphSnapshot(g.period, members, frozenset(a for a in g.arcs if a[0] in members))
    _, adj = _indexed(sub)
    totals: dict[int, int] = defaultdict(int)
    for counts in _per_source(_bfs_counts, adj, list(range(len(adj))), workers):
        for length, c in counts.items():
            totals[length] += c
    pairs = {length: c // 2 for length, c in totals.items()}
    n_pairs = sum(pairs.values())
    hist = tuple(
        (length, pairs[length], 100.0 * pairs[length] / n_pairs) for length in sorted(pairs)
    )
    d = sum(length * c for length, c in pairs.items()) / n_pairs
    return PathStats(d, max(pairs), hist, sizes)


def betweenness(
    g: GraphSnapshot, normalized: bool = False, workers: int = 1
) -> dict[str, float]:
    """Shortest-path betweenness on the undirected projection.

    Raw values count unordered source/target pairs, with fractional credit
    shared among equally short paths and endpoints excluded.  With
    ``normalized=True`` values are scaled by ``2 / ((N-1)(N-2))``.
    """
    nodes, adj = _indexed(g)
    n = len(nodes)
    total = [0.0] * n
    for delta in _per_source(_brandes_dependency, adj, list(range(n)), workers):
        for i, v in enumerate(delta):
            total[i] += v
    scale = 0.5
    if normalized:
        scale *= 2.0 / ((n - 1) * (n - 2)) if n > 2 else 0.0
    return {node: total[i] * scale for i, node in enumerate(nodes)}


def reciprocity(g: GraphSnapshot) -> ReciprocityResult:
    """Correlation between ``a_ij`` and ``a_ji`` over ordered pairs ``i != j``.

    With ``m`` arcs, ``M`` reciprocated arcs and ``L = N(N-1)`` ordered
    pairs, the double sums reduce to ``(M - a m) / (m - a m)`` where
    ``a = m / L``.
    """
    n = g.n
    if n < 2:
        raise DegenerateError(f"{g.period}: reciprocity needs at least 2 nodes")
    m = len(g.arcs)
    pairs = n * (n - 1)
    a_bar = m / pairs
    if m == 0 or m == pairs:
        raise DegenerateError(f"{g.period}: adjacency is uniform, reciprocity undefined")
    mutual = sum(1 for u, v in g.arcs if (v, u) in g.arcs)
    return ReciprocityResult((mutual - a_bar * m) / (m - a_bar * m), a_bar)


def node_metrics(
    g: GraphSnapshot, normalized_betweenness: bool = False, workers: int = 1
) -> list[NodeMetrics]:
    c = local_clustering(g)
    b = betweenness(g, normalized_betweenness, workers)
    knn = node_knn(g)
    return [
        NodeMetrics(r.node, r.k, r.k_in, r.k_out, c[r.node], b[r.node], knn.get(r.node))
        for r in degree_sequences(g)
    ]
