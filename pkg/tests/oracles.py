"""Brute-force reference implementations used only by the tests.

None of these share code paths with the package: distances come from
Floyd-Warshall on a dense matrix, betweenness from enumerating every simple
path, reciprocity from the literal double sum.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def undirected_matrix(nodes, arcs):
    idx = {n: i for i, n in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)), dtype=int)
    for u, v in arcs:
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = 1
    return a


def directed_matrix(nodes, arcs):
    idx = {n: i for i, n in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)), dtype=int)
    for u, v in arcs:
        a[idx[u], idx[v]] = 1
    return a


def floyd_warshall(a):
    n = len(a)
    d = np.full((n, n), math.inf)
    for i in range(n):
        d[i, i] = 0
        for j in range(n):
            if a[i, j]:
                d[i, j] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i, k] + d[k, j] < d[i, j]:
                    d[i, j] = d[i, k] + d[k, j]
    return d


def simple_paths(a, s, t):
    n = len(a)
    out = []

    def walk(path, seen):
        v = path[-1]
        if v == t:
            out.append(list(path))
            return
        for w in range(n):
            if a[v, w] and w not in seen:
                seen.add(w)
                path.append(w)
                walk(path, seen)
                path.pop()
                seen.discard(w)

    walk([s], {s})
    return out


def betweenness(a):
    """Unordered-pair betweenness from exhaustive simple-path enumeration."""
    n = len(a)
    b = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        paths = simple_paths(a, s, t)
        if not paths:
            continue
        shortest = min(len(p) for p in paths)
        best = [p for p in paths if len(p) == shortest]
        for p in best:
            for v in p[1:-1]:
                b[v] += 1.0 / len(best)
    return b


def knn(a):
    deg = a.sum(axis=1)
    return [
        None if deg[i] == 0 else sum(deg[j] for j in range(len(a)) if a[i, j]) / deg[i]
        for i in range(len(a))
    ]


def local_clustering(a):
    n = len(a)
    out = []
    for i in range(n):
        nb = [j for j in range(n) if a[i, j]]
        k = len(nb)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(1 for u, v in itertools.combinations(nb, 2) if a[u, v])
        out.append(links / (k * (k - 1) / 2))
    return out


def path_stats(a):
    """(d, D, {length: pair count}) over the largest component."""
    d = floyd_warshall(a)
    n = len(a)
    comps = []
    seen = set()
    for i in range(n):
        if i in seen:
            continue
        comp = {j for j in range(n) if math.isfinite(d[i, j])}
        seen |= comp
        comps.append(sorted(comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    giant = comps[0]
    hist = {}
    for i, j in itertools.combinations(giant, 2):
        hist[int(d[i, j])] = hist.get(int(d[i, j]), 0) + 1
    if not hist:
        return 0.0, 0, {}
    total = sum(hist.values())
    return sum(l * c for l, c in hist.items()) / total, max(hist), hist


def reciprocity(a):
    """The literal double-sum definition over ordered pairs i != j."""
    n = len(a)
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    a_bar = sum(a[i, j] for i, j in off) / (n * (n - 1))
    num = sum((a[i, j] - a_bar) * (a[j, i] - a_bar) for i, j in off)
    den = sum((a[i, j] - a_bar) ** 2 for i, j in off)
    return num / den, num, den, a_bar


def ols(points):
    """Closed-form simple regression via the normal equations."""
    n = len(points)
    sx = sum(x for x, _ in points)
    sy = sum(y for _, y in points)
    sxx = sum(x * x for x, _ in points)
    sxy = sum(x * y for x, y in points)
    syy = sum(y * y for _, y in points)
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    r = (n * sxy - sx * sy) / math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))
    return slope, intercept, r
