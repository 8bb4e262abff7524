"""Shared fixtures-by-hand for the test suite."""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from lmdist.graph import UNREACHED, Graph


def path_graph(n):
    u = np.arange(n - 1)
    return Graph.from_edges(n, u, u + 1)


def star_graph(n):
    center = np.zeros(n - 1, dtype=np.int64)
    return Graph.from_edges(n, center, np.arange(1, n))


def cycle_graph(n):
    u = np.arange(n)
    return Graph.from_edges(n, u, (u + 1) % n)


def complete_graph(n):
    u, v = np.triu_indices(n, k=1)
    return Graph.from_edges(n, u, v)


def random_simple_graph(n, m, rng):
    """m edge slots drawn uniformly; loops/dups removed by canonicalization."""
    u = rng.integers(0, n, size=m)
    v = rng.integers(0, n, size=m)
    return Graph.from_edges(n, u, v)


def oracle_distances(g, source):
    """Hop distances via an independent route (Dijkstra on the CSR matrix)."""
    mat = csr_matrix(
        (np.ones(g.neighbors.shape[0]), g.neighbors, g.offsets), shape=(g.n, g.n)
    )
    d = shortest_path(mat, method="D", unweighted=True, indices=source)
    out = np.full(g.n, UNREACHED, dtype=np.int64)
    reached = np.isfinite(d)
    out[reached] = d[reached].astype(np.int64)
    return out


def oracle_all_pairs(g):
    mat = csr_matrix(
        (np.ones(g.neighbors.shape[0]), g.neighbors, g.offsets), shape=(g.n, g.n)
    )
    return shortest_path(mat, method="D", unweighted=True)


def union_find_components(g):
    """Independent component oracle: plain union-find over the edge list."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    src = np.repeat(np.arange(g.n), np.diff(g.offsets))
    for a, b in zip(src.tolist(), g.neighbors.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return [find(x) for x in range(g.n)]
