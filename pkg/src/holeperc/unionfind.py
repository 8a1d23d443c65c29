"""Disjoint-set forest kernels (path halving + union by size), numba-compiled.

Labels produced here are canonical: every element is labelled with the
smallest element index of its component, so results do not depend on the order
in which edges are processed.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def union(parent, size, a, b):
    ra = find(parent, a)
    rb = find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@njit(cache=True)
def canonical_labels(parent):
    m = parent.shape[0]
    lowest = np.full(m, -1, dtype=np.int64)
    labels = np.empty(m, dtype=np.int64)
    for v in range(m):
        r = find(parent, v)
        if lowest[r] < 0:
            lowest[r] = v
        labels[v] = lowest[r]
    return labels


@njit(cache=True)
def label_edges(n_nodes, src, dst):
    """Canonical component labels of the graph on ``n_nodes`` with given edges."""
    parent = np.arange(n_nodes, dtype=np.int64)
    size = np.ones(n_nodes, dtype=np.int64)
    for k in range(src.shape[0]):
        union(parent, size, src[k], dst[k])
    return canonical_labels(parent)

