"""Holes, the hole graph, hole clusters and trifurcations.

A hole is a finite dual cluster.  Two holes are adjacent when a closed dual
bond (an open face) joins them.  Hole clusters are computed twice: as
components of the hole graph, and as components of the dual lattice with the
infinity-touching clusters removed.  A hole cluster counts as infinite when it
reaches the outermost dual layer of the window.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numba import njit
from scipy import ndimage

from .clusters import dual_label_array, spanning_clusters
from .config import Configuration
from .lattice import DualVertex, Face, Window, spans, tables, vertex_at, vertex_index
from .unionfind import label_edges


@dataclass(frozen=True)
class Hole:
    id: int
    members: frozenset
    size: int


def canonicalize(labels: np.ndarray) -> np.ndarray:
    """Relabel each class by the smallest index it contains; -1 stays -1."""
    out = np.full(labels.shape, -1, dtype=np.int64)
    idx = np.flatnonzero(labels >= 0)
    if idx.size == 0:
        return out
    lab = labels[idx]
    uniq, first = np.unique(lab, return_index=True)
    out[idx] = idx[first][np.searchsorted(uniq, lab)]
    return out


@dataclass(frozen=True, eq=False)
class HoleIndex:
    """Array view of the holes of one configuration.

    ``hole_of_vertex[v]`` is the hole id of dual vertex ``v`` or -1 when ``v``
    belongs to an infinity-touching cluster.  Hole ids are ordered by their
    smallest member, which is ``roots[id]``.
    """

    window: Window
    hole_of_vertex: np.ndarray
    roots: np.ndarray
    sizes: np.ndarray

    @property
    def n_holes(self) -> int:
        return len(self.roots)

    @property
    def in_infinite(self) -> np.ndarray:
        return self.hole_of_vertex < 0


def hole_index(cfg: Configuration) -> HoleIndex:
    V = cfg.window.n_vertices
    full = dual_label_array(cfg)
    labels = full[:V]
    finite = labels != full[V]
    roots, sizes = np.unique(labels[finite], return_counts=True)
    hov = np.full(V, -1, dtype=np.int64)
    hov[finite] = np.searchsorted(roots, labels[finite])
    return HoleIndex(cfg.window, hov, roots, sizes)


def extract_holes(cfg: Configuration) -> list[Hole]:
    idx = hole_index(cfg)
    order = np.argsort(idx.hole_of_vertex, kind="stable")
    hov = idx.hole_of_vertex[order]
    start = np.searchsorted(hov, 0)
    groups = np.split(order[start:], np.cumsum(idx.sizes)[:-1]) if idx.n_holes else []
    w = cfg.window
    return [
        Hole(h, frozenset(vertex_at(w, int(v)) for v in g), int(idx.sizes[h]))
        for h, g in enumerate(groups)
    ]


@dataclass(frozen=True, eq=False)
class HoleGraph:
    window: Window
    index: HoleIndex
    edges: np.ndarray
    cluster_label: np.ndarray
    cluster_ids: np.ndarray
    cluster_touches_boundary: np.ndarray

    @cached_property
    def holes(self) -> list[Hole]:
        w = self.window
        members = [[] for _ in range(self.index.n_holes)]
        for v in np.flatnonzero(self.index.hole_of_vertex >= 0).tolist():
            members[self.index.hole_of_vertex[v]].append(vertex_at(w, v))
        return [Hole(h, frozenset(m), len(m)) for h, m in enumerate(members)]

    @property
    def n_holes(self) -> int:
        return self.index.n_holes

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_ids)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_holes)]
        for a, b in self.edges.tolist():
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(x) for x in adj]

    def vertex_cluster(self) -> np.ndarray:
        """Per dual vertex: hole-cluster id (its smallest hole id), -1 in I."""
        hov = self.index.hole_of_vertex
        out = np.full(hov.shape, -1, dtype=np.int64)
        ok = hov >= 0
        out[ok] = self.cluster_label[hov[ok]]
        return out

    def vertex_partition(self) -> np.ndarray:
        """Hole clusters as a partition of dual vertices, canonical labels."""
        return canonicalize(self.vertex_cluster())

    def cluster_bits(self) -> np.ndarray:
        """OR of outer-layer bits over the vertices of each cluster."""
        vc = self.vertex_cluster()
        ok = vc >= 0
        acc = np.zeros(len(self.cluster_ids), dtype=np.int64)
        pos = np.searchsorted(self.cluster_ids, vc[ok])
        np.bitwise_or.at(acc, pos, tables(self.window).vertex_bits[ok])
        return acc

    def spanning_flags(self) -> np.ndarray:
        d = self.window.d
        return np.array([spans(int(b), d) for b in self.cluster_bits()], dtype=bool)


def build_hole_graph(cfg: Configuration) -> HoleGraph:
    t = tables(cfg.window)
    idx = hole_index(cfg)
    hov = idx.hole_of_vertex
    H = idx.n_holes
    # closed dual bonds (open faces) with both ends inside the window
    sel = cfg.open_faces & (t.bond_lo < t.outside) & (t.bond_hi < t.outside)
    ha, hb = hov[t.bond_lo[sel]], hov[t.bond_hi[sel]]
    keep = (ha >= 0) & (hb >= 0) & (ha != hb)
    pairs = np.stack([np.minimum(ha[keep], hb[keep]), np.maximum(ha[keep], hb[keep])], axis=1)
    edges = np.unique(pairs, axis=0) if len(pairs) else np.empty((0, 2), dtype=np.int64)
    cl = label_edges(H, edges[:, 0].copy(), edges[:, 1].copy()) if H else np.empty(0, np.int64)
    ids = np.unique(cl)
    on_edge = np.zeros(H, dtype=bool)
    bverts = (t.vertex_bits != 0) & (hov >= 0)
    on_edge[hov[bverts]] = True
    touch = np.zeros(len(ids), dtype=bool)
    if on_edge.any():
        touch[np.searchsorted(ids, np.unique(cl[on_edge]))] = True
    return HoleGraph(cfg.window, idx, edges, cl, ids, touch)


def _structure(d: int):
    return ndimage.generate_binary_structure(d, 1)


def complement_label_array(cfg: Configuration, in_infinite=None) -> np.ndarray:
    """Raw component labels of the dual lattice minus I; -1 on I."""
    w = cfg.window
    if in_infinite is None:
        full = dual_label_array(cfg)
        in_infinite = full[: w.n_vertices] == full[w.n_vertices]
    mask = (~in_infinite).reshape(w.vertex_shape)
    lab, _ = ndimage.label(mask, structure=_structure(w.d))
    return lab.ravel().astype(np.int64) - 1


def hole_clusters_via_complement(cfg: Configuration) -> np.ndarray:
    """Hole clusters as components of the dual lattice with I and its bonds removed.

    Returns a canonical label per dual vertex (smallest member index), -1 for
    vertices of I.  Every bond between two vertices outside I is kept,
    regardless of its state.
    """
    return canonicalize(complement_label_array(cfg))


def count_spanning_hole_clusters(cfg: Configuration) -> int:
    """Hole clusters touching two opposite outer layers of ``B~(n)``."""
    lab = complement_label_array(cfg)
    return len(spanning_clusters(lab, tables(cfg.window).vertex_bits, cfg.d))


# -- trifurcations -------------------------------------------------------------

def _cell_faces_open(cfg: Configuration, v: int) -> bool:
    t = tables(cfg.window)
    # faces whose dual bond has v as an endpoint
    return bool(cfg.open_faces[(t.bond_lo == v) | (t.bond_hi == v)].all())


def is_trifurcation(cfg: Configuration, x: DualVertex) -> bool:
    """Direct check of the three trifurcation conditions at ``x*``.

    1. ``{x*}`` is a hole on its own;
    2. its hole cluster reaches the outer layer;
    3. removing that hole leaves exactly three clusters reaching the outer layer.
    """
    w = cfg.window
    v = vertex_index(w, x)
    if not _cell_faces_open(cfg, v):
        return False
    bits = tables(w).vertex_bits
    lab = complement_label_array(cfg)
    comp = lab == lab[v]
    if not (bits[comp] != 0).any():
        return False
    comp[v] = False
    sub, k = ndimage.label(comp.reshape(w.vertex_shape), structure=_structure(w.d))
    sub = sub.ravel()
    touching = np.unique(sub[(sub > 0) & (bits != 0)])
    return len(touching) == 3


@njit(cache=True)
def _articulation_scan(allowed, nbrs, is_b, candidate):
    V = allowed.shape[0]
    deg = nbrs.shape[1]
    disc = np.full(V, -1, dtype=np.int64)
    low = np.zeros(V, dtype=np.int64)
    parent = np.full(V, -1, dtype=np.int64)
    bcount = np.zeros(V, dtype=np.int64)
    sep_sum = np.zeros(V, dtype=np.int64)
    sep_cnt = np.zeros(V, dtype=np.int64)
    root_of = np.full(V, -1, dtype=np.int64)
    stack_v = np.empty(V, dtype=np.int64)
    stack_i = np.empty(V, dtype=np.int64)
    timer = 0
    for s in range(V):
        if not allowed[s] or disc[s] >= 0:
            continue
        disc[s] = timer
        low[s] = timer
        timer += 1
        bcount[s] = is_b[s]
        root_of[s] = s
        top = 0
        stack_v[0] = s
        stack_i[0] = 0
        while top >= 0:
            v = stack_v[top]
            i = stack_i[top]
            if i < deg:
                stack_i[top] = i + 1
                u = nbrs[v, i]
                if u < 0 or not allowed[u]:
                    continue
                if disc[u] < 0:
                    parent[u] = v
                    disc[u] = timer
                    low[u] = timer
                    timer += 1
                    bcount[u] = is_b[u]
                    root_of[u] = s
                    top += 1
                    stack_v[top] = u
                    stack_i[top] = 0
                elif u != parent[v]:
                    if disc[u] < low[v]:
                        low[v] = disc[u]
            else:
                top -= 1
                if top >= 0:
                    pv = stack_v[top]
                    if low[v] < low[pv]:
                        low[pv] = low[v]
                    bcount[pv] += bcount[v]
                    if low[v] >= disc[pv]:
                        sep_sum[pv] += bcount[v]
                        if bcount[v] > 0:
                            sep_cnt[pv] += 1
    out = np.zeros(V, dtype=np.bool_)
    for v in range(V):
        if not candidate[v] or not allowed[v]:
            continue
        total = bcount[root_of[v]]
        if total == 0:
            continue
        rest = total - is_b[v] - sep_sum[v]
        k = sep_cnt[v] + (1 if rest > 0 else 0)
        out[v] = k == 3
    return out


def trifurcations(cfg: Configuration) -> np.ndarray:
    """Indices of all trifurcations in ``B~(n)`` (single linear-time pass)."""
    w = cfg.window
    t = tables(w)
    V = w.n_vertices
    full = dual_label_array(cfg)
    labels = full[:V]
    in_inf = labels == full[V]
    sizes = np.bincount(labels, minlength=V)
    singleton = (~in_inf) & (sizes[labels] == 1)
    is_b = (t.vertex_bits != 0).astype(np.int64)
    return np.flatnonzero(_articulation_scan(~in_inf, t.vertex_nbrs, is_b, singleton))


# -- independent adjacency route ------------------------------------------------

def hole_boundary_faces(cfg: Configuration) -> list[set[Face]]:
    """Geometric boundary of each hole: cell faces that occur exactly once.

    The union of the closed cells of a hole has as boundary exactly the faces
    belonging to one member cell only.  Slow; intended for cross-checks.
    """
    w = cfg.window
    idx = hole_index(cfg)
    counters = [Counter() for _ in range(idx.n_holes)]
    for v in np.flatnonzero(idx.hole_of_vertex >= 0).tolist():
        c = vertex_at(w, v).coords
        ctr = counters[idx.hole_of_vertex[v]]
        for j in range(w.d):
            for s in (0, 1):
                a = list(c)
                a[j] += s
                ctr[Face(j + 1, tuple(a))] += 1
    return [{q for q, k in ctr.items() if k == 1} for ctr in counters]


def hole_edges_via_faces(cfg: Configuration) -> set[tuple[int, int]]:
    """Hole adjacency from shared boundary faces (slow cross-check route)."""
    bnd = hole_boundary_faces(cfg)
    owner: dict[Face, list[int]] = {}
    for h, faces in enumerate(bnd):
        for q in faces:
            owner.setdefault(q, []).append(h)
    edges = set()
    for hs in owner.values():
        for i in range(len(hs)):
            for j in range(i + 1, len(hs)):
                edges.add((min(hs[i], hs[j]), max(hs[i], hs[j])))
    return edges


# -- export --------------------------------------------------------------------

def hole_graph_adjacency_text(graph: HoleGraph) -> str:
    """One line per hole: ``hole_id size member_count: neighbor_ids...``."""
    lines = []
    adj = graph.adjacency()
    for h in range(graph.n_holes):
        size = int(graph.index.sizes[h])
        nb = " ".join(str(x) for x in adj[h])
        lines.append(f"{h} {size} {size}: {nb}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def hole_graph_summary(graph: HoleGraph) -> dict:
    counts = np.bincount(
        np.searchsorted(graph.cluster_ids, graph.cluster_label), minlength=graph.n_clusters
    ) if graph.n_holes else np.zeros(0, dtype=np.int64)
    vc = graph.vertex_cluster()
    vsizes = np.bincount(np.searchsorted(graph.cluster_ids, vc[vc >= 0]), minlength=graph.n_clusters)
    span = graph.spanning_flags()
    clusters = [
        {
            "id": int(cid),
            "holes": int(counts[i]),
            "vertices": int(vsizes[i]),
            "touches_boundary": bool(graph.cluster_touches_boundary[i]),
            "spanning": bool(span[i]),
        }
        for i, cid in enumerate(graph.cluster_ids.tolist())
    ]
    return {
        "d": graph.window.d,
        "n": graph.window.n,
        "hole_count": graph.n_holes,
        "edge_count": int(len(graph.edges)),
        "cluster_count": graph.n_clusters,
        "max_cluster_size": int(counts.max()) if len(counts) else 0,
        "boundary_touching_clusters": int(graph.cluster_touches_boundary.sum()),
        "spanning_clusters": int(span.sum()),
        "clusters": clusters,
    }


def write_hole_graph(graph: HoleGraph, adjacency_path, summary_path) -> None:
    Path(adjacency_path).write_text(hole_graph_adjacency_text(graph))
    Path(summary_path).write_text(json.dumps(hole_graph_summary(graph), indent=2) + "\n")
