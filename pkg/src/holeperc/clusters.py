"""Cluster labelling on the dual lattice and on faces.

A dual bond is open exactly when the face it crosses is closed.  Faces outside
the window are closed, so every dual bond leaving the window is open and the
whole outside is one connected region; it is represented by a single virtual
node and clusters joined to it are flagged ``touches_infinity``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Configuration
from .errors import UnknownClusterError
from .lattice import DualBond, DualVertex, Window, spanning_mask, tables, vertex_at, vertex_index
from .unionfind import label_edges

DUAL_VERTICES = "dual_vertices"
FACES = "faces"


@dataclass(frozen=True, eq=False)
class ClusterLabeling:
    """Partition of dual vertices (or open faces) into clusters.

    ``labels[k]`` is the cluster id of element ``k``: the smallest element index
    in its cluster, or -1 for unlabelled elements (closed faces).  ``ids``,
    ``sizes`` and ``touches_infinity`` are aligned arrays, one entry per cluster
    in increasing id order.
    """

    subject: str
    window: Window
    labels: np.ndarray
    ids: np.ndarray
    sizes: np.ndarray
    touches_infinity: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.ids)

    def position(self, cluster_id: int) -> int:
        i = int(np.searchsorted(self.ids, cluster_id))
        if i >= len(self.ids) or self.ids[i] != cluster_id:
            raise UnknownClusterError(cluster_id)
        return i

    def size_of(self, cluster_id: int) -> int:
        return int(self.sizes[self.position(cluster_id)])

    def is_infinite(self, cluster_id: int) -> bool:
        return bool(self.touches_infinity[self.position(cluster_id)])

    def members(self, cluster_id: int) -> np.ndarray:
        self.position(cluster_id)
        return np.flatnonzero(self.labels == cluster_id)

    def cluster_of(self, x: DualVertex) -> int:
        if self.subject != DUAL_VERTICES:
            raise TypeError("cluster_of takes a dual vertex; this labelling is over faces")
        return int(self.labels[vertex_index(self.window, x)])


def _summarise(labels: np.ndarray, flagged: np.ndarray):
    valid = labels >= 0
    ids, sizes = np.unique(labels[valid], return_counts=True)
    touch = np.zeros(len(ids), dtype=bool)
    if flagged.any():
        touch[np.searchsorted(ids, np.unique(labels[valid & flagged]))] = True
    return ids, sizes, touch


def dual_label_array(cfg: Configuration, connect_outside: bool = True) -> np.ndarray:
    """Canonical labels of the ``V + 1`` nodes (window vertices, then outside).

    With ``connect_outside=False`` only bonds with both ends in the window are
    used and the outside node stays isolated.
    """
    t = tables(cfg.window)
    closed = ~cfg.open_faces
    src, dst = t.bond_lo[closed], t.bond_hi[closed]
    if not connect_outside:
        inside = (src < t.outside) & (dst < t.outside)
        src, dst = src[inside], dst[inside]
    return label_edges(cfg.window.n_vertices + 1, src, dst)


def dual_clusters(cfg: Configuration, connect_outside: bool = True) -> ClusterLabeling:
    """Open-dual-bond clusters of ``B~(n)``."""
    full = dual_label_array(cfg, connect_outside)
    V = cfg.window.n_vertices
    labels = full[:V].copy()
    at_inf = labels == full[V] if connect_outside else np.zeros(V, dtype=bool)
    ids, sizes, touch = _summarise(labels, at_inf)
    return ClusterLabeling(DUAL_VERTICES, cfg.window, labels, ids, sizes, touch)


def face_label_array(cfg: Configuration) -> np.ndarray:
    """Canonical labels of open faces under (d-2)-cube adjacency; -1 if closed."""
    t = tables(cfg.window)
    src, dst = t.face_pairs
    op = cfg.open_faces
    keep = op[src] & op[dst]
    labels = label_edges(cfg.window.n_faces, src[keep], dst[keep])
    labels[~op] = -1
    return labels


def face_clusters(cfg: Configuration) -> ClusterLabeling:
    """Open-face clusters; ``touches_infinity`` means meeting the window boundary."""
    labels = face_label_array(cfg)
    on_edge = tables(cfg.window).face_bits != 0
    ids, sizes, touch = _summarise(labels, on_edge)
    return ClusterLabeling(FACES, cfg.window, labels, ids, sizes, touch)


def boundary_edges(labeling: ClusterLabeling, cluster_id: int) -> set[DualBond]:
    """All dual bonds with exactly one endpoint in the cluster.

    Bonds leading out of the window are included.
    """
    if labeling.subject != DUAL_VERTICES:
        raise TypeError("boundary_edges needs a dual-vertex labelling")
    w = labeling.window
    members = labeling.members(cluster_id)
    inside = set(members.tolist())
    nbrs = tables(w).vertex_nbrs
    out = set()
    for v in members.tolist():
        base = vertex_at(w, v)
        for j in range(w.d):
            lo, hi = nbrs[v, 2 * j], nbrs[v, 2 * j + 1]
            if hi < 0 or hi not in inside:
                out.add(DualBond(base, j + 1))
            if lo < 0 or lo not in inside:
                c = list(base.coords)
                c[j] -= 1
                out.add(DualBond(DualVertex(tuple(c)), j + 1))
    return out


def spanning_clusters(labels: np.ndarray, bits: np.ndarray, d: int) -> np.ndarray:
    """Ids of clusters whose members touch two opposite sides along some axis."""
    valid = labels >= 0
    if not valid.any():
        return np.empty(0, dtype=np.int64)
    ids, inv = np.unique(labels[valid], return_inverse=True)
    acc = np.zeros(len(ids), dtype=np.int64)
    np.bitwise_or.at(acc, inv, bits[valid])
    span = (acc & (acc >> 1) & spanning_mask(d)) != 0
    return ids[span]
