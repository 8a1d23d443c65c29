"""Slow, obviously-correct reference implementations used only by the tests.

Everything here works on tuples and Python sets through the public lattice
API, so it shares no array tables or union-find code with the package.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from holeperc.lattice import (
    DualBond,
    DualVertex,
    Face,
    face_from_dual_bond,
    face_in_window,
    face_index,
    faces_in_window,
    vertex_in_window,
)

OUT = "outside"


def lattice_neighbors(x: DualVertex):
    """(neighbour, crossing face) pairs for a dual vertex, window ignored."""
    for j in range(len(x.coords)):
        up = DualBond(x, j + 1)
        yield up.tip, face_from_dual_bond(up)
        c = list(x.coords)
        c[j] -= 1
        down = DualBond(DualVertex(tuple(c)), j + 1)
        yield down.base, face_from_dual_bond(down)


def face_is_open(cfg, q: Face) -> bool:
    w = cfg.window
    return face_in_window(w, q) and bool(cfg.open_faces[face_index(w, q)])


def bfs_dual_clusters(cfg):
    """Dict vertex -> frozenset cluster, with the outside as one extra node."""
    w = cfg.window
    verts = [DualVertex(c) for c in itertools.product(range(-w.n, w.n), repeat=w.d)]
    adj = {v: set() for v in verts}
    adj[OUT] = set()
    for v in verts:
        for u, q in lattice_neighbors(v):
            if face_is_open(cfg, q):
                continue
            u = u if vertex_in_window(w, u) else OUT
            adj[v].add(u)
            adj[u].add(v)
    return _components(adj)


def _components(adj):
    comp = {}
    for s in adj:
        if s in comp:
            continue
        seen = {s}
        dq = deque([s])
        while dq:
            a = dq.popleft()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    dq.append(b)
        fs = frozenset(seen)
        for a in seen:
            comp[a] = fs
    return comp


def bfs_holes(cfg) -> set[frozenset]:
    comp = bfs_dual_clusters(cfg)
    return {c for c in set(comp.values()) if OUT not in c}


def bfs_hole_clusters(cfg) -> set[frozenset]:
    """Hole-graph clusters via explicit hole adjacency through open faces."""
    holes = list(bfs_holes(cfg))
    where = {v: i for i, h in enumerate(holes) for v in h}
    adj = {i: set() for i in range(len(holes))}
    for i, h in enumerate(holes):
        for v in h:
            for u, q in lattice_neighbors(v):
                if u in where and where[u] != i and face_is_open(cfg, q):
                    adj[i].add(where[u])
    comp = _components(adj)
    return {frozenset(v for i in c for v in holes[i]) for c in set(comp.values())}


def bfs_face_clusters(cfg) -> set[frozenset]:
    from holeperc.lattice import face_neighbors

    w = cfg.window
    opened = [q for q in faces_in_window(w) if face_is_open(cfg, q)]
    op = set(opened)
    adj = {q: {r for r in face_neighbors(q) if r in op} for q in opened}
    return set(_components(adj).values())


def bfs_kappa(cfg) -> float:
    """Window average of 1/|C|, clusters joined to the outside counting 0."""
    comp = bfs_dual_clusters(cfg)
    verts = [v for v in comp if v != OUT]
    total = sum(0.0 if OUT in comp[v] else 1.0 / len(comp[v]) for v in verts)
    return total / len(verts)


def bond_cfg_from_open_bonds(window, open_bonds):
    """Face configuration whose closed faces are exactly the open in-window bonds."""
    from holeperc.config import Configuration

    return Configuration(window, ~np.asarray(open_bonds, dtype=bool))


def gf2_rank_dense(m: np.ndarray) -> int:
    """Textbook Gaussian elimination over Z/2 on a dense 0/1 matrix."""
    a = (np.array(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def cell_faces(x: DualVertex) -> list[Face]:
    """The 2d faces bounding the unit cell centred at ``x*``."""
    out = []
    for j in range(len(x.coords)):
        out.append(Face(j + 1, x.coords))
        out.append(face_from_dual_bond(DualBond(x, j + 1)))
    return out
