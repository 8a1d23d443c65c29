"""Finite-size crossing estimates of the hole, face and dual-bond thresholds.

Under the coupling every face carries one uniform ``X_Q`` and the
configuration at ``p`` opens the faces with ``X_Q < p``.  The spanning events
for face clusters, dual-bond clusters and hole clusters are all monotone in
their parameter, so each replicate has a single threshold value, found here by
one Newman-Ziff style union-find sweep:

* faces: add faces in increasing ``X``; span once a face cluster joins two
  opposite sides of the window;
* dual bonds (probability ``q = 1 - p``): add in-window bonds in decreasing
  ``X``; span once a bond cluster joins two opposite outer layers;
* holes: add every dual bond in decreasing ``X`` and record for each vertex the
  value at which it joins the outside (the bottleneck value ``tau``).  A vertex
  lies off the infinite cluster I at ``p`` iff ``tau < p``.  Then add vertices in
  increasing ``tau``; span once a component joins two opposite outer layers.

A configurable number of replicates is re-checked point by point with the
plain labelling code, which also enforces monotonicity of every indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .clusters import dual_label_array, face_label_array, spanning_clusters
from .config import coupled_field, threshold
from .errors import InvariantViolation
from .holes import complement_label_array
from .lattice import Window, spanning_mask, tables
from .unionfind import find

KINDS = ("hole", "face", "bond")


@njit(cache=True)
def _merge(parent, size, bits, a, b):
    ra = find(parent, a)
    rb = find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    bits[ra] |= bits[rb]
    return ra


@njit(cache=True)
def _face_threshold(order, x, nbrs, face_bits, smask):
    m = x.shape[0]
    parent = np.arange(m)
    size = np.ones(m, dtype=np.int64)
    bits = face_bits.copy()
    opened = np.zeros(m, dtype=np.bool_)
    for k in order:
        opened[k] = True
        r = k
        for c in range(nbrs.shape[1]):
            u = nbrs[k, c]
            if u >= 0 and opened[u]:
                r = _merge(parent, size, bits, r, u)
        b = bits[find(parent, r)]
        if b & (b >> 1) & smask:
            return x[k]
    return np.inf


@njit(cache=True)
def _bond_threshold(order_desc, x, lo, hi, n_vertices, vertex_bits, smask):
    parent = np.arange(n_vertices)
    size = np.ones(n_vertices, dtype=np.int64)
    bits = vertex_bits.copy()
    for k in order_desc:
        a = lo[k]
        b = hi[k]
        if a >= n_vertices or b >= n_vertices:
            continue
        r = _merge(parent, size, bits, a, b)
        m = bits[r]
        if m & (m >> 1) & smask:
            return 1.0 - x[k]
    return np.inf


@njit(cache=True)
def _join_times(order_desc, x, lo, hi, n_vertices):
    """Bottleneck value at which each vertex joins the outside node."""
    m = n_vertices + 1
    out = n_vertices
    parent = np.arange(m)
    size = np.ones(m, dtype=np.int64)
    nxt = np.arange(m)
    tau = np.full(n_vertices, -1.0)
    for k in order_desc:
        ra = find(parent, lo[k])
        rb = find(parent, hi[k])
        if ra == rb:
            continue
        r_out = find(parent, out)
        if ra == r_out or rb == r_out:
            other = rb if ra == r_out else ra
            j = other
            while True:
                tau[j] = x[k]
                j = nxt[j]
                if j == other:
                    break
        tmp = nxt[ra]
        nxt[ra] = nxt[rb]
        nxt[rb] = tmp
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    return tau


@njit(cache=True)
def _site_threshold(order, tau, nbrs, vertex_bits, smask):
    V = tau.shape[0]
    parent = np.arange(V)
    size = np.ones(V, dtype=np.int64)
    bits = vertex_bits.copy()
    active = np.zeros(V, dtype=np.bool_)
    for v in order:
        active[v] = True
        r = v
        for c in range(nbrs.shape[1]):
            u = nbrs[v, c]
            if u >= 0 and active[u]:
                r = _merge(parent, size, bits, r, u)
        b = bits[find(parent, r)]
        if b & (b >> 1) & smask:
            return tau[v]
    return np.inf


def join_times(w: Window, x: np.ndarray) -> np.ndarray:
    t = tables(w)
    order = np.argsort(-x, kind="stable")
    return _join_times(order, x, t.bond_lo, t.bond_hi, w.n_vertices)


def spanning_thresholds(w: Window, x: np.ndarray) -> dict[str, float]:
    """Per-replicate thresholds.

    Face and hole clusters span at ``p`` iff ``p > threshold``; dual-bond
    clusters span at bond probability ``q`` iff ``q >= threshold``.
    """
    t = tables(w)
    smask = spanning_mask(w.d)
    asc = np.argsort(x, kind="stable")
    desc = asc[::-1].copy()
    face = _face_threshold(asc, x, t.face_nbrs, t.face_bits, smask)
    bond = _bond_threshold(desc, x, t.bond_lo, t.bond_hi, w.n_vertices, t.vertex_bits, smask)
    tau = _join_times(desc, x, t.bond_lo, t.bond_hi, w.n_vertices)
    hole = _site_threshold(np.argsort(tau, kind="stable"), tau, t.vertex_nbrs, t.vertex_bits, smask)
    return {"hole": float(hole), "face": float(face), "bond": float(bond)}


def direct_indicators(w: Window, x: np.ndarray, grid) -> dict[str, np.ndarray]:
    """Spanning indicators on a grid using the plain labelling routines.

    The bond indicator at grid value ``g`` uses bond probability ``g``, i.e. the
    face configuration thresholded at ``1 - g``.
    """
    from .config import UniformField

    f = UniformField(w, x, seed=0)
    t = tables(w)
    d = w.d
    out = {k: np.zeros(len(grid), dtype=bool) for k in KINDS}
    for i, g in enumerate(grid):
        cfg = threshold(f, g)
        out["hole"][i] = len(spanning_clusters(complement_label_array(cfg), t.vertex_bits, d)) > 0
        out["face"][i] = len(spanning_clusters(face_label_array(cfg), t.face_bits, d)) > 0
        # bond open at q  <=>  X >= 1 - q  <=>  face closed in threshold(f, 1 - q)
        bcfg = threshold(f, 1.0 - g)
        lab = dual_label_array(bcfg, connect_outside=False)[: w.n_vertices]
        out["bond"][i] = len(spanning_clusters(lab, t.vertex_bits, d)) > 0
    return out


def _check_monotone(ind: np.ndarray) -> bool:
    return bool(np.all(np.diff(ind.astype(np.int8)) >= 0))


def crossing_points(grid, small, large) -> list[float]:
    """Parameter values where ``small - large`` changes sign from + to -.

    Grid points where the two curves agree exactly are skipped; each sign
    change is located by linear interpolation.
    """
    grid = np.asarray(grid, dtype=float)
    diff = np.asarray(small, dtype=float) - np.asarray(large, dtype=float)
    nz = np.flatnonzero(diff != 0)
    out = []
    for a, b in zip(nz[:-1], nz[1:]):
        if diff[a] > 0 > diff[b]:
            ga, gb, da, db = grid[a], grid[b], diff[a], diff[b]
            out.append(float(ga + (gb - ga) * da / (da - db)))
    return out


def departure_point(grid, small, large) -> float | None:
    """Right end of the leading run of grid points where the two curves coincide.

    Used when one window size leads at every ``p`` so the curves never change
    order: their only intersection is the low-``p`` run where both are equal,
    and its right end is where they separate.  Linear interpolation of the
    difference between the last tie and the next point returns the tie point.
    """
    grid = np.asarray(grid, dtype=float)
    diff = np.asarray(small, dtype=float) - np.asarray(large, dtype=float)
    nz = np.flatnonzero(diff != 0)
    if len(nz) == 0 or nz[0] == 0:
        return None
    return float(grid[nz[0] - 1])


@dataclass
class SweepResult:
    d: int
    n_list: tuple
    grid: np.ndarray
    replicates: int
    seed: int
    curves: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    pair_crossings: dict = field(default_factory=dict)
    pair_methods: dict = field(default_factory=dict)
    pc: dict = field(default_factory=dict)

    def curve(self, kind: str, n: int) -> np.ndarray:
        return self.curves[kind][n]

    def median_threshold(self, kind: str, n: int) -> float:
        return float(np.median(self.thresholds[kind][n]))

    def std_error(self, kind: str, n: int) -> np.ndarray:
        pr = self.curves[kind][n]
        return np.sqrt(pr * (1 - pr) / max(self.replicates - 1, 1))


def _replicate_thresholds(args):
    w, seed, r = args
    return spanning_thresholds(w, coupled_field(w, seed, r).values)


def sweep_pc(d, n_list, p_grid, reps, seed, audit_replicates=2, jobs=1) -> SweepResult:
    """Spanning curves for holes, faces and dual bonds, and their crossings.

    ``pc["bond"]`` is expressed as a dual-bond probability.  Crossings are taken
    between every pair of successive window sizes and averaged.  A pair whose
    curves never change order falls back to :func:`departure_point`; the method
    used is kept in ``pair_methods``.
    """
    from .estimators import map_replicates

    grid = np.asarray(p_grid, dtype=float)
    if len(grid) < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > 1:
        raise ValueError("p_grid must be strictly increasing inside [0, 1]")
    n_list = tuple(int(n) for n in n_list)
    if any(b <= a for a, b in zip(n_list[:-1], n_list[1:])):
        raise ValueError("n_list must be increasing")

    res = SweepResult(d, n_list, grid, reps, seed)
    for kind in KINDS:
        res.curves[kind] = {}
        res.thresholds[kind] = {}
    for n in n_list:
        w = Window(n, d)
        rows = map_replicates(_replicate_thresholds, [(w, seed, r) for r in range(reps)], jobs)
        for kind in KINDS:
            th = np.array([row[kind] for row in rows])
            res.thresholds[kind][n] = th
            if kind == "bond":
                ind = grid[None, :] >= th[:, None]
            else:
                ind = grid[None, :] > th[:, None]
            res.curves[kind][n] = ind.mean(axis=0)
        for r in range(min(audit_replicates, reps)):
            _audit(w, seed, r, grid, {k: res.thresholds[k][n][r] for k in KINDS})

    for kind in KINDS:
        crossings = []
        for a, b in zip(n_list[:-1], n_list[1:]):
            pts = crossing_points(grid, res.curves[kind][a], res.curves[kind][b])
            method = "crossing"
            if not pts:
                dep = departure_point(grid, res.curves[kind][a], res.curves[kind][b])
                pts, method = ([dep], "departure") if dep is not None else ([], "none")
            res.pair_crossings.setdefault(kind, {})[(a, b)] = pts
            res.pair_methods.setdefault(kind, {})[(a, b)] = method
            if pts:
                crossings.append(float(np.median(pts)))
        res.pc[kind] = float(np.mean(crossings)) if crossings else math.nan
    return res


def _audit(w, seed, r, grid, th):
    x = coupled_field(w, seed, r).values
    ind = direct_indicators(w, x, grid)
    for kind in KINDS:
        if not _check_monotone(ind[kind]):
            raise InvariantViolation(
                f"{kind} spanning indicator not monotone under coupling "
                f"(d={w.d}, n={w.n}, seed={seed}, replicate={r}): {ind[kind].astype(int)}"
            )
        expect = grid >= th[kind] if kind == "bond" else grid > th[kind]
        if not np.array_equal(expect, ind[kind]):
            raise InvariantViolation(
                f"{kind} threshold sweep disagrees with direct labelling "
                f"(d={w.d}, n={w.n}, seed={seed}, replicate={r})"
            )
