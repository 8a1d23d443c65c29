"""Randomised invariant suite behind ``holeperc verify``.

Instances are visited in increasing (d, n) so the first failure reported is
also the smallest one found.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clusters import boundary_edges, dual_clusters
from .config import Configuration, SimulationParams, coupled_field, sample_configuration, threshold
from .errors import OracleScaleExceeded
from .holes import (
    build_hole_graph,
    count_spanning_hole_clusters,
    hole_clusters_via_complement,
    is_trifurcation,
    trifurcations,
)
from .homology import betti_codim1, complement_components_voxel
from .lattice import face_from_dual_bond, face_in_window, face_index, vertex_at

P_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
CHECKS = ("three_way", "partition", "monotone", "boundary_faces", "trifurcation")


@dataclass
class Failure:
    check: str
    d: int
    n: int
    p: float
    seed: int
    detail: str

    def repro(self) -> str:
        return f"d={self.d} n={self.n} p={self.p} seed={self.seed}"


@dataclass
class VerifyResult:
    instances: int = 0
    counts: dict = field(default_factory=lambda: {c: 0 for c in CHECKS})
    skipped: dict = field(default_factory=lambda: {c: 0 for c in CHECKS})
    failure: Failure | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def check_three_way(cfg: Configuration, labelled: Configuration | None = None) -> str | None:
    """Hole count against the Betti number and the voxel flood fill.

    ``labelled`` is what the hole code sees; it defaults to ``cfg`` and only
    differs under fault injection.
    """
    holes = build_hole_graph(labelled if labelled is not None else cfg).n_holes
    b = betti_codim1(cfg)
    v = complement_components_voxel(cfg)
    if not holes == b == v:
        return f"holes={holes} betti={b} voxel={v}"
    return None


def check_partition(cfg: Configuration, labelled: Configuration | None = None) -> str | None:
    g = build_hole_graph(labelled if labelled is not None else cfg)
    a = g.vertex_partition()
    b = hole_clusters_via_complement(cfg)
    if not np.array_equal(a, b):
        k = int(np.flatnonzero(a != b)[0])
        return f"hole-graph clusters differ from complement components at vertex {vertex_at(cfg.window, k).coords}"
    return None


def check_monotone(d: int, n: int, seed: int, grid=P_GRID) -> str | None:
    """Hole membership and spanning indicator along p under the coupling."""
    f = coupled_field(SimulationParams(p=0.0, d=d, n=n, seed=seed).window, seed, 0)
    prev_members, prev_span, prev_p = None, 0, None
    for p in grid:
        cfg = threshold(f, p)
        members = build_hole_graph(cfg).index.hole_of_vertex >= 0
        span = count_spanning_hole_clusters(cfg) > 0
        if prev_members is not None:
            if (prev_members & ~members).any():
                return f"hole membership shrinks between p={prev_p} and p={p}"
            if prev_span and not span:
                return f"spanning indicator drops between p={prev_p} and p={p}"
        prev_members, prev_span, prev_p = members, span, p
    return None


def check_boundary_faces(cfg: Configuration) -> str | None:
    """Every dual bond leaving a hole crosses an open in-window face."""
    lab = dual_clusters(cfg)
    w = cfg.window
    for cid, inf in zip(lab.ids.tolist(), lab.touches_infinity.tolist()):
        if inf:
            continue
        for e in boundary_edges(lab, cid):
            q = face_from_dual_bond(e)
            if not face_in_window(w, q) or not cfg.open_faces[face_index(w, q)]:
                return f"hole {cid} has boundary bond {e} whose face {q} is not open"
    return None


def check_trifurcations(cfg: Configuration) -> str | None:
    w = cfg.window
    found = trifurcations(cfg)
    if len(found) > w.n_boundary_vertices:
        return f"{len(found)} trifurcations exceed |dB~(n)|={w.n_boundary_vertices}"
    direct = [v for v in range(w.n_vertices) if is_trifurcation(cfg, vertex_at(w, v))]
    if direct != found.tolist():
        return f"scan found {found.tolist()} but direct check found {direct}"
    return None


def instances(dims, max_n: int, seeds: int, base_seed: int = 0):
    """(d, n, p, seed) tuples, sorted by size."""
    out = []
    for d in dims:
        for s in range(seeds):
            n = 1 + s % max_n
            p = P_GRID[(s // max_n) % len(P_GRID)]
            out.append((d, n, p, base_seed + s))
    out.sort(key=lambda t: (t[0], t[1], t[3]))
    return out


def run_verify(dims=(2, 3), max_n: int = 4, seeds: int = 500, base_seed: int = 0,
               inject_fault: bool = False, progress=None) -> VerifyResult:
    """Run every check on every instance; stop at the first failure.

    With ``inject_fault`` the hole code is handed a copy of each configuration
    with face 0 flipped after sampling, so the oracles (which see the original)
    must catch the disagreement.
    """
    res = VerifyResult()
    for d, n, p, seed in instances(dims, max_n, seeds, base_seed):
        cfg = sample_configuration(SimulationParams(p=p, d=d, n=n, seed=seed), 0)
        labelled = cfg.flipped(0) if inject_fault else None
        res.instances += 1
        for name in CHECKS:
            try:
                if name == "three_way":
                    msg = check_three_way(cfg, labelled)
                elif name == "partition":
                    msg = check_partition(cfg, labelled)
                elif name == "monotone":
                    msg = check_monotone(d, n, seed)
                elif name == "boundary_faces":
                    msg = check_boundary_faces(labelled if labelled is not None else cfg)
                else:
                    msg = check_trifurcations(cfg)
            except OracleScaleExceeded:
                res.skipped[name] += 1
                continue
            res.counts[name] += 1
            if msg is not None:
                res.failure = Failure(name, d, n, p, seed, msg)
                return res
        if progress is not None:
            progress(res)
    return res
