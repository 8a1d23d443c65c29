"""SVG pictures of planar configurations.

Open faces are black segments, holes are shaded by hole cluster, cells of the
infinite dual cluster get a pale grey, and the hole graph is overlaid in blue
(one dot per hole, one line per adjacent pair).
"""

from __future__ import annotations

import io

import matplotlib
import numpy as np
from matplotlib.collections import LineCollection, PatchCollection
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .config import Configuration
from .holes import build_hole_graph
from .lattice import tables

CLUSTER_COLORS = ("#f4c27a", "#a8d5a2", "#f2a3a3", "#c7b3e6", "#9fd3e0", "#e6d48a")
INFINITE_COLOR = "#e4e4e4"
GRAPH_COLOR = "#1f5fbf"


def render_svg(cfg: Configuration, title: str | None = None, description: str | None = None) -> bytes:
    """Byte-stable SVG of a ``d = 2`` configuration.

    ``description`` lands in the SVG metadata (used for run parameters).
    """
    if cfg.d != 2:
        raise ValueError("rendering is only supported for d = 2")
    w = cfg.window
    n = w.n
    t = tables(w)
    g = build_hole_graph(cfg)
    V = w.n_vertices
    cx, cy = (c - n for c in np.unravel_index(np.arange(V), w.vertex_shape))

    hov = g.index.hole_of_vertex
    vc = g.vertex_cluster()

    fig = Figure(figsize=(6, 6))
    ax = fig.add_axes((0.03, 0.03, 0.94, 0.9))
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_xlim(-n - 0.5, n + 0.5)
    ax.set_ylim(-n - 0.5, n + 0.5)

    # cells: I in grey, holes coloured by cluster
    cluster_pos = np.searchsorted(g.cluster_ids, vc)
    cells, colors = [], []
    for v in range(V):
        cells.append(Rectangle((cx[v], cy[v]), 1, 1))
        if hov[v] < 0:
            colors.append(INFINITE_COLOR)
        else:
            colors.append(CLUSTER_COLORS[int(cluster_pos[v]) % len(CLUSTER_COLORS)])
    ax.add_collection(PatchCollection(cells, facecolors=colors, edgecolors="none", zorder=1))

    # open faces: axis-1 faces are vertical segments, axis-2 faces horizontal
    segs = []
    for k in np.flatnonzero(cfg.open_faces).tolist():
        a0, a1 = (int(x) for x in t.face_anchor[k])
        if t.face_axis[k] == 0:
            segs.append(((a0, a1), (a0, a1 + 1)))
        else:
            segs.append(((a0, a1), (a0 + 1, a1)))
    if segs:
        ax.add_collection(LineCollection(segs, colors="black", linewidths=1.6, zorder=3))

    # hole graph: centroid of each hole's cell centres
    if g.n_holes:
        members = hov >= 0
        cnt = np.bincount(hov[members], minlength=g.n_holes)
        hx = np.bincount(hov[members], weights=cx[members] + 0.5, minlength=g.n_holes) / cnt
        hy = np.bincount(hov[members], weights=cy[members] + 0.5, minlength=g.n_holes) / cnt
        if len(g.edges):
            esegs = [((hx[a], hy[a]), (hx[b], hy[b])) for a, b in g.edges.tolist()]
            ax.add_collection(LineCollection(esegs, colors=GRAPH_COLOR, linewidths=0.9, zorder=4))
        ax.scatter(hx, hy, s=14, c=GRAPH_COLOR, zorder=5, linewidths=0)

    ax.plot(
        [-n, n, n, -n, -n], [-n, -n, n, n, -n],
        color="#888888", linewidth=0.6, linestyle="--", zorder=2,
    )
    if title is None:
        p = "" if cfg.p_label is None else f" p={cfg.p_label:g}"
        s = "" if cfg.seed is None else f" seed={cfg.seed}"
        title = f"n={n}{p}{s} holes={g.n_holes} clusters={g.n_clusters}"
    ax.set_title(title, fontsize=9)

    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "holeperc", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "holeperc", "Description": description})
    return buf.getvalue()


def write_svg(cfg: Configuration, path, title: str | None = None, description: str | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(render_svg(cfg, title, description))
