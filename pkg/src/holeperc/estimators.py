"""Monte Carlo estimators for the hole percolation model.

Every infinite-volume event is replaced by a window proxy, recorded in
``proxy_notes``:

* "infinite hole cluster"   -> hole cluster reaching the outer dual layer;
* "infinite face cluster"   -> face cluster meeting the window boundary;
* "infinite bond cluster"   -> dual-bond cluster joined to the outside;
* "spanning"                -> touching two opposite outer layers.

Replicates are independent and merged in replicate order, so the numbers do
not depend on the number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .clusters import face_label_array
from .config import BOND_STREAM, Configuration, SimulationParams, sample_configuration, uniforms
from .errors import InvariantViolation
from .holes import complement_label_array, count_spanning_hole_clusters, hole_index, trifurcations
from .lattice import DualVertex, Face, Window, face_index, tables, vertex_index
from .sweep import SweepResult, sweep_pc  # noqa: F401  (re-exported)

QUANTITIES = (
    "theta_hole",
    "theta_bond",
    "theta_face",
    "kappa",
    "vertex_density",
    "avg_hole_size",
    "two_point_hole",
    "spanning_hole_clusters",
    "trifurcation_density",
    "pc_estimate",
)


@dataclass
class EstimateReport:
    quantity: str
    params: SimulationParams
    value: float
    std_error: float
    replicates_used: int
    proxy_notes: str = ""
    extras: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "quantity": self.quantity,
            "d": self.params.d,
            "n": self.params.n,
            "p": self.params.p,
            "value": self.value,
            "std_error": self.std_error,
            "replicates": self.replicates_used,
            "seed": self.params.seed,
            "proxy_notes": self.proxy_notes,
        }

    def to_json(self) -> dict:
        out = {
            "quantity": self.quantity,
            "params": {
                "p": self.params.p,
                "d": self.params.d,
                "n": self.params.n,
                "replicates": self.params.replicates,
                "seed": self.params.seed,
            },
            "value": self.value,
            "std_error": self.std_error,
            "replicates_used": self.replicates_used,
            "proxy_notes": self.proxy_notes,
        }
        if self.extras:
            out["extras"] = self.extras
        return out


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("HOLEPERC_JOBS", "1") or 1)
    return max(1, int(jobs))


def map_replicates(fn, args, jobs: int | None = 1) -> list:
    """``[fn(a) for a in args]``, optionally spread over worker processes."""
    args = list(args)
    jobs = resolve_jobs(jobs)
    if jobs <= 1 or len(args) < 2:
        return [fn(a) for a in args]
    chunk = max(1, len(args) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, args, chunksize=chunk))


def mean_and_error(values) -> tuple[float, float]:
    """Sample mean and standard deviation over sqrt(count)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def _report(quantity, params, values, notes, **extras) -> EstimateReport:
    m, se = mean_and_error(values)
    return EstimateReport(quantity, params, m, se, len(values), notes, dict(extras))


def _need_n(params: SimulationParams, n_min: int):
    if params.n < n_min:
        raise ValueError(f"this estimator needs n >= {n_min}, got n={params.n}")


def origin(d: int) -> DualVertex:
    return DualVertex((0,) * d)


def origin_face(d: int) -> Face:
    return Face(1, (0,) * d)


# -- direct dual-bond percolation ----------------------------------------------

def sample_dual_bonds(w: Window, bond_p: float, seed: int, replicate_index: int) -> np.ndarray:
    """Open states of the dual bonds crossing in-window faces, Bernoulli(bond_p).

    Drawn from a stream separate from the face uniforms.  Bonds leaving through
    faces outside the window are always open.
    """
    return uniforms(seed, BOND_STREAM, replicate_index, w.n_faces) < bond_p


def bond_cluster_labels(w: Window, open_bonds: np.ndarray) -> np.ndarray:
    """Component labels of the ``V + 1`` nodes (outside node last)."""
    t = tables(w)
    m = w.n_vertices + 1
    src, dst = t.bond_lo[open_bonds], t.bond_hi[open_bonds]
    g = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(m, m))
    _, lab = connected_components(g, directed=False)
    return lab


def _bond_stats(args):
    w, q, seed, r = args
    lab = bond_cluster_labels(w, sample_dual_bonds(w, q, seed, r))
    V = w.n_vertices
    inner = lab[:V]
    at_inf = inner == lab[V]
    sizes = np.bincount(inner)
    finite = ~at_inf
    kappa = float(np.sum(1.0 / sizes[inner[finite]])) / V
    return bool(at_inf[vertex_index(w, origin(w.d))]), float(at_inf.mean()), kappa


def estimate_theta_bond(params: SimulationParams, per_vertex: bool = False, jobs=1) -> EstimateReport:
    """Dual-bond percolation probability; ``params.p`` is the bond probability.

    By default the indicator is whether the origin's cluster is joined to the
    outside of the window.  ``per_vertex=True`` averages that indicator over all
    of ``B~(n)`` in each replicate (the ergodic form).
    """
    _need_n(params, 2)
    w = params.window
    rows = map_replicates(_bond_stats, [(w, params.p, params.seed, r) for r in range(params.replicates)], jobs)
    if per_vertex:
        vals = [r[1] for r in rows]
        notes = "window proxy: fraction of B~(n) joined to the outside by open dual bonds"
    else:
        vals = [float(r[0]) for r in rows]
        notes = "window proxy: C(0*) joined to the outside by open dual bonds"
    return _report("theta_bond", params, vals, notes + "; p is the dual-bond probability")


def estimate_kappa(dual_p: float, params: SimulationParams, jobs=1) -> EstimateReport:
    """Mean over ``B~(n)`` of ``1/|C*(x*)|``, outside-joined clusters counting 0."""
    _need_n(params, 2)
    params = params.replace(p=dual_p)
    w = params.window
    rows = map_replicates(_bond_stats, [(w, dual_p, params.seed, r) for r in range(params.replicates)], jobs)
    return _report(
        "kappa", params, [r[2] for r in rows],
        "ergodic window average; clusters joined to the outside contribute 0; p is the dual-bond probability",
    )


# -- face-configuration estimators ----------------------------------------------

def _boundary_touching(lab: np.ndarray, bits: np.ndarray, cid: int) -> bool:
    return bool((bits[lab == cid] != 0).any())


def theta_hole_indicator(cfg: Configuration) -> bool:
    lab = complement_label_array(cfg)
    v = vertex_index(cfg.window, origin(cfg.d))
    return lab[v] >= 0 and _boundary_touching(lab, tables(cfg.window).vertex_bits, lab[v])


def _theta_hole_one(args):
    params, r = args
    return float(theta_hole_indicator(sample_configuration(params, r)))


def estimate_theta_hole(params: SimulationParams, jobs=1) -> EstimateReport:
    _need_n(params, 2)
    vals = map_replicates(_theta_hole_one, [(params, r) for r in range(params.replicates)], jobs)
    return _report(
        "theta_hole", params, vals,
        "window proxy for |G_0*| = inf: hole cluster of 0* reaches the outer dual layer",
    )


def _theta_face_one(args):
    params, r = args
    cfg = sample_configuration(params, r)
    k = face_index(cfg.window, origin_face(cfg.d))
    if not cfg.open_faces[k]:
        return 0.0
    lab = face_label_array(cfg)
    return float(_boundary_touching(lab, tables(cfg.window).face_bits, lab[k]))


def estimate_theta_face(params: SimulationParams, jobs=1) -> EstimateReport:
    _need_n(params, 2)
    vals = map_replicates(_theta_face_one, [(params, r) for r in range(params.replicates)], jobs)
    return _report(
        "theta_face", params, vals,
        "window proxy for |C(Q0)| = inf: face cluster of Q0 meets the window boundary",
    )


def vertex_density(cfg: Configuration) -> float:
    """Holes per dual vertex of the window, ``|G^n| / |B~(n)|``."""
    return hole_index(cfg).n_holes / cfg.window.n_vertices


def average_hole_size(cfg: Configuration) -> float:
    idx = hole_index(cfg)
    if idx.n_holes == 0:
        raise ValueError("configuration has no holes; average hole size undefined")
    return float(idx.sizes.sum()) / idx.n_holes


def _hole_stats(args):
    params, r = args
    idx = hole_index(sample_configuration(params, r))
    V = params.window.n_vertices
    avg = float(idx.sizes.sum()) / idx.n_holes if idx.n_holes else math.nan
    return idx.n_holes / V, avg


def estimate_vertex_density(params: SimulationParams, jobs=1) -> EstimateReport:
    _need_n(params, 2)
    rows = map_replicates(_hole_stats, [(params, r) for r in range(params.replicates)], jobs)
    return _report("vertex_density", params, [r[0] for r in rows], "holes counted in the truncated window")


@dataclass
class HoleSizeComparison:
    """Measured average hole size against ``(1 - theta_bond(1-p)) / kappa(1-p)``."""

    lhs: EstimateReport
    theta_bond: EstimateReport
    kappa: EstimateReport
    rhs: float
    rhs_std_error: float
    skipped: int

    @property
    def combined_error(self) -> float:
        return math.hypot(self.lhs.std_error, self.rhs_std_error)

    @property
    def z(self) -> float:
        if self.combined_error == 0:
            return 0.0 if self.lhs.value == self.rhs else math.inf
        return (self.lhs.value - self.rhs) / self.combined_error


def estimate_average_hole_size(params: SimulationParams, jobs=1) -> HoleSizeComparison:
    """Average hole size, plus the right-hand side assembled from bond estimates.

    Replicates without holes are skipped and counted.  The bond side runs on an
    independent stream at bond probability ``1 - p``; theta there is the
    per-vertex (ergodic) fraction joined to the outside, and the error on the
    ratio uses the delta method with the sample covariance of the two means.
    """
    _need_n(params, 2)
    rows = map_replicates(_hole_stats, [(params, r) for r in range(params.replicates)], jobs)
    sizes = [r[1] for r in rows if not math.isnan(r[1])]
    skipped = len(rows) - len(sizes)
    lhs = _report(
        "avg_hole_size", params, sizes,
        f"mean size(D) over holes in the window; skipped_replicates={skipped}",
        skipped_replicates=skipped,
    )

    q = round(1.0 - params.p, 12)
    bparams = params.replace(p=q)
    w = params.window
    brows = map_replicates(_bond_stats, [(w, q, params.seed, r) for r in range(params.replicates)], jobs)
    th = np.array([r[1] for r in brows])
    ka = np.array([r[2] for r in brows])
    theta_rep = _report(
        "theta_bond", bparams, th,
        "window proxy: fraction of B~(n) joined to the outside; p is the dual-bond probability",
    )
    kappa_rep = _report(
        "kappa", bparams, ka,
        "ergodic window average; clusters joined to the outside contribute 0; p is the dual-bond probability",
    )
    R = len(brows)
    mt, mk = th.mean(), ka.mean()
    rhs = (1.0 - mt) / mk if mk > 0 else math.nan
    if R > 1 and mk > 0:
        cov = np.cov(np.stack([th, ka]), ddof=1) / R
        g = np.array([-1.0 / mk, -(1.0 - mt) / mk**2])
        rhs_se = float(math.sqrt(max(g @ cov @ g, 0.0)))
    else:
        rhs_se = 0.0
    lhs.extras.update(rhs=rhs, rhs_std_error=rhs_se)
    return HoleSizeComparison(lhs, theta_rep, kappa_rep, float(rhs), rhs_se, skipped)


def _two_point_one(args):
    params, r, vx, vy = args
    lab = complement_label_array(sample_configuration(params, r))
    return float(lab[vx] >= 0 and lab[vx] == lab[vy])


def two_point_hole(params: SimulationParams, x: DualVertex, y: DualVertex, jobs=1) -> EstimateReport:
    """Fraction of replicates where ``x*`` and ``y*`` sit in the same hole cluster."""
    w = params.window
    vx, vy = vertex_index(w, x), vertex_index(w, y)
    vals = map_replicates(_two_point_one, [(params, r, vx, vy) for r in range(params.replicates)], jobs)
    dist = sum(abs(a - b) for a, b in zip(x.coords, y.coords))
    return _report(
        "two_point_hole", params, vals,
        f"same hole cluster within the window; x*={x.coords} y*={y.coords} l1={dist}",
        x=list(x.coords), y=list(y.coords), l1_distance=dist,
    )


def _spanning_one(args):
    params, r = args
    return count_spanning_hole_clusters(sample_configuration(params, r))


def estimate_uniqueness(params: SimulationParams, n_values=None, jobs=1) -> list[EstimateReport]:
    """``P(at least two spanning hole clusters)`` for each window size."""
    out = []
    for n in (n_values or [params.n]):
        pn = params.replace(n=int(n))
        _need_n(pn, 4)
        counts = np.array(map_replicates(_spanning_one, [(pn, r) for r in range(pn.replicates)], jobs))
        out.append(_report(
            "spanning_hole_clusters", pn, (counts >= 2).astype(float),
            "P(>=2 hole clusters spanning opposite outer layers)",
            mean_spanning_clusters=float(counts.mean()),
            max_spanning_clusters=int(counts.max()),
        ))
    return out


def _trifurcation_one(args):
    params, r = args
    return len(trifurcations(sample_configuration(params, r)))


def trifurcation_density(params: SimulationParams, jobs=1) -> EstimateReport:
    """Mean number of trifurcations per dual vertex of the window.

    Each configuration is also checked against the surface bound
    ``#trifurcations <= |dB~(n)|``.
    """
    _need_n(params, 4)
    w = params.window
    counts = map_replicates(_trifurcation_one, [(params, r) for r in range(params.replicates)], jobs)
    bound = w.n_boundary_vertices
    for r, c in enumerate(counts):
        if c > bound:
            raise InvariantViolation(
                f"{c} trifurcations exceed the surface bound {bound} "
                f"(d={w.d}, n={w.n}, p={params.p}, seed={params.seed}, replicate={r})"
            )
    outer = Window(w.n + 1, w.d).n_boundary_vertices
    vals = np.asarray(counts, dtype=float) / w.n_vertices
    return _report(
        "trifurcation_density", params, vals,
        f"window proxy for infinite hole clusters; max count {max(counts)} <= |dB~(n)|={bound}; "
        f"|dB~(n+1)|={outer}",
        max_count=int(max(counts)), surface_bound=bound, outer_surface=outer,
    )


def estimate(quantity: str, params: SimulationParams, jobs=1, **kw) -> list[EstimateReport]:
    """Dispatch by quantity name; always returns a list of reports."""
    if quantity == "theta_hole":
        return [estimate_theta_hole(params, jobs)]
    if quantity == "theta_bond":
        return [estimate_theta_bond(params, kw.get("per_vertex", False), jobs)]
    if quantity == "theta_face":
        return [estimate_theta_face(params, jobs)]
    if quantity == "kappa":
        dual_p = kw.get("dual_p")
        return [estimate_kappa(params.p if dual_p is None else dual_p, params, jobs)]
    if quantity == "vertex_density":
        return [estimate_vertex_density(params, jobs)]
    if quantity == "avg_hole_size":
        cmp = estimate_average_hole_size(params, jobs)
        return [cmp.lhs, cmp.theta_bond, cmp.kappa]
    if quantity == "two_point_hole":
        x = kw.get("x") or origin(params.d)
        y = kw.get("y") or origin(params.d)
        return [two_point_hole(params, x, y, jobs)]
    if quantity == "spanning_hole_clusters":
        return estimate_uniqueness(params, kw.get("n_values"), jobs)
    if quantity == "trifurcation_density":
        return [trifurcation_density(params, jobs)]
    raise ValueError(f"unknown quantity {quantity!r}")
