"""CSV / JSON serialisation of estimator results and sweeps."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .estimators import EstimateReport
from .sweep import SweepResult

FORMAT_VERSION = 1
CSV_COLUMNS = ("quantity", "d", "n", "p", "value", "std_error", "replicates", "seed", "proxy_notes")

# spanning-probability curves reuse the quantity names of the matching object
SWEEP_QUANTITY = {"hole": "spanning_hole_clusters", "face": "theta_face", "bond": "theta_bond"}
SWEEP_NOTES = {
    "hole": "P(some hole cluster spans opposite outer layers); coupled sweep",
    "face": "P(some face cluster spans opposite window faces); coupled sweep",
    "bond": "P(some dual-bond cluster spans opposite outer layers); coupled sweep; p is the dual-bond probability",
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return "" if v is None else str(v)


def header_line(meta: dict) -> str:
    parts = [f"format_version={FORMAT_VERSION}"] + [f"{k}={_fmt(v)}" for k, v in meta.items()]
    return "# " + " ".join(parts)


def rows_to_csv(rows, meta: dict) -> str:
    buf = io.StringIO()
    buf.write(header_line(meta) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in rows:
        extra = set(r) - set(CSV_COLUMNS)
        if extra:
            raise ValueError(f"unexpected columns {sorted(extra)}")
        wr.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`rows_to_csv`; returns header metadata and raw rows."""
    lines = text.splitlines()
    meta = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            k, _, v = tok.partition("=")
            meta[k] = v
        lines = lines[1:]
    rd = csv.DictReader(lines)
    return meta, list(rd)


def _jsonable(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def reports_to_json(reports: list[EstimateReport], meta: dict) -> str:
    doc = {"format_version": FORMAT_VERSION, **meta, "reports": [r.to_json() for r in reports]}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def sweep_rows(res: SweepResult) -> list[dict]:
    rows = []
    for kind in ("hole", "face", "bond"):
        for n in res.n_list:
            curve = res.curve(kind, n)
            err = res.std_error(kind, n)
            for g, v, e in zip(res.grid.tolist(), curve.tolist(), err.tolist()):
                rows.append({
                    "quantity": SWEEP_QUANTITY[kind], "d": res.d, "n": n, "p": g,
                    "value": v, "std_error": e, "replicates": res.replicates,
                    "seed": res.seed, "proxy_notes": SWEEP_NOTES[kind],
                })
    for kind in ("hole", "face", "bond"):
        pair_vals = [float(np.median(v)) for v in res.pair_crossings[kind].values() if v]
        se = float(np.std(pair_vals, ddof=1) / math.sqrt(len(pair_vals))) if len(pair_vals) > 1 else math.nan
        methods = res.pair_methods[kind]
        pairs = ";".join(
            f"{a}/{b}:{methods[(a, b)]}:" + ("|".join(f"{x:.4f}" for x in pts) if pts else "none")
            for (a, b), pts in res.pair_crossings[kind].items()
        )
        rows.append({
            "quantity": "pc_estimate", "d": res.d, "n": res.n_list[-1], "p": None,
            "value": res.pc[kind], "std_error": se, "replicates": res.replicates,
            "seed": res.seed,
            "proxy_notes": f"kind={kind}; crossings of successive window curves {pairs}"
            + ("; dual-bond probability" if kind == "bond" else ""),
        })
    return rows


def sweep_to_json(res: SweepResult, meta: dict) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        **meta,
        "d": res.d,
        "n_list": list(res.n_list),
        "p_grid": res.grid.tolist(),
        "replicates": res.replicates,
        "seed": res.seed,
        "curves": {
            kind: {str(n): res.curve(kind, n).tolist() for n in res.n_list} for kind in res.curves
        },
        "pc_estimate": res.pc,
        "pair_crossings": {
            kind: {f"{a}/{b}": pts for (a, b), pts in v.items()} for kind, v in res.pair_crossings.items()
        },
        "pair_methods": {
            kind: {f"{a}/{b}": m for (a, b), m in v.items()} for kind, v in res.pair_methods.items()
        },
        "median_thresholds": {
            kind: {str(n): res.median_threshold(kind, n) for n in res.n_list} for kind in res.thresholds
        },
    }
    return json.dumps(_jsonable(doc), indent=2) + "\n"
