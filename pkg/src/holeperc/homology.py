"""Independent hole-count oracles.

``betti_codim1`` computes dim H_{d-1} of the open-face set over Z/2 from the
rank of the boundary map on (d-1)-cells.  ``complement_components_voxel``
rasterises the faces on a half-unit grid and counts bounded complement
components by flood fill.  Both are meant for small windows only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from .config import Configuration
from .errors import OracleScaleExceeded
from .lattice import tables

MAX_RANK_COLUMNS = 5000
MAX_VOXEL_SIDE = 41


@dataclass(frozen=True, eq=False)
class ChainComplexSlice:
    """Boundary map from open (d-1)-cells to the (d-2)-cells they touch.

    ``cells_dm1`` are face indices; ``cells_dm2`` are integer codes of
    (d-2)-cells; column ``k`` of the boundary matrix lists the rows
    ``rows[k*2(d-1):(k+1)*2(d-1)]``.
    """

    cells_dm1: np.ndarray
    cells_dm2: np.ndarray
    rows: np.ndarray
    per_column: int

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cells_dm2), len(self.cells_dm1)

    def column(self, k: int) -> np.ndarray:
        return self.rows[k * self.per_column:(k + 1) * self.per_column]

    def boundary_matrix(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=np.uint8)
        cols = np.repeat(np.arange(len(self.cells_dm1)), self.per_column)
        m[self.rows, cols] = 1
        return m


def chain_complex_slice(cfg: Configuration, max_columns: int = MAX_RANK_COLUMNS) -> ChainComplexSlice:
    w = cfg.window
    d, n = w.d, w.n
    faces = np.flatnonzero(cfg.open_faces)
    if len(faces) > max_columns:
        raise OracleScaleExceeded(
            f"{len(faces)} open faces exceeds the rank oracle limit of {max_columns}"
        )
    t = tables(w)
    axis = t.face_axis[faces].astype(np.int64)
    anchor = t.face_anchor[faces].astype(np.int64)
    base = 2 * n + 2
    strides = base ** np.arange(d - 1, -1, -1, dtype=np.int64)
    codes = []
    for j in range(d):
        for s in (0, 1):
            a = anchor.copy()
            a[:, j] += s
            lo = np.minimum(axis, j)
            hi = np.maximum(axis, j)
            pair = lo * d + hi
            code = pair * base**d + (a + n) @ strides
            codes.append(np.where(axis == j, -1, code))
    # keep the 2(d-1) genuine boundary cells per column, in column-major order
    stacked = np.stack(codes, axis=1)
    stacked = stacked[stacked >= 0].reshape(len(faces), 2 * (d - 1))
    cells, rows = np.unique(stacked.ravel(), return_inverse=True)
    return ChainComplexSlice(faces, cells, rows.astype(np.int64), 2 * (d - 1))


@njit(cache=True)
def _gf2_rank_packed(cols):
    n_cols, words = cols.shape
    basis = np.zeros((words * 64, words), dtype=np.uint64)
    has = np.zeros(words * 64, dtype=np.bool_)
    rank = 0
    v = np.empty(words, dtype=np.uint64)
    for c in range(n_cols):
        for k in range(words):
            v[k] = cols[c, k]
        while True:
            top = -1
            for k in range(words - 1, -1, -1):
                if v[k] != 0:
                    x = v[k]
                    b = 0
                    while x > np.uint64(1):
                        x >>= np.uint64(1)
                        b += 1
                    top = k * 64 + b
                    break
            if top < 0:
                break
            if has[top]:
                for k in range(words):
                    v[k] ^= basis[top, k]
            else:
                for k in range(words):
                    basis[top, k] = v[k]
                has[top] = True
                rank += 1
                break
    return rank


def gf2_rank_columns(n_rows: int, columns) -> int:
    """Rank over Z/2 of the matrix whose columns list their nonzero rows."""
    columns = list(columns)
    words = max(1, (n_rows + 63) // 64)
    packed = np.zeros((len(columns), words), dtype=np.uint64)
    for c, rows in enumerate(columns):
        for r in rows:
            packed[c, r // 64] ^= np.uint64(1) << np.uint64(r % 64)
    return int(_gf2_rank_packed(packed))


def _pack_slice(cx: ChainComplexSlice, order=None) -> np.ndarray:
    n_rows, n_cols = cx.shape
    words = max(1, (n_rows + 63) // 64)
    rows = cx.rows.reshape(n_cols, cx.per_column)
    if order is not None:
        rows = rows[order]
    packed = np.zeros((n_cols, words), dtype=np.uint64)
    col_idx = np.repeat(np.arange(n_cols), cx.per_column)
    flat = rows.ravel()
    bit = np.left_shift(np.uint64(1), (flat % 64).astype(np.uint64))
    np.bitwise_xor.at(packed, (col_idx, flat // 64), bit)
    return packed


def boundary_rank(cx: ChainComplexSlice, order=None) -> int:
    if cx.shape[1] == 0:
        return 0
    return int(_gf2_rank_packed(_pack_slice(cx, order)))


def betti_codim1(cfg: Configuration, max_columns: int = MAX_RANK_COLUMNS) -> int:
    """dim H_{d-1} over Z/2 of the union of open faces in the window."""
    cx = chain_complex_slice(cfg, max_columns)
    return cx.shape[1] - boundary_rank(cx)


def voxel_grid(cfg: Configuration, max_side: int = MAX_VOXEL_SIDE) -> np.ndarray:
    """Boolean half-unit grid over ``[-n-1, n+1]^d``; True where an open face lies."""
    w = cfg.window
    d, n = w.d, w.n
    side = 4 * n + 5
    if side**d > max_side**d:
        raise OracleScaleExceeded(f"voxel grid {side}^{d} exceeds {max_side}^{d}")
    blocked = np.zeros((side,) * d, dtype=bool)
    t = tables(w)
    off = 2 * n + 2
    for k in np.flatnonzero(cfg.open_faces):
        axis = int(t.face_axis[k])
        a = t.face_anchor[k]
        sl = tuple(
            2 * int(a[j]) + off if j == axis else slice(2 * int(a[j]) + off, 2 * int(a[j]) + off + 3)
            for j in range(d)
        )
        blocked[sl] = True
    return blocked


def complement_components_voxel(cfg: Configuration, max_side: int = MAX_VOXEL_SIDE) -> int:
    """Bounded components of the complement of the open faces."""
    blocked = voxel_grid(cfg, max_side)
    d = blocked.ndim
    lab, k = ndimage.label(~blocked, structure=ndimage.generate_binary_structure(d, 1))
    edge = set()
    for j in range(d):
        for end in (0, -1):
            edge.update(np.unique(np.take(lab, end, axis=j)).tolist())
    edge.discard(0)
    return k - len(edge)
