"""Geometry and indexing of the cubical lattice Z^d and its dual.

Conventions
-----------
* A dual vertex ``x* = c + (1/2, ..., 1/2)`` is stored by its integer part ``c``.
* A face (elementary cube of dimension d-1) is stored as ``(axis, anchor)``.
  ``axis`` is 1-based and names the degenerate coordinate; ``anchor[axis-1]``
  is the degenerate value and every other entry is the lower endpoint of the
  unit interval on that coordinate.
* A dual bond ``<x*, x* + e_axis>`` is stored from its lower endpoint.

Window ``n`` means the box ``[-n, n]^d``.  Its dual vertices are the ``(2n)^d``
points with integer parts in ``[-n, n-1]``; its faces are the faces whose
closure lies in the box.  Faces are indexed axis-major and row-major inside
each axis block, which is the canonical order used by configuration bit-fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import NamedTuple

import numpy as np


class DualVertex(NamedTuple):
    coords: tuple[int, ...]


class DualBond(NamedTuple):
    base: DualVertex
    axis: int

    @property
    def tip(self) -> DualVertex:
        c = list(self.base.coords)
        c[self.axis - 1] += 1
        return DualVertex(tuple(c))


class Face(NamedTuple):
    axis: int
    anchor: tuple[int, ...]

    def intervals(self) -> tuple[tuple[int, int], ...]:
        """The elementary intervals ``[lo, hi]`` whose product is the face."""
        return tuple(
            (a, a) if j == self.axis - 1 else (a, a + 1)
            for j, a in enumerate(self.anchor)
        )


@dataclass(frozen=True)
class Window:
    n: int
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.n < 0:
            raise ValueError(f"window radius must be >= 0, got {self.n}")

    @property
    def side(self) -> int:
        return 2 * self.n

    @property
    def vertex_shape(self) -> tuple[int, ...]:
        return (self.side,) * self.d

    @property
    def n_vertices(self) -> int:
        return self.side**self.d

    def block_shape(self, axis: int) -> tuple[int, ...]:
        """Shape of the face block for a 1-based ``axis``."""
        return tuple(
            self.side + 1 if j == axis - 1 else self.side for j in range(self.d)
        )

    @property
    def block_size(self) -> int:
        return (self.side + 1) * self.side ** (self.d - 1)

    @property
    def n_faces(self) -> int:
        return self.d * self.block_size

    @property
    def n_boundary_vertices(self) -> int:
        """``|dB~(n)|``: dual vertices in the outermost layer."""
        if self.n == 0:
            return 0
        return self.side**self.d - (self.side - 2) ** self.d


# -- bijection ----------------------------------------------------------------

def face_from_dual_bond(e: DualBond) -> Face:
    """The unique face crossed by the dual bond ``e``."""
    anchor = list(e.base.coords)
    anchor[e.axis - 1] += 1
    return Face(e.axis, tuple(anchor))


def dual_bond_from_face(q: Face) -> DualBond:
    """Inverse of :func:`face_from_dual_bond`."""
    base = list(q.anchor)
    base[q.axis - 1] -= 1
    return DualBond(DualVertex(tuple(base)), q.axis)


def face_neighbors(q: Face) -> set[Face]:
    """Faces meeting ``q`` in a (d-2)-cube; there are always 6(d-1) of them."""
    d = len(q.anchor)
    i = q.axis - 1
    out = set()
    for j in range(d):
        if j == i:
            continue
        # same orientation, slid across one of the (d-2)-faces of q
        for s in (-1, 1):
            a = list(q.anchor)
            a[j] += s
            out.add(Face(q.axis, tuple(a)))
        # perpendicular, hinged on the (d-2)-face at a_j or a_j + 1
        for s in (-1, 0):
            for t in (0, 1):
                a = list(q.anchor)
                a[i] += s
                a[j] += t
                out.add(Face(j + 1, tuple(a)))
    return out


def faces_intersection_dim(q1: Face, q2: Face) -> int:
    """Dimension of ``q1 & q2`` (-1 when empty). Brute-force helper for checks."""
    dim = 0
    for (lo1, hi1), (lo2, hi2) in zip(q1.intervals(), q2.intervals()):
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return -1
        dim += hi - lo
    return dim


# -- enumeration and indexing ---------------------------------------------------

def face_in_window(w: Window, q: Face) -> bool:
    i = q.axis - 1
    for j, a in enumerate(q.anchor):
        hi = w.n if j == i else w.n - 1
        if not -w.n <= a <= hi:
            return False
    return 1 <= q.axis <= w.d and len(q.anchor) == w.d


def vertex_in_window(w: Window, x: DualVertex) -> bool:
    return len(x.coords) == w.d and all(-w.n <= c < w.n for c in x.coords)


def face_index(w: Window, q: Face) -> int:
    if not face_in_window(w, q):
        raise IndexError(f"{q} is not inside the window n={w.n}")
    shape = w.block_shape(q.axis)
    local = np.ravel_multi_index(tuple(a + w.n for a in q.anchor), shape)
    return (q.axis - 1) * w.block_size + int(local)


def face_at(w: Window, k: int) -> Face:
    if not 0 <= k < w.n_faces:
        raise IndexError(k)
    axis0, local = divmod(k, w.block_size)
    idx = np.unravel_index(local, w.block_shape(axis0 + 1))
    return Face(axis0 + 1, tuple(int(v) - w.n for v in idx))


def vertex_index(w: Window, x: DualVertex) -> int:
    if not vertex_in_window(w, x):
        raise IndexError(f"{x} is not inside B~({w.n})")
    return int(np.ravel_multi_index(tuple(c + w.n for c in x.coords), w.vertex_shape))


def vertex_at(w: Window, k: int) -> DualVertex:
    idx = np.unravel_index(k, w.vertex_shape)
    return DualVertex(tuple(int(v) - w.n for v in idx))


def faces_in_window(w: Window) -> list[Face]:
    """All faces with closure in ``[-n, n]^d``, in canonical order."""
    out = []
    for axis in range(1, w.d + 1):
        ranges = [
            range(-w.n, w.n + 1) if j == axis - 1 else range(-w.n, w.n)
            for j in range(w.d)
        ]
        out.extend(Face(axis, a) for a in product(*ranges))
    return out


def dual_vertices_in_window(w: Window) -> list[DualVertex]:
    return [DualVertex(c) for c in product(range(-w.n, w.n), repeat=w.d)]


def is_boundary(w: Window, x: DualVertex) -> bool:
    """True when ``x*`` lies in the outermost dual layer, ``|x*|_inf = n - 1/2``."""
    if not vertex_in_window(w, x):
        raise IndexError(f"{x} is not inside B~({w.n})")
    return any(c == -w.n or c == w.n - 1 for c in x.coords)


# -- vectorised tables --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeTables:
    """Precomputed index arrays for one window.

    ``bond_lo[k], bond_hi[k]`` are the vertex indices of the dual bond crossing
    face ``k``; the value ``n_vertices`` stands for the region outside the
    window.  ``face_bits`` marks which window hyperplanes a face touches (bit
    ``2j`` for ``x_j = -n``, ``2j+1`` for ``x_j = n``); ``vertex_bits`` marks the
    outer dual layers in the same way.
    """

    window: Window
    face_axis: np.ndarray
    face_anchor: np.ndarray
    bond_lo: np.ndarray
    bond_hi: np.ndarray
    face_bits: np.ndarray
    vertex_bits: np.ndarray
    vertex_nbrs: np.ndarray

    @property
    def outside(self) -> int:
        return self.window.n_vertices

    @property
    def face_nbrs(self) -> np.ndarray:
        return face_neighbor_table(self.window)

    @property
    def face_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return face_adjacency_pairs(self.window)


def spanning_mask(d: int) -> int:
    return sum(1 << (2 * j) for j in range(d))


def spans(bits: int, d: int) -> bool:
    """True when ``bits`` contains both opposite sides along some axis."""
    return bool(bits & (bits >> 1) & spanning_mask(d))


@lru_cache(maxsize=16)
def tables(w: Window) -> LatticeTables:
    n, d, side = w.n, w.d, w.side
    V = w.n_vertices
    axes, anchors = [], []
    for axis0 in range(d):
        shape = w.block_shape(axis0 + 1)
        idx = np.indices(shape).reshape(d, -1).T
        anchors.append(idx - n)
        axes.append(np.full(idx.shape[0], axis0, dtype=np.int8))
    face_axis = np.concatenate(axes) if axes else np.empty(0, np.int8)
    face_anchor = np.concatenate(anchors).astype(np.int32) if anchors else np.empty((0, d), np.int32)

    # dual bond endpoints
    vstrides = np.array([side ** (d - 1 - j) for j in range(d)], dtype=np.int64)
    shifted = face_anchor.astype(np.int64) + n
    rows = np.arange(len(face_axis))
    k_deg = shifted[rows, face_axis]
    hi_idx = shifted.copy()
    lo_idx = shifted.copy()
    lo_idx[rows, face_axis] -= 1
    bond_hi = np.where(k_deg <= side - 1, hi_idx @ vstrides, V)
    bond_lo = np.where(k_deg >= 1, lo_idx @ vstrides, V)

    # window hyperplanes met by each face
    face_bits = np.zeros(len(face_axis), dtype=np.int64)
    for j in range(d):
        a = face_anchor[:, j]
        deg = face_axis == j
        lo_hit = a == -n
        hi_hit = np.where(deg, a == n, a + 1 == n)
        face_bits |= lo_hit.astype(np.int64) << (2 * j)
        face_bits |= hi_hit.astype(np.int64) << (2 * j + 1)

    vidx = np.indices(w.vertex_shape).reshape(d, -1).T if V else np.empty((0, d), int)
    vertex_bits = np.zeros(V, dtype=np.int64)
    nbrs = np.full((V, 2 * d), -1, dtype=np.int64)
    flat = np.arange(V, dtype=np.int64)
    for j in range(d):
        c = vidx[:, j]
        vertex_bits |= (c == 0).astype(np.int64) << (2 * j)
        vertex_bits |= (c == side - 1).astype(np.int64) << (2 * j + 1)
        nbrs[:, 2 * j] = np.where(c > 0, flat - vstrides[j], -1)
        nbrs[:, 2 * j + 1] = np.where(c < side - 1, flat + vstrides[j], -1)

    for arr in (face_axis, face_anchor, bond_lo, bond_hi, face_bits, vertex_bits, nbrs):
        arr.setflags(write=False)
    return LatticeTables(
        window=w,
        face_axis=face_axis,
        face_anchor=face_anchor,
        bond_lo=bond_lo.astype(np.int64),
        bond_hi=bond_hi.astype(np.int64),
        face_bits=face_bits,
        vertex_bits=vertex_bits,
        vertex_nbrs=nbrs,
    )


def _face_indices(w: Window, axis0: int, anchors: np.ndarray) -> np.ndarray:
    """Vectorised :func:`face_index`; -1 where the face leaves the window."""
    n, d = w.n, w.d
    shape = np.array(w.block_shape(axis0 + 1))
    shifted = anchors.astype(np.int64) + n
    ok = np.all((shifted >= 0) & (shifted < shape), axis=1)
    strides = np.array([int(np.prod(shape[j + 1:])) for j in range(d)], dtype=np.int64)
    idx = shifted @ strides + axis0 * w.block_size
    return np.where(ok, idx, -1)


@lru_cache(maxsize=8)
def face_neighbor_table(w: Window) -> np.ndarray:
    """``(n_faces, 6(d-1))`` array of in-window neighbour indices, -1 if absent.

    Column order per face with degenerate axis ``i``: for each ``j != i`` the two
    parallel slides, then for each ``j != i`` the four perpendicular hinges.
    """
    d = w.d
    t = tables(w)
    out = np.full((w.n_faces, 6 * (d - 1)), -1, dtype=np.int64)
    for axis0 in range(d):
        sl = slice(axis0 * w.block_size, (axis0 + 1) * w.block_size)
        A = t.face_anchor[sl]
        col = 0
        for j in range(d):
            if j == axis0:
                continue
            for s in (-1, 1):
                B = A.copy()
                B[:, j] += s
                out[sl, col] = _face_indices(w, axis0, B)
                col += 1
        for j in range(d):
            if j == axis0:
                continue
            for s in (-1, 0):
                for u in (0, 1):
                    B = A.copy()
                    B[:, axis0] += s
                    B[:, j] += u
                    out[sl, col] = _face_indices(w, j, B)
                    col += 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def face_adjacency_pairs(w: Window) -> tuple[np.ndarray, np.ndarray]:
    """Every adjacent in-window face pair once, as ``(src, dst)`` with src < dst."""
    nb = face_neighbor_table(w)
    src = np.repeat(np.arange(w.n_faces, dtype=np.int64), nb.shape[1])
    dst = nb.ravel()
    keep = dst > src
    src, dst = src[keep], dst[keep]
    src.setflags(write=False)
    dst.setflags(write=False)
    return src, dst
