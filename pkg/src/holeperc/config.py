"""Random face configurations, the monotone coupling, and snapshot files.

Randomness is counter-based: the uniform attached to face ``k`` of replicate
``r`` is the ``k``-th double of a Philox stream whose key is derived from
``(seed, stream, r)``.  Nothing depends on evaluation order, so replicates can
be generated in any order or in parallel with identical results.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import Face, Window, face_index

FACE_STREAM = 0
BOND_STREAM = 1

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SimulationParams:
    p: float
    d: int
    n: int
    replicates: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.n < 0:
            raise ValueError(f"window radius must be >= 0, got {self.n}")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def window(self) -> Window:
        return Window(self.n, self.d)

    def replace(self, **kw) -> "SimulationParams":
        vals = dict(p=self.p, d=self.d, n=self.n, replicates=self.replicates, seed=self.seed)
        vals.update(kw)
        return SimulationParams(**vals)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Configuration:
    """Open/closed states of every face inside the window.

    Faces outside ``[-n, n]^d`` are closed.  ``open_faces`` is indexed by the
    canonical face order of :func:`holeperc.lattice.faces_in_window`.
    """

    window: Window
    open_faces: np.ndarray
    p_label: float | None = None
    seed: int | None = None

    def __post_init__(self):
        bits = np.asarray(self.open_faces, dtype=bool)
        if bits.shape != (self.window.n_faces,):
            raise ValueError(
                f"expected {self.window.n_faces} face states, got shape {bits.shape}"
            )
        object.__setattr__(self, "open_faces", _frozen(bits))

    @property
    def d(self) -> int:
        return self.window.d

    @property
    def n(self) -> int:
        return self.window.n

    @property
    def n_open(self) -> int:
        return int(self.open_faces.sum())

    def is_open(self, q: Face) -> bool:
        try:
            return bool(self.open_faces[face_index(self.window, q)])
        except IndexError:
            return False

    def with_faces(self, opened=(), closed=()) -> "Configuration":
        bits = self.open_faces.copy()
        for q in opened:
            bits[face_index(self.window, q)] = True
        for q in closed:
            bits[face_index(self.window, q)] = False
        return Configuration(self.window, bits, self.p_label, self.seed)

    def flipped(self, k: int) -> "Configuration":
        bits = self.open_faces.copy()
        bits[k] = ~bits[k]
        return Configuration(self.window, bits, self.p_label, self.seed)

    @classmethod
    def from_faces(cls, window: Window, faces, p_label=None) -> "Configuration":
        bits = np.zeros(window.n_faces, dtype=bool)
        for q in faces:
            bits[face_index(window, q)] = True
        return cls(window, bits, p_label)

    @classmethod
    def all_closed(cls, window: Window) -> "Configuration":
        return cls(window, np.zeros(window.n_faces, dtype=bool), 0.0)

    @classmethod
    def all_open(cls, window: Window) -> "Configuration":
        return cls(window, np.ones(window.n_faces, dtype=bool), 1.0)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.window == other.window and np.array_equal(
            self.open_faces, other.open_faces
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class UniformField:
    window: Window
    values: np.ndarray
    seed: int
    replicate_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.float64)))


def _generator(seed: int, stream: int, replicate_index: int) -> np.random.Generator:
    key_seq = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, stream, replicate_index])
    key = key_seq.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(seed: int, stream: int, replicate_index: int, count: int) -> np.ndarray:
    """The first ``count`` doubles in [0, 1) of one keyed Philox stream."""
    return _generator(seed, stream, replicate_index).random(count)


def coupled_field(window: Window, seed: int, replicate_index: int = 0) -> UniformField:
    """One uniform ``X_Q`` per in-window face."""
    vals = uniforms(seed, FACE_STREAM, replicate_index, window.n_faces)
    return UniformField(window, vals, seed, replicate_index)


def threshold(f: UniformField, p: float) -> Configuration:
    """Open exactly the faces with ``X_Q < p`` (ties are closed)."""
    return Configuration(f.window, f.values < p, p_label=float(p), seed=f.seed)


def sample_configuration(params: SimulationParams, replicate_index: int) -> Configuration:
    """Independent Bernoulli(p) faces; replicate ``r`` of ``params.seed``.

    This is the coupled field of the same (seed, replicate) thresholded at p, so
    configurations drawn at different p for one replicate are nested.
    """
    if not 0 <= replicate_index < params.replicates:
        raise IndexError(
            f"replicate {replicate_index} out of range for {params.replicates} replicates"
        )
    return threshold(coupled_field(params.window, params.seed, replicate_index), params.p)


# -- snapshot files ------------------------------------------------------------

SNAPSHOT_MAGIC = b"HOLEPERC"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sHBBIdQ")
_HAS_P = 1
_HAS_SEED = 2


def configuration_to_bytes(cfg: Configuration) -> bytes:
    """Header (magic, version, flags, d, n, p_label, seed) then packed face bits.

    Bits are packed little-endian within each byte in canonical face order.
    """
    flags = (_HAS_P if cfg.p_label is not None else 0) | (
        _HAS_SEED if cfg.seed is not None else 0
    )
    p = float(cfg.p_label) if cfg.p_label is not None else math.nan
    seed = int(cfg.seed) if cfg.seed is not None else 0
    head = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, flags, cfg.d, cfg.n, p, seed)
    return head + np.packbits(cfg.open_faces, bitorder="little").tobytes()


def configuration_from_bytes(buf: bytes) -> Configuration:
    if len(buf) < _HEADER.size:
        raise ValueError("snapshot too short")
    magic, version, flags, d, n, p, seed = _HEADER.unpack_from(buf)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError("not a configuration snapshot (bad magic)")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    w = Window(n, d)
    payload = np.frombuffer(buf, dtype=np.uint8, offset=_HEADER.size)
    if payload.size != (w.n_faces + 7) // 8:
        raise ValueError("snapshot payload length does not match header")
    bits = np.unpackbits(payload, bitorder="little")
    if bits[w.n_faces:].any():
        raise ValueError("nonzero padding bits in snapshot")
    return Configuration(
        w,
        bits[: w.n_faces].astype(bool),
        p_label=p if flags & _HAS_P else None,
        seed=seed if flags & _HAS_SEED else None,
    )


def save_snapshot(cfg: Configuration, path) -> None:
    Path(path).write_bytes(configuration_to_bytes(cfg))


def load_snapshot(path) -> Configuration:
    return configuration_from_bytes(Path(path).read_bytes())
