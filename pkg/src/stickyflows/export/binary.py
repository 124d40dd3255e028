"""Binary dumps of paths and kernel snapshots.

Layout (little-endian): a 64-byte header

    magic    8s   b"STKYPATH" or b"STKYKERN"
    version  u32
    N        u32  coordinates per row (grid cells for kernels)
    steps    u64
    dt       f64
    seed     u64
    replicas u32
    padding  20 bytes of zeros

followed by row-major float64 data. A path stores, for each replica,
(steps + 1) rows of (t, x1..xN). A kernel stores one row per snapshot
of (t, v_1..v_M).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stickyflows.models.domain import KernelField
from stickyflows.models.domain import Path as SimPath

PATH_MAGIC = b"STKYPATH"
KERNEL_MAGIC = b"STKYKERN"
FORMAT_VERSION = 1
HEADER = struct.Struct("<8sIIQdQI20x")

assert HEADER.size == 64


@dataclass(frozen=True)
class BinaryHeader:
    magic: bytes
    version: int
    n: int
    steps: int
    dt: float
    seed: int
    replicas: int


def _write(path: Path, header: BinaryHeader, data: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    packed = HEADER.pack(
        header.magic,
        header.version,
        header.n,
        header.steps,
        header.dt,
        header.seed & 0xFFFFFFFFFFFFFFFF,
        header.replicas,
    )
    with open(path, "wb") as f:
        f.write(packed)
        f.write(np.ascontiguousarray(data, dtype="<f8").tobytes())
    return path


def write_path_binary(path: Path, sim_path: SimPath, seed: int) -> Path:
    """Dump every replica of a path as (t, x1..xN) rows."""
    replicas, rows, n_points = sim_path.displacement.shape
    times = np.broadcast_to(sim_path.times[None, :, None], (replicas, rows, 1))
    data = np.concatenate([times, sim_path.states], axis=2)
    header = BinaryHeader(
        magic=PATH_MAGIC,
        version=FORMAT_VERSION,
        n=n_points,
        steps=sim_path.steps,
        dt=sim_path.dt,
        seed=seed,
        replicas=replicas,
    )
    return _write(path, header, data)


def write_kernel_binary(path: Path, snapshots: list[KernelField], dt: float, seed: int) -> Path:
    """Dump kernel snapshots as (t, v_1..v_M) rows."""
    cells = snapshots[0].cells
    data = np.array([[s.t, *s.values] for s in snapshots], dtype=float)
    header = BinaryHeader(
        magic=KERNEL_MAGIC,
        version=FORMAT_VERSION,
        n=cells,
        steps=len(snapshots) - 1,
        dt=dt,
        seed=seed,
        replicas=1,
    )
    return _write(path, header, data)


def read_binary(path: Path) -> tuple[BinaryHeader, np.ndarray]:
    """Read a dump back as (header, array of shape (replicas, rows, 1 + N))."""
    raw = Path(path).read_bytes()
    fields = HEADER.unpack_from(raw, 0)
    header = BinaryHeader(*fields)
    if header.magic not in (PATH_MAGIC, KERNEL_MAGIC):
        raise ValueError(f"not a stickyflows dump: magic {header.magic!r}")
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
    return header, data.reshape(header.replicas, -1, header.n + 1)
