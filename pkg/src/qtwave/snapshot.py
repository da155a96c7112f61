"""Binary snapshots of states, operators and dense fields.

Layout of a file (all integers little-endian)::

    magic    4 bytes  b"QTWV"
    version  u16
    kind     u8       0 = Mps, 1 = Mpo, 2 = DenseField
    flags    u8       bit 0: a layout JSON block follows the dims
    count    u32      sites (Mps/Mpo) or axes (DenseField)
    center   i32      orthogonality center, -1 if none
    dims     u32 * (count + 1) bond dimensions, or count grid sizes
    [layout] u32 length + UTF-8 JSON, when flag bit 0 is set
    payload  complex128 little-endian, cores in site order (C order)
             or psi0 then psi1 for fields
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DimensionError, QtWaveError
from .oracle import DenseField
from .registers import Layout
from .tt import Mpo, Mps

MAGIC = b"QTWV"
VERSION = 1
KIND_MPS, KIND_MPO, KIND_FIELD = 0, 1, 2
FLAG_LAYOUT = 1
_LE = np.dtype("<c16")


class SnapshotError(QtWaveError, ValueError):
    """Malformed or incompatible snapshot file."""


def _header(kind: int, count: int, center: int, dims: list[int], layout: Layout | None) -> bytes:
    flags = FLAG_LAYOUT if layout is not None else 0
    out = MAGIC + struct.pack("<HBBIi", VERSION, kind, flags, count, center)
    out += struct.pack(f"<{len(dims)}I", *dims)
    if layout is not None:
        blob = layout.to_json().encode()
        out += struct.pack("<I", len(blob)) + blob
    return out


def dumps(obj: Mps | Mpo | DenseField, layout: Layout | None = None) -> bytes:
    """Serialise ``obj`` (optionally tagged with its layout) to bytes."""
    if isinstance(obj, Mps):
        center = -1 if obj.orthogonality_center is None else obj.orthogonality_center
        head = _header(KIND_MPS, obj.n_sites, center, obj.bond_dims, layout)
        arrays = obj.cores
    elif isinstance(obj, Mpo):
        head = _header(KIND_MPO, obj.n_sites, -1, obj.bond_dims, layout)
        arrays = obj.cores
    elif isinstance(obj, DenseField):
        head = _header(KIND_FIELD, obj.psi0.ndim, -1, list(obj.shape), layout)
        arrays = (obj.psi0, obj.psi1)
    else:
        raise TypeError(f"cannot snapshot {type(obj).__name__}")
    return head + b"".join(np.ascontiguousarray(a, dtype=_LE).tobytes() for a in arrays)


def loads(data: bytes) -> tuple[Mps | Mpo | DenseField, Layout | None]:
    """Inverse of :func:`dumps`.

    Raises:
        SnapshotError: on a bad magic, unknown version or kind, or truncated payload.
    """
    if data[:4] != MAGIC:
        raise SnapshotError("not a snapshot file (bad magic)")
    try:
        version, kind, flags, count, center = struct.unpack_from("<HBBIi", data, 4)
    except struct.error as exc:
        raise SnapshotError("truncated header") from exc
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    pos = 4 + struct.calcsize("<HBBIi")
    ndims = count if kind == KIND_FIELD else count + 1
    try:
        dims = list(struct.unpack_from(f"<{ndims}I", data, pos))
        pos += 4 * ndims
        layout = None
        if flags & FLAG_LAYOUT:
            (length,) = struct.unpack_from("<I", data, pos)
            pos += 4
            layout = Layout.from_json(data[pos : pos + length].decode())
            pos += length
    except (struct.error, UnicodeDecodeError, ValueError, KeyError) as exc:
        raise SnapshotError(f"malformed header: {exc}") from exc

    def take(shape: tuple[int, ...]) -> np.ndarray:
        nonlocal pos
        nbytes = int(np.prod(shape)) * 16
        if pos + nbytes > len(data):
            raise SnapshotError("truncated payload")
        arr = np.frombuffer(data, dtype=_LE, count=int(np.prod(shape)), offset=pos).reshape(shape)
        pos += nbytes
        return arr.astype(np.complex128)

    try:
        if kind == KIND_MPS:
            cores = [take((dims[i], 2, dims[i + 1])) for i in range(count)]
            obj = Mps(cores, None if center < 0 else center)
        elif kind == KIND_MPO:
            obj = Mpo([take((dims[i], 2, 2, dims[i + 1])) for i in range(count)])
        elif kind == KIND_FIELD:
            obj = DenseField(take(tuple(dims)), take(tuple(dims)))
        else:
            raise SnapshotError(f"unknown snapshot kind {kind}")
    except DimensionError as exc:
        raise SnapshotError(str(exc)) from exc
    if pos != len(data):
        raise SnapshotError(f"{len(data) - pos} trailing bytes after payload")
    return obj, layout


def save(path: str | Path, obj: Mps | Mpo | DenseField, layout: Layout | None = None) -> None:
    Path(path).write_bytes(dumps(obj, layout))


def load(path: str | Path) -> tuple[Mps | Mpo | DenseField, Layout | None]:
    return loads(Path(path).read_bytes())
