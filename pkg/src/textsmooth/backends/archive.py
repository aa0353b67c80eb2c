"""Flat binary tensor archive used for the checked-in micro-backend weights.

Layout (all integers and floats little-endian):

    magic   4 bytes  b"TSTA"
    u32     format version (currently 1)
    u32     tensor count
    then per tensor:
    u16     name length, followed by that many UTF-8 bytes
    u8      ndim
    u32*n   shape
    f32*k   row-major data, k = prod(shape)
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Dict

import numpy as np

from ..errors import MissingFile, ParseError

MAGIC = b"TSTA"
VERSION = 1


def save_archive(path: str | Path, tensors: Dict[str, np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(tensors)))
        for name, tensor in tensors.items():
            data = np.ascontiguousarray(tensor, dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(data.tobytes())


def load_archive(path: str | Path) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"tensor archive not found: {path}")
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise ParseError("bad magic, not a tensor archive", path=str(path))
    offset = 4
    version, count = struct.unpack_from("<II", blob, offset)
    offset += 8
    if version != VERSION:
        raise ParseError(f"unsupported archive version {version}", path=str(path))
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(blob, dtype="<f4", count=size, offset=offset).reshape(shape)
        offset += 4 * size
        tensors[name] = np.array(data, dtype=np.float32)
    if offset != len(blob):
        raise ParseError(f"{len(blob) - offset} trailing bytes after last tensor", path=str(path))
    return tensors
