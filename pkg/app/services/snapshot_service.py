"""
Binary snapshot codec for field sequences.

Layout: a 64-byte little-endian header, the payload as little-endian float64 in
(n, t, x1[, x2], component) order, then an 8-byte BLAKE2b digest of header and payload.
"""

import hashlib
import logging
from pathlib import Path
from typing import Union

import numpy as np

from app.data_models import FieldSequence, Grid
from app.utils.error_handlers import SnapshotChecksumError, SnapshotLengthError, SnapshotVersionError

logger = logging.getLogger(__name__)

MAGIC = b"SCONVSNP"
VERSION = 1
DIGEST_SIZE = 8

HEADER_DTYPE = np.dtype([
    ("magic", "S8"),
    ("version", "<u4"),
    ("d", "<u4"),
    ("cells", "<u4", (2,)),
    ("time_steps", "<u4"),
    ("T", "<f8"),
    ("torus_length", "<f8", (2,)),
    ("D", "<u4"),
    ("N_max", "<u4"),
    ("pad", "V4"),
])
HEADER_SIZE = HEADER_DTYPE.itemsize


def _digest(content: bytes) -> bytes:
    return hashlib.blake2b(content, digest_size=DIGEST_SIZE).digest()


def _header(seq: FieldSequence) -> bytes:
    grid = seq.grid
    header = np.zeros((), dtype=HEADER_DTYPE)
    header["magic"] = MAGIC
    header["version"] = VERSION
    header["d"] = grid.d
    header["cells"][: grid.d] = grid.cells_per_dim
    header["time_steps"] = grid.time_steps
    header["T"] = grid.T
    header["torus_length"][: grid.d] = grid.torus_length
    header["D"] = seq.D
    header["N_max"] = seq.length
    return header.tobytes()


def payload_size(header: np.ndarray) -> int:
    """Payload bytes announced by a decoded header"""
    d = int(header["d"])
    cells = int(np.prod(header["cells"][:d]))
    return int(header["N_max"]) * int(header["time_steps"]) * cells * int(header["D"]) * 8


def encode_snapshot(seq: FieldSequence) -> bytes:
    header = _header(seq)
    payload = np.ascontiguousarray(seq.values, dtype="<f8").tobytes()
    return header + payload + _digest(header + payload)


def decode_snapshot(blob: bytes) -> FieldSequence:
    """
    Decode a snapshot produced by encode_snapshot

    Raises:
        SnapshotLengthError: If the blob is shorter or longer than the header announces
        SnapshotVersionError: On a wrong magic tag or an unknown format version
        SnapshotChecksumError: If the trailing digest does not match
    """
    if len(blob) < HEADER_SIZE:
        raise SnapshotLengthError(
            f"snapshot holds {len(blob)} bytes, shorter than the {HEADER_SIZE}-byte header",
            details={"size": len(blob)},
        )
    header = np.frombuffer(blob[:HEADER_SIZE], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != MAGIC:
        raise SnapshotVersionError(
            f"unknown snapshot tag {bytes(header['magic'])!r}", details={"magic": repr(bytes(header["magic"]))})
    if int(header["version"]) != VERSION:
        raise SnapshotVersionError(
            f"snapshot format version {int(header['version'])} is not supported (expected {VERSION})",
            details={"version": int(header["version"])},
        )
    d = int(header["d"])
    if d not in (1, 2):
        raise SnapshotVersionError(f"snapshot header names space dimension {d}", details={"d": d})

    expected = payload_size(header)
    actual = len(blob) - HEADER_SIZE - DIGEST_SIZE
    if actual != expected:
        raise SnapshotLengthError(
            f"snapshot payload holds {actual} bytes, header announces {expected}",
            details={"expected": expected, "actual": actual},
        )
    content, digest = blob[:-DIGEST_SIZE], blob[-DIGEST_SIZE:]
    if _digest(content) != digest:
        raise SnapshotChecksumError("snapshot checksum mismatch", details={"stored": digest.hex()})

    grid = Grid(
        d=d,
        cells_per_dim=tuple(int(c) for c in header["cells"][:d]),
        time_steps=int(header["time_steps"]),
        T=float(header["T"]),
        torus_length=tuple(float(length) for length in header["torus_length"][:d]),
    )
    shape = (int(header["N_max"]), *grid.shape, int(header["D"]))
    values = np.frombuffer(blob, dtype="<f8", count=expected // 8, offset=HEADER_SIZE).reshape(shape)
    return FieldSequence(grid=grid, values=values)


def save_snapshot(seq: FieldSequence, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = encode_snapshot(seq)
    path.write_bytes(blob)
    logger.info(f"Wrote snapshot {path} ({seq.length} members, D = {seq.D}, {len(blob)} bytes)")
    return path


def load_snapshot(path: Union[str, Path]) -> FieldSequence:
    seq = decode_snapshot(Path(path).read_bytes())
    logger.info(f"Loaded snapshot {path} ({seq.length} members on grid {seq.grid.shape})")
    return seq


def snapshot_roundtrip(seq: FieldSequence) -> FieldSequence:
    """Encode then decode; the result equals seq bit-exactly"""
    return decode_snapshot(encode_snapshot(seq))
