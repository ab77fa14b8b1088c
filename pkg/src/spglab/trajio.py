"""Text and binary trajectory containers.

Text layout::

    J N frame_rate
    x[0,0] x[1,0] ... x[J-1,0]      <- one row per frame
    ...

Binary layout: ``b"TRAJ1"``, uint64 J, uint64 N, float64 frame_rate, then
``N * J`` float64 values frame by frame, all little-endian.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from spglab.core import Trajectory

TRAJ_MAGIC = b"TRAJ1"
_HEADER = struct.Struct("<QQd")


def atomic_write(path, payload: bytes | str):
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_text(traj: Trajectory) -> str:
    lines = [f"{traj.J} {traj.N} {float(traj.frame_rate)!r}"]
    for frame in traj.data.T:
        lines.append(" ".join(repr(float(v)) for v in frame))
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Trajectory:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty trajectory file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header {lines[0]!r}; expected 'J N frame_rate'")
    J, N, rate = int(head[0]), int(head[1]), float(head[2])
    rows = lines[1:]
    if len(rows) != N:
        raise ValueError(f"header says {N} frames, found {len(rows)}")
    data = np.empty((N, J))
    for i, row in enumerate(rows):
        vals = row.split()
        if len(vals) != J:
            raise ValueError(f"frame {i}: expected {J} values, got {len(vals)}")
        data[i] = [float(v) for v in vals]
    return Trajectory(data.T.copy(), rate)


def to_bytes(traj: Trajectory) -> bytes:
    body = np.ascontiguousarray(traj.data.T, dtype="<f8").tobytes()
    return TRAJ_MAGIC + _HEADER.pack(traj.J, traj.N, float(traj.frame_rate)) + body


def from_bytes(buf: bytes) -> Trajectory:
    if buf[: len(TRAJ_MAGIC)] != TRAJ_MAGIC:
        raise ValueError("not a TRAJ1 container")
    off = len(TRAJ_MAGIC)
    J, N, rate = _HEADER.unpack_from(buf, off)
    off += _HEADER.size
    expected = off + 8 * J * N
    if len(buf) != expected:
        raise ValueError(f"TRAJ1 size mismatch: {len(buf)} bytes, expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", offset=off).reshape(N, J).T.astype(np.float64)
    return Trajectory(data, rate)


def save(traj: Trajectory, path) -> None:
    """Write ``traj``; ``.traj`` selects the binary container, anything else text."""
    path = Path(path)
    if path.suffix == ".traj":
        atomic_write(path, to_bytes(traj))
    else:
        atomic_write(path, format_text(traj))


def load(path) -> Trajectory:
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(TRAJ_MAGIC):
        return from_bytes(raw)
    return parse_text(raw.decode("utf-8"))


def save_many(trajs, path) -> None:
    """Concatenate binary containers into one file."""
    atomic_write(Path(path), b"".join(to_bytes(t) for t in trajs))


def load_many(path) -> list[Trajectory]:
    raw = Path(path).read_bytes()
    out, off = [], 0
    while off < len(raw):
        if raw[off:off + len(TRAJ_MAGIC)] != TRAJ_MAGIC:
            raise ValueError(f"{path}: no TRAJ1 record at byte {off}")
        J, N, _ = _HEADER.unpack_from(raw, off + len(TRAJ_MAGIC))
        end = off + len(TRAJ_MAGIC) + _HEADER.size + 8 * J * N
        out.append(from_bytes(raw[off:end]))
        off = end
    return out
