"""Binary checkpoints of Zakharov states.

Layout: one UTF-8 JSON header line terminated by ``\\n``, followed by the
field planes as little-endian float64, row-major (x index slowest). Real
fields take one plane; complex fields are stored with re/im interleaved.
Writes go through a temporary file and an atomic rename so an interrupted
write never replaces the previous good checkpoint.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .solver import ZakharovState
from .spectral import Grid2D

FORMAT = "zsl-checkpoint"
VERSION = 1
FIELDS = [
    {"name": "u", "kind": "complex"},
    {"name": "n", "kind": "real"},
    {"name": "v_x", "kind": "real"},
    {"name": "v_y", "kind": "real"},
]
_LE = np.dtype("<f8")


class CheckpointError(ValueError):
    pass


def encode(state: ZakharovState, lam: float) -> bytes:
    g = state.grid
    header = {
        "format": FORMAT, "version": VERSION,
        "nx": g.nx, "ny": g.ny, "Lx": g.Lx, "Ly": g.Ly,
        "t": float(state.t), "lambda": float(lam), "fields": FIELDS,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8") + b"\n"
    u = np.ascontiguousarray(state.u, dtype=np.complex128)
    planes = [u.view(np.float64), state.n, state.v[0], state.v[1]]
    body = b"".join(np.ascontiguousarray(p, dtype=_LE).tobytes(order="C") for p in planes)
    return head + body


def decode(data: bytes) -> tuple[ZakharovState, float]:
    nl = data.find(b"\n")
    if nl < 0:
        raise CheckpointError("missing header line")
    try:
        h = json.loads(data[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"bad header: {exc}") from exc
    if h.get("format") != FORMAT or h.get("version") != VERSION:
        raise CheckpointError("not a zsl checkpoint (format/version mismatch)")
    if h.get("fields") != FIELDS:
        raise CheckpointError(f"unexpected field list {h.get('fields')}")
    nx, ny = int(h["nx"]), int(h["ny"])
    plane = nx * ny
    body = data[nl + 1:]
    expected = 5 * plane * 8
    if len(body) != expected:
        raise CheckpointError(f"payload has {len(body)} bytes, expected {expected}")
    flat = np.frombuffer(body, dtype=_LE).astype(np.float64)
    u = flat[: 2 * plane].view(np.complex128).reshape(nx, ny).copy()
    n = flat[2 * plane: 3 * plane].reshape(nx, ny).copy()
    v = flat[3 * plane:].reshape(2, nx, ny).copy()
    g = Grid2D(nx, ny, float(h["Lx"]), float(h["Ly"]))
    return ZakharovState(g, float(h["t"]), u, n, v), float(h["lambda"])


def write_checkpoint(path, state: ZakharovState, lam: float) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(encode(state, lam))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return path


def read_checkpoint(path) -> tuple[ZakharovState, float]:
    return decode(Path(path).read_bytes())
