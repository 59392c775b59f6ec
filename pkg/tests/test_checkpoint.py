import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from zsl.checkpoint import CheckpointError, decode, encode, read_checkpoint, write_checkpoint
from zsl.solver import ZakharovState
from zsl.spectral import Grid2D

G = Grid2D(8, 10, 3.0, 5.0)
fin = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(arrays(float, (2,) + G.shape, elements=fin), arrays(float, G.shape, elements=fin),
       arrays(float, (2,) + G.shape, elements=fin), fin, st.floats(1e-3, 1e3))
def test_round_trip_bit_exact(uri, n, v, t, lam):
    s = ZakharovState(G, t, uri[0] + 1j * uri[1], n, v)
    back, lam2 = decode(encode(s, lam))
    assert lam2 == lam and back.t == t
    assert back.grid.shape == G.shape and back.grid.Lx == G.Lx and back.grid.Ly == G.Ly
    for a, b in ((s.u, back.u), (s.n, back.n), (s.v, back.v)):
        assert a.tobytes() == b.tobytes()


def test_layout_little_endian_row_major():
    g = Grid2D(8, 8)
    u = np.arange(64, dtype=float).reshape(8, 8) + 1j * 1000
    n = np.full(g.shape, -1.0)
    s = ZakharovState(g, 0.5, u, n, np.zeros((2, 8, 8)))
    data = encode(s, 2.0)
    head, body = data.split(b"\n", 1)
    h = json.loads(head)
    assert h["nx"] == 8 and h["lambda"] == 2.0 and h["t"] == 0.5
    assert [f["name"] for f in h["fields"]] == ["u", "n", "v_x", "v_y"]
    vals = np.frombuffer(body, dtype="<f8")
    assert vals.size == 5 * 64
    # u[0,1] real then imag, x index slowest
    assert list(vals[:4]) == [0.0, 1000.0, 1.0, 1000.0]
    assert vals[2 * 8] == 8.0  # u[1,0].real
    assert np.all(vals[128:192] == -1.0)


@pytest.mark.parametrize("mutate", [
    lambda d: d.replace(b"\n", b"", 1),
    lambda d: b"{not json\n" + d.split(b"\n", 1)[1],
    lambda d: d[:-8],
    lambda d: d + b"\0",
    lambda d: d.replace(b"zsl-checkpoint", b"other-format"),
])
def test_corrupt_input(mutate):
    data = encode(ZakharovState.zeros(Grid2D(8, 8)), 1.0)
    with pytest.raises(CheckpointError):
        decode(mutate(data))


def test_file_round_trip(tmp_path):
    s = ZakharovState(G, 1.25, np.ones(G.shape) * (1 + 2j), np.ones(G.shape), np.ones((2,) + G.shape))
    p = write_checkpoint(tmp_path / "c.bin", s, 3.0)
    back, lam = read_checkpoint(p)
    assert lam == 3.0 and np.array_equal(back.u, s.u)
    assert not (tmp_path / "c.bin.tmp").exists()


def test_failed_write_keeps_previous(tmp_path, monkeypatch):
    path = tmp_path / "c.bin"
    s = ZakharovState.zeros(G, 1.0)
    write_checkpoint(path, s, 1.0)
    before = path.read_bytes()

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr("zsl.checkpoint.os.fsync", boom)
    with pytest.raises(OSError):
        write_checkpoint(path, ZakharovState.zeros(G, 2.0), 1.0)
    assert path.read_bytes() == before
