import json

import numpy as np
import pytest

from relhartree import Field, Grid
from relhartree.snapshot import FORMAT, read_field, write_field


def test_round_trip(tmp_path):
    g = Grid(8, 4.0)
    rng = np.random.default_rng(0)
    f = Field(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    path = write_field(tmp_path / "a.fld", f, params={"m": 1.0}, time=0.25, note="x")
    back, header = read_field(path)
    np.testing.assert_array_equal(back.values, f.values)
    assert back.grid == g
    assert header["format"] == FORMAT and header["time"] == 0.25 and header["params"] == {"m": 1.0}
    assert header["note"] == "x"


def test_layout_is_little_endian_x_fastest(tmp_path):
    g = Grid(4, 1.0)
    vals = np.zeros(g.shape, dtype=complex)
    vals[1, 0, 0] = 1 + 2j
    vals[0, 1, 0] = 3.0
    path = write_field(tmp_path / "b.fld", Field(g, vals))
    raw = path.read_bytes()
    header, payload = raw.split(b"\n", 1)
    assert json.loads(header)["dims"] == [4, 4, 4]
    data = np.frombuffer(payload, dtype="<f8")
    # pair index 1 is (x=1, y=0, z=0); pair index 4 is (x=0, y=1, z=0)
    assert tuple(data[2:4]) == (1.0, 2.0)
    assert tuple(data[8:10]) == (3.0, 0.0)


def test_real_and_spectral_fields(tmp_path):
    g = Grid(8, 4.0, dim=1)
    f = Field(g, np.arange(8.0)).spectral()
    back, header = read_field(write_field(tmp_path / "c.fld", f))
    assert back.is_spectral and header["representation"] == "spectral"
    np.testing.assert_allclose(back.physical().values.real, np.arange(8.0), atol=1e-12)
    real, _ = read_field(write_field(tmp_path / "d.fld", Field(g, np.arange(8.0))))
    assert np.isrealobj(real.values)


def test_truncated_payload(tmp_path):
    g = Grid(4, 1.0)
    path = write_field(tmp_path / "e.fld", Field(g, np.ones(g.shape)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_field(path)
