import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from curvedvortex import io as vio


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), R=st.floats(0.1, 100), data=st.data())
def test_binary_roundtrip(tmp_path_factory, n, R, data):
    fields = {}
    for name in ("u", "eta", "F12"):
        fields[name] = data.draw(hnp.arrays(np.float64, (n, n), elements=st.floats(allow_nan=False)))
    path = tmp_path_factory.mktemp("bin") / "f.bin"
    vio.write_binary(path, n, R, fields)
    n2, R2, back = vio.read_binary(path)
    assert (n2, R2) == (n, R) and list(back) == list(fields)
    for k in fields:
        assert np.array_equal(back[k], fields[k])


def test_binary_errors(tmp_path):
    with pytest.raises(ValueError):
        vio.write_binary(tmp_path / "a.bin", 3, 1.0, {"u": np.zeros((2, 2))})
    (tmp_path / "b.bin").write_bytes(b"NOTMAGIC" + bytes(24))
    with pytest.raises(ValueError):
        vio.read_binary(tmp_path / "b.bin")


def test_json_cleans_nonfinite(tmp_path):
    p = tmp_path / "x.json"
    vio.write_json(p, {"a": np.float64(1.5), "b": float("nan"), "c": [np.int64(2), math.inf],
                       "d": np.array([1.0, 2.0]), "e": np.bool_(True)})
    assert vio.read_json(p) == {"a": 1.5, "b": None, "c": [2, None], "d": [1.0, 2.0], "e": True}


def test_fields_csv_roundtrip(tmp_path, planar_case):
    sol = planar_case(1, 0.0, n=257)
    p = tmp_path / "fields.csv"
    vio.write_fields_csv(p, sol)
    assert p.read_text().splitlines()[0] == ",".join(vio.FIELD_COLUMNS)
    back = vio.read_fields_csv(p)
    assert np.array_equal(back["u"], sol.u)
    assert np.array_equal(back["eta"], sol.metric.eta)
    assert np.all(back["F12"] >= 0) and np.all(np.isfinite(back["F12"]))
    X, _ = sol.grid.mesh()
    assert np.array_equal(back["x"], X)


def test_profile_csv_roundtrip(tmp_path, radial_case):
    sol = radial_case(0.25, 1.0)
    p = tmp_path / "profile.csv"
    vio.write_profile_csv(p, sol)
    back = vio.read_profile_csv(p)
    assert np.array_equal(back["r"], sol.r)
    assert np.array_equal(back["v"], sol.v.values)
    assert np.array_equal(back["du"], sol.u.derivs)
