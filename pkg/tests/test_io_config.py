import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from costvr.bsvr_process import ObservedIntervalSet, exponential_params, generate_bsvrs
from costvr.config import ExperimentConfig, config_hash, load_config
from costvr.errors import InvalidParameterError
from costvr.io import (
    dumps_json,
    read_intervals,
    read_pmf,
    read_tensor,
    table_text,
    write_intervals,
    write_pmf,
    write_tensor,
)
from costvr.mpc_model import RadiusPmf


def test_interval_roundtrip_preserves_censoring(tmp_path):
    obs = generate_bsvrs(exponential_params(2.6, 2.9, 7.5, delta0=0.23), seed=3)
    p = tmp_path / "iv.csv"
    write_intervals(p, obs, {"seed": 3})
    back = read_intervals(p)
    np.testing.assert_array_equal(back.a, obs.a)
    np.testing.assert_array_equal(back.b, obs.b)
    assert back.counts == obs.counts and back.delta0 == obs.delta0


def test_read_intervals_needs_window(tmp_path):
    p = tmp_path / "iv.csv"
    p.write_text("a,b\n0.0,1.0\n")
    with pytest.raises(InvalidParameterError):
        read_intervals(p)
    obs = read_intervals(p, x1=0.0, x2=2.0)
    assert obs.counts == (0, 0, 1, 0)


def test_pmf_roundtrip(tmp_path):
    pmf = RadiusPmf(np.array([0.0, 0.5, 1.25]), np.array([0.1, 0.6, 0.3]))
    p = tmp_path / "pmf.csv"
    write_pmf(p, pmf, {"k": "v"})
    back = read_pmf(p)
    np.testing.assert_array_equal(back.radii, pmf.radii)
    np.testing.assert_allclose(back.weights, pmf.weights, rtol=0, atol=1e-15)


@given(hnp.arrays(np.complex128, hnp.array_shapes(min_dims=1, max_dims=4, max_side=4),
                  elements=st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6)))
def test_tensor_roundtrip(tmp_path_factory, h):
    p = tmp_path_factory.mktemp("t") / "h.bin"
    write_tensor(p, h)
    np.testing.assert_array_equal(read_tensor(p), h)


def test_tensor_rejects_truncated(tmp_path):
    p = tmp_path / "h.bin"
    write_tensor(p, np.ones((2, 2), complex))
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(InvalidParameterError):
        read_tensor(p)


def test_table_text_repr_floats():
    t = table_text(["x"], [[0.1 + 0.2]], {"seed": 1})
    assert t.splitlines() == ["# seed=1", "x", repr(0.1 + 0.2)]


def test_json_non_finite():
    d = json.loads(dumps_json({"a": np.inf, "b": np.arange(2), "c": np.float64(1.5)}))
    assert d == {"a": "inf", "b": [0, 1], "c": 1.5}


def test_load_config(tmp_path):
    y = tmp_path / "c.yaml"
    y.write_text("lambda: 2.5\nL_BS: 10\n")
    j = tmp_path / "c.json"
    j.write_text('{"lambda": 2.5, "L_BS": 10}')
    assert load_config(y) == load_config(j) == {"lambda": 2.5, "L_BS": 10}
    assert load_config(None) == {}
    bad = tmp_path / "b.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(InvalidParameterError):
        load_config(bad)
    with pytest.raises(InvalidParameterError):
        load_config(tmp_path / "missing.yaml")


def test_config_hash_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_experiment_config():
    c = ExperimentConfig("fig3-rmse", {"trials": 5}, trials=5, seed=1)
    assert c.hash == config_hash(c.as_dict())
    with pytest.raises(InvalidParameterError):
        ExperimentConfig("x", trials=0)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig("x", seed=-1)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig("x", sweep={"K": []})


def test_interval_set_from_file_validates(tmp_path):
    p = tmp_path / "iv.csv"
    p.write_text("# x1=0,x2=1,delta0=0\na,b\n0.5,0.2\n")
    with pytest.raises(InvalidParameterError):
        read_intervals(p)
