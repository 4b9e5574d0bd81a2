import json
import math

import numpy as np
import pytest

from clickhomodyne.clicks import ArmDescriptor, DetectorConfig, click_statistics, joint_click_statistics
from clickhomodyne.io import (
    ConfigError,
    Table,
    config_hash,
    detector_from_dict,
    distribution_from_table,
    distribution_table,
    histogram_from_table,
    histogram_table,
    parse_complex,
    read_table,
    scheme_from_dict,
    spectral_from_dict,
    state_from_dict,
    state_to_dict,
    write_table,
)
from clickhomodyne.sampler import sample
from clickhomodyne.states import Mixture, expectation, ExpFactor, FactorProduct, make_cat

PROBE = FactorProduct((ExpFactor(0, 0.37, 0.4 - 1j),))


@pytest.mark.parametrize("value,expected", [(1.5, 1.5), ([1, -2], 1 - 2j), ({"re": 0, "im": 3}, 3j),
                                            ({"abs": 2, "arg": math.pi / 2}, 2j), ("1+2j", 1 + 2j)])
def test_parse_complex(value, expected):
    assert parse_complex(value) == pytest.approx(expected)


def test_parse_complex_rejects():
    with pytest.raises(ConfigError):
        parse_complex("abc")
    with pytest.raises(ConfigError):
        parse_complex([1, 2, 3])


def test_state_forms_round_trip():
    cat = state_from_dict({"cat": {"alpha": [1, 0.5], "parity": "odd"}})
    ref = make_cat(1 + 0.5j, "odd")
    assert expectation(cat, PROBE) == pytest.approx(expectation(ref, PROBE), abs=1e-14)
    again = state_from_dict(json.loads(json.dumps(state_to_dict(cat))))
    assert expectation(again, PROBE) == pytest.approx(expectation(cat, PROBE), abs=1e-14)
    mix = state_from_dict({"mixture": [{"weight": 1, "state": {"coherent": [0.5]}},
                                       {"weight": 2, "state": {"vacuum": 1}}]})
    assert isinstance(mix, Mixture)
    back = state_from_dict(state_to_dict(mix))
    assert expectation(back, PROBE) == pytest.approx(expectation(mix, PROBE), abs=1e-14)
    two = state_from_dict({"coherent": [[1, 0], [0, 1]]})
    assert two.modes == 2 and two.amplitudes[0, 1] == 1j
    assert state_from_dict({"cat": {"alpha": 1, "two_mode": True}}).modes == 2


def test_state_errors():
    with pytest.raises(ConfigError):
        state_from_dict({"squeezed": 1})
    with pytest.raises(ConfigError):
        state_from_dict({"modes": 2, "terms": [{"c": 1, "alphas": [0.1]}]})
    with pytest.raises(ConfigError):
        state_from_dict({"mixture": []})


def test_scheme_from_dict():
    s = scheme_from_dict({"scheme": "unbalanced4", "t": 0.8, "r": 0.6, "beta": 4, "detector": {"N": 8, "eta": 0.5}})
    assert len(s) == 1 and abs(s.arms[0].gamma) == pytest.approx(3)
    assert len(scheme_from_dict({"scheme": "eight"})) == 4
    assert len(scheme_from_dict({"scheme": "two_mode", "beta2": [0, 2]})) == 4
    assert scheme_from_dict({"scheme": "balanced4"}).kind == "balanced4"
    with pytest.raises(ConfigError, match="unknown scheme"):
        scheme_from_dict({"scheme": "six"})
    with pytest.raises(ConfigError, match="beam splitter|!= 1"):
        scheme_from_dict({"scheme": "unbalanced4", "t": 0.9, "r": 0.9})
    with pytest.raises(ConfigError, match="detector"):
        detector_from_dict({"N": 8, "eta": 2})
    with pytest.raises(ConfigError, match="unknown detector"):
        detector_from_dict({"M": 8})


def test_detector_cap():
    with pytest.warns(UserWarning, match="capped"):
        assert detector_from_dict({"N": 1000}).N == 256


def test_spectral_from_dict():
    s = spectral_from_dict({"omega": {"start": -6, "stop": 6, "num": 601}, "f_lo": {"gaussian": {"center": 1, "width": 1}}})
    assert s.omega.size == 601
    with pytest.raises(ConfigError, match="normalized"):
        spectral_from_dict({"omega": {"start": -6, "stop": 6, "num": 5}, "f_si": 1.0})
    with pytest.raises(ConfigError, match="samples"):
        spectral_from_dict({"omega": {"start": -6, "stop": 6, "num": 5}, "G": [1, 1]})


def test_config_hash_stable():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_distribution_round_trip(tmp_path, even_cat):
    arms = scheme_from_dict({"scheme": "balanced4", "detector": {"N": 4, "eta": 0.5}}).arms
    dist = joint_click_statistics(even_cat, arms)
    for fmt in ("csv", "json"):
        path = tmp_path / f"d.{fmt}"
        write_table(distribution_table(dist, {"config_hash": "x"}), path, fmt)
        back = distribution_from_table(read_table(path))
        np.testing.assert_array_equal(back.probabilities, dist.probabilities)
    text = (tmp_path / "d.csv").read_text().splitlines()
    assert text[0] == "# config_hash: x" and text[1] == "k1,k2,prob"


def test_histogram_round_trip(tmp_path, even_cat):
    dist = click_statistics(even_cat, ArmDescriptor(0, 1.0, 0.0, DetectorConfig(8)))
    h = sample(dist, 1000, seed=3)
    path = tmp_path / "h.csv"
    write_table(histogram_table(h), path)
    back = histogram_from_table(read_table(path), (8,))
    assert back.counts.tobytes() == h.counts.tobytes() and back.shots == 1000
    # external histograms may omit unobserved outcomes when sizes are given
    path.write_text("k1,count\n0,3\n2,5\n")
    ext = histogram_from_table(read_table(path), (4,))
    assert list(ext.counts) == [3, 0, 5, 0, 0]
    with pytest.raises(ConfigError):
        histogram_from_table(read_table(path), (1,))
    path.write_text("a,count\n0,3\n")
    with pytest.raises(ConfigError):
        histogram_from_table(read_table(path))


def test_table_nan_in_json(tmp_path):
    t = Table(["k", "v"], [[0, 1.0], [1, math.nan]], {"version": "0"})
    path = tmp_path / "t.json"
    write_table(t, path, "json")
    obj = json.loads(path.read_text())
    assert obj["rows"][1][1] is None
    assert math.isnan(read_table(path).rows[1][1])
    with pytest.raises(ValueError):
        Table(["a"], [[1, 2]])
