import json

import numpy as np
import pytest

from lightray import config
from lightray.curves import check_table, coefficient_curve
from lightray.errors import ConfigError


def test_builtin_scenes_resolve():
    for name in config.SCENES:
        cfg = config.load(scene=name)
        assert cfg.dim == 3
        assert len(cfg.digest()) == 64


def test_scene_override_and_digest():
    a = config.resolve({"scene": "minkowski3"})
    b = config.resolve({"scene": "minkowski3", "sampling": {"sphere": 16}})
    assert a.sampling("sphere", 0) == 8 and b.sampling("sphere", 0) == 16
    assert a.digest() != b.digest()
    assert a.digest() == config.resolve({"scene": "minkowski3"}).digest()


def test_inline_metric_matches_catalog():
    inline = {"dim": 3, "components": {
        "0,0": [{"coef": -1, "fn": "1", "var": 0}],
        "1,1": [{"coef": 1, "fn": "1", "var": 0}],
        "2,2": [{"coef": 1, "fn": "1", "var": 0}, {"coef": 0.1, "fn": "s2", "var": 1}]}}
    cfg = config.resolve({"metric": {"inline": inline}})
    p = np.array([0.0, 0.5, 0.0])
    assert cfg.metric.g(p)[2, 2] == pytest.approx(1.025)
    assert cfg.metric.dg(p)[1, 2, 2] == pytest.approx(0.1)


@pytest.mark.parametrize("raw", [
    [],
    {"scene": "nowhere"},
    {"metric": 3},
    {"metric": {}},
    {"metric": {"inline": {"dim": 3, "components": {"0,0": [{"coef": 1, "fn": "1"}],
                                                    "1,1": [{"coef": 1, "fn": "1"}],
                                                    "2,2": [{"coef": 1, "fn": "1"}]}}}},
    {"metric": {"inline": {"dim": 3, "components": {"0,5": []}}}},
    {"metric": {"inline": {"dim": 3, "components": {"0,0": [{"coef": 1, "fn": "tan"}]}}}},
    {"scene": "minkowski3", "tolerances": {"sign": -1}},
    {"scene": "minkowski3", "curves": {"c": {"table": [{"s": 1.0}]}}},
    {"scene": "minkowski3", "curves": {"c": {"table": [{}, {}, {}], "interval": [1.0, 0.0]}}},
])
def test_bad_configs(raw):
    with pytest.raises(ConfigError):
        config.resolve(raw)


def test_load_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        config.load(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        config.load(str(bad))
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"scene": "g_eps"}))
    assert config.load(str(good)).metric.name.startswith("g_eps")


def test_coefficient_curve_exact_velocity():
    table = [{"s2": 0.5}, {"s_sin": 1.0, "cos": 1.0}, {"s_cos": -1.0, "sin": 1.0}]
    curve = coefficient_curve(table, (-1.0, 1.0))
    h = 1e-6
    for s in np.linspace(-1, 1, 7):
        fd = (curve.position(s + h) - curve.position(s - h)) / (2 * h)
        assert np.allclose(curve.velocity(s), fd, atol=1e-8)
        assert np.allclose(curve.velocity(s), s * np.array([1.0, np.cos(s), np.sin(s)]), atol=1e-14)


def test_check_table_rejects():
    for table in ([], [{"s": "x"}], [{"s": float("nan")}], [3]):
        with pytest.raises(ConfigError):
            check_table(table)
    with pytest.raises(ConfigError):
        check_table([{}, {}], dim=3)
