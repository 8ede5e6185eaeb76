import json

import numpy as np
import pytest

from conftest import base_raw
from wishart_rates import ModelParams, fixture_path, pricing, shapes
from wishart_rates.config import (
    GridSpec,
    load_config,
    read_curve_csv,
    write_curve_csv,
    write_summary_csv,
    write_thresholds_csv,
)
from wishart_rates.errors import ConfigParseError, OutputError, ValidationError


class TestLoadConfig:
    def test_base_fixture(self):
        cfg = load_config(fixture_path("base.json"))
        assert cfg.model.alpha == 3.1 and cfg.model.d == 2
        np.testing.assert_array_equal(cfg.model.X, [[0.21, 0.003], [0.003, 0.7]])

    def test_humped_fixture_scales_state(self):
        base = load_config(fixture_path("base.json")).model
        humped = load_config(fixture_path("humped.json")).model
        np.testing.assert_allclose(humped.X, 1.8 * base.X, rtol=1e-15)
        for name in ("B", "M", "Q"):
            np.testing.assert_array_equal(getattr(humped, name), getattr(base, name))

    def test_malformed_json_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "d": 2,\n  "a": ,\n}')
        with pytest.raises(ConfigParseError) as info:
            load_config(path)
        assert info.value.line == 3 and info.value.column is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_config(tmp_path / "absent.json")

    def test_missing_key(self, base_config_file):
        raw = base_raw()
        del raw["Q"]
        path = base_config_file()
        path.write_text(json.dumps(raw))
        with pytest.raises(ValidationError, match="Q"):
            load_config(path)

    def test_unstable_mean_reversion(self, base_config_file):
        with pytest.raises(ValidationError, match="M not Hurwitz") as info:
            load_config(base_config_file(M=[[1.0, 0.0], [0.0, 1.0]]))
        assert info.value.assumption == "mean_reversion_hurwitz"
        assert "eigenvalue 1" in str(info.value)

    def test_indefinite_loading(self, base_config_file):
        with pytest.raises(ValidationError, match="B not positive definite") as info:
            load_config(base_config_file(B=[[0.01, 0.02], [0.02, 0.01]]))
        assert "-0.01" in str(info.value)

    def test_near_symmetric_input_is_symmetrized(self, base_config_file):
        cfg = load_config(base_config_file(X=[[0.21, 0.003], [0.003 + 1e-14, 0.7]]))
        np.testing.assert_array_equal(cfg.model.X, cfg.model.X.T)

    def test_relaxed_gindikin(self, base_config_file):
        path = base_config_file(alpha=1.5)
        with pytest.raises(ValidationError, match="alpha"):
            load_config(path)
        assert load_config(path, relaxed_gindikin=True).model.alpha == 1.5


# every invariant reachable from a crafted config, each with its own name
VIOLATIONS = {
    "a_negative": {"a": -0.01},
    "gindikin": {"alpha": 2.5},
    "rate_loading_pd": {"B": [[0.01, 0.02], [0.02, 0.01]]},
    "diffusion_singular": {"Q": [[1.0, 2.0], [0.5, 1.0]]},
    "mean_reversion_hurwitz": {"M": [[-1.0, 0.0], [0.0, 0.2]]},
    "state_pd": {"X": [[0.2, 0.0], [0.0, -0.1]]},
    "asymmetric": {"B": [[0.01, 0.005], [0.004, 0.02]]},
    "dimension": {"M": [[-1.0]]},
    "shape": {"Q": [[1.0, "x"], [0.0, 1.0]]},
    "missing_key": {"__drop__": "X"},
}


@pytest.mark.parametrize("assumption", sorted(VIOLATIONS))
def test_each_invariant_has_a_named_error(base_config_file, assumption):
    overrides = dict(VIOLATIONS[assumption])
    if "__drop__" in overrides:
        raw = base_raw()
        del raw[overrides.pop("__drop__")]
        path = base_config_file()
        path.write_text(json.dumps(raw))
    else:
        path = base_config_file(**overrides)
    with pytest.raises(ValidationError) as info:
        load_config(path)
    assert info.value.assumption == assumption


def test_nonfinite_parameters_rejected():
    with pytest.raises(ValidationError) as info:
        ModelParams(a=float("nan"), alpha=3.1, B=np.eye(2), M=-np.eye(2), Q=np.eye(2), X=np.eye(2))
    assert info.value.assumption == "nonfinite"


def test_params_are_immutable_and_hashable(base_params):
    with pytest.raises(ValueError):
        base_params.X[0, 0] = 1.0
    clone = base_params.replace()
    assert clone == base_params and hash(clone) == hash(base_params)
    assert base_params.replace(a=0.01) != base_params


class TestCsv:
    def test_three_point_curve(self, base_params, tmp_path):
        curve = pricing.yield_curve(base_params, [1.0, 2.0, 3.0])
        path = write_curve_csv(curve, tmp_path / "curve.csv")
        raw = path.read_bytes()
        lines = raw.decode("utf-8").split("\n")
        assert lines[0] == "tau,yield,bond_price"
        assert len(lines) == 5 and lines[-1] == ""
        assert b"\r" not in raw

    def test_round_trip_twelve_digits(self, base_params, tmp_path):
        curve = pricing.yield_curve(base_params)
        taus, yields, prices = read_curve_csv(write_curve_csv(curve, tmp_path / "c.csv"))
        for a, b in ((taus, curve.taus), (yields, curve.yields), (prices, curve.prices)):
            np.testing.assert_allclose(a, b, rtol=5e-12, atol=0)

    def test_thresholds_layout(self, base_params, tmp_path):
        th = shapes.compute_thresholds(base_params)
        lines = write_thresholds_csv(th, tmp_path / "t.csv").read_text().splitlines()
        assert lines[0] == "matrix,e00,e01,e10,e11"
        rows = {line.split(",")[0]: [float(v) for v in line.split(",")[1:]] for line in lines[1:]}
        assert {"b_norm", "b_inv"} <= set(rows)
        np.testing.assert_allclose(rows["b_inv"], th.b_inv.ravel(), rtol=1e-11)

    def test_summary_blank_fields(self, tmp_path):
        path = write_summary_csv([{"eta": 0.01, "status": "skipped: gindikin"}], tmp_path / "s.csv")
        assert path.read_text().splitlines()[1] == "0.01,skipped: gindikin,,,,,"

    def test_unwritable_target(self, base_params, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OutputError):
            write_curve_csv(pricing.yield_curve(base_params, [1.0]), blocker / "curve.csv")


def test_grid_spec_defaults():
    np.testing.assert_array_equal(GridSpec().taus(), pricing.default_grid())
