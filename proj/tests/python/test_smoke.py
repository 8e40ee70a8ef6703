import json
import math

import pytest

import frechet_bounds as fb


def two_point(p1):
    data = fb.Dataset([[0], [0]], predictions=[1, 0])
    model = fb.LabelModel(2)
    model.set_row([0], [1 - p1, p1])
    return data, model


def test_soft_extreme():
    assert fb.soft_extreme([0.0, 1.0], 0.5, "lower") == pytest.approx(0.2831096, abs=1e-7)


def test_two_point_oracle_and_estimate():
    data, model = two_point(0.75)
    g = fb.build_g(data, "accuracy")
    exact = fb.exact_bounds(data, model, g)
    assert exact.lower == pytest.approx(0.25)
    assert exact.upper == pytest.approx(0.75)
    eps = 1e-3 / math.log(2)
    b = fb.estimate_bounds(data, model, g, epsilon=eps)
    assert 0.25 - 1e-5 <= b.lower.value <= 0.25 + eps * math.log(2) + 1e-5
    assert b.lower.report.converged
    ci = b.upper.confidence_interval(0.05)
    assert ci.low <= b.upper.value <= ci.high


def test_synthetic_pipeline():
    out = fb.generate_synthetic(n=300, seed=3)
    g = fb.build_g(out.data, "joint-positive", threshold=0.5)
    b = fb.estimate_bounds(out.data, out.exact_model, g)
    prf = fb.prf_from_joint(b.lower.value, b.lower.plugin_std, b.upper.value, b.upper.plugin_std,
                            fb.estimate_h1(out.data, 0.5), fb.estimate_class_prior(out.data, out.exact_model))
    assert 0.0 <= prf.f1.lower <= prf.f1.upper <= 1.0


def test_diagnostics_and_selection():
    assert fb.informativeness_bound(1.0, math.log(2)) == pytest.approx(2.35482, abs=1e-5)
    assert fb.tv_distance([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.25)
    assert fb.select_model([(0.6, 0.9, 0.0), (0.7, 0.8, 0.0)], "lower").chosen_index == 1


def test_errors_are_typed():
    data, _ = two_point(0.5)
    partial = fb.LabelModel(2)
    partial.set_row([1], [0.5, 0.5])
    with pytest.raises(fb.CoverageError):
        fb.estimate_bounds(data, partial, fb.build_g(data, "accuracy"))
    with pytest.raises(fb.FormatError):
        partial.set_row([2], [0.6, 0.5])
    assert issubclass(fb.FormatError, fb.Error)


def test_cli_in_process(tmp_path):
    code, _, _ = fb.run_cli(["synth", "--n", "200", "--seed", "1", "--out-dir", str(tmp_path)])
    assert code == 0
    code, out, _ = fb.run_cli(["estimate", "--data", str(tmp_path / "data.csv"),
                               "--label-model", str(tmp_path / "label_model.json")])
    assert code == 0
    result = json.loads(out)["metrics"]["accuracy"]
    assert result["lower"] <= result["upper"]
    assert fb.run_cli(["estimate", "--bogus"])[0] == 1
