import pytest

from coarselab.analysis import GrowthClass
from coarselab.errors import InputError, ResourceError
from coarselab.generators import SpaceSpec, growth_function
from coarselab.pipeline import (
    PipelineConfig,
    growth_verdict,
    model_separation_curve,
    pipeline_verdict,
    theorem_pipeline,
)
from coarselab.profiles import ProfileCurve


def test_config_validation():
    with pytest.raises(InputError, match="group"):
        PipelineConfig(SpaceSpec("DyadicHyperbolic"), 3, 1)
    with pytest.raises(InputError):
        PipelineConfig(SpaceSpec("ZPower", d=2), 1, 1)
    with pytest.raises(InputError):
        PipelineConfig(SpaceSpec("ZPower", d=2), 2, 0, growth_radius=2)
    assert PipelineConfig(SpaceSpec("ZPower", d=2), 3, 1).degree_bound == 3


@pytest.mark.parametrize(
    "kind, degree, verdict",
    [
        ("exponential", 5.0, "excluded"),
        ("polynomial", 3.1, "admissible"),
        ("polynomial", 3.15, "admissible"),
        ("polynomial", 3.2, "excluded"),
        ("inconclusive", None, "inconclusive"),
    ],
)
def test_growth_verdict_rule(kind, degree, verdict):
    assert growth_verdict(GrowthClass(kind, degree, None, None), 3, 1)[0] == verdict


def test_verdict_is_a_function_of_the_curves():
    cfg = PipelineConfig(SpaceSpec("ZPower", d=2), 2, 1, growth_radius=20, profile_radius=6)
    growth = growth_function(cfg.group, 20)
    empty_j = ProfileCurve("isoperimetric", [])
    empty_sep = ProfileCurve("separation", [])
    a = pipeline_verdict(cfg, growth, empty_j, empty_sep, None)
    b = pipeline_verdict(cfg, growth, empty_j, empty_sep, None)
    assert a.verdict == b.verdict == "admissible"
    assert a.to_text() == b.to_text()
    assert [c.verdict for c in a.checks] == ["inconclusive"] * 3


def test_small_zpower_pipeline_runs_end_to_end():
    res = theorem_pipeline(PipelineConfig(SpaceSpec("ZPower", d=2), 2, 1, growth_radius=16, profile_radius=6))
    assert res.verdict == "admissible"
    text = res.to_text()
    assert text.startswith("# finite-scale evidence, not proof")
    assert "verdict = admissible" in text
    rows = res.fit_rows()
    assert ("pipeline", "verdict", "admissible") in rows
    assert {"growth", "iso", "sep", "model_sep"} <= set(res.curves)


def test_free_group_is_excluded():
    res = theorem_pipeline(PipelineConfig(SpaceSpec("FreeGroup", rank=2), 2, 0, growth_radius=8, profile_radius=4))
    assert res.verdict == "excluded" and res.growth_class.kind == "exponential"


def test_stage_is_reported_on_budget_failure():
    cfg = PipelineConfig(SpaceSpec("ZPower", d=2), 2, 1, growth_radius=10, profile_radius=40, max_vertices=1000)
    with pytest.raises(ResourceError) as exc:
        theorem_pipeline(cfg)
    assert exc.value.stage == "ball"


def test_model_curve_sizes_and_certificates():
    curve = model_separation_curve(3, 0)
    assert curve is not None
    assert curve.sizes[0] == 4 and curve.sizes[-1] <= 20_000
    assert all(p.certificate == "lower" for p in curve.points)
    assert model_separation_curve(4, 4, max_volume=10) is None
