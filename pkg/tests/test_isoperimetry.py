import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarselab.errors import InputError, ResourceError
from coarselab.generators import SpaceSpec, cayley_ball
from coarselab.graph import cycle_graph, edge_boundary, grid_graph, path_graph
from coarselab.isoperimetry import exact_isoperimetric_profile, family_isoperimetric_lowerbound, interior_margin
from coarselab.profiles import ProfileCurve, ProfilePoint, read_curve_csv, running_max_points, write_curve_csv
from oracles import brute_isoperimetry, grid_profile_closed_form, grid_window_brute, random_connected_graph


def test_cycle_profile():
    curve = exact_isoperimetric_profile(cycle_graph(6), 5)
    assert curve.sizes == [1, 2, 3, 4, 5]
    assert [p.value for p in curve.points] == [Fraction(k, 2) for k in range(1, 6)]
    assert all(p.certificate == "exact" for p in curve.points)


@given(st.integers(2, 8), st.integers(0, 10**6), st.floats(0, 0.5))
@settings(max_examples=60, deadline=None)
def test_host_mode_matches_brute_force(n, seed, extra):
    G = random_connected_graph(random.Random(seed), n, extra)
    m = n - 1
    curve = exact_isoperimetric_profile(G, m)
    expect = brute_isoperimetry(G, m)
    assert [curve.value_at(k) for k in range(1, m + 1)] == expect
    assert brute_isoperimetry(G, m, connected_only=True) == expect


@given(st.integers(3, 9), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_witnesses_reproduce_values(n, seed):
    G = random_connected_graph(random.Random(seed), n, 0.3)
    curve = exact_isoperimetric_profile(G, n - 1)
    for p in curve.points:
        w = curve.witnesses[p.size]
        assert len(w) <= p.size
        score = edge_boundary(G, w)
        assert Fraction(score.set_size, score.boundary_size) == p.value


def test_closed_form_agrees_with_window_search():
    assert grid_window_brute(10) == grid_profile_closed_form(10)


def test_grid_anchored_profile_matches_closed_form():
    G = cayley_ball(SpaceSpec("ZPower", d=2), 19)
    curve = exact_isoperimetric_profile(G, 10, root=0, translation_invariant=True)
    assert [curve.value_at(k) for k in range(1, 11)] == grid_profile_closed_form(10)


def test_translation_invariant_mode_agrees_with_plain_anchored():
    G = cayley_ball(SpaceSpec("ZPower", d=2), 13)
    a = exact_isoperimetric_profile(G, 7, root=0)
    b = exact_isoperimetric_profile(G, 7, root=0, translation_invariant=True)
    assert [p.value for p in a.points] == [p.value for p in b.points]


def test_anchored_mode_rejects_small_host():
    G = cayley_ball(SpaceSpec("ZPower", d=2), 5)
    assert interior_margin(G, 0) == 5
    with pytest.raises(InputError, match="host too small"):
        exact_isoperimetric_profile(G, 5, root=0)


def test_budget_and_size_guards():
    with pytest.raises(ResourceError):
        exact_isoperimetric_profile(cycle_graph(40), 20, budget=14)
    with pytest.raises(InputError):
        exact_isoperimetric_profile(cycle_graph(5), 5)
    with pytest.raises(InputError):
        exact_isoperimetric_profile(cycle_graph(5), 0)


def test_parallel_workers_agree():
    G = grid_graph(4, 5)
    a = exact_isoperimetric_profile(G, 8)
    b = exact_isoperimetric_profile(G, 8, workers=2)
    assert [p.value for p in a.points] == [p.value for p in b.points]
    assert a.witnesses == b.witnesses


@pytest.mark.parametrize("family", ["balls", "boxes"])
def test_families_lie_below_exact(family):
    G = cayley_ball(SpaceSpec("ZPower", d=2), 19)
    exact = grid_profile_closed_form(60)
    low = family_isoperimetric_lowerbound(G, family, root=0)
    assert len(low) > 0
    for p in low.points:
        assert p.certificate == "lower"
        if p.size <= 60:
            assert p.value <= exact[p.size - 1]
    vals = [p.value for p in low.points]
    assert vals == sorted(vals)


def test_sublevel_sets_lie_below_host_profile():
    G = grid_graph(4, 5)
    exact = exact_isoperimetric_profile(G, 10)
    low = family_isoperimetric_lowerbound(G, "sublevel", interior=False)
    assert low.sizes and max(low.sizes) <= 10
    for p in low.points:
        assert p.value <= exact.value_at(p.size)
    assert low.value_at(10) == exact.value_at(10) == Fraction(2)


def test_interior_filter_drops_truncated_sets():
    G = path_graph(9)
    inner = family_isoperimetric_lowerbound(G, "balls", root=2)
    raw = family_isoperimetric_lowerbound(G, "balls", root=2, interior=False)
    assert max(inner.sizes) == 3 and max(raw.sizes) == 8
    assert raw.value_at(5) == Fraction(5, 1)


def test_explicit_boxes():
    G = cayley_ball(SpaceSpec("ZPower", d=2), 12)
    boxes = [(np.array([0, 0]), np.array([s - 1, s - 1])) for s in (2, 4, 6)]
    curve = family_isoperimetric_lowerbound(G, "boxes", boxes=boxes)
    assert curve.sizes == [4, 16, 36]
    assert [p.value for p in curve.points] == [Fraction(s, 4) for s in (2, 4, 6)]


def test_unknown_family():
    with pytest.raises(InputError):
        family_isoperimetric_lowerbound(cycle_graph(5), "stars")


def test_running_max_points():
    pts = running_max_points([(3, 1), (1, 2), (3, 5), (2, Fraction(1, 2))], "lower")
    assert [(p.size, p.value) for p in pts] == [(1, 2), (2, 2), (3, 5)]


def test_curve_validation():
    with pytest.raises(InputError):
        ProfileCurve("isoperimetric", [ProfilePoint(2, Fraction(1), "exact"), ProfilePoint(1, Fraction(1), "exact")])
    with pytest.raises(InputError):
        ProfileCurve("isoperimetric", [ProfilePoint(1, Fraction(2), "exact"), ProfilePoint(2, Fraction(1), "exact")])
    with pytest.raises(InputError):
        ProfilePoint(1, Fraction(1), "guess")
    with pytest.raises(InputError):
        ProfileCurve("volume", [])


def test_curve_csv_round_trip(tmp_path):
    curve = exact_isoperimetric_profile(grid_graph(3, 4), 6)
    p = tmp_path / "iso.csv"
    write_curve_csv(curve, p)
    back = read_curve_csv(p)
    assert back.points == curve.points
    assert back.witnesses == curve.witnesses
    assert back.metadata == curve.metadata and back.source == curve.source


def test_curve_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# kind=separation\nsize,value\n")
    with pytest.raises(InputError, match="header"):
        read_curve_csv(p)
    p.write_text("size,value_num,value_den,certificate\n1,1,1,exact\n")
    with pytest.raises(InputError, match="kind"):
        read_curve_csv(p)
    p.write_text("# kind=separation\nsize,value_num,value_den,certificate\n1,x,1,exact\n")
    with pytest.raises(InputError, match=":3"):
        read_curve_csv(p)
