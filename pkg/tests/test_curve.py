import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import ellipe

from knotenergy.curve import (CurveError, KnotCurve, MIN_POINTS, arc_distance, load_curve,
                              min_nonadjacent_gap, resample_arclength, save_curve,
                              segment_distances)
from knotenergy.zoo import sample_zoo


def polygon_circle(n, r=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return np.stack([r * np.cos(t), r * np.sin(t), 0 * t], axis=1)


def test_rejects_short_and_malformed():
    with pytest.raises(CurveError):
        KnotCurve(polygon_circle(MIN_POINTS - 1))
    with pytest.raises(CurveError):
        KnotCurve(np.zeros((20, 2)))
    pts = polygon_circle(20)
    pts[3] = np.nan
    with pytest.raises(CurveError):
        KnotCurve(pts)


def test_rejects_repeated_vertex():
    pts = polygon_circle(20)
    pts[5] = pts[4]
    with pytest.raises(CurveError, match="coincide"):
        KnotCurve(pts)


def test_rejects_self_intersection():
    # figure-of-eight in the plane crosses itself at the origin
    t = 2 * np.pi * np.arange(40) / 40
    pts = np.stack([np.sin(2 * t), np.sin(t), 0 * t], axis=1)
    with pytest.raises(CurveError, match="not embedded"):
        KnotCurve(pts)


def test_arc_corrected_length_is_exact_on_circles():
    # the arc correction turns each chord of a regular polygon into its arc
    for n in (16, 50, 300):
        c = KnotCurve(polygon_circle(n, 2.5))
        assert c.total_length == pytest.approx(5 * math.pi, rel=1e-12)


def test_ellipse_perimeter_matches_elliptic_integral():
    c = sample_zoo("ellipse:a=2,b=1,n=512")
    exact = 4 * 2 * ellipe(1 - 0.25)
    assert c.total_length == pytest.approx(exact, rel=1e-6)


def test_uniform_arclength_sampling():
    c = sample_zoo("torus2q:q=3,n=256")
    s = c.segment_lengths
    assert s.std() / s.mean() < 1e-3


def test_arc_distance_symmetry_and_bounds(trefoil):
    L = trefoil.total_length
    D = trefoil.pair_distances()
    assert np.allclose(D, D.T)
    assert D.max() <= L / 2 + 1e-12
    assert arc_distance(trefoil, 0, 10) == pytest.approx(trefoil.cumlen[10])
    assert trefoil.arc_distance(5, 5) == 0


def test_json_roundtrip(tmp_path, trefoil):
    path = tmp_path / "c.json"
    save_curve(trefoil, path)
    back = load_curve(path)
    assert np.array_equal(back.points, trefoil.points)
    data = json.loads(path.read_text())
    assert data["closed"] is True
    with pytest.raises(CurveError):
        KnotCurve.from_json({"points": data["points"], "closed": False})


def test_similarity_helpers(trefoil):
    assert trefoil.scaled(3.0).total_length == pytest.approx(3 * trefoil.total_length)
    m = trefoil.mirrored()
    assert np.allclose(m.points[:, 2], -trefoil.points[:, 2])
    moved = trefoil.transformed(lambda p: p + 1.0)
    assert np.allclose(moved.centroid, trefoil.centroid + 1.0)


def test_points_are_read_only(trefoil):
    with pytest.raises(ValueError):
        trefoil.points[0, 0] = 1.0


def test_resample_keeps_shape_and_phase(trefoil):
    r = resample_arclength(trefoil, 200)
    assert r.n == 200
    assert np.allclose(r.points[0], trefoil.points[0])
    assert r.total_length == pytest.approx(trefoil.total_length, rel=1e-4)


def test_min_gap_of_regular_polygon():
    # edges k and k+2 are closest; the interior angle exceeds 90 degrees, so
    # the nearest points are the ends of the edge between them
    for n in (16, 64):
        assert min_nonadjacent_gap(polygon_circle(n)) == pytest.approx(2 * math.sin(math.pi / n))


vec = st.lists(st.floats(-3, 3), min_size=3, max_size=3).map(np.array)


@given(vec, vec, vec, vec)
def test_segment_distance_matches_dense_sampling(a0, a1, b0, b1):
    d = segment_distances(a0, a1, b0, b1)
    s = np.linspace(0, 1, 401)
    pa = a0 + s[:, None] * (a1 - a0)
    pb = b0 + s[:, None] * (b1 - b0)
    brute = np.linalg.norm(pa[:, None] - pb[None], axis=-1).min()
    seg = max(np.linalg.norm(a1 - a0), np.linalg.norm(b1 - b0))
    assert d <= brute + 1e-9
    assert brute - d <= seg / 400 + 1e-9


def test_point_as_degenerate_segment():
    d = segment_distances(np.zeros(3), np.array([2.0, 0, 0]), np.array([1.0, 1, 0]), np.array([1.0, 1, 0]))
    assert d == pytest.approx(1.0)
