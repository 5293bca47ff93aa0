import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from amoeba.planecurve import (
    LatticePolygon,
    LaurentPolynomial,
    aberth,
    check_pr,
    convex_hull,
    default_window,
    fiber_roots,
    newton_polygon,
    parse_laurent,
    polygon_area,
    pr_bound,
    raster_amoeba,
)
from amoeba.ratfun import ParseError

PI2 = math.pi**2
LINE = parse_laurent("1 + z + w")

exps = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
coefs = st.builds(complex, st.integers(-4, 4), st.integers(-4, 4)).filter(lambda c: c != 0)
polys = st.dictionaries(exps, coefs, min_size=2, max_size=6).map(LaurentPolynomial.from_mapping)


# --- parsing ---------------------------------------------------------------------


def test_parse_examples():
    assert LINE.as_dict() == {(0, 0): 1, (1, 0): 1, (0, 1): 1}
    assert len(parse_laurent("z^2 - w - 1").terms) == 3
    assert parse_laurent("z^-1 + w").as_dict() == {(-1, 0): 1, (0, 1): 1}
    assert parse_laurent("2i*z*w - (1+2i) z^3 w^-2").as_dict() == {(1, 1): 2j, (3, -2): -1 - 2j}
    assert parse_laurent("z + z + w").as_dict() == {(1, 0): 2, (0, 1): 1}


@pytest.mark.parametrize("text, offset", [("1 + + z", 4), ("z^1.5 + w", 2), ("1 + z + q", 8), ("z*", 2)])
def test_parse_errors(text, offset):
    with pytest.raises(ParseError) as info:
        parse_laurent(text)
    assert info.value.offset == offset


@pytest.mark.parametrize("text", ["z - z", "w", ""])
def test_parse_rejects_empty_curves(text):
    with pytest.raises(ParseError):
        parse_laurent(text)


@given(polys)
def test_text_and_json_round_trip(p):
    assert parse_laurent(str(p)) == p
    assert LaurentPolynomial.from_dict(p.to_dict()) == p


def test_polynomial_json_layout():
    assert LINE.to_dict() == {
        "terms": [{"exp": [0, 0], "coef": [1.0, 0.0]}, {"exp": [0, 1], "coef": [1.0, 0.0]}, {"exp": [1, 0], "coef": [1.0, 0.0]}]
    }


# --- Newton polygon ----------------------------------------------------------------


def test_newton_polygon_examples():
    assert newton_polygon(LINE).vertices == ((0, 0), (1, 0), (0, 1))
    for m in (1, 2, 3, 5):
        poly = newton_polygon(parse_laurent(f"z^{m} - w - 1"))
        assert set(poly.vertices) == {(m, 0), (0, 1), (0, 0)}
        assert polygon_area(poly) == m / 2
    seg = newton_polygon(parse_laurent("z + z^2 + z^3"))
    assert seg.vertices == ((1, 0), (3, 0)) and polygon_area(seg) == 0


def test_pr_bound_examples():
    assert pr_bound(LINE) == pytest.approx(PI2 / 2)
    assert pr_bound(parse_laurent("z^2 - w - 1")) == pytest.approx(PI2)
    assert pr_bound(parse_laurent("z + z^2")) == 0


def pick_area(poly: LatticePolygon) -> float:
    """I + B/2 - 1 by brute-force lattice point counting."""
    v = np.array(poly.vertices)
    boundary = sum(math.gcd(*map(int, np.abs(v[(k + 1) % len(v)] - v[k]))) for k in range(len(v)))
    interior = 0
    for x in range(v[:, 0].min(), v[:, 0].max() + 1):
        for y in range(v[:, 1].min(), v[:, 1].max() + 1):
            inside = all(
                (v[(k + 1) % len(v)][0] - v[k][0]) * (y - v[k][1]) - (v[(k + 1) % len(v)][1] - v[k][1]) * (x - v[k][0]) > 0
                for k in range(len(v))
            )
            interior += inside
    return interior + boundary / 2 - 1


lattice_points = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=3, max_size=15, unique=True)


@given(lattice_points)
def test_area_matches_pick_and_scipy(pts):
    hull = convex_hull(pts)
    assume(len(hull) >= 3)
    poly = LatticePolygon(hull)
    area = polygon_area(poly)
    assert area == pick_area(poly)
    assert area == pytest.approx(ConvexHull(np.array(pts, float)).volume)
    assert (2 * area) == int(2 * area)


@given(lattice_points)
def test_hull_is_counterclockwise_and_extreme(pts):
    hull = convex_hull(pts)
    if len(hull) < 3:
        return
    for k in range(len(hull)):
        o, a, b = hull[k], hull[(k + 1) % len(hull)], hull[(k + 2) % len(hull)]
        assert (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) > 0


# --- fibers ------------------------------------------------------------------------


def test_fiber_root_examples():
    assert np.allclose(fiber_roots(LINE, 1), [-2])
    assert np.allclose(fiber_roots(parse_laurent("z^2 - w - 1"), 2j), [-5])
    assert np.allclose(fiber_roots(parse_laurent("1 + z + w + z*w"), 1), [-1])


@given(polys, st.complex_numbers(min_magnitude=0.2, max_magnitude=3))
def test_fiber_roots_match_numpy(p, z):
    assume(p.w_degree > 0)
    coef = p.w_coefficients(np.array([z]))[0]
    assume(abs(coef[-1]) > 1e-3 and abs(coef[0]) > 1e-3)
    got = np.array(sorted(fiber_roots(p, z), key=lambda c: (c.real, c.imag)))
    want = np.roots(coef[::-1])
    assert len(got) == p.w_degree
    for r in want:
        assert np.min(np.abs(got - r)) <= 1e-6 * max(1, abs(r))
    assert np.all(np.abs(p(z, got)) <= 1e-9 * np.sum(np.abs(coef)) * np.maximum(1, np.abs(got)) ** p.w_degree)


def test_degree_drop_cases():
    r = fiber_roots(parse_laurent("z*w^2 + w + 1"), 0)
    assert r.degree_drop == 1 and np.allclose(r, [-1])
    r = fiber_roots(parse_laurent("1 + z + w + z*w"), -1)
    assert r.degree_drop == 1 and list(r) == []
    r = fiber_roots(parse_laurent("z - 1 + w"), 1)  # root w = 0 is not in the torus
    assert r.degree_drop == 1 and list(r) == []
    with pytest.raises(ValueError):
        fiber_roots(parse_laurent("1 + z"), 2)


def test_aberth_clustered_roots():
    roots = np.array([1, 1 + 1e-4, -2j, 3 + 0.5j])
    coef = np.poly(roots)[::-1][None, :]
    z, ok = aberth(coef)
    assert ok[0]
    assert all(np.min(np.abs(z[0] - r)) < 1e-6 for r in roots)


# --- rasters -----------------------------------------------------------------------


def test_default_window():
    assert default_window(LINE) == (-4, 4, -4, 4)
    assert default_window(parse_laurent("z^3 - w - 1")) == (-6, 6, -6, 6)


def test_line_raster_near_bound():
    r = raster_amoeba(LINE, (-6, 6, -6, 6), 300)
    assert 0.95 * PI2 / 2 <= r.area_estimate <= 1.01 * PI2 / 2
    assert r.area_estimate == pytest.approx(r.covered.sum() * r.pixel_area)
    assert r.diagnostics["skipped_fibers"] == 0


def test_segment_input_gives_empty_raster():
    for text in ("z + z^2", "1 + w"):
        r = raster_amoeba(parse_laurent(text), (-3, 3, -3, 3), 50)
        assert r.area_estimate == 0 and not r.covered.any()


def test_raster_monotone_in_sample_counts():
    p = parse_laurent("1 + z + w + z*w^2 + 3*z^2*w")
    prev = None
    for fibers, angles in [(50, 50), (100, 50), (100, 100), (200, 200), (400, 400)]:
        r = raster_amoeba(p, (-5, 5, -5, 5), 100, fibers=fibers, angles=angles)
        if prev is not None:
            assert np.all(r.covered >= prev.covered)
            assert r.area_estimate >= prev.area_estimate
        prev = r


def test_raster_monotone_in_resolution():
    ests = [raster_amoeba(LINE, (-6, 6, -6, 6), res).area_estimate for res in (150, 300, 600)]
    assert ests[0] <= ests[1] <= ests[2], ests


def test_raster_converges_under_resolution_doubling():
    p = parse_laurent("z^2 - w - 1")
    ests = [raster_amoeba(p, (-5, 5, -5, 5), res).area_estimate for res in (100, 200, 400)]
    assert abs(ests[2] - ests[1]) < abs(ests[1] - ests[0]) + 0.01 * ests[2]


def test_raster_is_deterministic_across_threads(monkeypatch):
    p = parse_laurent("1 + z + w + z*w^2 + 3*z^2*w")
    a = raster_amoeba(p, (-5, 5, -5, 5), 100, chunk=16)
    monkeypatch.setenv("AMOEBA_THREADS", "4")
    b = raster_amoeba(p, (-5, 5, -5, 5), 100, chunk=16)
    assert np.array_equal(a.covered, b.covered)


def test_check_pr_examples():
    rep = check_pr(LINE, window=(-6, 6, -6, 6), resolution=300)
    assert rep.passed and 0.95 <= rep.ratio <= 1.01
    rep = check_pr(parse_laurent("1 + z + w + z*w"), resolution=200)
    assert rep.passed and rep.ratio < 1
    rep = check_pr(parse_laurent("z^2 - w - 1"), resolution=200)
    assert rep.passed and rep.area_estimate <= PI2 * 1.02


@settings(max_examples=8)
@given(polys)
def test_check_pr_passes_for_random_polynomials(p):
    assume(p.w_degree > 0 and pr_bound(p) > 0)
    rep = check_pr(p, resolution=120)
    assert rep.passed, (str(p), rep.area_estimate, rep.pr_bound)
