import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amoeba.density import critical_locus_sample, density, density_values, is_degenerate, pair_determinant
from amoeba.ratfun import DomainError, RationalComponent, RationalCurve, curve, random_curve


def jacobian_density(f, z, h=1e-6):
    """Half the root-sum-square of the 2x2 minors of the real Jacobian of Log f."""
    dx = (f.log_map(z + h) - f.log_map(z - h)) / (2 * h)
    dy = (f.log_map(z + 1j * h) - f.log_map(z - 1j * h)) / (2 * h)
    minors = [dx[j] * dy[k] - dx[k] * dy[j] for j, k in combinations(range(f.n), 2)]
    return 0.5 * math.sqrt(sum(m * m for m in minors))


def test_pair_determinant_of_line_pair():
    f = curve("z", "z-1")
    assert pair_determinant(f, 0, 1, 1j) == pytest.approx(-0.25)
    assert density(f, 1j).value == pytest.approx(0.25)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_example_family_against_closed_form(m):
    roots = [np.exp(2j * np.pi * k / m) for k in range(m)]
    f = RationalCurve((RationalComponent(1, ((0, 1),)), RationalComponent(1, tuple((r, 1) for r in roots))))
    for z in (np.exp(1j * np.pi / 5) * 0.7, 1.3 - 0.4j, -2 + 3j):
        g1 = 1 / z
        g2 = m * z ** (m - 1) / (z**m - 1)
        assert density(f, z).value == pytest.approx(0.5 * abs((g1 * np.conj(g2)).imag), rel=1e-10)


@given(st.integers(0, 10_000), st.integers(2, 4), st.floats(-3, 3), st.floats(-3, 3))
def test_density_matches_jacobian_minors(seed, n, x, y):
    f = random_curve(np.random.default_rng(seed), n)
    z = complex(x, y)
    if np.min(np.abs(f.support_array - z)) < 0.05:
        return
    assert density(f, z).value == pytest.approx(jacobian_density(f, z), rel=1e-4, abs=1e-7)


@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_density_invariances(seed, x, y):
    rng = np.random.default_rng(seed)
    f = random_curve(rng, 3)
    z = complex(x, y)
    if np.min(np.abs(f.support_array - z)) < 0.05:
        return
    d = density(f, z).value
    # rescaling constants translates the amoeba
    g = RationalCurve(tuple(RationalComponent(7.5j * c.constant, c.factors) for c in f.components))
    assert density(g, z).value == pytest.approx(d, rel=1e-12)
    # permuting coordinates
    p = RationalCurve(tuple(reversed(f.components)))
    assert density(p, z).value == pytest.approx(d, rel=1e-12)
    # complex conjugation of the whole map
    c = RationalCurve(tuple(RationalComponent(np.conj(k.constant), tuple((np.conj(a), m) for a, m in k.factors)) for k in f.components))
    assert density(c, np.conj(z)).value == pytest.approx(d, rel=1e-10)
    # affine reparametrization scales by |alpha|^2
    alpha, beta = 1.7 - 0.3j, 0.4 + 0.2j
    s = RationalCurve(tuple(RationalComponent(k.constant, tuple(((a - beta) / alpha, m) for a, m in k.factors)) for k in f.components))
    assert density(s, (z - beta) / alpha).value == pytest.approx(d * abs(alpha) ** 2, rel=1e-9)


def test_density_bounded_by_pair_terms_and_nonnegative(rng):
    f = random_curve(rng, 4)
    z = rng.normal(size=200) + 1j * rng.normal(size=200)
    vals = density_values(f, z)
    assert np.all(vals >= 0)
    for zz, v in zip(z[:10], vals[:10]):
        dv = density(f, zz)
        assert dv.value == pytest.approx(v)
        assert all(abs(t) <= dv.value + 1e-15 for _, t in dv.pair_terms)


def test_domain_error_on_support():
    with pytest.raises(DomainError):
        density(curve("z", "z-1"), 1)
    with pytest.raises(IndexError):
        pair_determinant(curve("z", "z-1"), 0, 0, 2)


def test_degeneracy_detection():
    assert is_degenerate(curve("z", "z"))
    assert is_degenerate(curve("z", "3z^2"))
    assert is_degenerate(curve("(z-1)^2(z+1)", "(z-1)^-4(z+1)^-2", "2"))
    assert not is_degenerate(curve("z", "(z-1)(z+1)"))
    assert not is_degenerate(curve("z", "z-1"))


def test_critical_locus_of_line_pair_is_real_axis():
    pts = critical_locus_sample(curve("z", "z-1"), (-3, 3, -3, 3), 201)
    assert pts.size > 100
    assert np.max(np.abs(pts.imag)) <= 0.03 + 1e-12


def test_critical_locus_of_example_one_m2_is_the_axes():
    pts = critical_locus_sample(curve("z", "(z-1)(z+1)"), (-2, 2, -2, 2), 201)
    assert pts.size > 100
    assert np.max(np.minimum(np.abs(pts.real), np.abs(pts.imag))) <= 0.02 + 1e-12


def test_critical_locus_of_complex_line_is_empty():
    assert critical_locus_sample(curve("z", "z+1", "z-2i"), (-4, 4, -4, 4), 201).size == 0


def test_critical_locus_of_real_line_is_real():
    pts = critical_locus_sample(curve("z", "z+0.5", "z-1.5"), (-4, 4, -4, 4), 201)
    assert pts.size > 0 and np.max(np.abs(pts.imag)) <= 0.04 + 1e-12
