import math

import numpy as np
import pytest

from tracecalc.besov import (
    BesovIndex,
    build_extension,
    cauchy_reconstruct,
    dynkin_integral,
    finite_difference_besov_norm,
    fit_scaling_exponent,
    log_y_grid,
    split_edge_function,
)
from tracecalc.errors import ParameterError
from tracecalc.functions import cutoff_product, edge_power, indicator_below, parse_function, smooth_bump, window
from tracecalc.quadrature import PlanarQuadrature


@pytest.fixture(scope="module")
def bump():
    return smooth_bump(1.0, 0.5)


@pytest.fixture(scope="module")
def bump_ext(bump):
    return build_extension(bump, order=2, pad=0.25)


@pytest.fixture(scope="module")
def half_edge():
    return cutoff_product(edge_power(0.5, 1.0), window(0.5, 1.5, 0.2))


@pytest.fixture(scope="module")
def half_edge_ext(half_edge):
    return build_extension(half_edge, order=2, pad=0.25)


def test_parse_function_roundtrip():
    f = parse_function("edge_power gamma=0.5 a=1.0")
    assert f.gamma == 0.5 and f.a == 1.0
    g = parse_function("edge_power gamma=0.5 a=1.0 window=0.5:1.5:0.2")
    assert g.compact
    with pytest.raises(ParameterError):
        parse_function("edge_power gamma=0.5")
    with pytest.raises(ParameterError):
        parse_function("spline a=1")


def test_model_function_invariants():
    f = edge_power(0.5, 1.0)
    assert f(1.0) == 0.0 and f(2.0) == 0.0
    assert f(0.75) == pytest.approx(0.5)
    ind = indicator_below(1.0)
    assert ind(0.999) == 1.0 and ind(1.001) == 0.0
    g = cutoff_product(f, window(0.5, 1.5, 0.2))
    x = np.linspace(-1, 3, 401)
    outside = (x < 0.5) | (x > 1.5)
    assert np.all(g(x[outside]) == 0)


def test_besov_index_validation():
    assert BesovIndex(1).n == 2
    assert BesovIndex(0.5).n == 1
    with pytest.raises(ParameterError):
        BesovIndex(1, n=1)
    with pytest.raises(ParameterError):
        BesovIndex(1, p=2)


def test_build_extension_rejects_non_compact_and_order():
    with pytest.raises(ParameterError):
        build_extension(edge_power(0.5, 1.0))
    with pytest.raises(ParameterError):
        build_extension(smooth_bump(0, 1), order=0)
    with pytest.raises(ParameterError):
        build_extension(smooth_bump(0, 1), pad=0.1, y_max=0.2)


def test_extension_symmetry_and_support(bump_ext, rng):
    z = rng.uniform(0.2, 1.8, 30) + 1j * rng.uniform(0.001, 0.24, 30)
    np.testing.assert_allclose(bump_ext.omega(z.conj()), bump_ext.omega(z).conj(), atol=0)
    far = np.array([bump_ext.x_lo - 0.01, bump_ext.x_hi + 0.01]) + 0.05j
    assert np.all(bump_ext.omega(far) == 0)
    assert np.all(bump_ext.omega(np.array([1.0 + 0.3j])) == 0)


def test_extension_vanishes_to_order(bump):
    ext = build_extension(bump, order=3, pad=0.25)
    xs = np.linspace(0.5, 1.5, 41)
    s = [np.abs(ext.omega(xs + 1j * y)).max() for y in (1e-2, 1e-3)]
    assert s[1] / s[0] <= 10.0 ** -(3 - 0.5)


def test_extension_dbar_matches_finite_difference(bump):
    ext = build_extension(bump, order=2, pad=0.25)
    z0, h = 1.1 + 0.05j, 1e-5
    F = ext.extension
    dx = (F(np.array([z0 + h])) - F(np.array([z0 - h]))) / (2 * h)
    dy = (F(np.array([z0 + 1j * h])) - F(np.array([z0 - 1j * h]))) / (2 * h)
    dbar = 0.5 * (dx + 1j * dy)
    assert abs(dbar[0] - ext.omega(np.array([z0]))[0]) <= 1e-6 * max(1.0, abs(dbar[0]))


def test_cauchy_reconstruct_bump():
    f = smooth_bump(1.0, 0.5)
    ext = build_extension(f, order=4, pad=0.25)
    quad = PlanarQuadrature.for_extension(ext, 1e-3)
    lams = np.linspace(0.4, 1.6, 20)
    assert np.max(np.abs(cauchy_reconstruct(ext, lams, quad) - f(lams))) <= 1e-6
    assert abs(cauchy_reconstruct(ext, 1.0, quad) - f(1.0)) <= 1e-6
    assert abs(cauchy_reconstruct(ext, ext.x_hi + 0.5, quad)) <= 1e-8


def test_cauchy_reconstruct_fractional_edge(half_edge_ext):
    quad = PlanarQuadrature.for_extension(half_edge_ext, 1e-3)
    assert abs(cauchy_reconstruct(half_edge_ext, 0.5 + 0.25, quad) - 0.25**0.5) <= 1e-3


def test_dynkin_bump_stable(bump_ext):
    idx = BesovIndex(1)
    v1, v2 = dynkin_integral(bump_ext, idx, 1e-3), dynkin_integral(bump_ext, idx, 1e-4)
    assert abs(v2 / v1 - 1) <= 0.01


def test_dynkin_half_edge_p1_stable(half_edge_ext):
    idx = BesovIndex(1)
    v1, v2 = dynkin_integral(half_edge_ext, idx, 1e-4), dynkin_integral(half_edge_ext, idx, 1e-5)
    assert abs(v2 / v1 - 1) <= 0.01


def test_dynkin_half_edge_pinf_grows(half_edge_ext):
    idx = BesovIndex(1, p=math.inf)
    ys = np.array([1e-3, 1e-4, 1e-5])
    vals = [dynkin_integral(half_edge_ext, idx, y) for y in ys]
    slope = np.polyfit(np.log(ys), np.log(vals), 1)[0]
    assert abs(slope + 0.5) <= 0.1


def test_dynkin_indicator_grows():
    ind = cutoff_product(indicator_below(1.0), window(0.5, 1.5, 0.2))
    ext = build_extension(ind, order=2, pad=0.25)
    idx = BesovIndex(1)
    v = [dynkin_integral(ext, idx, y) for y in (1e-3, 1e-4, 1e-5)]
    assert v[1] / v[0] >= 1.2 and v[2] / v[1] >= 1.2


def test_slice_exponents(half_edge_ext, bump_ext):
    ys = log_y_grid(1e-3, 1e-6, 4)
    l1 = fit_scaling_exponent(half_edge_ext, "L1_slice", ys)
    sup = fit_scaling_exponent(half_edge_ext, "sup_slice", ys)
    assert abs(l1.exponent - 0.5) <= 0.1 and not l1.low_confidence
    assert abs(sup.exponent + 0.5) <= 0.1
    yb = log_y_grid(1e-2, 1e-4, 4)
    for mode in ("L1_slice", "sup_slice"):
        assert fit_scaling_exponent(bump_ext, mode, yb).exponent >= bump_ext.order - 1


def test_fit_needs_two_decades(bump_ext):
    with pytest.raises(ParameterError):
        fit_scaling_exponent(bump_ext, "L1_slice", [1e-2, 5e-3, 1e-3 * 2])


def test_fd_besov_bump_stable(bump):
    idx = BesovIndex(1)
    r1 = finite_difference_besov_norm(bump, idx, 1e-3, 1.0)
    r2 = finite_difference_besov_norm(bump, idx, 1e-4, 1.0)
    assert abs(r2.value / r1.value - 1) <= 0.01
    assert r1.n == 2


def test_fd_besov_indicator_log_growth():
    ind = cutoff_product(indicator_below(1.0), window(0.5, 1.5, 0.2))
    vals = [finite_difference_besov_norm(ind, BesovIndex(1), t, 1.0).value for t in (1e-2, 1e-3, 1e-4)]
    inc = np.diff(vals)
    # ||Delta_t f||_1 ~ t gives a constant increment per decade
    assert np.all(inc > 1.0)
    assert abs(inc[1] / inc[0] - 1) <= 0.1


def test_fd_besov_half_edge(half_edge):
    r = finite_difference_besov_norm(half_edge, BesovIndex(1), 1e-4, 1.0)
    assert math.isfinite(r.value)
    assert abs(r.small_t_exponent - 1.5) <= 0.1


def test_split_edge_function():
    f = edge_power(0.5, 1.0)
    f0, f1 = split_edge_function(f, (0.5, 1.5))
    x = np.linspace(-2, 3, 2001)
    assert np.max(np.abs(f0(x) + f1(x) - f(x))) <= 1e-12
    assert np.all(f0(x[(x < 0.5) | (x > 1.5)]) == 0)
    assert np.all(f1(x[x >= 1.0]) == 0)
    with pytest.raises(ParameterError):
        split_edge_function(f, (1.2, 2.0))
