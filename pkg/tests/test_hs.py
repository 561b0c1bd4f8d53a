import numpy as np
import pytest

from tracecalc.besov import build_extension, cauchy_reconstruct
from tracecalc.errors import ParameterError
from tracecalc.functions import smooth_bump
from tracecalc.hs import (
    fit_loglog,
    hs_all,
    hs_apply,
    hs_difference,
    hs_second_difference,
    momentum_integral,
    momentum_integral_exact_1d,
    momentum_limit_constant,
    refine_until_stable,
    trace_norm_integrand_profile,
)
from tracecalc.lattice import LatticeSpec, discretize
from tracecalc.linalg import HermitianOperator, apply_function, gateaux_derivative, random_hermitian
from tracecalc.potentials import CompactBump, Zero
from tracecalc.quadrature import PlanarQuadrature

F = smooth_bump(1.5, 1.0)


@pytest.fixture(scope="module")
def setup():
    ext = build_extension(F, order=6, pad=0.5)
    quad = PlanarQuadrature.for_extension(ext, 0.008, x_nodes=12, panel_ratio=4.0)
    return ext, quad


@pytest.fixture(scope="module")
def pair():
    rng = np.random.default_rng(7)
    H0 = random_hermitian(12, rng, spread=(-1, 3))
    V = random_hermitian(12, rng, spread=(-0.3, 0.3))
    return H0, V


def test_quadrature_invariants(setup):
    _, quad = setup
    assert np.all(quad.z.imag >= quad.y_min * (1 - 1e-12))
    assert np.all(quad.weights > 0)
    full = PlanarQuadrature(0, 1, 0.5, 0.01, symmetric=False)
    assert np.allclose(np.sort_complex(full.z), np.sort_complex(full.z.conj()))
    with pytest.raises(ParameterError):
        PlanarQuadrature(0, 1, 0.5, 0.6)


def test_hs_apply_diagonal_matches_reconstruction(setup):
    ext, quad = setup
    w = np.array([0.7, 1.2, 1.9, 2.4])
    out = hs_apply(HermitianOperator(np.diag(w)), ext, quad)
    np.testing.assert_allclose(np.diag(out.matrix), cauchy_reconstruct(ext, w, quad), atol=1e-12)
    assert np.abs(out.matrix - np.diag(np.diag(out.matrix))).max() <= 1e-14


def test_hs_apply_disjoint_spectrum(setup):
    ext, quad = setup
    rng = np.random.default_rng(3)
    H = random_hermitian(10, rng, spread=(5.0, 7.0))
    assert np.linalg.norm(hs_apply(H, ext, quad).matrix, 2) <= 1e-8


def test_hs_apply_matches_spectral(setup, pair):
    ext, quad = setup
    H0, _ = pair
    err = np.linalg.norm(hs_apply(H0, ext, quad).matrix - apply_function(H0, F).matrix, 2)
    assert err <= 1e-6


def test_hs_linear_in_f(pair):
    H0, _ = pair
    g = smooth_bump(0.5, 0.5)
    e1 = build_extension(F, order=6, pad=0.5)
    e2 = build_extension(g, order=6, pad=0.5)
    esum = e1 + e2
    quad = PlanarQuadrature(min(e1.x_lo, e2.x_lo), max(e1.x_hi, e2.x_hi), 0.5, 0.02,
                            breakpoints=F.breakpoints + g.breakpoints)
    a = hs_apply(H0, e1, quad).matrix + hs_apply(H0, e2, quad).matrix
    b = hs_apply(H0, esum, quad).matrix
    assert np.abs(a - b).max() <= 1e-10


def test_differences_zero_for_zero_v(setup, pair):
    ext, quad = setup
    H0, _ = pair
    Z = np.zeros((H0.dim, H0.dim))
    assert np.abs(hs_difference(H0, Z, ext, quad).matrix).max() == 0
    assert np.abs(hs_second_difference(H0, Z, ext, quad).matrix).max() == 0


def test_consistency_chain(setup, pair):
    ext, quad = setup
    H0, V = pair
    out = hs_all(H0, V, ext, quad)
    d = out["apply"].matrix - out["apply0"].matrix
    assert np.linalg.norm(out["diff"].matrix - d, 2) <= 1e-6
    g = gateaux_derivative(H0, V, F).matrix
    assert np.linalg.norm(out["second"].matrix - (out["diff"].matrix - g), 2) <= 1e-6
    exact = apply_function(H0 + V, F).matrix - apply_function(H0, F).matrix
    assert np.linalg.norm(out["diff"].matrix - exact, 2) <= 1e-6
    assert np.linalg.norm(out["second"].matrix - (exact - g), 2) <= 1e-6


def test_epsilon_exponents(setup, pair):
    ext, quad = setup
    H0, V = pair
    eps = np.logspace(-3, -1, 3)
    d1, d2 = [], []
    for e in eps:
        out = hs_all(H0, V * e, ext, quad, which=("diff", "second"))
        d1.append(np.linalg.norm(out["diff"].matrix, 2))
        d2.append(np.abs(np.linalg.eigvalsh(out["second"].matrix)).sum())
    assert abs(fit_loglog(eps, d1)[0] - 1.0) <= 0.05
    assert abs(fit_loglog(eps, d2)[0] - 2.0) <= 0.05


def test_threads_bit_identical(setup, pair):
    ext, quad = setup
    H0, V = pair
    a = hs_all(H0, V, ext, quad, which=("diff",), chunk=64, threads=1)["diff"].matrix
    b = hs_all(H0, V, ext, quad, which=("diff",), chunk=64, threads=4)["diff"].matrix
    assert np.array_equal(a, b)


def test_refine_until_stable(pair):
    H0, _ = pair
    ext = build_extension(F, order=6, pad=0.5)
    quad = PlanarQuadrature.for_extension(ext, 0.05)
    res, q, changes = refine_until_stable(lambda qq: hs_apply(H0, ext, qq), quad, 1e-6, max_rounds=6)
    assert changes[-1] < 1e-6 and q.y_min < quad.y_min
    assert np.linalg.norm(res.matrix - apply_function(H0, F).matrix, 2) <= 1e-6


def test_profile_zero_potential():
    spec = LatticeSpec(1, 4.0, 0.25)
    _, H0 = discretize(spec, Zero())
    prof = trace_norm_integrand_profile(H0, np.zeros((H0.dim, H0.dim)), (0.5, 1.5), [1e-1, 1e-2])
    assert np.all(prof.value == 0)


def test_profile_kappa_weight_reduces_norm():
    spec = LatticeSpec(1, 4.0, 0.25)
    H, H0 = discretize(spec, CompactBump(1.0, 1.0))
    V = H.matrix - H0.matrix
    p0 = trace_norm_integrand_profile(H0, V, (0.5, 1.5), [1e-1, 1e-2])
    p1 = trace_norm_integrand_profile(H0, V, (0.5, 1.5), [1e-1, 1e-2], kappa=1)
    assert np.all(p1.value < p0.value)
    assert np.all(p0.value >= 0)


def test_momentum_1d_exact_and_exponent():
    ys = np.logspace(-1, -4, 7)
    vals = [momentum_integral(1, 0.0, 1.0, 1 + 1j * y) for y in ys]
    exact = [momentum_integral_exact_1d(1 + 1j * y) for y in ys]
    np.testing.assert_allclose(vals, exact, rtol=1e-10)
    assert abs(fit_loglog(ys, vals)[0] + 1.0) <= 0.02


def test_momentum_symmetry_and_limit():
    for d, kappa in ((1, 0.0), (2, 0.5), (3, 1.0)):
        a = momentum_integral(d, kappa, 1.0, 1 + 0.01j)
        b = momentum_integral(d, kappa, 1.0, 1 - 0.01j)
        assert abs(a - b) <= 1e-12 * a
    C = momentum_limit_constant(3, 1.0, 1.0, 1.0)
    assert C == pytest.approx(np.pi**2 / 2)
    y = 1e-4
    assert y * momentum_integral(3, 1.0, 1.0, 1 + 1j * y) == pytest.approx(C, rel=1e-3)


def test_momentum_parameter_errors():
    with pytest.raises(ParameterError, match="kappa"):
        momentum_integral(5, 0.2, 1.0, 1 + 0.1j)
    with pytest.raises(ParameterError):
        momentum_integral(1, 0.0, 1.0, 1.0)
