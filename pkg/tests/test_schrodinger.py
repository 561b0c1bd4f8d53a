import numpy as np
import pytest

from tracecalc.errors import DivergenceError, ParameterError, ResourceError
from tracecalc.functions import smooth_bump
from tracecalc.lattice import (
    LatticeLine,
    LatticeSpec,
    box_eigenvalues_1d,
    discretize,
    dirichlet_eigenvalues,
    lattice_integrand_profile,
)
from tracecalc.potentials import CompactBump, Gaussian, PowerDecay, Sech2, Zero, l1L2_norm, parse_potential
from tracecalc.scattering import (
    WRONSKIAN_TOL,
    bound_states,
    jost_solve,
    jost_wronskian,
    krein_trace_check,
    lap_sup_check,
    poschl_teller_a,
    poschl_teller_bound_states,
    resolvent_kernel_1d,
    ssf_box_counting_oracle,
    ssf_from_scattering,
    wronskian,
)

SECH = Sech2(3.0, 1.0)


# lattice ------------------------------------------------------------------


def test_lattice_spec_validation():
    assert LatticeSpec(1, 1.0, 0.25).n_sites == 9
    assert LatticeSpec(2, 1.0, 0.5).n_sites == 25
    with pytest.raises(ParameterError):
        LatticeSpec(1, 1.0, 0.3)
    with pytest.raises(ParameterError):
        LatticeSpec(4, 1.0, 0.5)
    with pytest.raises(ResourceError):
        LatticeSpec(3, 10.0, 0.5)


@pytest.mark.parametrize("d", [1, 2])
def test_dirichlet_closed_form(d):
    spec = LatticeSpec(d, 2.0, 0.25)
    _, H0 = discretize(spec, Zero())
    np.testing.assert_allclose(H0.eigenvalues, dirichlet_eigenvalues(spec), atol=1e-10)


def test_constant_shift():
    spec = LatticeSpec(1, 2.0, 0.25)

    class Const(Zero):
        def profile(self, r):
            return np.full(np.shape(r), 0.7)

    H, H0 = discretize(spec, Const())
    np.testing.assert_allclose(H.eigenvalues, H0.eigenvalues + 0.7, atol=1e-12)


def test_gaussian_well_binds():
    spec = LatticeSpec(1, 10.0, 0.1)
    e = box_eigenvalues_1d(spec, Gaussian(2.0, 1.0))
    assert e[0] < 0
    # variational bound with the trial vector exp(-x^2/2)
    H, _ = discretize(spec, Gaussian(2.0, 1.0))
    u = np.exp(-spec.axis() ** 2 / 2)
    assert e[0] <= u @ H.matrix @ u / (u @ u) + 1e-12


def test_tridiagonal_matches_dense():
    spec = LatticeSpec(1, 5.0, 0.1)
    H, _ = discretize(spec, SECH)
    np.testing.assert_allclose(box_eigenvalues_1d(spec, SECH), H.eigenvalues, atol=1e-9)


def test_lattice_line_green_matches_large_box():
    h = 0.2
    line = LatticeLine(h)
    z = 1.0 + 0.3j
    spec = LatticeSpec(1, 60.0, h)
    _, H0 = discretize(spec, Zero())
    R0 = np.linalg.inv(H0.matrix - z * np.eye(H0.dim))
    mid = spec.n_side // 2
    for sep in (0, 1, 5):
        assert abs(R0[mid, mid + sep] - line.green(z, sep)) <= 1e-7


def test_lattice_profile_zero_potential():
    prof = lattice_integrand_profile(Zero(), 0.1, (0.5, 1.5), [1e-1, 1e-2])
    assert np.all(prof.value == 0)


# potentials -----------------------------------------------------------------


def test_parse_potential():
    V = parse_potential("sech2 depth=3 width=1")
    assert isinstance(V, Sech2) and V.depth == 3
    assert parse_potential("gaussian depth=1 width=1 center=2").center == 2.0
    with pytest.raises(ParameterError):
        parse_potential("sech2 depth=3")


def test_power_decay_bound():
    V = PowerDecay(2.0, 1.5)
    x = np.linspace(-50, 50, 1001)
    assert np.all(np.abs(V(x)) <= 2.0 * (1 + np.abs(x)) ** -1.5 + 1e-15)


def test_l1l2_single_cube():
    V = CompactBump(1.0, 0.4)
    x = np.linspace(-0.4, 0.4, 200001)
    l2 = np.sqrt(np.trapezoid(V(x) ** 2, x))
    assert l1L2_norm(V, 1) == pytest.approx(l2, rel=1e-8)


def test_l1l2_gaussian_stable():
    V = Gaussian(1.0, 1.0)
    a = l1L2_norm(V, 1)
    b = l1L2_norm(V, 1, rtol=1e-14)
    assert np.isfinite(a) and abs(a - b) <= 1e-8 * a


@pytest.mark.parametrize("d", [1, 2, 3])
def test_l1l2_rejects_slow_decay(d):
    with pytest.raises(DivergenceError):
        l1L2_norm(PowerDecay(1.0, d / 2), d)


# Jost solutions and Wronskian ---------------------------------------------------


def test_free_jost_solutions():
    k = np.array([0.5, 1.3])
    x = np.linspace(-3, 3, 7)
    for side, s in (("+", 1), ("-", -1)):
        sol = jost_solve(Zero(), k, side, x)
        np.testing.assert_allclose(sol.theta, np.exp(s * 1j * k[:, None] * x[None, :]), atol=1e-10)
    w, _ = jost_wronskian(Zero(), k, x)
    np.testing.assert_allclose(w, -2j * k, atol=1e-10)


def test_wronskian_constant_and_bilinear():
    k = np.array([0.4, 1.0, 2.0])
    x = np.linspace(-4, 4, 5)
    p = jost_solve(SECH, k, "+", x)
    m = jost_solve(SECH, k, "-", x)
    w, spread = wronskian(p, m)
    assert spread.max() <= 1e-8 and WRONSKIAN_TOL <= 1e-6
    p.theta *= 3.0
    p.dtheta *= 3.0
    w3, _ = wronskian(p, m)
    np.testing.assert_allclose(w3, 3 * w, rtol=1e-14)


def test_jost_conjugation_symmetry():
    x = np.linspace(-2, 2, 5)
    for side in ("+", "-"):
        a = jost_solve(SECH, 1.1, side, x).theta
        b = jost_solve(SECH, -1.1, side, x).theta
        np.testing.assert_allclose(b, a.conj(), atol=1e-10)


def test_wronskian_bounded_away_from_zero():
    k = np.linspace(0.7, 1.5, 17)
    w, _ = jost_wronskian(SECH, k)
    assert np.min(np.abs(w)) > 0.1


def test_poschl_teller_reference():
    k = np.array([0.3, 1.0, 2.5])
    w, _ = jost_wronskian(SECH, k)
    np.testing.assert_allclose(w / (-2j * k), poschl_teller_a(k, 3.0), atol=1e-8)
    np.testing.assert_allclose(bound_states(SECH), poschl_teller_bound_states(3.0), atol=1e-9)
    assert bound_states(Zero()).size == 0


def test_jost_argument_errors():
    with pytest.raises(ParameterError):
        jost_solve(SECH, 1.0, "x")
    with pytest.raises(ParameterError):
        jost_solve(SECH, 1.0 - 0.1j, "+")
    with pytest.raises(ParameterError):
        jost_solve(SECH, 0.0, "+")


# resolvent kernel and limiting absorption -----------------------------------------


def test_free_kernel():
    k = 0.8 + 0.05j
    x = np.array([-1.0, 0.3, 2.0])
    xp = np.array([0.5, 0.5, -1.5])
    K = resolvent_kernel_1d(Zero(), k, x, xp)
    np.testing.assert_allclose(K, 1j * np.exp(1j * k * np.abs(x - xp)) / (2 * k), atol=1e-10)


def test_kernel_symmetric():
    x = np.linspace(-3, 3, 5)
    K = resolvent_kernel_1d(SECH, 1.2 + 0.1j, x[:, None], x[None, :])
    assert np.abs(K - K.T).max() <= 1e-12


def test_kernel_solves_equation_off_diagonal():
    k = 1.1 + 0.2j
    h = 1e-3
    xp = -0.5
    x = np.array([0.4, 1.0, 2.0])
    xs = np.concatenate([x - h, x, x + h])
    K = resolvent_kernel_1d(SECH, k, xs, np.full(xs.size, xp)).reshape(3, -1)
    second = (K[0] - 2 * K[1] + K[2]) / h**2
    resid = -second + (SECH(x) - k * k) * K[1]
    assert np.abs(resid).max() <= 1e-6 * max(1.0, np.abs(K[1]).max())


def test_lap_zero_potential():
    prof = lap_sup_check(Zero(), (0.5, 2.0), [1e-4, 1e-6])
    assert np.all(prof.value == 0)


def test_lap_sech_stable():
    prof = lap_sup_check(SECH, (0.5, 2.0), [1e-4, 1e-6], x_samples=3)
    hi = prof.value[prof.y == 1e-4]
    lo = prof.value[prof.y == 1e-6]
    assert np.max(np.abs(lo / hi - 1)) <= 0.05


def test_lap_continuum_vs_lattice():
    c = lap_sup_check(SECH, (0.5, 2.0), [1e-4], x_samples=2)
    lat = lap_sup_check(SECH, (0.5, 2.0), [1e-4], method="lattice", x_samples=2, h=0.02)
    np.testing.assert_allclose(lat.value, c.value, rtol=0.01)


# spectral shift function -------------------------------------------------------


def test_ssf_zero_potential():
    d = ssf_from_scattering(Zero(), [-1.0, 0.5, 2.0])
    assert np.all(d.xi == 0)
    assert np.all(ssf_box_counting_oracle(Zero(), 20.0, [0.5, 2.0]) == 0)


def test_ssf_negative_energies_count_bound_states():
    d = ssf_from_scattering(SECH, [-2.0, -1.0, -0.05])
    np.testing.assert_array_equal(d.xi, [0, -1, -2])


def test_ssf_large_energy_decays():
    d = ssf_from_scattering(SECH, [900.0])
    assert abs(d.xi[0]) <= 0.05
    assert abs(abs(d.a[-1]) - 1) <= 1e-2


def test_ssf_low_energy_half_integer_limit():
    # generic (non-resonant) 1D well: xi(0+) = -N + 1/2 with N = 2 bound states
    d = ssf_from_scattering(SECH, [1e-4])
    assert abs(d.xi[0] + 1.5) <= 0.05


def test_ssf_continuous_on_grid():
    # steps shrink with the grid spacing: no jumps
    coarse = ssf_from_scattering(SECH, np.linspace(0.2, 5.0, 25)).xi
    fine = ssf_from_scattering(SECH, np.linspace(0.2, 5.0, 49)).xi
    assert np.max(np.abs(np.diff(fine))) <= 0.6 * np.max(np.abs(np.diff(coarse)))
    assert np.max(np.abs(np.diff(fine))) <= 0.1


def test_ssf_box_counting_below_spectrum():
    out = ssf_box_counting_oracle(SECH, 20.0, [-10.0])
    assert abs(out[0]) <= 1e-12


def test_ssf_cross_method():
    lam = np.linspace(0.2, 5.0, 25)
    xi = ssf_from_scattering(SECH, lam).xi
    box = ssf_box_counting_oracle(SECH, 200.0, lam)
    assert np.max(np.abs(xi - box)) <= 0.05


def test_krein_zero_and_fixture():
    f = smooth_bump(1.25, 0.75)
    r0 = krein_trace_check(Zero(), f, 50.0)
    assert r0.lhs == 0 and r0.rhs == 0
    r = krein_trace_check(SECH, f, 200.0)
    assert r.relative_error <= 0.02
