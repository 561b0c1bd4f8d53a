import math

import numpy as np
import pytest
from scipy import integrate

from tracecalc.errors import DegeneracyError, DivergenceError, ParameterError
from tracecalc.lattice import LatticeSpec
from tracecalc.linalg import HermitianOperator, random_hermitian
from tracecalc.potentials import CompactBump, Gaussian, PowerDecay, Zero
from tracecalc.trace_inequalities import (
    aizenman_lieb_lift,
    fermi_density_lattice_1d,
    fermi_projection_hs_check,
    lt_excess,
    lt_rhs_functional,
    semiclassical_closed_form,
    semiclassical_constant,
    trace_identity_check,
)


def test_identity_equal_operators(rng):
    A = random_hermitian(20, rng)
    r = trace_identity_check(A, A)
    assert r.term_PP == pytest.approx(0, abs=1e-13)
    assert r.term_PperpPperp == pytest.approx(0, abs=1e-13)
    assert r.term_coupling == 0 and r.rhs == pytest.approx(0, abs=1e-13)


def test_identity_two_by_two():
    r = trace_identity_check(HermitianOperator(np.diag([-1.0, 2.0])), HermitianOperator(np.diag([1.0, -3.0])))
    assert (r.term_PP, r.term_PperpPperp, r.term_coupling) == pytest.approx((-1, 3, 2))
    assert r.lhs == pytest.approx(4) and r.rhs == pytest.approx(4)
    assert r.rhs_decomposition == pytest.approx(4)


def test_identity_random_pairs(rng):
    for _ in range(20):
        A = random_hermitian(50, rng)
        B = random_hermitian(50, rng)
        r = trace_identity_check(A, B)
        assert r.passes(1e-10)
        assert r.rhs >= 0
        assert abs(r.rhs - r.rhs_decomposition) <= 1e-10 * (1 + r.rhs)


def test_identity_degenerate():
    with pytest.raises(DegeneracyError):
        trace_identity_check(HermitianOperator(np.diag([0.0, 1.0])), HermitianOperator(np.eye(2)))
    with pytest.raises(ParameterError):
        trace_identity_check(HermitianOperator(np.eye(2)), HermitianOperator(np.eye(3)))


def test_semiclassical_examples():
    assert semiclassical_constant(0, 1).value == pytest.approx(1 / math.pi, rel=1e-12)
    assert semiclassical_constant(1, 1).value == pytest.approx(2 / (3 * math.pi), rel=1e-12)


@pytest.mark.parametrize("gamma", [0, 0.5, 1, 1.5, 2, 3])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_semiclassical_grid(gamma, d):
    assert semiclassical_constant(gamma, d).relative_gap <= 1e-10


def test_semiclassical_monotone_in_gamma():
    vals = [semiclassical_closed_form(g, 2) for g in (0, 0.5, 1, 2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lt_excess_zero_potential():
    e = lt_excess(LatticeSpec(1, 5.0, 0.1), Zero(), 1.0)
    assert e.total == pytest.approx(0, abs=1e-12)
    assert e.rhs == pytest.approx(0, abs=1e-12)
    assert e.trace_PVP == 0


def test_lt_excess_d2_fixture():
    e = lt_excess(LatticeSpec(2, 4.8, 0.2), Gaussian(2.0, 1.0), 1.0)
    assert e.n_sites == 49 * 49
    assert e.residual <= 1e-9 * (1 + e.rhs)
    assert e.total >= 0
    assert e.passes()


def test_lt_excess_requires_positive_mu():
    with pytest.raises(ParameterError):
        lt_excess(LatticeSpec(1, 2.0, 0.1), Zero(), 0.0)


def test_fermi_density_d1():
    spec = LatticeSpec(1, 100.0, 0.05, max_sites=10**5)
    rho = fermi_density_lattice_1d(spec, Zero(), 1.0)
    assert abs(rho / (1 / math.pi) - 1) <= 0.02


def test_fermi_hs_zero_and_two_paths():
    spec = LatticeSpec(1, 5.0, 0.1)
    assert fermi_projection_hs_check(spec, Zero(), 1.0).decomposition == pytest.approx(0, abs=1e-12)
    c = fermi_projection_hs_check(spec, Gaussian(2.0, 1.0), 1.0)
    assert c.relative_gap <= 1e-10
    # a weak repulsive bump far above mu moves no eigenvalue across it
    small = fermi_projection_hs_check(LatticeSpec(1, 3.0, 0.1), CompactBump(-1e-3, 0.5), 1e-3)
    assert small.direct >= 0


def test_lt_rhs_zero_and_mu_zero():
    assert lt_rhs_functional(Zero(), 1.0, 1.0, 2) == 0
    V = CompactBump(1.0, 1.0)
    s = 1 + 1 / 2
    ref = 2 * integrate.quad(lambda r: (1 - r * r) ** (2 * s), 0, 1, epsabs=0, epsrel=1e-13)[0]
    assert lt_rhs_functional(V, 0.0, 1.0, 1) == pytest.approx(ref, rel=1e-10)


def test_lt_rhs_gaussian_d2():
    V = Gaussian(1.0, 1.0)
    a = lt_rhs_functional(V, 1.0, 1.0, 2)
    b = lt_rhs_functional(V, 1.0, 1.0, 2, epsrel=1e-13)
    assert a >= 0 and abs(a - b) <= 1e-8 * b


def test_lt_rhs_divergent_tail():
    with pytest.raises(DivergenceError):
        lt_rhs_functional(PowerDecay(1.0, 0.9), 1.0, 1.0, 2)


def test_aizenman_lieb_examples():
    r = aizenman_lieb_lift(2.0, x_samples=[-1.0, 0.0, 0.5])
    rows = {x: (lhs, rhs) for kind, x, lhs, rhs, _ in r.rows if kind == "scalar"}
    assert rows[-1.0] == pytest.approx((1.0, 1.0), rel=1e-12)
    assert rows[0.0] == (0.0, 0.0) and rows[0.5] == (0.0, 0.0)
    r = aizenman_lieb_lift(2.5, d=2, mu_samples=(1.0,))
    assert r.constant_relative_error <= 1e-8 and r.passes()
    assert r.stated_form_ratio == pytest.approx(2.5, rel=1e-10)


def test_aizenman_lieb_gamma_range():
    with pytest.raises(ParameterError):
        aizenman_lieb_lift(1.0)
