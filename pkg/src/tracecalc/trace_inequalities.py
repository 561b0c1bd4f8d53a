"""Trace identity for negative parts, semiclassical constants, the lattice
Lieb-Thirring excess at positive chemical potential and the Aizenman-Lieb
lifting in the Riesz exponent.

For Hermitian A, B without zero eigenvalues let P = 1_(-inf,0)(A) and
Q = 1_(-inf,0)(B). Then

    tr(B_- - A_-) + tr P(B - A)P = ||(Q - P)|B|^(1/2)||_S2^2
                                 = tr(B_-^(1/2) P' B_-^(1/2)) + tr(B_+^(1/2) P B_+^(1/2)),

with P' = 1 - P. Both sides are evaluated here by separate routes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DegeneracyError, DivergenceError, ParameterError
from .lattice import LatticeSpec, box_eigh_1d, discretize
from .linalg import HermitianOperator
from .potentials import CompactBump, Potential, PowerDecay

__all__ = [
    "TraceIdentityReport",
    "trace_identity_check",
    "SemiclassicalConstant",
    "semiclassical_constant",
    "semiclassical_closed_form",
    "LTExcess",
    "lt_excess",
    "fermi_density_lattice_1d",
    "lt_rhs_functional",
    "AizenmanLiebReport",
    "aizenman_lieb_lift",
    "FermiHSCheck",
    "fermi_projection_hs_check",
]

ZERO_GAP = 1e-10
ABS_ZERO = 1e-12
MU_NUDGE = 1e-6


# --------------------------------------------------------------------------
# the identity


@dataclass
class TraceIdentityReport:
    term_PP: float
    term_PperpPperp: float
    term_coupling: float
    rhs: float
    residual: float
    rhs_decomposition: float
    rank_P: int
    rank_Q: int

    @property
    def lhs(self):
        return self.term_PP + self.term_PperpPperp + self.term_coupling

    @property
    def trace_negative_parts(self):
        """tr(B_- - A_-)."""
        return self.term_PP + self.term_PperpPperp

    def passes(self, rtol=1e-10):
        return self.residual <= rtol * (1 + abs(self.rhs))


def _gapped_eig(H: HermitianOperator, name):
    d = H.eig()
    near = np.abs(d.eigenvalues) < ZERO_GAP
    if np.any(near):
        lam = float(d.eigenvalues[near][0])
        raise DegeneracyError(f"{name} has eigenvalue {lam:.3e} within {ZERO_GAP:g} of 0; shift by +-1e-6", eigenvalue=lam)
    return d.eigenvalues, d.eigenvectors


def _tr(X, Y):
    """tr(XY) without forming the product."""
    return float(np.real(np.sum(X * Y.T)))


def trace_identity_check(A: HermitianOperator, B: HermitianOperator) -> TraceIdentityReport:
    if A.dim != B.dim:
        raise ParameterError("A and B must have the same dimension")
    wA, UA = _gapped_eig(A, "A")
    wB, UB = _gapped_eig(B, "B")
    negA, negB = wA < 0, wB < 0
    UAn = UA[:, negA]
    P = UAn @ UAn.conj().T
    Q = UB[:, negB] @ UB[:, negB].conj().T
    Pp = np.eye(A.dim) - P
    Am = (UA * np.maximum(-wA, 0)) @ UA.conj().T
    Bm = (UB * np.maximum(-wB, 0)) @ UB.conj().T
    D = Bm - Am
    term_PP = _tr(P, D @ P)
    term_PpPp = _tr(Pp, D @ Pp)
    coupling = _tr(P, B.matrix - A.matrix)
    # rhs: Hilbert-Schmidt norm of (Q - P)|B|^(1/2), i.e. its Frobenius norm
    mag = np.abs(wB)
    mag[mag < ABS_ZERO] = 0.0
    X = (Q - P) @ ((UB * np.sqrt(mag)) @ UB.conj().T)
    rhs = float(np.linalg.norm(X, "fro") ** 2)
    # second route: weights |<u_i^A, u_j^B>|^2 in the two eigenbases
    O2 = np.abs(UA.conj().T @ UB) ** 2
    in_P = O2[negA].sum(axis=0)
    in_Pp = O2[~negA].sum(axis=0)
    decomp = float(np.sum(mag[negB] * in_Pp[negB]) + np.sum(mag[~negB] * in_P[~negB]))
    lhs = term_PP + term_PpPp + coupling
    return TraceIdentityReport(term_PP, term_PpPp, coupling, rhs, abs(lhs - rhs), decomp,
                               int(negA.sum()), int(negB.sum()))


# --------------------------------------------------------------------------
# semiclassical constants


def _sphere_area(d):
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def semiclassical_closed_form(gamma, d):
    """Gamma(gamma+1) / ((4 pi)^(d/2) Gamma(gamma+1+d/2))."""
    return math.exp(special.gammaln(gamma + 1) - (d / 2) * math.log(4 * math.pi) - special.gammaln(gamma + 1 + d / 2))


@dataclass
class SemiclassicalConstant:
    gamma: float
    d: int
    value: float
    closed_form: float

    @property
    def relative_gap(self):
        return abs(self.value - self.closed_form) / self.closed_form


def semiclassical_constant(gamma, d) -> SemiclassicalConstant:
    """int (|p|^2 - 1)_-^gamma dp / (2 pi)^d by radial quadrature.

    The radial integrand r^(d-1) (1 - r)^gamma (1 + r)^gamma is handled
    with an algebraic end-point weight so fractional gamma costs nothing.
    """
    if gamma < 0:
        raise ParameterError("need gamma >= 0")
    if int(d) != d or d < 1:
        raise ParameterError("dimension must be a positive integer")
    d = int(d)
    val, _ = integrate.quad(lambda r: (1 + r) ** gamma, 0, 1, weight="alg", wvar=(d - 1, gamma),
                            epsabs=0, epsrel=1e-13, limit=200)
    value = _sphere_area(d) * val / (2 * math.pi) ** d
    return SemiclassicalConstant(float(gamma), d, value, semiclassical_closed_form(gamma, d))


# --------------------------------------------------------------------------
# lattice Lieb-Thirring excess


@dataclass
class LTExcess:
    mu: float
    mu_nudged: bool
    trace_negative_parts: float
    trace_PVP: float
    total: float
    rhs: float
    residual: float
    rhs_decomposition: float
    fermi_density: float
    semiclassical_density: float
    n_sites: int

    def passes(self, rtol=1e-9):
        return self.residual <= rtol * (1 + abs(self.rhs)) and self.total >= 0


def _shifted_pair(spec: LatticeSpec, V: Potential, mu):
    if spec.d == 1:
        wH, UH = box_eigh_1d(spec, V)
        from .potentials import Zero

        w0, U0 = box_eigh_1d(spec, Zero())
        H, H0 = discretize(spec, V)
        H.adopt_decomposition(wH, UH, check=False)
        H0.adopt_decomposition(w0, U0, check=False)
    else:
        H, H0 = discretize(spec, V)
    return H, H0


def _shift(H: HermitianOperator, mu):
    d = H.eig()
    S = HermitianOperator(H.matrix - mu * np.eye(H.dim))
    S.adopt_decomposition(d.eigenvalues - mu, d.eigenvectors, check=False)
    return S


def lt_excess(spec: LatticeSpec, V: Potential, mu, max_nudges=10) -> LTExcess:
    """Identity terms for A = H0 - mu, B = H0 + V - mu on a Dirichlet box.

    If mu lies within 1e-10 of an eigenvalue of either operator it is moved
    up by 1e-6 (repeatedly, at most ``max_nudges`` times) and the record
    says so.
    """
    if not mu > 0:
        raise ParameterError("need mu > 0")
    H, H0 = _shifted_pair(spec, V, mu)
    nudged = False
    for _ in range(max_nudges + 1):
        close = min(np.abs(H.eigenvalues - mu).min(), np.abs(H0.eigenvalues - mu).min())
        if close >= ZERO_GAP:
            break
        mu += MU_NUDGE
        nudged = True
    else:
        raise DegeneracyError(f"could not move mu off the spectrum after {max_nudges} nudges", eigenvalue=mu)
    A, B = _shift(H0, mu), _shift(H, mu)
    r = trace_identity_check(A, B)
    density = r.rank_Q / spec.volume
    sc = semiclassical_closed_form(0, spec.d) * mu ** (spec.d / 2)
    return LTExcess(mu, nudged, r.trace_negative_parts, r.term_coupling, r.lhs, r.rhs, r.residual,
                    r.rhs_decomposition, density, sc, spec.n_sites)


def fermi_density_lattice_1d(spec: LatticeSpec, V: Potential, mu):
    """#{eigenvalues of the boxed H below mu} / volume, from the tridiagonal spectrum."""
    from .lattice import box_eigenvalues_1d

    e = box_eigenvalues_1d(spec, V)
    return float(np.sum(e < mu)) / spec.volume


@dataclass
class FermiHSCheck:
    direct: float
    decomposition: float

    @property
    def relative_gap(self):
        return abs(self.direct - self.decomposition) / max(abs(self.direct), 1e-300) if self.direct else abs(self.decomposition)


def fermi_projection_hs_check(spec: LatticeSpec, V: Potential, mu) -> FermiHSCheck:
    """||(Q - P)|B|^(1/2)||_S2^2 directly and via the B_+- decomposition."""
    r = lt_excess(spec, V, mu)
    return FermiHSCheck(r.rhs, r.rhs_decomposition)


# --------------------------------------------------------------------------
# continuum right-hand side


def lt_rhs_functional(V: Potential, mu, gamma, d, epsrel=1e-11):
    """int ((V - mu)_-^s - mu_+^s + s mu_+^(s-1) V) dx with s = gamma + d/2, radial V.

    The integrand is the convexity gap of t -> t_-^s at t = -mu, hence >= 0.
    """
    if gamma < 1:
        raise ParameterError("need gamma >= 1")
    if V.is_zero:
        return 0.0
    s = gamma + d / 2
    mp = max(mu, 0.0)
    if isinstance(V, PowerDecay):
        # small-V behaviour: ~V^2 for mu > 0, V_-^s for mu <= 0
        power = 2 if mp > 0 else s
        if V.rho * power <= d:
            raise DivergenceError(f"integrand decays like r^(-{V.rho * power:g}), not integrable in d={d}")

    def gap(v):
        return max(mu - v, 0.0) ** s - mp**s + (s * mp ** (s - 1) * v if mp > 0 else 0.0)

    area = _sphere_area(d)

    def integrand(r):
        return area * r ** (d - 1) * gap(float(V.profile(np.array([r]))[0]))

    if isinstance(V, CompactBump):
        pieces = [(0.0, V.radius)]
    else:
        R1 = max(1.0, V.negligible_radius(1e-6))
        pieces = [(0.0, R1), (R1, np.inf)]
    total = 0.0
    for a, b in pieces:
        # the tail piece only needs accuracy relative to the core
        tol = epsrel * abs(total) if total else 0.0
        total += integrate.quad(integrand, a, b, epsabs=tol, epsrel=epsrel, limit=500)[0]
    return total


# --------------------------------------------------------------------------
# Aizenman-Lieb lifting


@dataclass
class AizenmanLiebReport:
    gamma: float
    d: int
    scalar_max_error: float
    constant_relative_error: float
    stated_form_ratio: float
    beta_relative_error: float
    rows: list = field(default_factory=list)

    def passes(self, tol=1e-8):
        return max(self.scalar_max_error, self.constant_relative_error, self.beta_relative_error) <= tol


def _tau_integral(alpha, beta, top):
    """int_0^top tau^alpha (top - tau)^beta dtau by weighted quadrature."""
    if top <= 0:
        return 0.0
    return integrate.quad(lambda t: 1.0, 0, top, weight="alg", wvar=(alpha, beta), epsabs=0, epsrel=1e-13)[0]


def aizenman_lieb_lift(gamma, x_samples=None, mu_samples=(0.5, 1.0, 2.0), d=1) -> AizenmanLiebReport:
    """Check the lifting identities for one gamma > 1.

    Scalar: x_-^gamma = gamma (gamma - 1) int_0^inf (x + tau)_- tau^(gamma-2) dtau.
    Constants: L_(gamma,d) mu^(gamma+d/2)
             = gamma (gamma - 1) int_0^mu L_(1,d) (mu - tau)^(1+d/2) tau^(gamma-2) dtau,
    which is what summing the scalar identity over eigenvalues gives. The
    variant with L_(gamma-1,d) on the left and L_(0,d) inside is off by the
    factor gamma; its ratio is reported as ``stated_form_ratio``.
    """
    if not gamma > 1:
        raise ParameterError("need gamma > 1")
    if x_samples is None:
        x_samples = np.linspace(-3, 1.75, 20)
    rows = []
    scalar_err = 0.0
    c = gamma * (gamma - 1)
    for x in np.asarray(x_samples, float):
        lhs = max(-x, 0.0) ** gamma
        rhs = c * _tau_integral(gamma - 2, 1.0, max(-x, 0.0))
        err = abs(lhs - rhs) / max(1.0, abs(lhs))
        scalar_err = max(scalar_err, err)
        rows.append(("scalar", float(x), lhs, rhs, err))
    const_err = 0.0
    ratios = []
    L1 = semiclassical_closed_form(1, d)
    L0 = semiclassical_closed_form(0, d)
    for mu in mu_samples:
        lhs = semiclassical_closed_form(gamma, d) * mu ** (gamma + d / 2)
        rhs = c * L1 * _tau_integral(gamma - 2, 1 + d / 2, mu)
        err = abs(lhs - rhs) / lhs
        const_err = max(const_err, err)
        rows.append(("constant", float(mu), lhs, rhs, err))
        stated_lhs = semiclassical_closed_form(gamma - 1, d) * mu ** (gamma + d / 2 - 1)
        stated_rhs = c * L0 * _tau_integral(gamma - 2, d / 2, mu)
        ratios.append(stated_rhs / stated_lhs)
        rows.append(("stated_form", float(mu), stated_lhs, stated_rhs, stated_rhs / stated_lhs))
    beta_closed = math.exp(special.gammaln(d / 2 + 2) + special.gammaln(gamma - 1) - special.gammaln(gamma + d / 2 + 1))
    beta_quad = _tau_integral(gamma - 2, 1 + d / 2, 1.0)
    beta_err = abs(beta_quad - beta_closed) / beta_closed
    rows.append(("beta", 1.0, beta_closed, beta_quad, beta_err))
    return AizenmanLiebReport(float(gamma), d, scalar_err, const_err, float(np.mean(ratios)), beta_err, rows)
