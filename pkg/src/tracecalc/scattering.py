"""One-dimensional scattering for H = -d^2/dx^2 + V: Jost solutions, the
Wronskian, the resolvent kernel, limiting-absorption scans, the spectral
shift function and Krein's trace formula.

Conventions. theta_+(x, k) ~ exp(ikx) as x -> +inf, theta_-(x, k) ~
exp(-ikx) as x -> -inf, w = theta_-' theta_+ - theta_- theta_+', so w = -2ik
when V = 0. a(k) = w(k) / (-2ik) = 1/T(k) with T the transmission
coefficient. The spectral shift function is normalised by
Tr(f(H) - f(H0)) = int xi f' dlam, which makes xi = N_H0 - N_H in terms
of eigenvalue counting functions; on (0, inf) this is xi = arg(a)/pi with
the branch fixed by a(k) -> 1 as k -> inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.integrate import solve_ivp
from scipy.stats import norm as _normal

from .errors import AccuracyError, GridResolutionError, ParameterError, ResonanceError, StiffnessError
from .hs import IntegrandProfile
from .lattice import LatticeSpec, box_eigenvalues_1d, lattice_lap_profile
from .potentials import Potential, Zero, sqrt_abs
from .quadrature import gauss_legendre

__all__ = [
    "JostSolution",
    "jost_solve",
    "wronskian",
    "jost_wronskian",
    "resolvent_kernel_1d",
    "lap_sup_check",
    "bound_states",
    "ScatteringData1D",
    "ssf_from_scattering",
    "ssf_box_counting_oracle",
    "KreinReport",
    "krein_trace_check",
    "poschl_teller_a",
    "poschl_teller_bound_states",
]

RTOL = 1e-11
ATOL = 1e-13
TAIL = 1e-12
WRONSKIAN_TOL = 1e-6
RESONANCE_TOL = 1e-12
MAX_RADIUS = 200.0


def _cutoff_radius(V: Potential, x=None):
    R = V.negligible_radius(TAIL)
    if R > MAX_RADIUS:
        raise ParameterError(f"{V.spec()} is not negligible before |x| = {MAX_RADIUS:g}; use a short-range potential")
    R = max(R, 1.0)
    if x is not None and np.size(x):
        R = max(R, float(np.max(np.abs(x))))
    return R


@dataclass
class JostSolution:
    x: np.ndarray
    k: np.ndarray
    side: str
    theta: np.ndarray  # shape (len(k), len(x))
    dtheta: np.ndarray


def jost_solve(V: Potential, k, side, x=None, rtol=RTOL, atol=ATOL, normalize_at=None) -> JostSolution:
    """Integrate -theta'' + V theta = k^2 theta inward from +-R.

    ``k`` may be an array; all wave numbers are advanced together. ``x``
    are the sample points (default: five points spread over [-R/2, R/2]).
    With ``normalize_at`` the initial data are exp(+-ik(x0 - normalize_at))
    instead of exp(+-ik x0), which rescales theta by a constant and keeps
    exponentially growing solutions in range.
    """
    if side not in ("+", "-"):
        raise ParameterError("side must be '+' or '-'")
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(k == 0):
        raise ParameterError("k = 0 is excluded")
    if np.any(k.imag < 0):
        raise ParameterError("need Im k >= 0")
    R = _cutoff_radius(V)
    if x is None:
        x = np.linspace(-R / 2, R / 2, 5)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    R = max(R, float(np.max(np.abs(x))))
    sgn = 1 if side == "+" else -1
    x0 = sgn * R
    shift = 0.0 if normalize_at is None else normalize_at
    th0 = np.exp(sgn * 1j * k * (x0 - shift))
    y0 = np.concatenate([th0, sgn * 1j * k * th0])
    k2 = k * k
    n = k.size

    def rhs(t, y):
        v = float(V(np.array([t]))[0])
        return np.concatenate([y[n:], (v - k2) * y[:n]])

    order = np.argsort(-sgn * x)
    xs = x[order]
    end = xs[-1]
    if end == x0:
        out = np.tile(y0[:, None], (1, x.size))
    else:
        sol = solve_ivp(rhs, (x0, end), y0, method="RK45", t_eval=xs, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffnessError(f"Jost integration failed: {sol.message}")
        out = sol.y
    theta = np.empty((n, x.size), dtype=complex)
    dtheta = np.empty((n, x.size), dtype=complex)
    theta[:, order] = out[:n]
    dtheta[:, order] = out[n:]
    return JostSolution(x, k, side, theta, dtheta)


def wronskian(plus: JostSolution, minus: JostSolution, tol=WRONSKIAN_TOL):
    """w = theta_-' theta_+ - theta_- theta_+', averaged over the sample points.

    Returns (w, relative spread) per k. A spread above ``tol`` raises.
    """
    if plus.side != "+" or minus.side != "-":
        raise ParameterError("expected (theta_+, theta_-)")
    if not (np.array_equal(plus.x, minus.x) and np.array_equal(plus.k, minus.k)):
        raise ParameterError("solutions must share the x-grid and k")
    ws = minus.dtheta * plus.theta - minus.theta * plus.dtheta
    w = ws.mean(axis=1)
    spread = np.max(np.abs(ws - w[:, None]), axis=1) / np.maximum(np.abs(w), 1e-300)
    if np.any(spread > tol):
        raise AccuracyError(f"Wronskian varies by {spread.max():.2e} across sample points")
    return w, spread


def jost_wronskian(V: Potential, k, x=None):
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    p = jost_solve(V, k, "+", x)
    m = jost_solve(V, k, "-", p.x)
    return wronskian(p, m)


def _check_resonance(w, k):
    bad = np.abs(w) < RESONANCE_TOL
    if np.any(bad):
        raise ResonanceError(f"|w(k)| < {RESONANCE_TOL:g} at k = {np.asarray(k)[bad][0]}")


def resolvent_kernel_1d(V: Potential, k, x, xp):
    """R(k^2)(x, x') = theta_+(x_>) theta_-(x_<) / w(k) for one k with Im k >= 0.

    ``x`` and ``xp`` broadcast against each other.
    """
    k = complex(k)
    x, xp = np.broadcast_arrays(np.asarray(x, float), np.asarray(xp, float))
    pts = np.unique(np.concatenate([x.ravel(), xp.ravel()]))
    p = jost_solve(V, k, "+", pts)
    m = jost_solve(V, k, "-", pts)
    w, _ = wronskian(p, m)
    _check_resonance(w, [k])
    hi = np.searchsorted(pts, np.maximum(x, xp))
    lo = np.searchsorted(pts, np.minimum(x, xp))
    return p.theta[0][hi] * m.theta[0][lo] / w[0]


def _kernel_matrix(V, k, nodes):
    p = jost_solve(V, k, "+", nodes)
    m = jost_solve(V, k, "-", nodes)
    w, _ = wronskian(p, m)
    _check_resonance(w, [k])
    tp, tm = p.theta[0], m.theta[0]
    i, j = np.meshgrid(np.arange(nodes.size), np.arange(nodes.size), indexing="ij")
    hi, lo = np.maximum(i, j), np.minimum(i, j)
    return tp[hi] * tm[lo] / w[0]


def lap_sup_check(V: Potential, window, y_ladder, method="continuum", x_samples=4, panels=24, nodes=16, h=0.05):
    """||sqrt|V| R(x + iy) sqrt|V||| over window x y_ladder.

    ``continuum`` discretises the integral operator with kernel
    sqrt|V(x)| R(x, x') sqrt|V(x')| on Gauss-Legendre nodes; ``lattice``
    uses the exact finite-rank formula on h Z.
    """
    lo, hi = window
    if not 0 < lo < hi:
        raise ParameterError("window must lie inside (0, inf)")
    if method == "lattice":
        return lattice_lap_profile(V, h, window, y_ladder, x_samples)
    if method != "continuum":
        raise ParameterError(f"unknown method {method!r}")
    xs = np.linspace(lo, hi, x_samples)
    ys = np.asarray(y_ladder, float)
    if V.is_zero:
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return IntegrandProfile(X.ravel(), Y.ravel(), np.zeros(X.size))
    R = V.negligible_radius(1e-10)
    c = float(np.atleast_1d(V.center)[0])
    t, wt = gauss_legendre(nodes)
    edges = np.linspace(c - R, c + R, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    pts = (a + (b - a) * (t + 1) / 2).ravel()
    wts = ((b - a) / 2 * wt).ravel()
    s = np.sqrt(wts) * sqrt_abs(V(pts))
    X, Y, vals = [], [], []
    for x in xs:
        for y in ys:
            k = np.sqrt(complex(x, abs(y)))
            K = _kernel_matrix(V, k, pts)
            vals.append(np.linalg.norm(s[:, None] * K * s[None, :], 2))
            X.append(x)
            Y.append(y)
    return IntegrandProfile(np.array(X), np.array(Y), np.array(vals))


# --------------------------------------------------------------------------
# bound states


def _w_imag_axis(V, kappa):
    """w(i kappa) with theta_+- normalised to 1 at +-R (positive rescaling of w)."""
    R = _cutoff_radius(V)
    k = 1j * np.atleast_1d(kappa)
    p = jost_solve(V, k, "+", np.array([0.0]), normalize_at=R)
    m = jost_solve(V, k, "-", np.array([0.0]), normalize_at=-R)
    w = m.dtheta[:, 0] * p.theta[:, 0] - m.theta[:, 0] * p.dtheta[:, 0]
    return w.real


def bound_states(V: Potential, n_grid=400):
    """Negative eigenvalues -kappa^2 from sign changes of w(i kappa)."""
    if V.is_zero:
        return np.array([])
    R = _cutoff_radius(V)
    xs = np.linspace(-R, R, 4001)
    vmin = float(np.min(V(xs)))
    if vmin >= 0:
        return np.array([])
    kmax = math.sqrt(-vmin) * 1.001
    kap = np.linspace(kmax / n_grid / 10, kmax, n_grid)
    w = _w_imag_axis(V, kap)
    roots = []
    for i in np.nonzero(np.sign(w[:-1]) * np.sign(w[1:]) < 0)[0]:
        r = optimize.brentq(lambda q: _w_imag_axis(V, q)[0], kap[i], kap[i + 1], xtol=1e-14, rtol=1e-13)
        roots.append(r)
    return np.sort(-np.array(roots) ** 2)


# --------------------------------------------------------------------------
# spectral shift function


@dataclass
class ScatteringData1D:
    lam: np.ndarray
    xi: np.ndarray
    k: np.ndarray
    w: np.ndarray
    a: np.ndarray
    phase: np.ndarray
    bound_states: np.ndarray
    wronskian_spread: float
    k_branch: float
    refinements: int = 0
    extra: dict = field(default_factory=dict)

    def rows(self):
        """(k, Re w, Im w, arg a, xi) for the positive-energy samples."""
        out = []
        for kk, ww, ph in zip(self.k, self.w, self.phase):
            out.append((float(kk), float(ww.real), float(ww.imag), float(ph), float(ph / np.pi)))
        return out


def _a_of_k(V, k):
    k = np.atleast_1d(np.asarray(k, float))
    w, spread = jost_wronskian(V, k)
    return w / (-2j * k), w, spread


def _phase_increment(V, k0, a0, k1, a1, depth, counter):
    d = float(np.angle(a1 / a0))
    if abs(d) <= np.pi / 2:
        return d
    if depth == 0:
        raise GridResolutionError(f"phase of a(k) jumps by {d:.3f} between k = {k0:.6g} and {k1:.6g}")
    km = (k0 + k1) / 2
    am = _a_of_k(V, [km])[0][0]
    counter[0] += 1
    return (_phase_increment(V, k0, a0, km, am, depth - 1, counter)
            + _phase_increment(V, km, am, k1, a1, depth - 1, counter))


def ssf_from_scattering(V: Potential, lam_grid, max_depth=20) -> ScatteringData1D:
    """xi on ``lam_grid``: arg(a)/pi for lam > 0, minus the bound-state count below lam for lam <= 0."""
    lam = np.asarray(lam_grid, dtype=float)
    bs = bound_states(V)
    xi = np.empty_like(lam)
    neg = lam <= 0
    xi[neg] = -np.searchsorted(bs, lam[neg], side="left")
    pos = ~neg
    if V.is_zero or not np.any(pos):
        xi[pos] = 0.0
        kk = np.sqrt(lam[pos])
        return ScatteringData1D(lam, xi, kk, -2j * kk, np.ones_like(kk, dtype=complex), np.zeros_like(kk), bs, 0.0,
                                float(kk.max()) if kk.size else 0.0)
    k_req = np.sqrt(lam[pos])
    # continue the branch down from a k where the Born phase int|V|/(2k) is well below pi/4
    Vabs = Zero() if V.is_zero else V
    R = _cutoff_radius(Vabs)
    xs = np.linspace(-R, R, 20001)
    int_abs = float(np.trapezoid(np.abs(V(xs)), xs))
    k_top = max(float(k_req.max()), 2 * int_abs / np.pi, 1.0)
    tail = np.geomspace(float(k_req.max()), k_top, 12)[1:] if k_top > k_req.max() else np.array([])
    ks = np.unique(np.concatenate([k_req, tail]))[::-1]
    a, w, spread = _a_of_k(V, ks)
    if abs(abs(a[0]) - 1) > 1e-2:
        raise AccuracyError(f"|a(k)| = {abs(a[0]):.4f} at the branch point k = {ks[0]:.4g}; extend the grid")
    phase = np.empty(ks.size)
    phase[0] = float(np.angle(a[0]))
    counter = [0]
    for i in range(1, ks.size):
        phase[i] = phase[i - 1] + _phase_increment(V, ks[i - 1], a[i - 1], ks[i], a[i], max_depth, counter)
    order = np.argsort(ks)
    ks, a, w, phase = ks[order], a[order], w[order], phase[order]
    idx = np.searchsorted(ks, k_req)
    xi[pos] = phase[idx] / np.pi
    return ScatteringData1D(lam, xi, ks, w, a, phase, bs, float(np.max(spread)), float(ks[-1]), counter[0])


def ssf_box_counting_oracle(V: Potential, L_box, lam_grid, sigma=0.05, h=0.1):
    """Gaussian-smoothed N_H0(lam) - N_H(lam) for the Dirichlet box of half-width L_box."""
    spec = LatticeSpec(1, L_box, h, max_sites=10**6)
    eH = box_eigenvalues_1d(spec, V)
    e0 = box_eigenvalues_1d(spec, Zero())
    lam = np.asarray(lam_grid, float)

    def count(e):
        return _normal.cdf((lam[:, None] - e[None, :]) / sigma).sum(axis=1)

    return count(e0) - count(eH)


@dataclass
class KreinReport:
    lhs: float
    rhs: float
    relative_error: float
    n_sites: int


def krein_trace_check(V: Potential, f, L_box, h=0.1, panels=16, nodes=16) -> KreinReport:
    """Tr(f(H) - f(H0)) on the box against int xi f' dlam from scattering."""
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0:
        raise ParameterError("f must be compactly supported in (0, inf)")
    spec = LatticeSpec(1, L_box, h, max_sites=10**6)
    eH = box_eigenvalues_1d(spec, V)
    e0 = box_eigenvalues_1d(spec, Zero())
    lhs = float(np.sum(f(eH)) - np.sum(f(e0)))
    t, wt = gauss_legendre(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    lam = (a + (b - a) * (t + 1) / 2).ravel()
    wts = ((b - a) / 2 * wt).ravel()
    if V.is_zero:
        rhs = 0.0
    else:
        xi = ssf_from_scattering(V, lam).xi
        rhs = float(np.sum(wts * xi * f.derivative(lam, 1)))
    denom = max(abs(rhs), 1e-300)
    rel = abs(lhs - rhs) / denom if (lhs or rhs) else 0.0
    return KreinReport(lhs, rhs, rel, spec.n_sites)


# --------------------------------------------------------------------------
# exactly solvable reference


def _pt_nu(depth, width):
    return (-1 + math.sqrt(1 + 4 * depth * width**2)) / 2


def poschl_teller_a(k, depth, width=1.0):
    """a(k) = 1/T(k) for V = -depth sech^2(x/width)."""
    nu = _pt_nu(depth, width)
    q = np.asarray(k, dtype=complex) * width
    lg = special.loggamma
    logT = lg(1 + nu - 1j * q) + lg(-nu - 1j * q) - lg(1 - 1j * q) - lg(-1j * q)
    return np.exp(-logT)


def poschl_teller_bound_states(depth, width=1.0):
    nu = _pt_nu(depth, width)
    j = np.arange(int(math.ceil(nu)))
    j = j[nu - j > 0]
    return np.sort(-((nu - j) / width) ** 2)
