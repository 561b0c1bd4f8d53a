"""Helffer-Sjostrand formulas for functions of Hermitian matrices.

    f(H)                  = (1/pi) sum_k w_k omega(z_k) R(z_k)
    f(H) - f(H0)          = -(1/pi) sum_k w_k omega(z_k) R(z_k) V R0(z_k)
    second-order remainder = (1/pi) sum_k w_k omega(z_k) R0(z_k) V R(z_k) V R0(z_k)

With a conjugation-symmetric node set only the upper half-plane is
evaluated: every integrand X(z) above satisfies X(conj z) = X(z)^*, so the
full sum is S + S^*. Partial sums are formed per chunk of nodes and added in
chunk order, so results do not depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import AccuracyError, ParameterError
from .linalg import HermitianOperator, resolvent_stack, schatten_norm
from .quadrature import PlanarQuadrature

__all__ = [
    "hs_apply",
    "hs_difference",
    "hs_second_difference",
    "hs_all",
    "refine_until_stable",
    "IntegrandProfile",
    "trace_norm_integrand_profile",
    "profile_from_s1",
    "momentum_integral",
    "momentum_integral_exact_1d",
    "momentum_limit_constant",
    "fit_loglog",
]

SKEW_TOL = 1e-8
CHUNK = 256


def _weights(ext, quad):
    c = quad.weights * ext.omega(quad.z)
    keep = c != 0
    return quad.z[keep], c[keep]


def _chunked(fn, n, chunk, threads):
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    total = parts[0]
    for p in parts[1:]:
        total = {k: total[k] + p[k] for k in total}
    return total


def _finish(S, quad, skew_tol, label):
    if quad.symmetric:
        out = (S + S.conj().T) / np.pi
    else:
        out = S / np.pi
        skew = np.linalg.norm(out - out.conj().T, 2) / 2
        if skew > skew_tol * max(1.0, np.linalg.norm(out, 2)):
            raise AccuracyError(f"{label}: skew-Hermitian part {skew:.3e} exceeds {skew_tol:g}")
        out = (out + out.conj().T) / 2
    if not np.any(out.imag) or np.abs(out.imag).max() == 0:
        out = out.real
    return HermitianOperator(out, label=label)


def hs_all(H0: HermitianOperator, V, ext, quad: PlanarQuadrature, which=("apply0", "apply", "diff", "second"),
           chunk=CHUNK, threads=1, skew_tol=SKEW_TOL):
    """All requested Helffer-Sjostrand sums from one sweep over the nodes.

    ``apply0`` is f(H0), ``apply`` is f(H0 + V), ``diff`` the first
    difference and ``second`` the remainder after the first-order term.
    """
    Vm = V.matrix if isinstance(V, HermitianOperator) else np.asarray(V)
    H = HermitianOperator(H0.matrix + Vm) if any(w != "apply0" for w in which) else None
    zs, cs = _weights(ext, quad)
    n = H0.dim
    if zs.size == 0:
        zero = HermitianOperator(np.zeros((n, n)))
        return {w: zero for w in which}

    def part(i, j):
        z, c = zs[i:j], cs[i:j]
        out = {}
        R0 = resolvent_stack(H0, z) if {"apply0", "diff", "second"} & set(which) else None
        R = resolvent_stack(H, z) if {"apply", "diff", "second"} & set(which) else None
        if "apply0" in which:
            out["apply0"] = np.tensordot(c, R0, axes=1)
        if "apply" in which:
            out["apply"] = np.tensordot(c, R, axes=1)
        if "diff" in which or "second" in which:
            VR0 = Vm @ R0
            if "diff" in which:
                out["diff"] = -np.tensordot(c, R @ VR0, axes=1)
            if "second" in which:
                out["second"] = np.tensordot(c, R0 @ Vm @ R @ VR0, axes=1)
        return out

    sums = _chunked(part, zs.size, chunk, threads)
    return {k: _finish(sums[k], quad, skew_tol, k) for k in which}


def hs_apply(H: HermitianOperator, ext, quad, **kw) -> HermitianOperator:
    """f(H) from the area integral of omega(z) R(z)."""
    return hs_all(H, np.zeros(H.matrix.shape), ext, quad, which=("apply0",), **kw)["apply0"]


def hs_difference(H0, V, ext, quad, **kw) -> HermitianOperator:
    """f(H0 + V) - f(H0) from the integral of omega R V R0."""
    return hs_all(H0, V, ext, quad, which=("diff",), **kw)["diff"]


def hs_second_difference(H0, V, ext, quad, **kw) -> HermitianOperator:
    """f(H0 + V) - f(H0) - Df(H0)[V] from the integral of omega R0 V R V R0."""
    return hs_all(H0, V, ext, quad, which=("second",), **kw)["second"]


def refine_until_stable(compute, quad: PlanarQuadrature, tol, max_rounds=6):
    """Run ``compute(quad)`` on successively refined node sets.

    Stops when two successive results (dicts of operators or a single
    operator) differ by less than ``tol`` in operator norm. Returns the last
    result, the quadrature used and the list of successive changes.
    """
    prev = compute(quad)
    changes = []
    for _ in range(max_rounds):
        quad = quad.refined()
        cur = compute(quad)
        delta = _max_change(prev, cur)
        changes.append(delta)
        if delta < tol:
            return cur, quad, changes
        prev = cur
    raise AccuracyError(f"no convergence to {tol:g} after {max_rounds} refinements",
                        previous=changes[-2] if len(changes) > 1 else None, last=changes[-1])


def _max_change(a, b):
    if isinstance(a, dict):
        return max(_max_change(a[k], b[k]) for k in a)
    return float(np.linalg.norm(a.matrix - b.matrix, 2))


# --------------------------------------------------------------------------
# integrand profiles


@dataclass
class IntegrandProfile:
    """Samples of a norm along z = x + iy with the |y|-compensated values."""

    x: np.ndarray
    y: np.ndarray
    value: np.ndarray
    compensated: np.ndarray = field(init=False)

    def __post_init__(self):
        self.compensated = self.value * np.abs(self.y)

    @property
    def sup_compensated(self):
        return float(self.compensated.max())

    def compensated_ratio(self):
        """max/min over the y-ladder of the per-y sup of the compensated value."""
        per_y = self.per_y(self.compensated, np.max)
        return float(per_y.max() / per_y.min())

    def per_y(self, arr, reduce=np.max):
        ys = np.unique(self.y)
        return np.array([reduce(arr[self.y == y]) for y in ys])

    def value_exponent(self):
        """Slope of log(max_x value) against log(y)."""
        ys = np.unique(self.y)
        return fit_loglog(ys, self.per_y(self.value, np.max))[0]

    def rows(self):
        return [(float(a), float(b), float(c), float(d))
                for a, b, c, d in zip(self.x, self.y, self.value, self.compensated)]


def fit_loglog(x, y):
    """Least-squares slope and rms residual of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return float(coef[0]), resid


def profile_from_s1(s1_of_z, window, y_grid, x_samples=3):
    """Evaluate ``s1_of_z`` on a (window x y_grid) mesh."""
    lo, hi = window
    xs = np.linspace(lo, hi, x_samples)
    X, Y = np.meshgrid(xs, np.asarray(y_grid, float), indexing="ij")
    vals = np.array([s1_of_z(complex(x, y)) for x, y in zip(X.ravel(), Y.ravel())])
    return IntegrandProfile(X.ravel(), Y.ravel(), vals)


def trace_norm_integrand_profile(H0: HermitianOperator, V, window, y_grid, x_samples=3, kappa=0, E=None):
    """||W (R(z) - R0(z)) W||_S1 along the mesh, W = (H0 + E)^(-kappa).

    The difference is formed as -R(z) V R0(z). For kappa = 0 the weight is
    the identity.
    """
    lo, hi = window
    if not 0 < lo < hi:
        raise ParameterError("window must be an interval inside (0, inf)")
    Vm = V.matrix if isinstance(V, HermitianOperator) else np.asarray(V)
    H = HermitianOperator(H0.matrix + Vm)
    W = None
    if kappa:
        if E is None:
            E = 1 + abs(H.eigenvalues[0]) + abs(H0.eigenvalues[0])
        w, U = H0.eig().eigenvalues, H0.eig().eigenvectors
        W = (U * (w + E) ** (-kappa)) @ U.conj().T

    def s1(z):
        R0 = resolvent_stack(H0, [z])[0]
        R = resolvent_stack(H, [z])[0]
        D = -R @ Vm @ R0
        if W is not None:
            D = W @ D @ W
        return schatten_norm(D, 1).value

    return profile_from_s1(s1, window, y_grid, x_samples)


# --------------------------------------------------------------------------
# momentum integral


def momentum_integral(d, kappa, E, z, epsabs=0.0, epsrel=1e-12):
    """int_{R^d} dp / (| |p|^2 - z |^2 (|p|^2 + E)^(2 kappa)) by radial quadrature."""
    if d not in (1, 2, 3) and not (isinstance(d, int) and d >= 1):
        raise ParameterError("dimension must be a positive integer")
    if not kappa > d / 4 - 1:
        raise ParameterError(f"need kappa > d/4 - 1 = {d / 4 - 1:g} for the momentum integral to converge")
    if kappa and not E > 0:
        raise ParameterError("need E > 0")
    z = complex(z)
    x, y = z.real, abs(z.imag)
    if y == 0:
        raise ParameterError("need Im z != 0")
    sphere = 2 * math.pi ** (d / 2) / math.gamma(d / 2)

    def g(r):
        return r ** (d - 1) / (((r * r - x) ** 2 + y * y) * (r * r + E) ** (2 * kappa))

    # the integrand peaks at r0 = sqrt(x) with width ~ y / (2 r0)
    pts = [0.0]
    if x > 0:
        r0 = math.sqrt(x)
        w = y / (2 * r0)
        for m in (-64, -8, -1, 0, 1, 8, 64):
            r = r0 + m * w
            if r > 0:
                pts.append(r)
    pts.append(max(pts) + 1.0)
    pts = sorted(set(pts))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(g, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
    total += integrate.quad(g, pts[-1], np.inf, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
    return sphere * total


def momentum_integral_exact_1d(z):
    """Closed form of the d = 1, kappa = 0 integral: pi Re(1/s) / |Im z| with s = sqrt(z), Im s > 0."""
    z = complex(z.real, abs(z.imag))
    s = np.sqrt(z)
    if s.imag < 0:
        s = -s
    return float(np.pi * (1 / s).real / abs(z.imag))


def momentum_limit_constant(d, kappa, E, x):
    """lim_{y -> 0} |y| * momentum_integral(d, kappa, E, x + iy) for x > 0.

    The Lorentzian in |p|^2 concentrates on the sphere |p| = sqrt(x) with
    mass pi / |y|, giving |S^(d-1)| (pi/2) x^((d-2)/2) / (x + E)^(2 kappa).
    """
    if not x > 0:
        raise ParameterError("need x > 0")
    sphere = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return sphere * (math.pi / 2) * x ** ((d - 2) / 2) / (x + E) ** (2 * kappa)
