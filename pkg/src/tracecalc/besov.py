"""Almost-analytic extensions, Dynkin integrals and difference-based Besov norms.

Extension used throughout: for y > 0

    F(x, y)  = int f(x - y t) Phi(t) dt,          f~ = chi(y) F
    omega    = dbar f~ = chi(y) omega_0 + (i/2) chi'(y) F,
    omega_0  = (1 / 2y) int f(x - y t) Psi'(t) dt,  Psi = (1 - i t) Phi,

with Phi = P * phi, phi the quartic bump 15/16 (1 - t^2)^2 on [-1, 1] and P a
polynomial chosen so that int t^k Phi = (-i)^k for k <= order.  Those are the
moments of a point mass at t = -i, so F reproduces the Taylor series
sum (iy)^k f^(k)(x) / k! up to the order and omega_0 = O(|y|^order) for
smooth f.  Only values of f are needed, which makes edge powers and jumps
cheap to extend.  The lower half-plane is filled by omega(conj z) = conj omega(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import roots_jacobi

from .errors import AccuracyError, ParameterError
from .functions import CutoffProduct, EdgePower, ModelFunction, Window, _smoothstep
from .quadrature import PlanarQuadrature, gauss_legendre, graded_panels

__all__ = [
    "BesovIndex",
    "AlmostAnalyticExtension",
    "build_extension",
    "kernel_integral",
    "cauchy_reconstruct",
    "dynkin_integral",
    "slice_values",
    "fit_scaling_exponent",
    "log_y_grid",
    "ScalingFit",
    "finite_difference_besov_norm",
    "BesovNormResult",
    "split_edge_function",
]

N_KERNEL = 40
SLICES_PER_DECADE = 16


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 1
    q: int = 1
    n: int | None = None

    def __post_init__(self):
        if self.s <= 0:
            raise ParameterError("Besov smoothness s must be positive")
        if self.p not in (1, math.inf):
            raise ParameterError("only p in {1, inf} is supported")
        if self.q != 1:
            raise ParameterError("only q = 1 is supported")
        if self.n is None:
            object.__setattr__(self, "n", math.floor(self.s) + 1)
        if self.n <= self.s:
            raise ParameterError(f"difference order n={self.n} must exceed s={self.s}")


# --------------------------------------------------------------------------
# kernel construction


def _bump_moment(m):
    # int_{-1}^{1} t^m (1 - t^2)^2 dt * 15/16
    if m % 2:
        return Fraction(0)
    return Fraction(15, 16) * 2 * (Fraction(1, m + 1) - Fraction(2, m + 3) + Fraction(1, m + 5))


def _solve_exact(a, b):
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                fac = m[r][c] / m[c][c]
                m[r] = [x - fac * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


@lru_cache(maxsize=None)
def _kernels(order):
    """Power-series coefficients of Phi and Psi' on [-1, 1]."""
    n = order + 1
    hank = [[_bump_moment(k + j) for j in range(n)] for k in range(n)]
    rhs_re = [Fraction([1, 0, -1, 0][k % 4]) for k in range(n)]
    rhs_im = [Fraction([0, -1, 0, 1][k % 4]) for k in range(n)]
    c_re = _solve_exact(hank, rhs_re)
    c_im = _solve_exact(hank, rhs_im)
    pcoef = [complex(float(r), float(i)) for r, i in zip(c_re, c_im)]
    phi = np.array([1.0, 0.0, -2.0, 0.0, 1.0]) * 15 / 16
    big_phi = P.polymul(np.array(pcoef), phi)
    psi = P.polymul(np.array([1.0, -1j]), big_phi)
    dpsi = P.polyder(psi)
    for arr in (big_phi, dpsi):
        arr.flags.writeable = False
    return big_phi, dpsi


@lru_cache(maxsize=None)
def _jacobi(n, beta):
    u, w = roots_jacobi(n, 0.0, beta)
    return u, w


def kernel_integral(f: ModelFunction, x, y, coef, n=N_KERNEL):
    """int_{-1}^{1} f(x - y t) p(t) dt for a polynomial p (power coefficients), y > 0.

    The t-interval is split wherever x - y t crosses a non-analytic point of
    f. At the edge t* = (x - a)/y the (t - t*)^gamma factor is absorbed into
    a Gauss-Jacobi rule; for -3 < t* < -1 the first piece is written as a
    difference of two Jacobi integrals anchored at t*.
    """
    x = np.asarray(x, dtype=float).ravel()
    t, w = gauss_legendre(n)
    e = f.edge
    lower = np.full(x.shape, -1.0)
    if e is not None:
        ts = (x - e.a) / y
        live = ts < 1.0
        x, ts = x[live], ts[live]
        lower = np.maximum(ts, -1.0)
    bps = np.asarray(f.smooth_breakpoints, dtype=float)
    cuts = np.clip((x[:, None] - bps[None, :]) / y, lower[:, None], 1.0)
    nodes = np.sort(np.concatenate([lower[:, None], cuts, np.ones((x.size, 1))], axis=1), axis=1)
    a, b = nodes[:, :-1], nodes[:, 1:]
    half = (b - a) / 2
    tt = a[..., None] + half[..., None] * (t + 1)
    vals = f(x[:, None, None] - y * tt) * P.polyval(tt, coef)
    pieces = half * (vals * w).sum(-1)
    if e is None:
        return pieces.sum(-1)
    # replace the first piece where the edge is within reach of the kernel
    near = ts >= -3.0
    if np.any(near):
        u, wj = _jacobi(n, e.gamma)
        k = np.argmax(b[near] > a[near], axis=1)
        rows = np.flatnonzero(near)
        xn, tn, top = x[near], ts[near], b[rows, k]

        def anchored(end):
            h = (end - tn) / 2
            tj = tn[:, None] + h[:, None] * (1 + u)
            g = f.regular_part(xn[:, None] - y * tj)
            return y**e.gamma * h ** (e.gamma + 1) * (g * P.polyval(tj, coef) * wj).sum(-1)

        first = anchored(top)
        outside = tn < -1.0
        if np.any(outside):
            first = first - np.where(outside, anchored(np.where(outside, -1.0, top)), 0.0)
        pieces[rows, k] = first
    out = np.zeros(live.shape, dtype=complex)
    out[live] = pieces.sum(-1)
    return out


# --------------------------------------------------------------------------
# extensions


@dataclass
class AlmostAnalyticExtension:
    """omega = dbar f~ for a compactly supported source, evaluable anywhere in C."""

    source: ModelFunction
    order: int
    pad: float
    y_max: float
    x_lo: float = field(init=False)
    x_hi: float = field(init=False)
    mollifier: str = "quartic bump 15/16 (1-t^2)^2, moment-matched to a point mass at -i"

    def __post_init__(self):
        lo, hi = self.source.support
        self.x_lo = lo - self.y_max
        self.x_hi = hi + self.y_max
        self._phi, self._dpsi = _kernels(self.order)

    def _chi(self, y, order=0):
        h = self.y_max / 2
        u = (y - h) / h
        if order == 0:
            return 1.0 - _smoothstep(u)
        return -_smoothstep(u, 1) / h

    def _upper(self, x, y):
        """omega at x + iy for one y > 0."""
        if y >= self.y_max:
            return np.zeros(np.shape(x), dtype=complex)
        x = np.asarray(x, dtype=float)
        inside = (x > self.source.support[0] - y) & (x < self.source.support[1] + y)
        out = np.zeros(x.shape, dtype=complex)
        if not np.any(inside):
            return out
        xi = x[inside]
        val = float(self._chi(y)) * kernel_integral(self.source, xi, y, self._dpsi) / (2 * y)
        dchi = float(self._chi(y, 1))
        if dchi != 0.0:
            val = val + 0.5j * dchi * kernel_integral(self.source, xi, y, self._phi)
        out[inside] = val
        return out

    def omega(self, z):
        """dbar f~ at complex points z (any shape)."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        ay = np.abs(flat.imag)
        ys, inv = np.unique(ay, return_inverse=True)
        for k, yv in enumerate(ys):
            if yv == 0.0 or yv >= self.y_max:
                continue
            idx = np.nonzero(inv == k)[0]
            out[idx] = self._upper(flat.real[idx], yv)
        lower = flat.imag < 0
        out[lower] = out[lower].conj()
        return out.reshape(z.shape)

    __call__ = omega

    def extension(self, z):
        """The extension f~ itself (for finite-difference checks of omega)."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for k, zz in enumerate(flat):
            yv = abs(zz.imag)
            if yv == 0.0:
                out[k] = self.source(zz.real)
                continue
            if yv >= self.y_max:
                out[k] = 0.0
                continue
            v = float(self._chi(yv)) * kernel_integral(self.source, np.array([zz.real]), yv, self._phi)[0]
            out[k] = v if zz.imag > 0 else np.conj(v)
        return out.reshape(z.shape)

    def __add__(self, other):
        return ExtensionSum((self, other))


@dataclass
class ExtensionSum:
    """Sum of extensions; omega is additive, so f1 + f2 is extended termwise."""

    parts: tuple

    @property
    def x_lo(self):
        return min(p.x_lo for p in self.parts)

    @property
    def x_hi(self):
        return max(p.x_hi for p in self.parts)

    @property
    def y_max(self):
        return max(p.y_max for p in self.parts)

    def omega(self, z):
        return sum(p.omega(z) for p in self.parts)

    __call__ = omega

    def __add__(self, other):
        return ExtensionSum(self.parts + (other,))


def build_extension(f: ModelFunction, order: int = 2, pad: float = 0.1, y_max: float | None = None):
    """Almost-analytic extension of compactly supported ``f``.

    ``y_max`` defaults to ``pad`` and may not exceed it: the kernel has
    x-width |y|, so the support of omega stays inside the pad-neighbourhood
    of supp f.
    """
    if order < 1:
        raise ParameterError("extension order must be >= 1")
    if order > f.smooth_order:
        raise ParameterError(f"order {order} exceeds the smoothness of {f.kind} away from its edge")
    if not f.compact:
        raise ParameterError(f"{f.kind} is not compactly supported; apply cutoff_product first")
    if pad <= 0:
        raise ParameterError("pad must be positive")
    y_max = pad if y_max is None else y_max
    if not 0 < y_max <= pad:
        raise ParameterError("need 0 < y_max <= pad")
    return AlmostAnalyticExtension(f, int(order), float(pad), float(y_max))


# --------------------------------------------------------------------------
# reconstruction and Dynkin integrals


def cauchy_reconstruct(ext, lam, quad: PlanarQuadrature, imag_tol=1e-8):
    """(1/pi) * area integral of omega(z) / (lam - z), by quadrature.

    ``lam`` may be an array; omega is sampled once for all points.
    """
    c = quad.weights * ext.omega(quad.z)
    keep = c != 0
    c, z = c[keep], quad.z[keep]
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    val = np.array([np.sum(c / (l - z)) for l in lam_arr]) / np.pi
    if quad.symmetric:
        val = 2 * val.real
    else:
        bad = np.abs(val.imag) > imag_tol * np.maximum(1.0, np.abs(val.real))
        if np.any(bad):
            raise AccuracyError(f"reconstruction has imaginary part {val.imag[bad][0]:.3e}")
        val = val.real
    return float(val[0]) if np.ndim(lam) == 0 else val


def _slice_x_nodes(ext, y, x_nodes=16):
    lo, hi = ext.x_lo, ext.x_hi
    src = ext.source
    bps = list(src.breakpoints)
    if src.edge is not None:
        bps += [src.edge.a - y, src.edge.a + y]
    # omega_0 is a |y|-wide average, so its fine structure sits within ~y of the breakpoints
    edges = graded_panels(lo, hi, h=min(0.05, (hi - lo) / 8), breakpoints=bps, h_min=y / 4)
    t, w = gauss_legendre(x_nodes)
    a, b = edges[:-1, None], edges[1:, None]
    half = (b - a) / 2
    return (a + half * (t + 1)).ravel(), (half * w).ravel()


def slice_values(ext, y, mode="L1_slice"):
    """L1_slice(y) = int |omega(x+iy)| dx or sup_slice(y) = sup_x |omega(x+iy)|."""
    xs, ws = _slice_x_nodes(ext, y)
    vals = np.abs(ext.omega(xs + 1j * y))
    if mode == "L1_slice":
        return float((vals * ws).sum())
    if mode == "sup_slice":
        return float(vals.max())
    raise ParameterError(f"unknown slice mode {mode!r}")


def _log_y_nodes(y_lo, y_hi, per_decade=SLICES_PER_DECADE, strip_panels=4):
    """Log-y nodes on [y_lo, y_hi]; panels are aligned at y_hi/2 so that the
    cutoff strip [y_hi/2, y_hi] always gets its own panels."""
    top = np.log(y_hi)
    mid = np.log(y_hi / 2)
    lo = np.log(y_lo)
    if lo >= mid:
        edges = np.linspace(lo, top, strip_panels + 1)
    else:
        strip = np.linspace(mid, top, strip_panels + 1)
        dec = np.log(10.0)
        n_dec = int(np.ceil((mid - lo) / dec - 1e-9))
        below = mid - dec * np.arange(n_dec, 0, -1)
        below[0] = lo
        edges = np.concatenate([below, strip])
    u, w = _panel_nodes_log(edges, per_decade)
    return np.exp(u), w


def _panel_nodes_log(edges, n):
    t, w = gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = (b - a) / 2
    return (a + half * (t + 1)).ravel(), (half * w).ravel()


def dynkin_integral(ext, idx: BesovIndex, y_min: float):
    """int_{|y| >= y_min} (int |omega| dx  or  sup_x |omega|) dy / |y|^s.

    Both half-planes are included. Divergence shows up as growth under
    y_min refinement and is left to the caller to interpret.
    """
    if not 0 < y_min < ext.y_max:
        raise ParameterError("need 0 < y_min < y_max")
    mode = "L1_slice" if idx.p == 1 else "sup_slice"
    ys, wu = _log_y_nodes(y_min, ext.y_max)
    vals = np.array([slice_values(ext, y, mode) for y in ys])
    # dy = y du with u = log y
    return float(2 * np.sum(wu * vals * ys ** (1 - idx.s)))


@dataclass
class ScalingFit:
    exponent: float
    residual: float
    low_confidence: bool
    y: np.ndarray
    values: np.ndarray


def fit_scaling_exponent(ext, mode, y_grid, residual_threshold=0.05):
    """Least-squares slope of log(slice) against log(y)."""
    y = np.asarray(y_grid, dtype=float)
    if y.size < 3 or np.log10(y.max() / y.min()) < 2 - 1e-9:
        raise ParameterError("y_grid must span at least two decades")
    vals = np.array([slice_values(ext, yv, mode) for yv in y])
    ly, lv = np.log(y), np.log(vals)
    A = np.vstack([ly, np.ones_like(ly)]).T
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - lv) ** 2)))
    return ScalingFit(float(coef[0]), resid, resid > residual_threshold, y, vals)


def log_y_grid(y_hi, y_lo, per_decade=SLICES_PER_DECADE):
    """Decreasing logarithmic grid with ``per_decade`` points per decade."""
    n = int(round(np.log10(y_hi / y_lo) * per_decade)) + 1
    return np.logspace(np.log10(y_hi), np.log10(y_lo), n)


# --------------------------------------------------------------------------
# finite-difference Besov norms


@dataclass
class BesovNormResult:
    value: float
    small_t_exponent: float
    n: int
    t: np.ndarray
    diff_norms: np.ndarray


def _binom_row(n):
    return np.array([math.comb(n, k) * (-1) ** (n - k) for k in range(n + 1)], dtype=float)


def difference_norm(f: ModelFunction, n: int, t: float, p=1, nodes=16):
    """||Delta_t^n f||_{L^p} with panels graded at every shifted breakpoint."""
    t = abs(t)
    coeffs = _binom_row(n)
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError("finite-difference norms need a compactly supported function")
    bps = sorted({b - k * t for b in f.breakpoints for k in range(n + 1)})
    a, b = lo - n * t, hi
    edges = graded_panels(a, b, h=min(0.02, (b - a) / 16), breakpoints=bps, h_min=max(t, 1e-14) / 8)
    gt, gw = gauss_legendre(nodes)
    left, right = edges[:-1, None], edges[1:, None]
    half = (right - left) / 2
    lam = (left + half * (gt + 1)).ravel()
    wts = (half * gw).ravel()
    d = sum(c * f(lam + k * t) for k, c in enumerate(coeffs))
    if p == 1:
        return float(np.sum(np.abs(d) * wts))
    lam_dense = np.concatenate([lam, np.array(bps)])
    d2 = sum(c * f(lam_dense + k * t) for k, c in enumerate(coeffs))
    return float(np.max(np.abs(np.concatenate([d, d2]))))


def finite_difference_besov_norm(f: ModelFunction, idx: BesovIndex, t_min: float, t_max: float,
                                 rtol=1e-4, max_rounds=8):
    """int_{t_min <= |t| <= t_max} ||Delta_t^n f||_{L^p} / |t|^{1+s} dt.

    Integrated in u = log t with Gauss-Legendre panels, doubling the panel
    count until two successive values agree to ``rtol``. Also fits the
    small-t exponent of ||Delta_t^n f||_{L^p} on the lowest decade.
    """
    if not 0 < t_min < t_max:
        raise ParameterError("need 0 < t_min < t_max")
    lo, hi = np.log(t_min), np.log(t_max)
    panels = max(1, int(np.ceil(np.log10(t_max / t_min))))
    prev = None
    for _ in range(max_rounds):
        edges = np.linspace(lo, hi, panels + 1)
        u, w = _panel_nodes_log(edges, 8)
        ts = np.exp(u)
        norms = np.array([difference_norm(f, idx.n, tv, idx.p) for tv in ts])
        val = 2 * float(np.sum(w * norms * ts ** (-idx.s)))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            break
        prev = val
        panels *= 2
    else:
        raise AccuracyError("Besov t-quadrature did not converge", previous=prev, last=val)
    t_fit = np.logspace(np.log10(t_min), np.log10(min(t_max, 10 * t_min)), 9)
    nf = np.array([difference_norm(f, idx.n, tv, idx.p) for tv in t_fit])
    mask = nf > 0
    if mask.sum() >= 2:
        slope = float(np.polyfit(np.log(t_fit[mask]), np.log(nf[mask]), 1)[0])
    else:
        slope = math.inf
    order = np.argsort(ts)
    return BesovNormResult(val, slope, idx.n, ts[order], norms[order])


# --------------------------------------------------------------------------


def split_edge_function(f: EdgePower, win):
    """f_{gamma,a} = f0 + f1 with f0 supported in the window, f1 smooth there and 0 beyond a."""
    if not isinstance(f, EdgePower):
        raise ParameterError("split_edge_function expects an edge_power function")
    w_lo, w_hi = win
    if not 0 < w_lo < f.a < w_hi:
        raise ParameterError(f"edge a={f.a} must lie inside the window ({w_lo}, {w_hi}) within (0, inf)")
    ramp = min(f.a - w_lo, w_hi - f.a) / 2
    wfun = Window(w_lo, w_hi, ramp)
    return CutoffProduct(f, wfun), CutoffProduct(f, wfun, complement=True)
