"""Scalar model functions f with closed-form derivatives.

Every function knows its (at most one) singular edge, so quadrature
routines can split integrals there and use a Jacobi weight for the
``|lambda - a|**gamma`` factor instead of brute-force refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, poch

from .errors import DomainError, ParameterError

__all__ = [
    "Edge",
    "ModelFunction",
    "EdgePower",
    "IndicatorBelow",
    "SmoothBump",
    "Window",
    "CutoffProduct",
    "Polynomial",
    "edge_power",
    "indicator_below",
    "smooth_bump",
    "window",
    "cutoff_product",
    "parse_function",
]


@dataclass(frozen=True)
class Edge:
    """f(lam) = (a - lam)**gamma * g(lam) for lam < a and 0 for lam > a."""

    a: float
    gamma: float
    side: str = "minus"


def _asfloat(lam):
    return np.asarray(lam, dtype=float)


def _ret(lam, out):
    return float(out.reshape(())) if np.ndim(lam) == 0 else out


class ModelFunction:
    """Base class. Subclasses implement ``_eval`` and ``_deriv``."""

    kind = "abstract"
    n_max = 2
    smooth_order = math.inf
    edge: Edge | None = None
    support = (-math.inf, math.inf)

    def __call__(self, lam):
        lam = _asfloat(lam)
        return _ret(lam, self._eval(lam.ravel()).reshape(lam.shape))

    def derivative(self, lam, order=1):
        if order == 0:
            return self(lam)
        if not 1 <= order <= self.n_max:
            raise ParameterError(f"derivative order {order} not available for {self.kind} (n_max={self.n_max})")
        lam = _asfloat(lam)
        return _ret(lam, self._deriv(lam.ravel(), order).reshape(lam.shape))

    def regular_part(self, lam):
        """Smooth factor g with f = (a - lam)_+**gamma * g; f itself if there is no edge."""
        lam = _asfloat(lam)
        return self._regular(lam.ravel()).reshape(lam.shape)

    def _regular(self, lam):
        return self._eval(lam)

    @property
    def compact(self):
        lo, hi = self.support
        return math.isfinite(lo) and math.isfinite(hi)

    @property
    def smooth_breakpoints(self):
        """Points where f is C-infinity but not analytic (flat joins)."""
        return ()

    @property
    def breakpoints(self):
        pts = [p for p in self.support if math.isfinite(p)]
        if self.edge is not None:
            pts.append(self.edge.a)
        return tuple(sorted(set(pts)))

    def spec(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.spec()}>"


class EdgePower(ModelFunction):
    """(lam - a)_-**gamma = (a - lam)**gamma for lam < a, else 0."""

    kind = "edge_power"

    def __init__(self, gamma, a, side="minus"):
        if gamma < 0:
            raise ParameterError("edge_power needs gamma >= 0")
        if side != "minus":
            raise ParameterError("only side=minus edge powers are supported")
        self.gamma = float(gamma)
        self.a = float(a)
        self.edge = Edge(self.a, self.gamma, side)
        self.support = (-math.inf, self.a)

    def _eval(self, lam):
        d = np.clip(self.a - lam, 0.0, None)
        if self.gamma == 0.0:
            return np.where(lam < self.a, 1.0, 0.0)
        return d**self.gamma

    def _deriv(self, lam, order):
        at_edge = lam == self.a
        if np.any(at_edge) and (self.gamma == 0.0 or self.gamma < order):
            raise DomainError(f"{self.kind} is not {order}-times differentiable at a={self.a}")
        d = self.a - lam
        inside = d > 0
        dd = np.where(inside, d, 1.0)
        coef = (-1.0) ** order * poch(self.gamma - order + 1, order)
        return np.where(inside, coef * dd ** (self.gamma - order), 0.0)

    def _regular(self, lam):
        return np.ones_like(lam)

    def spec(self):
        return f"edge_power gamma={self.gamma:g} a={self.a:g}"


class IndicatorBelow(EdgePower):
    """1 on (-inf, a), 0 on [a, inf)."""

    kind = "indicator_below"

    def __init__(self, a):
        super().__init__(0.0, a)

    def spec(self):
        return f"indicator_below a={self.a:g}"


class SmoothBump(ModelFunction):
    """exp(-1/(1 - u**2)) * e with u = (lam - center)/width; equals 1 at the center."""

    kind = "smooth_bump"

    def __init__(self, center, width):
        if width <= 0:
            raise ParameterError("smooth_bump width must be positive")
        self.center = float(center)
        self.width = float(width)
        self.support = (self.center - self.width, self.center + self.width)

    def _parts(self, lam):
        u = (lam - self.center) / self.width
        inside = np.abs(u) < 1
        us = np.where(inside, u, 0.0)
        q = 1.0 - us * us
        f = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        return u, us, q, inside, f

    def _eval(self, lam):
        return self._parts(lam)[-1]

    def _deriv(self, lam, order):
        _, u, q, inside, f = self._parts(lam)
        g1 = -2.0 * u / q**2
        if order == 1:
            return np.where(inside, f * g1, 0.0) / self.width
        g2 = -2.0 / q**2 - 8.0 * u * u / q**3
        return np.where(inside, f * (g1 * g1 + g2), 0.0) / self.width**2

    @property
    def smooth_breakpoints(self):
        return self.support

    def spec(self):
        return f"smooth_bump center={self.center:g} width={self.width:g}"


def _smoothstep(u, order=0):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, and its derivatives."""
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    us = np.where(inside, u, 0.5)
    r = 1.0 / (1.0 - us) - 1.0 / us
    s = expit(r)
    if order == 0:
        return np.where(u >= 1, 1.0, np.where(inside, s, 0.0))
    s1 = s * (1.0 - s)
    r1 = 1.0 / (1.0 - us) ** 2 + 1.0 / us**2
    if order == 1:
        return np.where(inside, s1 * r1, 0.0)
    if order == 2:
        r2 = 2.0 / (1.0 - us) ** 3 - 2.0 / us**3
        s2 = s1 * (1.0 - 2.0 * s)
        return np.where(inside, s2 * r1 * r1 + s1 * r2, 0.0)
    raise ParameterError("smoothstep derivatives available up to order 2")


class Window(ModelFunction):
    """Smooth plateau: 0 outside [lo, hi], 1 on [lo + ramp, hi - ramp]."""

    kind = "window"

    def __init__(self, lo, hi, ramp):
        if not (ramp > 0 and lo + 2 * ramp <= hi):
            raise ParameterError("window needs ramp > 0 and lo + 2*ramp <= hi")
        self.lo, self.hi, self.ramp = float(lo), float(hi), float(ramp)
        self.support = (self.lo, self.hi)

    def _eval(self, lam):
        return _smoothstep((lam - self.lo) / self.ramp) * _smoothstep((self.hi - lam) / self.ramp)

    def _deriv(self, lam, order):
        ul = (lam - self.lo) / self.ramp
        ur = (self.hi - lam) / self.ramp
        l0, r0 = _smoothstep(ul), _smoothstep(ur)
        l1, r1 = _smoothstep(ul, 1) / self.ramp, -_smoothstep(ur, 1) / self.ramp
        if order == 1:
            return l1 * r0 + l0 * r1
        l2, r2 = _smoothstep(ul, 2) / self.ramp**2, _smoothstep(ur, 2) / self.ramp**2
        return l2 * r0 + 2 * l1 * r1 + l0 * r2

    @property
    def smooth_breakpoints(self):
        return (self.lo, self.lo + self.ramp, self.hi - self.ramp, self.hi)

    @property
    def plateau(self):
        return (self.lo + self.ramp, self.hi - self.ramp)

    def spec(self):
        return f"window lo={self.lo:g} hi={self.hi:g} ramp={self.ramp:g}"


class CutoffProduct(ModelFunction):
    """base * window, or base * (1 - window) when ``complement`` is set."""

    kind = "cutoff_product"

    def __init__(self, base, win, complement=False):
        if not isinstance(win, Window):
            raise ParameterError("cutoff_product window must be a Window")
        self.base = base
        self.window = win
        self.complement = bool(complement)
        self.n_max = min(base.n_max, win.n_max)
        self.smooth_order = base.smooth_order
        if complement:
            self.support = base.support
            self.edge = None if _edge_in_plateau(base, win) else base.edge
        else:
            lo = max(base.support[0], win.lo)
            hi = min(base.support[1], win.hi)
            self.support = (lo, hi)
            e = base.edge
            self.edge = e if e is not None and win.lo < e.a < win.hi else None

    def _w(self, lam, order=0):
        w = self.window(lam) if order == 0 else self.window.derivative(lam, order)
        if self.complement:
            return 1.0 - w if order == 0 else -w
        return w

    def _eval(self, lam):
        return self.base._eval(lam) * self._w(lam)

    def _deriv(self, lam, order):
        b0 = self.base._eval(lam)
        w0 = self._w(lam)
        # only differentiate the base where the window does not vanish
        live = w0 != 0
        b = [np.zeros_like(lam) for _ in range(order)]
        for k in range(order):
            b[k][live] = self.base._deriv(lam[live], k + 1)
        w1 = self._w(lam, 1)
        if order == 1:
            return b[0] * w0 + b0 * w1
        return b[1] * w0 + 2 * b[0] * w1 + b0 * self._w(lam, 2)

    @property
    def smooth_breakpoints(self):
        return tuple(sorted(set(self.base.smooth_breakpoints) | set(self.window.smooth_breakpoints)))

    def _regular(self, lam):
        if self.edge is None:
            return self._eval(lam)
        return self.base._regular(lam) * self._w(lam)

    def spec(self):
        tag = "complement_product" if self.complement else "cutoff_product"
        return f"{tag}({self.base.spec()} | {self.window.spec()})"


def _edge_in_plateau(base, win):
    e = base.edge
    if e is None:
        return True
    lo, hi = win.plateau
    return lo < e.a < hi


class Polynomial(ModelFunction):
    """Polynomial in lam; used for algebraic identities of the spectral calculus."""

    kind = "polynomial"

    def __init__(self, coeffs):
        self.poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        self.n_max = 8

    def _eval(self, lam):
        return self.poly(lam)

    def _deriv(self, lam, order):
        return self.poly.deriv(order)(lam)

    def __mul__(self, other):
        return Polynomial((self.poly * other.poly).coef)

    def spec(self):
        return "polynomial coeffs=" + ",".join(f"{c:g}" for c in self.poly.coef)


def edge_power(gamma, a):
    return EdgePower(gamma, a)


def indicator_below(a):
    return IndicatorBelow(a)


def smooth_bump(center, width):
    return SmoothBump(center, width)


def window(lo, hi, ramp):
    return Window(lo, hi, ramp)


def cutoff_product(base, win):
    return CutoffProduct(base, win)


_KINDS = {
    "edge_power": (EdgePower, ("gamma", "a")),
    "indicator_below": (IndicatorBelow, ("a",)),
    "smooth_bump": (SmoothBump, ("center", "width")),
    "window": (Window, ("lo", "hi", "ramp")),
}


def parse_function(text):
    """Parse ``kind key=value ...`` with an optional ``window=lo:hi:ramp`` cutoff.

    >>> parse_function("edge_power gamma=0.5 a=1.0")
    <edge_power gamma=0.5 a=1>
    """
    parts = text.split()
    if not parts:
        raise ParameterError("empty function spec")
    kind, args = parts[0], {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ParameterError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        args[k] = v
    if kind not in _KINDS:
        raise ParameterError(f"unknown function kind {kind!r}; valid: {', '.join(_KINDS)}")
    cls, keys = _KINDS[kind]
    win = args.pop("window", None)
    missing = [k for k in keys if k not in args]
    extra = [k for k in args if k not in keys]
    if missing or extra:
        raise ParameterError(f"{kind}: missing {missing} / unknown {extra}")
    f = cls(*(float(args[k]) for k in keys))
    if win is not None:
        lo, hi, ramp = (float(v) for v in win.split(":"))
        f = CutoffProduct(f, Window(lo, hi, ramp))
    return f
