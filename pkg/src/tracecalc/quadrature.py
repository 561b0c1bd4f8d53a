"""Node/weight sets over the complex plane for Cauchy-type area integrals.

The integrands carry 1/|y| weights near the real axis, so the upper
half-plane is cut into dyadic strips [y/2, y] and each strip gets
Gauss-Legendre panels in x whose width scales with the strip height.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError

__all__ = ["PlanarQuadrature", "gauss_legendre", "graded_panels"]


@lru_cache(maxsize=None)
def gauss_legendre(n):
    t, w = np.polynomial.legendre.leggauss(n)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def _panel_nodes(edges, n):
    t, w = gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (t + 1)).ravel(), (half * w).ravel()


def graded_panels(lo, hi, h, breakpoints=(), h_min=None, ratio=2.0):
    """Panel edges on [lo, hi]: width <= h, geometrically graded down to h_min at breakpoints."""
    if hi <= lo:
        raise ParameterError("empty interval")
    h_min = h if h_min is None else min(h_min, h)
    if not h_min > 0:
        raise ParameterError("panel widths must be positive")
    pts = {lo, hi}
    for b in breakpoints:
        if lo < b < hi:
            pts.add(b)
            step = h_min
            while step < h:
                for s in (b - step, b + step):
                    if lo < s < hi:
                        pts.add(s)
                step *= ratio
    pts = np.array(sorted(pts))
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((b - a) / h - 1e-9)))
        out.extend(np.linspace(a, b, m + 1)[1:])
    return np.asarray(out)


@dataclass
class PlanarQuadrature:
    """Dyadic-strip quadrature on {x_lo <= x <= x_hi, y_min <= |y| <= y_max}.

    Only upper half-plane nodes are stored when ``symmetric`` is set; callers
    add the mirrored contribution through conjugation symmetry.
    """

    x_lo: float
    x_hi: float
    y_max: float
    y_min: float
    y_nodes: int = 12
    x_nodes: int = 8
    panel_ratio: float = 2.0
    h_max: float = 0.1
    breakpoints: tuple = ()
    cone_points: tuple = ()
    top_panels: int = 4
    symmetric: bool = True
    strips: list = field(init=False, repr=False)
    z: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.y_min < self.y_max:
            raise ParameterError("need 0 < y_min < y_max")
        if self.x_hi <= self.x_lo:
            raise ParameterError("need x_lo < x_hi")
        strips = []
        top = self.y_max
        while top > self.y_min * (1 + 1e-12):
            strips.append((max(top / 2, self.y_min), top))
            top /= 2
        self.strips = strips
        zs, ws = [], []
        for lo, hi in strips:
            # the cutoff ramp lives in the top strip
            n_sub = self.top_panels if hi >= self.y_max else 1
            yy, wy = _panel_nodes(np.linspace(lo, hi, n_sub + 1), self.y_nodes)
            h = min(self.h_max, self.panel_ratio * hi)
            for y, w in zip(yy, wy):
                # the extension kinks along x = c +- y for every edge point c
                bps = list(self.breakpoints)
                for c in self.cone_points:
                    bps += [c - y, c + y]
                edges = graded_panels(self.x_lo, self.x_hi, h, bps, h_min=0.25 * lo)
                xx, wx = _panel_nodes(edges, self.x_nodes)
                zs.append(xx + 1j * y)
                ws.append(wx * w)
        z = np.concatenate(zs)
        w = np.concatenate(ws)
        if not self.symmetric:
            z = np.concatenate([z, z.conj()])
            w = np.concatenate([w, w])
        self.z = z
        self.weights = w

    @classmethod
    def for_extension(cls, ext, y_min, **kw):
        """Cover the support rectangle of an almost-analytic extension."""
        kw.setdefault("breakpoints", ext.source.breakpoints)
        e = ext.source.edge
        kw.setdefault("cone_points", () if e is None else (e.a,))
        return cls(ext.x_lo, ext.x_hi, ext.y_max, y_min, **kw)

    @property
    def size(self):
        return self.z.size

    def refined(self):
        """Halve the inner cutoff and double the x-resolution of every strip."""
        return PlanarQuadrature(
            self.x_lo, self.x_hi, self.y_max, self.y_min / 2,
            y_nodes=self.y_nodes, x_nodes=self.x_nodes,
            panel_ratio=self.panel_ratio / 2, h_max=self.h_max / 2,
            breakpoints=self.breakpoints, cone_points=self.cone_points,
            top_panels=self.top_panels, symmetric=self.symmetric,
        )

    def check(self):
        assert np.all(np.abs(self.z.imag) >= self.y_min * (1 - 1e-12))
        assert np.all(self.weights > 0)
