"""Real potentials V on R^d and their l1(L2) norms."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import AccuracyError, DivergenceError, ParameterError
from .quadrature import gauss_legendre

__all__ = [
    "Potential",
    "Zero",
    "Gaussian",
    "Sech2",
    "CompactBump",
    "PowerDecay",
    "parse_potential",
    "l1L2_norm",
    "sqrt_abs",
    "signed_sqrt",
]

TAIL_RTOL = 1e-12


def _radius(x):
    x = np.asarray(x, dtype=float)
    return np.abs(x) if x.ndim <= 1 else np.sqrt(np.sum(x * x, axis=-1))


class Potential:
    """Radial potential (about ``center``); wells have positive ``depth``."""

    family = "abstract"

    def __init__(self, depth, center=0.0):
        self.depth = float(depth)
        self.center = center

    def profile(self, r):
        raise NotImplementedError

    def __call__(self, x):
        """V at points x: shape (n,) in d = 1 or (n, d)."""
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center, dtype=float)
        return self.profile(_radius(x - c))

    def negligible_radius(self, rtol=TAIL_RTOL):
        """Radius beyond which |V| < rtol * depth (about the center)."""
        raise NotImplementedError

    @property
    def compact(self):
        return False

    @property
    def is_zero(self):
        return self.depth == 0.0

    def integral_1d(self):
        """int_R V dx for d = 1."""
        from scipy.integrate import quad

        R = self.negligible_radius(1e-16)
        c = float(np.atleast_1d(self.center)[0])
        return quad(lambda t: float(self(np.array([t]))[0]), c - R, c + R, limit=400, epsabs=1e-13)[0]

    def spec(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.spec()}>"


class Zero(Potential):
    family = "zero"

    def __init__(self):
        super().__init__(0.0)

    def profile(self, r):
        return np.zeros_like(r)

    def negligible_radius(self, rtol=TAIL_RTOL):
        return 0.0

    @property
    def compact(self):
        return True

    def spec(self):
        return "zero"


class Gaussian(Potential):
    """-depth * exp(-r^2 / width^2)."""

    family = "gaussian"

    def __init__(self, depth, width, center=0.0):
        super().__init__(depth, center)
        if width <= 0:
            raise ParameterError("gaussian width must be positive")
        self.width = float(width)

    def profile(self, r):
        return -self.depth * np.exp(-((r / self.width) ** 2))

    def negligible_radius(self, rtol=TAIL_RTOL):
        return self.width * math.sqrt(math.log(1 / rtol)) if self.depth else 0.0

    def spec(self):
        return f"gaussian depth={self.depth:g} width={self.width:g} center={self.center}"


class Sech2(Potential):
    """-depth * sech(r / width)^2."""

    family = "sech2"

    def __init__(self, depth, width):
        super().__init__(depth, 0.0)
        if width <= 0:
            raise ParameterError("sech2 width must be positive")
        self.width = float(width)

    def profile(self, r):
        u = np.minimum(r / self.width, 350.0)
        return -self.depth / np.cosh(u) ** 2

    def negligible_radius(self, rtol=TAIL_RTOL):
        # sech^2 u <= 4 exp(-2u)
        return self.width * math.log(4 / rtol) / 2 if self.depth else 0.0

    def spec(self):
        return f"sech2 depth={self.depth:g} width={self.width:g}"


class CompactBump(Potential):
    """-depth * (1 - r^2 / radius^2)^2 inside the ball of ``radius``, 0 outside."""

    family = "compact_bump"

    def __init__(self, depth, radius, center=0.0):
        super().__init__(depth, center)
        if radius <= 0:
            raise ParameterError("compact_bump radius must be positive")
        self.radius = float(radius)

    def profile(self, r):
        u = np.clip(1 - (r / self.radius) ** 2, 0.0, None)
        return -self.depth * u * u

    def negligible_radius(self, rtol=TAIL_RTOL):
        return self.radius

    @property
    def compact(self):
        return True

    def spec(self):
        return f"compact_bump depth={self.depth:g} radius={self.radius:g} center={self.center}"


class PowerDecay(Potential):
    """-depth * (1 + r)^(-rho)."""

    family = "power_decay"

    def __init__(self, depth, rho):
        super().__init__(depth, 0.0)
        if rho <= 0:
            raise ParameterError("power_decay needs rho > 0")
        self.rho = float(rho)

    def profile(self, r):
        return -self.depth * (1 + r) ** (-self.rho)

    def negligible_radius(self, rtol=TAIL_RTOL):
        return rtol ** (-1 / self.rho) - 1 if self.depth else 0.0

    def spec(self):
        return f"power_decay depth={self.depth:g} rho={self.rho:g}"


_FAMILIES = {
    "zero": (Zero, ()),
    "gaussian": (Gaussian, ("depth", "width")),
    "sech2": (Sech2, ("depth", "width")),
    "compact_bump": (CompactBump, ("depth", "radius")),
    "power_decay": (PowerDecay, ("depth", "rho")),
}


def parse_potential(text):
    """``family key=value ...``, e.g. ``sech2 depth=3 width=1``."""
    parts = text.split()
    if not parts:
        raise ParameterError("empty potential spec")
    fam = parts[0]
    if fam not in _FAMILIES:
        raise ParameterError(f"unknown potential family {fam!r}; valid: {', '.join(_FAMILIES)}")
    cls, keys = _FAMILIES[fam]
    args = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ParameterError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        args[k] = v
    optional = ("center",) if fam in ("gaussian", "compact_bump") else ()
    missing = [k for k in keys if k not in args]
    extra = [k for k in args if k not in keys + optional]
    if missing or extra:
        raise ParameterError(f"{fam}: missing {missing} / unknown {extra}")
    vals = [float(args[k]) for k in keys]
    if "center" in args:
        c = tuple(float(v) for v in args["center"].split(","))
        return cls(*vals, center=c[0] if len(c) == 1 else c)
    return cls(*vals)


def sqrt_abs(v):
    return np.sqrt(np.abs(v))


def signed_sqrt(v):
    """sgn(V) sqrt|V| with sgn(0) = 0, so signed_sqrt(V) * sqrt_abs(V) = V."""
    return np.sign(v) * np.sqrt(np.abs(v))


# --------------------------------------------------------------------------
# l1(L2) norm over the unit-cube lattice


def _cube_nodes(d, n):
    t, w = gauss_legendre(n)
    t = t / 2
    w = w / 2
    pts = np.array(list(itertools.product(t, repeat=d)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    return pts, wts


def _cube_l2(V, centers, d, pts, wts):
    x = centers[:, None, :] + pts[None, :, :]
    vals = V(x.reshape(-1, d)).reshape(x.shape[:2]) if d > 1 else V(x.reshape(-1)).reshape(x.shape[:2])
    return np.sqrt(np.sum(wts * vals**2, axis=1))


def _shell(m, d):
    """Integer points with max-norm exactly m."""
    if m == 0:
        return np.zeros((1, d), dtype=int)
    rng = np.arange(-m, m + 1)
    grid = np.array(list(itertools.product(rng, repeat=d)))
    return grid[np.max(np.abs(grid), axis=1) == m]


def l1L2_norm(V: Potential, d: int, rtol=1e-10, max_shells=2_000_000):
    """sum_n (int_{Q_n} |V|^2)^(1/2) over unit cubes Q_n = n + (-1/2, 1/2)^d.

    Shells {|n|_inf = m} are added until a tail bound falls below ``rtol``
    times the running total. Power decay is summable only for rho > d.
    """
    if d < 1:
        raise ParameterError("dimension must be >= 1")
    if isinstance(V, PowerDecay) and V.rho <= d:
        raise DivergenceError(f"power_decay with rho={V.rho:g} <= d={d} is not in l1(L2): the cube sum diverges")
    if V.is_zero:
        return 0.0
    n_gl = 32 if d == 1 else (12 if d == 2 else 8)
    pts, wts = _cube_nodes(d, n_gl)
    c = np.atleast_1d(np.asarray(V.center, dtype=float))
    R = V.negligible_radius(1e-16)
    block = 4096 if d == 1 else 1
    total = 0.0
    m = 0
    while m < max_shells:
        ms = np.arange(m, m + block)
        if d == 1:
            centers = np.concatenate([ms, -ms[ms > 0]]).astype(float)[:, None]
        else:
            centers = _shell(m, d).astype(float)
        if d == 1 and isinstance(V, CompactBump):
            # split cubes at the support edge so the C^1 kink is integrated exactly
            total += sum(_cube_l2_split(V, ctr[0]) for ctr in centers)
        else:
            total += float(np.sum(_cube_l2(V, centers, d, pts, wts)))
        last = m + block - 1
        m += block
        if isinstance(V, PowerDecay):
            # per-cube norm <= depth (last + 1/2)^(-rho) beyond the last shell
            tail = abs(V.depth) * d * 2**d * (last + 0.5) ** (d - V.rho) / (V.rho - d)
            if tail < rtol * total:
                return total
        elif last - 1 > np.max(np.abs(c)) + R:
            return total
    raise AccuracyError(f"l1(L2) sum not converged after {max_shells} shells", last=total)


def _cube_l2_split(V, center):
    lo, hi = center - 0.5, center + 0.5
    c = float(np.atleast_1d(V.center)[0])
    cuts = sorted({lo, hi} | {p for p in (c - V.radius, c + V.radius) if lo < p < hi})
    t, w = gauss_legendre(32)
    s = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        x = a + (b - a) * (t + 1) / 2
        s += (b - a) / 2 * np.sum(w * V(x) ** 2)
    return math.sqrt(s)
