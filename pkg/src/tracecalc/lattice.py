"""Finite-difference Schrodinger operators on Dirichlet boxes, and the
infinite one-dimensional lattice with its closed-form free Green's function.

Box sites are x_j = -L + j h, j = 0 .. 2L/h, in each coordinate; the
Dirichlet condition puts the zero boundary values at +-(L + h).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .errors import ParameterError, ResourceError
from .hs import IntegrandProfile, profile_from_s1
from .linalg import HermitianOperator
from .potentials import Potential, sqrt_abs

__all__ = [
    "LatticeSpec",
    "discretize",
    "dirichlet_eigenvalues",
    "box_eigenvalues_1d",
    "box_eigh_1d",
    "LatticeLine",
    "lattice_integrand_profile",
    "lattice_lap_profile",
]

MAX_SITES = 4096


@dataclass(frozen=True)
class LatticeSpec:
    d: int
    L: float
    h: float
    max_sites: int = MAX_SITES

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ParameterError("lattice dimension must be 1, 2 or 3")
        if not (self.h > 0 and self.L > 0):
            raise ParameterError("need L > 0 and h > 0")
        r = self.L / self.h
        if abs(r - round(r)) > 1e-9 * max(1.0, r):
            raise ParameterError(f"L/h = {r:g} must be an integer")
        if self.n_sites > self.max_sites:
            raise ResourceError(f"{self.n_sites} sites exceed the cap of {self.max_sites}")

    @property
    def n_side(self):
        return 2 * int(round(self.L / self.h)) + 1

    @property
    def n_sites(self):
        return self.n_side**self.d

    @property
    def volume(self):
        """Site count times h^d, i.e. (2L + h)^d."""
        return self.n_sites * self.h**self.d

    def axis(self):
        return -self.L + self.h * np.arange(self.n_side)

    def points(self):
        ax = self.axis()
        if self.d == 1:
            return ax
        grids = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


def _laplacian_1d(n, h):
    return sparse.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)], [-1, 0, 1]) / h**2


def _free_matrix(spec):
    n, h = spec.n_side, spec.h
    T = _laplacian_1d(n, h)
    eye = sparse.identity(n)
    if spec.d == 1:
        M = T
    elif spec.d == 2:
        M = sparse.kron(T, eye) + sparse.kron(eye, T)
    else:
        M = (sparse.kron(sparse.kron(T, eye), eye) + sparse.kron(sparse.kron(eye, T), eye)
             + sparse.kron(sparse.kron(eye, eye), T))
    return M.toarray()


def discretize(spec: LatticeSpec, V: Potential):
    """(H, H0) with H0 the Dirichlet lattice Laplacian and H = H0 + diag V."""
    H0m = _free_matrix(spec)
    v = V(spec.points())
    H0 = HermitianOperator(H0m, label="H0")
    H = HermitianOperator(H0m + np.diag(v), label="H")
    return H, H0


def dirichlet_eigenvalues(spec: LatticeSpec):
    """Closed form: sums over coordinates of (2/h^2)(1 - cos(pi m h / (2L + 2h)))."""
    n, h = spec.n_side, spec.h
    m = np.arange(1, n + 1)
    e1 = 2 / h**2 * (1 - np.cos(np.pi * m / (n + 1)))
    e = e1
    for _ in range(spec.d - 1):
        e = (e[:, None] + e1[None, :]).ravel()
    return np.sort(e)


def _tridiag(spec, V):
    if spec.d != 1:
        raise ParameterError("tridiagonal path is one-dimensional")
    n, h = spec.n_side, spec.h
    diag = np.full(n, 2 / h**2) + V(spec.axis())
    off = np.full(n - 1, -1 / h**2)
    return diag, off


def box_eigenvalues_1d(spec: LatticeSpec, V: Potential):
    """Eigenvalues of the 1D box operator without forming the dense matrix."""
    d, e = _tridiag(spec, V)
    return sla.eigvalsh_tridiagonal(d, e)


def box_eigh_1d(spec: LatticeSpec, V: Potential):
    d, e = _tridiag(spec, V)
    return sla.eigh_tridiagonal(d, e)


# --------------------------------------------------------------------------
# infinite lattice h Z


class LatticeLine:
    """H0 = -Delta_h on h Z; perturbations live on finitely many sites.

    Free Green's function: G0(n, m; z) = h^2 zeta^|n-m| / (1/zeta - zeta)
    with zeta + 1/zeta = 2 - z h^2 and |zeta| < 1.
    """

    def __init__(self, h):
        if h <= 0:
            raise ParameterError("need h > 0")
        self.h = float(h)

    def zeta(self, z):
        b = 2 - complex(z) * self.h**2
        r = np.sqrt(b * b - 4 + 0j)
        zeta = (b - r) / 2
        if abs(zeta) >= 1:
            zeta = (b + r) / 2
        return zeta

    def green(self, z, sep):
        zeta = self.zeta(z)
        return self.h**2 * zeta ** np.abs(sep) / (1 / zeta - zeta)

    def green_block(self, z, idx):
        idx = np.asarray(idx)
        return self.green(z, idx[:, None] - idx[None, :])

    def support(self, V: Potential, rtol=1e-14):
        """Site indices j (x = j h) where V is numerically non-zero."""
        R = V.negligible_radius(rtol)
        c = float(np.atleast_1d(V.center)[0])
        jmin = math.floor((c - R) / self.h)
        jmax = math.ceil((c + R) / self.h)
        idx = np.arange(jmin, jmax + 1)
        v = V(idx * self.h)
        keep = v != 0
        return idx[keep], v[keep]

    def resolvent_difference_s1(self, z, idx, v):
        """||R(z) - R0(z)||_S1 for H = H0 + V, V supported on ``idx``.

        R - R0 = -A M B with A = R0[:, S], B = R0[S, :] and
        M = V (1 + G V)^(-1), G = G0[S, S]. The Gram matrices A*A and BB*
        both equal Im G / Im z, so the trace norm reduces to that of
        K M K with K = (Im G / Im z)^(1/2).
        """
        z = complex(z)
        if z.imag == 0:
            raise ParameterError("need Im z != 0")
        if z.imag < 0:
            z = z.conjugate()
        if len(idx) == 0:
            return 0.0
        G = self.green_block(z, idx)
        M = np.diag(v) @ np.linalg.inv(np.eye(len(idx)) + G * v[None, :])
        gram = (G.imag + G.imag.T) / (2 * z.imag)
        w, U = np.linalg.eigh(gram)
        K = (U * np.sqrt(np.clip(w, 0, None))) @ U.T
        return float(np.linalg.svd(K @ M @ K, compute_uv=False).sum())

    def weighted_resolvent_norm(self, z, idx, v):
        """||sqrt|V| R(z) sqrt|V|||, using R[S, S] = (1 + G V)^(-1) G."""
        if len(idx) == 0:
            return 0.0
        G = self.green_block(z, idx)
        RSS = np.linalg.solve(np.eye(len(idx)) + G * v[None, :], G)
        s = sqrt_abs(v)
        return float(np.linalg.norm(s[:, None] * RSS * s[None, :], 2))


def lattice_integrand_profile(V: Potential, h, window, y_grid, x_samples=3) -> IntegrandProfile:
    """||R(z) - R0(z)||_S1 on the infinite lattice h Z along a (window x y_grid) mesh."""
    lo, hi = window
    if not 0 < lo < hi:
        raise ParameterError("window must be an interval inside (0, inf)")
    line = LatticeLine(h)
    idx, v = line.support(V)
    return profile_from_s1(lambda z: line.resolvent_difference_s1(z, idx, v), window, y_grid, x_samples)


def lattice_lap_profile(V: Potential, h, window, y_ladder, x_samples=4) -> IntegrandProfile:
    """||sqrt|V| R(z) sqrt|V||| on h Z along the mesh (value column; no compensation intended)."""
    line = LatticeLine(h)
    idx, v = line.support(V)
    return profile_from_s1(lambda z: line.weighted_resolvent_norm(z, idx, v), window, y_ladder, x_samples)
