"""Dense Hermitian linear algebra: spectral decompositions, shifted solves,
Schatten norms, spectral projections and divided differences.

Eigen-decompositions go through LAPACK (``numpy.linalg.eigh``). Resolvents
are formed from an LU factorisation of H - z so that anything computed by
quadrature over resolvents is independent of the eigen-decomposition used
as the oracle.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegeneracyError, DomainError, InputError, ParameterError, SingularityError

__all__ = [
    "HermitianOperator",
    "SpectralDecomposition",
    "SchattenReport",
    "eig",
    "jacobi_eigvalsh",
    "apply_function",
    "resolve",
    "resolvent_stack",
    "schatten_norm",
    "spectral_projection_negative",
    "divided_difference_matrix",
    "gateaux_derivative",
    "random_hermitian",
    "read_matrix",
    "write_matrix",
]

HERMITIAN_RTOL = 1e-13
PROJECTION_THRESHOLD = 1e-12
DEGENERATE_RTOL = 1e-8
SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def residual(self, H):
        """||U L U* - H||_op."""
        H = H.matrix if isinstance(H, HermitianOperator) else H
        return float(np.linalg.norm(self.reconstruct() - H, 2))

    def unitarity_defect(self):
        U = self.eigenvectors
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]), 2))


class HermitianOperator:
    """Dense self-adjoint matrix with a lazily cached spectral decomposition."""

    def __init__(self, entries, label="", rtol=HERMITIAN_RTOL):
        a = np.array(entries, dtype=complex if np.iscomplexobj(entries) else float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix has non-finite entries")
        scale = max(1.0, float(np.abs(a).max()))
        skew = float(np.abs(a - a.conj().T).max())
        if skew > rtol * scale:
            raise InputError(f"matrix is not Hermitian (max |A - A*| = {skew:.3e})")
        a = (a + a.conj().T) / 2
        if np.iscomplexobj(a) and not np.any(a.imag):
            a = a.real.copy()
        a.flags.writeable = False
        self.matrix = a
        self.label = label
        self._eig = None
        self._lock = threading.Lock()

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.matrix)

    def eig(self):
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    w, U = np.linalg.eigh(self.matrix)
                    w.flags.writeable = False
                    U.flags.writeable = False
                    self._eig = SpectralDecomposition(w, U)
        return self._eig

    def adopt_decomposition(self, w, U, check=True):
        """Cache an externally computed decomposition (e.g. from a tridiagonal solver)."""
        w, U = np.array(w, dtype=float), np.array(U)
        if U.shape != self.matrix.shape or w.shape != (self.dim,):
            raise InputError("decomposition shape does not match the operator")
        d = SpectralDecomposition(w, U)
        if check:
            res = d.residual(self.matrix)
            if res > 1e-8 * max(1.0, float(np.abs(w).max())):
                raise InputError(f"supplied decomposition has residual {res:.2e}")
        w.flags.writeable = False
        U.flags.writeable = False
        with self._lock:
            self._eig = d
        return self

    @property
    def eigenvalues(self):
        return self.eig().eigenvalues

    def op_norm(self):
        w = self.eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))

    def __add__(self, other):
        return HermitianOperator(self.matrix + _mat(other))

    def __sub__(self, other):
        return HermitianOperator(self.matrix - _mat(other))

    def __mul__(self, c):
        if np.iscomplexobj(c) and np.imag(c) != 0:
            raise ParameterError("scalar multiple of a Hermitian operator must be real")
        return HermitianOperator(float(np.real(c)) * self.matrix, self.label)

    __rmul__ = __mul__

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<HermitianOperator{tag} dim={self.dim}>"


def _mat(x):
    return x.matrix if isinstance(x, HermitianOperator) else np.asarray(x)


def eig(H: HermitianOperator) -> SpectralDecomposition:
    return H.eig()


def jacobi_eigvalsh(a, tol=1e-14, max_sweeps=50):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Slow but independent of LAPACK; used to cross-check ``eig`` on small
    matrices. Complex Hermitian input is embedded as [[Re, -Im], [Im, Re]],
    whose spectrum is that of ``a`` with every eigenvalue doubled.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        a = np.block([[a.real, -a.imag], [a.imag, a.real]])
        return jacobi_eigvalsh(a, tol, max_sweeps)[::2]
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    else:
        raise ParameterError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))


def _eval_on_spectrum(f, w):
    try:
        vals = np.asarray(f(w), dtype=float)
    except DomainError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise DomainError(f"function could not be evaluated on the spectrum: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        bad = w[~np.isfinite(vals)][0]
        raise DomainError(f"function is undefined at eigenvalue {bad:.6g}")
    return vals


def apply_function(H: HermitianOperator, f) -> HermitianOperator:
    """U f(L) U* from the cached decomposition."""
    d = H.eig()
    vals = _eval_on_spectrum(f, d.eigenvalues)
    U = d.eigenvectors
    return HermitianOperator((U * vals) @ U.conj().T, label=f"f({H.label})")


def resolve(H: HermitianOperator, z) -> np.ndarray:
    """(H - z)^{-1} via LU with partial pivoting."""
    z = complex(z)
    if H._eig is not None:
        dist = np.min(np.abs(H.eigenvalues - z))
        if dist <= SINGULAR_TOL * max(1.0, abs(z)):
            raise SingularityError(f"z = {z} is an eigenvalue (distance {dist:.2e})")
    A = H.matrix - z * np.eye(H.dim)
    lu, piv = sla.lu_factor(A, check_finite=False)
    u = np.abs(np.diag(lu))
    if u.min() <= SINGULAR_TOL * max(1.0, u.max()):
        raise SingularityError(f"H - z is numerically singular at z = {z}")
    return sla.lu_solve((lu, piv), np.eye(H.dim, dtype=complex), check_finite=False)


def resolvent_stack(H: HermitianOperator, zs) -> np.ndarray:
    """Resolvents at many points at once, shape (len(zs), N, N)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    eye = np.eye(H.dim)
    A = H.matrix[None, :, :] - zs[:, None, None] * eye
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"H - z singular for some z in the batch: {exc}") from exc


@dataclass(frozen=True)
class SchattenReport:
    p: float
    value: float


def schatten_norm(A, p) -> SchattenReport:
    """(sum sigma_i^p)^(1/p) over singular values; max sigma for p = inf."""
    p = float(p)
    if not p >= 1:
        raise ParameterError(f"Schatten index must satisfy p >= 1, got {p}")
    A = _mat(A)
    if isinstance(A, np.ndarray) and A.ndim == 2 and A.shape[0] == A.shape[1] and np.array_equal(A, A.conj().T):
        s = np.abs(np.linalg.eigvalsh(A))
    else:
        s = np.linalg.svd(A, compute_uv=False)
    if np.isinf(p):
        val = float(s.max()) if s.size else 0.0
    elif p == 1:
        val = float(s.sum())
    else:
        m = s.max() if s.size else 0.0
        val = float(m * np.sum((s / m) ** p) ** (1 / p)) if m > 0 else 0.0
    return SchattenReport(p, val)


def spectral_projection_negative(H: HermitianOperator, threshold=PROJECTION_THRESHOLD) -> HermitianOperator:
    """Projection onto the span of eigenvectors with negative eigenvalue."""
    d = H.eig()
    w = d.eigenvalues
    near = np.abs(w) < threshold
    if np.any(near):
        lam = float(w[near][0])
        raise DegeneracyError(f"eigenvalue {lam:.3e} within {threshold:g} of 0; shift the operator", eigenvalue=lam)
    U = d.eigenvectors[:, w < 0]
    return HermitianOperator(U @ U.conj().T, label=f"1_(-inf,0)({H.label})")


def divided_difference_matrix(f, w, rtol=DEGENERATE_RTOL):
    """f[w_i, w_j]; near-coincident pairs use f'((w_i + w_j)/2)."""
    w = np.asarray(w, dtype=float)
    fw = _eval_on_spectrum(f, w)
    dw = w[:, None] - w[None, :]
    scale = max(1.0, float(np.abs(w).max()))
    close = np.abs(dw) < rtol * scale
    mid = (w[:, None] + w[None, :]) / 2
    out = np.empty_like(dw)
    out[~close] = (fw[:, None] - fw[None, :])[~close] / dw[~close]
    if np.any(close):
        try:
            out[close] = np.asarray(f.derivative(mid[close], 1), dtype=float)
        except (ValueError, ArithmeticError) as exc:
            raise DomainError(f"derivative unavailable on the spectrum: {exc}") from exc
    return out


def gateaux_derivative(H0: HermitianOperator, V: HermitianOperator, f) -> HermitianOperator:
    """d/da f(H0 + a V) at a = 0, through the Daleckii-Krein formula."""
    d = H0.eig()
    U = d.eigenvectors
    Vt = U.conj().T @ _mat(V) @ U
    D = divided_difference_matrix(f, d.eigenvalues)
    return HermitianOperator(U @ (D * Vt) @ U.conj().T, label="Df")


def random_hermitian(n, rng, spread=(-1.0, 1.0), complex_=True):
    """Random Hermitian matrix with eigenvalues uniform in ``spread``."""
    lo, hi = spread
    z = rng.standard_normal((n, n))
    if complex_:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    w = np.sort(rng.uniform(lo, hi, n))
    return HermitianOperator((q * w) @ q.conj().T)


def write_matrix(path, A):
    """``dim N`` followed by N^2 lines ``i j re im`` (0-based, row-major)."""
    A = _mat(A)
    n = A.shape[0]
    with open(path, "w") as fh:
        fh.write(f"dim {n}\n")
        for i in range(n):
            for j in range(n):
                v = complex(A[i, j])
                fh.write(f"{i} {j} {v.real!r} {v.imag!r}\n")


def read_matrix(path, label=""):
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0][0] != "dim" or len(lines[0]) != 2:
        raise InputError(f"{path}: first line must be 'dim N'")
    n = int(lines[0][1])
    if len(lines) - 1 != n * n:
        raise InputError(f"{path}: expected {n * n} entries, found {len(lines) - 1}")
    A = np.zeros((n, n), dtype=complex)
    for k, tok in enumerate(lines[1:], start=2):
        if len(tok) != 4:
            raise InputError(f"{path}: line {k}: expected 'i j re im'")
        i, j = int(tok[0]), int(tok[1])
        A[i, j] = float(tok[2]) + 1j * float(tok[3])
    return HermitianOperator(A, label=label)
