"""Numerical operator calculus for trace formulas of Schrodinger operators.

Almost-analytic (Helffer-Sjostrand) functional calculus for Hermitian
matrices, Besov/Dynkin diagnostics, 1D scattering and the spectral shift
function, lattice Schrodinger operators and exact trace identities behind
Lieb-Thirring bounds at positive chemical potential.
"""
from .besov import BesovIndex, build_extension, cauchy_reconstruct, dynkin_integral, fit_scaling_exponent
from .errors import *  # noqa: F401,F403
from .functions import edge_power, indicator_below, parse_function, smooth_bump, window
from .hs import hs_all, hs_apply, hs_difference, hs_second_difference
from .lattice import LatticeSpec, discretize
from .linalg import HermitianOperator, apply_function, schatten_norm
from .potentials import parse_potential
from .quadrature import PlanarQuadrature
from .scattering import krein_trace_check, ssf_from_scattering
from .trace_inequalities import lt_excess, semiclassical_constant, trace_identity_check

__version__ = "0.1.0"
