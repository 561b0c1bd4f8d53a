"""Named experiment suites. Each one returns a table, scalar outputs, fitted
exponents and threshold checks tagged with the acceptance criterion (AC1 ..
AC11) they implement."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .besov import BesovIndex, build_extension, dynkin_integral, fit_scaling_exponent, log_y_grid, split_edge_function
from .config import ExperimentConfig, Param, coerce
from .errors import ParameterError
from .functions import edge_power, indicator_below
from .hs import (fit_loglog, hs_all, momentum_integral, momentum_integral_exact_1d, momentum_limit_constant,
                 refine_until_stable,
                 trace_norm_integrand_profile)
from .lattice import LatticeSpec, box_eigh_1d, discretize, lattice_integrand_profile
from .linalg import HermitianOperator, apply_function, gateaux_derivative, random_hermitian, schatten_norm
from .potentials import Zero, parse_potential
from .quadrature import PlanarQuadrature
from .scattering import krein_trace_check, lap_sup_check, ssf_box_counting_oracle, ssf_from_scattering
from .trace_inequalities import (aizenman_lieb_lift, fermi_density_lattice_1d, lt_excess, semiclassical_constant,
                                 trace_identity_check)

__all__ = ["Check", "Outcome", "Experiment", "REGISTRY", "run_experiment", "list_experiments", "resolve_params"]


@dataclass
class Check:
    criterion: str
    name: str
    value: float
    op: str  # "<=", ">=" or "abs<=" (|value - target| <= threshold)
    threshold: float
    target: float = 0.0

    def passed(self, scale=1.0):
        if not math.isfinite(self.value):
            return False
        if self.op == "<=":
            return self.value <= self.threshold * scale
        if self.op == ">=":
            return self.value >= self.threshold / scale
        return abs(self.value - self.target) <= self.threshold * scale

    def describe(self, scale=1.0):
        if self.op == "abs<=":
            bound = f"within {self.threshold * scale:.3g} of {self.target:g}"
        elif self.op == "<=":
            bound = f"<= {self.threshold * scale:.3g}"
        else:
            bound = f">= {self.threshold / scale:.3g}"
        return f"{self.criterion} {self.name} = {self.value:.6g} ({bound})"


@dataclass
class Outcome:
    columns: tuple
    rows: list
    scalars: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (columns, rows)


@dataclass
class Experiment:
    name: str
    description: str
    anchor: str
    criteria: tuple
    params: dict
    runner: object


@dataclass
class Context:
    rng: np.random.Generator
    threads: int


def _opn(A):
    return float(np.linalg.norm(A.matrix if isinstance(A, HermitianOperator) else A, 2))


def _quad_params(order=6, pad=0.5, y_min=0.008):
    return {
        "quadrature.order": Param("int", order, "almost-analytic extension order"),
        "quadrature.pad": Param("float", pad, "extension pad = y_max"),
        "quadrature.y_min": Param("float", y_min, "lowest strip height"),
        "quadrature.y_nodes": Param("int", 12, "Gauss nodes per y-panel"),
        "quadrature.x_nodes": Param("int", 12, "Gauss nodes per x-panel"),
        "quadrature.panel_ratio": Param("float", 4.0, "x-panel width / strip height"),
        "quadrature.h_max": Param("float", 0.1, "largest x-panel width"),
        "quadrature.refinement_rounds": Param("int", 0, "0 = fixed rule; otherwise refine until stable"),
        "quadrature.tolerance": Param("float", 1e-7, "stopping tolerance for refinement"),
    }


def _hs_setup(p):
    ext = build_extension(p["function.spec"], order=p["quadrature.order"], pad=p["quadrature.pad"])
    quad = PlanarQuadrature.for_extension(ext, p["quadrature.y_min"], y_nodes=p["quadrature.y_nodes"],
                                          x_nodes=p["quadrature.x_nodes"], panel_ratio=p["quadrature.panel_ratio"],
                                          h_max=p["quadrature.h_max"])
    return ext, quad


def _hs_compute(p, ctx, H0, V, ext, quad, which):
    def compute(q):
        return hs_all(H0, V, ext, q, which=which, threads=ctx.threads)

    if p["quadrature.refinement_rounds"] <= 0:
        return compute(quad)
    return refine_until_stable(compute, quad, p["quadrature.tolerance"], p["quadrature.refinement_rounds"])[0]


# --------------------------------------------------------------------------
# AC1


def run_hs_apply_accuracy(p, ctx):
    f = p["function.spec"]
    ext, quad = _hs_setup(p)
    sizes = [int(s) for s in p["sweep.sizes"]]
    if max(sizes) > 200:
        raise ParameterError("pair sizes are limited to N <= 200")
    lo, hi = p["sweep.spectrum"]
    vmax = p["sweep.v_scale"]
    rows = []
    for i in range(p["sweep.pairs"]):
        n = sizes[i % len(sizes)]
        H0 = random_hermitian(n, ctx.rng, spread=(lo, hi))
        V = random_hermitian(n, ctx.rng, spread=(-vmax, vmax))
        r = _hs_compute(p, ctx, H0, V, ext, quad, ("apply0", "apply", "diff", "second"))
        H = H0 + V
        fH0, fH = apply_function(H0, f), apply_function(H, f)
        D = gateaux_derivative(H0, V, f)
        err_apply = max(_opn(r["apply0"].matrix - fH0.matrix), _opn(r["apply"].matrix - fH.matrix))
        err_diff = _opn(r["diff"].matrix - (fH.matrix - fH0.matrix))
        err_second = _opn(r["second"].matrix - (fH.matrix - fH0.matrix - D.matrix))
        chain1 = _opn(r["diff"].matrix - (r["apply"].matrix - r["apply0"].matrix))
        chain2 = _opn(r["second"].matrix - (r["diff"].matrix - D.matrix))
        rows.append((i, n, err_apply, err_diff, err_second, chain1, chain2))
    a = np.array(rows, dtype=float)
    sc = {"nodes": quad.size, "max_apply_error": a[:, 2].max(), "max_diff_error": a[:, 3].max(),
          "max_second_error": a[:, 4].max(), "max_chain_first": a[:, 5].max(), "max_chain_second": a[:, 6].max()}
    checks = [
        Check("AC1", "max ||hs_apply - apply_function||", sc["max_apply_error"], "<=", 1e-6),
        Check("AC1", "max first-difference chain", sc["max_chain_first"], "<=", 1e-6),
        Check("AC1", "max second-difference chain", sc["max_chain_second"], "<=", 1e-6),
    ]
    cols = ("pair", "n", "apply_error", "diff_error", "second_error", "chain_first", "chain_second")
    return Outcome(cols, rows, sc, {}, checks)


# --------------------------------------------------------------------------
# AC11


def run_hs_second_scaling(p, ctx):
    f = p["function.spec"]
    ext, quad = _hs_setup(p)
    n = p["sweep.size"]
    lo, hi = p["sweep.spectrum"]
    H0 = random_hermitian(n, ctx.rng, spread=(lo, hi))
    V = random_hermitian(n, ctx.rng, spread=(-p["sweep.v_scale"], p["sweep.v_scale"]))
    rows = []
    for eps in p["sweep.epsilon"]:
        Ve = V * eps
        r = _hs_compute(p, ctx, H0, Ve, ext, quad, ("second",))["second"]
        H = H0 + Ve
        exact = apply_function(H, f).matrix - apply_function(H0, f).matrix - gateaux_derivative(H0, Ve, f).matrix
        rows.append((eps, schatten_norm(r, 1).value, schatten_norm(exact, 1).value, _opn(r.matrix - exact)))
    a = np.array(rows)
    slope, resid = fit_loglog(a[:, 0], a[:, 1])
    checks = [Check("AC11", "S1 exponent of second difference", slope, "abs<=", 0.05, target=2.0)]
    return Outcome(("epsilon", "s1_hs", "s1_exact", "op_error"), rows, {"nodes": quad.size},
                   {"second_difference_s1": {"exponent": slope, "residual": resid}}, checks)


# --------------------------------------------------------------------------
# AC3


def run_hs_diff_s1_profile(p, ctx):
    V = p["potential.spec"]
    window = tuple(p["sweep.window"])
    ys = p["sweep.y"]
    if p["lattice.model"] == "infinite":
        prof = lattice_integrand_profile(V, p["lattice.h"], window, ys, p["sweep.x_samples"])
    else:
        spec = LatticeSpec(1, p["lattice.L"], p["lattice.h"])
        H, H0 = discretize(spec, V)
        prof = trace_norm_integrand_profile(H0, H - H0, window, ys, p["sweep.x_samples"])
    ratio = prof.compensated_ratio()
    slope = prof.value_exponent()
    _, resid = fit_loglog(np.unique(prof.y), prof.per_y(prof.value))
    checks = [
        Check("AC3", "max/min of |y| ||R - R0||_S1 over the ladder", ratio, "<=", 10.0),
        Check("AC3", "y-exponent of ||R - R0||_S1", slope, "abs<=", 0.1, target=-1.0),
    ]
    return Outcome(("x", "y", "s1", "compensated"), prof.rows(), {"compensated_ratio": ratio},
                   {"s1_norm": {"exponent": slope, "residual": resid}}, checks)


# --------------------------------------------------------------------------
# AC5


def run_indicator_divergence(p, ctx):
    V = p["potential.spec"]
    a, gamma = p["function.a"], p["function.gamma"]
    fi, fe = indicator_below(a), edge_power(gamma, a)
    rows = []
    for L in p["sweep.L"]:
        spec = LatticeSpec(1, L, p["lattice.h"], max_sites=10**5)
        w, U = box_eigh_1d(spec, V)
        w0, U0 = box_eigh_1d(spec, Zero())
        out = []
        for f in (fi, fe):
            D = (U * f(w)) @ U.T - (U0 * f(w0)) @ U0.T
            out.append(float(np.abs(np.linalg.eigvalsh(D)).sum()))
        rows.append((L, spec.n_sites, out[0], out[1]))
    s_ind = [r[2] for r in rows]
    s_edge = [r[3] for r in rows]
    checks = []
    if len(rows) >= 3:
        for k in (len(rows) - 2, len(rows) - 1):
            g = s_ind[k] / s_ind[k - 1] - 1
            checks.append(Check("AC5", f"indicator S1 growth L={rows[k - 1][0]:g}->{rows[k][0]:g}", g, ">=", 0.10))
    if len(rows) >= 2:
        ch = abs(s_edge[-1] / s_edge[-2] - 1)
        checks.append(Check("AC5", "edge-power S1 change between the two largest boxes", ch, "<=", 0.05))
    return Outcome(("L", "sites", "s1_indicator", "s1_edge_power"), rows, {}, {}, checks)


# --------------------------------------------------------------------------
# AC4


def run_besov_scan(p, ctx):
    a = p["function.a"]
    win = tuple(p["sweep.window"])
    order, pad = p["quadrature.order"], p["quadrature.pad"]
    y_hi, y_lo = p["sweep.y_fit"]
    yg = log_y_grid(y_hi, y_lo, per_decade=p["sweep.per_decade"])
    rows, fits, checks = [], {}, []
    for g in p["sweep.gamma"]:
        f0, _ = split_edge_function(edge_power(g, a), win)
        ext = build_extension(f0, order=order, pad=pad)
        for mode, target in (("L1_slice", g), ("sup_slice", g - 1)):
            fit = fit_scaling_exponent(ext, mode, yg)
            fits[f"{mode}_gamma={g:g}"] = {"exponent": fit.exponent, "residual": fit.residual}
            for y, v in zip(fit.y, fit.values):
                rows.append(("edge_power", g, mode, y, v))
            checks.append(Check("AC4", f"{mode} exponent, gamma={g:g}", fit.exponent, "abs<=", 0.1, target=target))
    idx = BesovIndex(1, 1)
    y_mins = sorted(p["sweep.y_min"], reverse=True)
    f_ind, _ = split_edge_function(indicator_below(a), win)
    ext_ind = build_extension(f_ind, order=order, pad=pad)
    ext_bump = build_extension(p["function.reference"], order=order, pad=pad)
    d_ind = [dynkin_integral(ext_ind, idx, ym) for ym in y_mins]
    d_bump = [dynkin_integral(ext_bump, idx, ym) for ym in y_mins]
    for ym, di, db in zip(y_mins, d_ind, d_bump):
        rows.append(("dynkin_indicator", 0.0, "p=1,s=1", ym, di))
        rows.append(("dynkin_reference", float("nan"), "p=1,s=1", ym, db))
    decades = np.log10(np.array(y_mins[:-1]) / np.array(y_mins[1:]))
    per_decade = (np.array(d_ind[1:]) / np.array(d_ind[:-1])) ** (1 / decades)
    stab = max(abs(v / d_bump[-1] - 1) for v in d_bump)
    checks.append(Check("AC4", "indicator Dynkin growth factor per decade (min)", float(per_decade.min()), ">=", 1.2))
    checks.append(Check("AC4", "reference Dynkin integral relative spread", stab, "<=", 0.01))
    sc = {"indicator_growth_per_decade": [float(v) for v in per_decade], "reference_spread": stab}
    return Outcome(("family", "gamma", "mode", "y", "value"), rows, sc, fits, checks)


# --------------------------------------------------------------------------
# AC6


def run_krein_check(p, ctx):
    V, f = p["potential.spec"], p["function.spec"]
    rep = krein_trace_check(V, f, p["lattice.L"], h=p["lattice.h"])
    lo, hi = p["sweep.lambda"]
    lam = np.linspace(lo, hi, p["sweep.points"])
    data = ssf_from_scattering(V, lam)
    box = ssf_box_counting_oracle(V, p["lattice.L"], lam, sigma=p["sweep.sigma"], h=p["lattice.h"])
    diff = np.abs(data.xi - box)
    rows = [(float(l), float(a), float(b), float(d)) for l, a, b, d in zip(lam, data.xi, box, diff)]
    sc = {"trace_lhs": rep.lhs, "trace_rhs": rep.rhs, "relative_error": rep.relative_error,
          "ssf_max_difference": float(diff.max()), "bound_states": [float(e) for e in data.bound_states],
          "max_wronskian_spread": data.wronskian_spread}
    checks = [Check("AC6", "Krein trace formula relative error", rep.relative_error, "<=", 0.02),
              Check("AC6", "max |xi_scattering - xi_box|", float(diff.max()), "<=", 0.05)]
    tables = {"scattering": (("k", "re_w", "im_w", "arg_a", "xi"), data.rows())}
    return Outcome(("lambda", "xi_scattering", "xi_box", "abs_difference"), rows, sc, {}, checks, tables)


# --------------------------------------------------------------------------
# AC7


def run_lap_check(p, ctx):
    V = p["potential.spec"]
    ys = sorted(p["sweep.y"], reverse=True)
    prof = lap_sup_check(V, tuple(p["sweep.window"]), ys, method=p["lattice.model"],
                         x_samples=p["sweep.x_samples"], h=p["lattice.h"])
    hi_y, lo_y = ys[0], ys[-1]
    var = 0.0
    for x in np.unique(prof.x):
        sel = prof.x == x
        v_hi = prof.value[sel & (prof.y == hi_y)][0]
        v_lo = prof.value[sel & (prof.y == lo_y)][0]
        var = max(var, abs(v_lo - v_hi) / v_hi)
    rows = [(r[0], r[1], r[2]) for r in prof.rows()]
    checks = [Check("AC7", f"max relative change y={hi_y:g}->{lo_y:g}", var, "<=", 0.05)]
    return Outcome(("x", "y", "weighted_resolvent_norm"), rows, {"max_relative_change": var}, {}, checks)


# --------------------------------------------------------------------------
# AC2


LATTICE_FIXTURES = (
    ("d1_compact", LatticeSpec(1, 10.0, 0.1), "compact_bump depth=2 radius=3", 1.0),
    ("d2_gaussian", LatticeSpec(2, 2.0, 0.2), "gaussian depth=2 width=1", 1.0),
    ("d3_gaussian", LatticeSpec(3, 0.8, 0.2), "gaussian depth=3 width=0.5", 2.0),
)


def run_trace_identity(p, ctx):
    rows = []
    A = HermitianOperator(np.diag([-1.0, 2.0]))
    B = HermitianOperator(np.diag([1.0, -3.0]))
    r = trace_identity_check(A, B)
    rows.append(("2x2", 2, r.term_PP, r.term_PperpPperp, r.term_coupling, r.lhs, r.rhs, r.residual))
    example_gap = max(abs(r.lhs - 4), abs(r.rhs - 4))
    worst = 0.0
    for i in range(p["sweep.pairs"]):
        A = random_hermitian(p["sweep.size"], ctx.rng, spread=(-1, 1))
        B = A if p["sweep.mode"] == "equal" else random_hermitian(p["sweep.size"], ctx.rng, spread=(-1, 1))
        r = trace_identity_check(A, B)
        worst = max(worst, r.residual / (1 + abs(r.rhs)))
        rows.append((f"random_{i}", A.dim, r.term_PP, r.term_PperpPperp, r.term_coupling, r.lhs, r.rhs, r.residual))
    for name, spec, vspec, mu in LATTICE_FIXTURES:
        e = lt_excess(spec, parse_potential(vspec), mu)
        worst = max(worst, e.residual / (1 + abs(e.rhs)))
        rows.append((name, spec.n_sites, float("nan"), float("nan"), e.trace_PVP, e.total, e.rhs, e.residual))
    checks = [Check("AC2", "2x2 example |lhs - 4|, |rhs - 4|", example_gap, "<=", 1e-12),
              Check("AC2", "max residual / (1 + rhs)", worst, "<=", 1e-10)]
    cols = ("case", "dim", "term_PP", "term_PperpPperp", "term_coupling", "lhs", "rhs", "residual")
    return Outcome(cols, rows, {"max_scaled_residual": worst}, {}, checks)


# --------------------------------------------------------------------------
# AC10


def run_lt_sweep(p, ctx):
    V = p["potential.spec"]
    mu = p["sweep.mu"]
    rows, checks = [], []
    spec = LatticeSpec(int(p["lattice.d"]), p["lattice.L"], p["lattice.h"])
    fixtures = [("fixture", spec)]
    hs = sorted(p["sweep.h"], reverse=True)
    L1 = p["sweep.density_L"]
    fixtures.append(("d1_finest", LatticeSpec(1, L1, hs[-1], max_sites=10**5)))
    worst, min_total = 0.0, math.inf
    ident = []
    for name, sp in fixtures:
        e = lt_excess(sp, V, mu)
        worst = max(worst, e.residual / (1 + abs(e.rhs)))
        min_total = min(min_total, e.total)
        ident.append({"case": name, "d": sp.d, "L": sp.L, "h": sp.h, "mu": e.mu, "mu_nudged": e.mu_nudged,
                      "trace_negative_parts": e.trace_negative_parts, "trace_PVP": e.trace_PVP, "total": e.total,
                      "rhs": e.rhs, "rhs_decomposition": e.rhs_decomposition, "residual": e.residual,
                      "fermi_density": e.fermi_density, "semiclassical_density": e.semiclassical_density})
    target = mu**0.5 / math.pi
    for h in hs:
        sp = LatticeSpec(1, L1, h, max_sites=10**6)
        dens = fermi_density_lattice_1d(sp, V, mu)
        rows.append((h, L1, sp.n_sites, dens, target, abs(dens / target - 1)))
    gaps = [r[-1] for r in rows]
    checks = [Check("AC10", "max lt_excess residual / (1 + rhs)", worst, "<=", 1e-9),
              Check("AC10", "min identity sum", min_total, ">=", 0.0),
              Check("AC10", f"1D Fermi density gap at h={hs[-1]:g}", gaps[-1], "<=", 0.02)]
    sc = {"identity": ident, "density_gap_monotone": bool(all(b <= a for a, b in zip(gaps, gaps[1:])))}
    return Outcome(("h", "L", "sites", "fermi_density", "semiclassical", "relative_gap"), rows, sc, {}, checks)


# --------------------------------------------------------------------------
# AC9


def run_aizenman_lieb(p, ctx):
    rows = []
    gaps = []
    table = {}
    for d in p["sweep.d"]:
        for g in p["sweep.gamma"]:
            c = semiclassical_constant(g, int(d))
            gaps.append(c.relative_gap)
            table[(int(d), g)] = c.value
            rows.append(("constant", g, int(d), float("nan"), c.value, c.closed_form, c.relative_gap))
    ds = sorted({int(d) for d in p["sweep.d"]})
    gs = sorted(p["sweep.gamma"])
    mono_g = all(table[(d, a)] > table[(d, b)] for d in ds for a, b in zip(gs, gs[1:]))
    mono_d = all(table[(a, g)] > table[(b, g)] for g in gs for a, b in zip(ds, ds[1:]))
    scalar, const, beta, ratios = 0.0, 0.0, 0.0, {}
    for d in ds:
        for g in p["sweep.lift_gamma"]:
            rep = aizenman_lieb_lift(g, mu_samples=p["sweep.mu"], d=d)
            scalar = max(scalar, rep.scalar_max_error)
            const = max(const, rep.constant_relative_error)
            beta = max(beta, rep.beta_relative_error)
            ratios[f"gamma={g:g},d={d}"] = rep.stated_form_ratio
            for kind, arg, lhs, rhs, err in rep.rows:
                rows.append((kind, g, d, arg, lhs, rhs, err))
    checks = [Check("AC9", "max quadrature vs closed-form gap", max(gaps), "<=", 1e-10),
              Check("AC9", "max scalar lifting error", scalar, "<=", 1e-8),
              Check("AC9", "max constant lifting error", const, "<=", 1e-8),
              Check("AC9", "max Beta-ratio error", beta, "<=", 1e-8),
              Check("AC9", "monotone in gamma and d (1 = yes)", float(mono_g and mono_d), ">=", 1.0)]
    sc = {"stated_form_ratio": ratios}
    return Outcome(("kind", "gamma", "d", "argument", "lhs", "rhs", "error"), rows, sc, {}, checks)


# --------------------------------------------------------------------------
# AC8


def run_momentum_integral(p, ctx):
    x = p["sweep.x"]
    ys = np.asarray(p["sweep.y"], float)
    rows = []
    v1, err1 = [], 0.0
    for y in ys:
        v = momentum_integral(1, 0, 1.0, complex(x, y))
        o = momentum_integral_exact_1d(complex(x, y))
        err1 = max(err1, abs(v / o - 1))
        v1.append(v)
        rows.append((1, 0.0, y, v, o, y * v))
    d3, kap, E = p["sweep.d_high"], p["sweep.kappa"], p["sweep.E"]
    c3 = []
    for y in ys:
        v = momentum_integral(int(d3), kap, E, complex(x, y))
        c3.append(y * v)
        rows.append((int(d3), kap, y, v, float("nan"), y * v))
    slope, resid = fit_loglog(ys, v1)
    c_inf = momentum_limit_constant(int(d3), kap, E, x)
    bound = max(c3) / c_inf
    settle = abs(c3[int(np.argmin(ys))] / c_inf - 1)
    checks = [Check("AC8", "d=1 y-exponent", slope, "abs<=", 0.02, target=-1.0),
              Check("AC8", "d=1 max relative gap to residue oracle", err1, "<=", 1e-8),
              Check("AC8", f"d={int(d3)} max of y * integral / C_limit", bound, "<=", 1 + 1e-9),
              Check("AC8", f"d={int(d3)} |C(y_min) / C_limit - 1|", settle, "<=", 1e-3)]
    fits = {"d1_kappa0": {"exponent": slope, "residual": resid}}
    return Outcome(("d", "kappa", "y", "value", "oracle", "y_times_value"), rows,
                   {"C_high_dim": [float(c) for c in c3], "C_limit": c_inf}, fits, checks)


# --------------------------------------------------------------------------
# registry


def _log(hi, lo, n):
    return tuple(float(v) for v in np.logspace(math.log10(hi), math.log10(lo), n))


_HS_COMMON = {
    "function.spec": Param("function", "smooth_bump center=1.5 width=1.0"),
    "sweep.spectrum": Param("floats", (-1.0, 3.0), "eigenvalue range of H0"),
    "sweep.v_scale": Param("float", 0.3, "eigenvalues of V lie in [-v, v]"),
    **_quad_params(),
}

REGISTRY = {e.name: e for e in [
    Experiment("hs-apply-accuracy", "Helffer-Sjostrand f(H), first and second differences vs eigendecomposition",
               "almost-analytic functional calculus", ("AC1",),
               {**_HS_COMMON, "sweep.pairs": Param("int", 20), "sweep.sizes": Param("floats", (16.0, 24.0, 32.0, 40.0))},
               run_hs_apply_accuracy),
    Experiment("hs-second-scaling", "S1 norm of the second-order remainder under V -> eps V",
               "second-order trace class estimate", ("AC11",),
               {**_HS_COMMON, "sweep.size": Param("int", 24), "sweep.epsilon": Param("floats", _log(1e-3, 1e-1, 5))},
               run_hs_second_scaling),
    Experiment("hs-diff-s1-profile", "|Im z| ||R(z) - R0(z)||_S1 along a y-ladder on the 1D lattice",
               "resolvent difference trace norm bound", ("AC3",),
               {"potential.spec": Param("potential", "compact_bump depth=1 radius=2"),
                "lattice.h": Param("float", 0.1), "lattice.L": Param("float", 40.0),
                "lattice.model": Param("choice:infinite|box", "infinite"),
                "sweep.window": Param("floats", (0.5, 1.5)), "sweep.y": Param("floats", _log(1e-1, 1e-4, 13)),
                "sweep.x_samples": Param("int", 3)},
               run_hs_diff_s1_profile),
    Experiment("indicator-divergence", "S1 norm of f(H) - f(H0) on growing boxes: indicator vs edge power",
               "sharp cutoff vs Holder edge", ("AC5",),
               {"potential.spec": Param("potential", "compact_bump depth=2 radius=3"),
                "lattice.h": Param("float", 0.1), "sweep.L": Param("floats", (25.0, 50.0, 100.0, 200.0)),
                "function.a": Param("float", 1.0), "function.gamma": Param("float", 0.5)},
               run_indicator_divergence),
    Experiment("besov-scan", "slice scaling of omega for edge powers; Dynkin integrals for indicator and bump",
               "Besov classes via almost-analytic extensions", ("AC4",),
               {"function.a": Param("float", 1.0), "function.reference": Param("function", "smooth_bump center=1.0 width=0.5"),
                "sweep.gamma": Param("floats", (0.25, 0.5, 0.75)), "sweep.window": Param("floats", (0.5, 1.5)),
                "sweep.y_fit": Param("floats", (1e-3, 1e-6)), "sweep.per_decade": Param("int", 4),
                "sweep.y_min": Param("floats", (1e-2, 1e-3, 1e-4, 1e-5)),
                "quadrature.order": Param("int", 2), "quadrature.pad": Param("float", 0.25)},
               run_besov_scan),
    Experiment("krein-check", "Krein trace formula on a box and SSF from scattering vs box counting",
               "spectral shift function and trace formula", ("AC6",),
               {"potential.spec": Param("potential", "sech2 depth=3 width=1"),
                "function.spec": Param("function", "smooth_bump center=1.25 width=0.75"),
                "lattice.L": Param("float", 200.0), "lattice.h": Param("float", 0.1),
                "sweep.lambda": Param("floats", (0.2, 5.0)), "sweep.points": Param("int", 97),
                "sweep.sigma": Param("float", 0.05)},
               run_krein_check),
    Experiment("lap-check", "||sqrt|V| R(x+iy) sqrt|V||| as y -> 0 on a positive energy window",
               "limiting absorption principle", ("AC7",),
               {"potential.spec": Param("potential", "sech2 depth=3 width=1"),
                "lattice.model": Param("choice:continuum|lattice", "continuum"), "lattice.h": Param("float", 0.05),
                "sweep.window": Param("floats", (0.5, 2.0)), "sweep.y": Param("floats", (1e-4, 1e-5, 1e-6)),
                "sweep.x_samples": Param("int", 4)},
               run_lap_check),
    Experiment("trace-identity", "negative-part trace identity on random pairs, a 2x2 example and lattice fixtures",
               "trace identity for negative parts", ("AC2",),
               {"sweep.pairs": Param("int", 100), "sweep.size": Param("int", 50),
                "sweep.mode": Param("choice:random|equal", "random")},
               run_trace_identity),
    Experiment("lt-sweep", "lattice Lieb-Thirring excess at mu > 0 and 1D Fermi density convergence",
               "Lieb-Thirring inequality with positive chemical potential", ("AC10",),
               {"potential.spec": Param("potential", "gaussian depth=2 width=1"),
                "lattice.d": Param("int", 2), "lattice.L": Param("float", 4.8), "lattice.h": Param("float", 0.2),
                "sweep.mu": Param("float", 1.0), "sweep.h": Param("floats", (0.2, 0.1, 0.05)),
                "sweep.density_L": Param("float", 100.0)},
               run_lt_sweep),
    Experiment("aizenman-lieb", "semiclassical constants by quadrature and the lifting in the Riesz exponent",
               "semiclassical constants, Aizenman-Lieb argument", ("AC9",),
               {"sweep.gamma": Param("floats", (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
                "sweep.d": Param("floats", (1.0, 2.0, 3.0)),
                "sweep.lift_gamma": Param("floats", (1.5, 2.0, 2.5, 3.0)),
                "sweep.mu": Param("floats", (0.5, 1.0, 2.0))},
               run_aizenman_lieb),
    Experiment("momentum-integral", "free momentum integral vs y: residue oracle in d=1, C/y bound in d=3",
               "free resolvent momentum integral", ("AC8",),
               {"sweep.x": Param("float", 1.0), "sweep.y": Param("floats", _log(1e-1, 1e-4, 13)),
                "sweep.d_high": Param("int", 3), "sweep.kappa": Param("float", 1.0), "sweep.E": Param("float", 1.0)},
               run_momentum_integral),
]}


def resolve_params(cfg: ExperimentConfig):
    exp = REGISTRY[cfg.name]
    out = {}
    for key, par in exp.params.items():
        raw = cfg.values.get(key)
        out[key] = par.default if raw is None else coerce(par.kind, raw)
        if raw is None and par.kind in ("function", "potential"):
            out[key] = coerce(par.kind, par.default)
    return out


def run_experiment(cfg: ExperimentConfig):
    """Run one configured experiment. Returns (Outcome, wall time in seconds, resolved params)."""
    exp = REGISTRY[cfg.name]
    params = resolve_params(cfg)
    ctx = Context(np.random.default_rng(cfg.seed), cfg.threads)
    t0 = time.perf_counter()
    out = exp.runner(params, ctx)
    return out, time.perf_counter() - t0, params


def list_experiments():
    """Plain-text table of experiment names, criteria and descriptions."""
    width = max(len(n) for n in REGISTRY)
    lines = [f"{'name':<{width}}  criteria  description [anchor]"]
    for name in sorted(REGISTRY):
        e = REGISTRY[name]
        lines.append(f"{name:<{width}}  {','.join(e.criteria):<8}  {e.description} [{e.anchor}]")
    return "\n".join(lines)
