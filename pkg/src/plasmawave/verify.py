"""Executable invariant suites behind `plasmawave verify`.

Each suite returns a list of (name, passed, detail) rows; the CLI renders
them and exits nonzero when anything fails.  The same checks back the
pytest property tests, so CLI and CI agree by construction.
"""

from __future__ import annotations

import math

import numpy as np

from . import symbols as sym
from .bilinear import (adjoint_plan, apply_bilinear, bony_remainder,
                       energy_orthogonality_check, inner_product, make_plan,
                       paraproduct)
from .diagnostics import rate_fit
from .dynamics import ComplexState, RunConfig, initial_state, run, step_ifrk4_h
from .grid import (GridSpec, apply_multiplier, bracket, forward_transform,
                   inverse_transform, l2_norm, sobolev_norm)
from .normal_form import NormalFormContext, cubic_n, quartic_remainder, shatah_g
from .scattering import (PhaseAccumulator, cubic_interaction,
                         dispersive_constant_check, profile_spectrum,
                         quadrature_check_bump)

__all__ = ["run_suite", "SUITES"]


def _band_limited_real(grid, rng, kmax):
    spec = np.zeros(grid.num_points, complex)
    act = np.abs(grid.k) <= kmax
    spec[act] = rng.normal(size=act.sum()) + 1j * rng.normal(size=act.sum())
    return inverse_transform(grid, spec).real


def _apply_d(grid, u_vec):
    r, u = u_vec
    return np.stack([-apply_multiplier(grid, u, bracket).real,
                     apply_multiplier(grid, r, bracket).real])


def suite_symbols(seed: int = 1234):
    rng = np.random.default_rng(seed)
    rows = []

    x1 = rng.uniform(-20, 20, 10000)
    x2 = rng.uniform(-20, 20, 10000)
    for n in (6, 300):
        for kind in ("B1", "B2"):
            b = sym.b_matrix(kind, n, x1, x2)
            ref = np.conj(np.swapaxes(sym.b_matrix(kind, n, -x1, x1 + x2), -1, -2))
            rel = np.abs(b - ref).max() / np.abs(b).max()
            rows.append((f"{kind}_selfadjoint_N{n}", rel < 1e-12, f"rel={rel:.2e}"))

    g1, g2, g12 = bracket(x1), bracket(x2), bracket(x1 + x2)
    mats = np.stack([
        np.stack([-g1, g2, -g12, np.zeros_like(g1)], -1),
        np.stack([np.zeros_like(g1), g12, -g2, -g1], -1),
        np.stack([-g2, g1, np.zeros_like(g1), -g12], -1),
        np.stack([g12, np.zeros_like(g1), g1, g2], -1)], -2)
    for kind in ("A", "C"):
        for n in (1, 6, 300):
            a = np.stack(sym.solve_normal_form(kind, n, x1, x2), -1)
            if kind == "A":
                from .symbols import _b_entries, DEFAULT_CUTOFF
                e1, e4 = _b_entries("B1", n, x1, x2, DEFAULT_CUTOFF)
                e2, e3 = _b_entries("B2", n, x1, x2, DEFAULT_CUTOFF)
            else:
                from .symbols import _q_entries, DEFAULT_CUTOFF
                e1, e4 = _q_entries("S1", x1, x2, DEFAULT_CUTOFF)
                e2, e3 = _q_entries("S2", x1, x2, DEFAULT_CUTOFF)
            rhs_v = -np.stack([e1, e4, e2, e3], -1)
            res = np.abs(np.einsum("...ij,...j->...i", mats, a) - rhs_v).max(-1)
            norm = np.maximum(np.abs(rhs_v).max(-1), 1.0)
            worst = (res / norm).max()
            rows.append((f"{kind}_backsub_N{n}", worst < 1e-10, f"res={worst:.2e}"))

    c0 = abs(sym.c_star(0.0))
    step = 1e-4
    cd = abs(sym.c_star(step) - sym.c_star(-step)) / (2 * step)
    rows.append(("c_star_zero", c0 <= 1e-12, f"|c*(0)|={c0:.2e}"))
    rows.append(("c_star_flat", cd <= 1e-7, f"|c*'(0)|~{cd:.2e}"))
    xs = np.linspace(-20, 20, 1000)
    rel = (np.abs(sym.cubic_symbol("++-", xs, 0 * xs, -xs) - sym.c_star(xs))
           / (1.0 + np.abs(sym.c_star(xs)))).max()
    rows.append(("resonance_identity", rel < 1e-12, f"rel={rel:.2e}"))
    xs = np.linspace(-50, 50, 2001)
    xs = xs[np.abs(xs) > 1e-6]
    cfit = (np.abs(sym.c_star(xs)) / (xs ** 2 * bracket(xs) ** 3)).max()
    rows.append(("c_star_growth", np.isfinite(cfit), f"C={cfit:.3f}"))

    t1 = sym.theta(np.array([0.0, 5.0, -3.0]), np.array([5.0, 5.0, 10.0]))
    rows.append(("theta_values", t1[0] == 1.0 and t1[1] == 0.0
                 and t1[2] == sym.theta(3.0, 10.0), f"{t1}"))
    xi = rng.uniform(-40, 40, 1_000_000)
    eta = rng.uniform(-40, 40, 1_000_000)
    low = np.abs(sym.phase_denominator("++", xi, eta)) * (
        bracket(xi + eta) + bracket(xi) + bracket(eta))
    rows.append(("denominator_bound", low.min() >= 1.0 - 1e-9,
                 f"min={low.min():.12f}"))
    ph = sym.interaction_phase("++-", xs, 0 * xs, -xs)
    rows.append(("resonant_phase_zero", np.abs(ph).max() == 0.0,
                 f"max|Psi|={np.abs(ph).max():.1e}"))
    return rows


def suite_identities(seed: int = 1234, num_points: int = 256, n_sob: int = 6,
                     n_seeds: int = 5):
    rows = []
    grid = GridSpec(num_points, 2 * math.pi)
    ctx = NormalFormContext(grid, n_sob=n_sob, dealias=False)
    kmax = num_points // 8

    worst = {"orth1": 0.0, "orth2": 0.0, "ctrl": np.inf, "a1": 0.0, "a2": 0.0,
             "c1": 0.0, "c2": 0.0, "adj": 0.0, "bony": 0.0, "recombine": 0.0}
    rng = np.random.default_rng(seed)
    for _ in range(n_seeds):
        r = _band_limited_real(grid, rng, kmax)
        u = _band_limited_real(grid, rng, kmax)
        u_vec = np.stack([_band_limited_real(grid, rng, kmax),
                          _band_limited_real(grid, rng, kmax)])
        worst["orth1"] = max(worst["orth1"],
                             energy_orthogonality_check(grid, r, u_vec, n_sob, "1"))
        worst["orth2"] = max(worst["orth2"],
                             energy_orthogonality_check(grid, u, u_vec, n_sob, "2"))
        worst["ctrl"] = min(worst["ctrl"],
                            energy_orthogonality_check(grid, r, u_vec, n_sob, "1",
                                                       zero_b=True))
        du = _apply_d(grid, u_vec)
        dr_f = apply_multiplier(grid, r, bracket).real
        du_f = apply_multiplier(grid, u, bracket).real
        for tag, low, high, f_lo, f_hi, rhs_name in (
                ("a1", "A2", "A1", r, dr_f, "B1"), ("c1", "C2", "C1", r, dr_f, "S1")):
            p_lo, p_hi = ctx.plan(low), ctx.plan(high)
            lhs = (_apply_d(grid, apply_bilinear(p_lo, f_lo, u_vec))
                   - apply_bilinear(p_hi, f_hi, u_vec)
                   - apply_bilinear(p_lo, f_lo, du))
            rhs_v = -apply_bilinear(ctx.plan(rhs_name), f_lo, u_vec)
            rel = np.abs(lhs - rhs_v).max() / np.abs(rhs_v).max()
            worst[tag] = max(worst[tag], rel)
        for tag, one, two, rhs_name in (("a2", "A1", "A2", "B2"),
                                        ("c2", "C1", "C2", "S2")):
            p1, p2 = ctx.plan(one), ctx.plan(two)
            lhs = (_apply_d(grid, apply_bilinear(p1, u, u_vec))
                   + apply_bilinear(p2, du_f, u_vec)
                   - apply_bilinear(p1, u, du))
            rhs_v = -apply_bilinear(ctx.plan(rhs_name), u, u_vec)
            rel = np.abs(lhs - rhs_v).max() / np.abs(rhs_v).max()
            worst[tag] = max(worst[tag], rel)
        w_vec = np.stack([_band_limited_real(grid, rng, kmax),
                          _band_limited_real(grid, rng, kmax)])
        pq = ctx.plan("Q1")
        lhs_ip = inner_product(grid, apply_bilinear(pq, r, u_vec), w_vec)
        rhs_ip = inner_product(grid, u_vec, apply_bilinear(adjoint_plan(pq), r, w_vec))
        worst["adj"] = max(worst["adj"], abs(lhs_ip - rhs_ip) / abs(lhs_ip))
        fb = _band_limited_real(grid, rng, kmax)
        gb = _band_limited_real(grid, rng, kmax)
        tot = (paraproduct(grid, fb, gb, sym.theta)
               + paraproduct(grid, gb, fb, sym.theta)
               + bony_remainder(grid, fb, gb, sym.theta))
        worst["bony"] = max(worst["bony"],
                            np.abs(tot - fb * gb).max() / np.abs(fb * gb).max())
        # Q + S recombine to the raw quadratic nonlinearity
        ru, uu = u_vec
        full = (apply_bilinear(make_plan(grid, lambda a, b: sym.q_matrix("Q1", a, b)
                                         + sym.q_matrix("S1", a, b), True), ru, u_vec)
                + apply_bilinear(make_plan(grid, lambda a, b: sym.q_matrix("Q2", a, b)
                                           + sym.q_matrix("S2", a, b), True), uu, u_vec))
        bu = apply_multiplier(grid, uu, bracket).real
        rx = apply_multiplier(grid, ru, lambda x: 1j * x).real
        direct = np.stack([
            2.0 * bu * rx,
            apply_multiplier(grid, bu ** 2 + rx ** 2,
                             lambda x: 1j * x / bracket(x)).real])
        worst["recombine"] = max(worst["recombine"],
                                 np.abs(full - direct).max() / np.abs(direct).max())

    rows.append(("orthogonality_q1b1", worst["orth1"] <= 1e-9, f"ratio={worst['orth1']:.2e}"))
    rows.append(("orthogonality_q2b2", worst["orth2"] <= 1e-9, f"ratio={worst['orth2']:.2e}"))
    rows.append(("orthogonality_control", worst["ctrl"] >= 1e-3, f"ratio={worst['ctrl']:.2e}"))
    for tag, label in (("a1", "normal_form_A_line1"), ("a2", "normal_form_A_line2"),
                       ("c1", "normal_form_C_line1"), ("c2", "normal_form_C_line2")):
        rows.append((label, worst[tag] <= 1e-9, f"rel={worst[tag]:.2e}"))
    rows.append(("adjoint_lemma", worst["adj"] <= 1e-11, f"rel={worst['adj']:.2e}"))
    rows.append(("bony_recombination", worst["bony"] <= 1e-12, f"rel={worst['bony']:.2e}"))
    rows.append(("quadratic_recombination", worst["recombine"] <= 1e-12,
                 f"rel={worst['recombine']:.2e}"))

    # pointwise kernel identity: i q - b * denominator = 0
    rng2 = np.random.default_rng(seed + 1)
    xi = rng2.uniform(-30, 30, 100000)
    eta = rng2.uniform(-30, 30, 100000)
    worst_k = 0.0
    for pair in sym.SIGN_PAIRS:
        q = sym.shatah_q(pair, xi, eta)
        b = sym.shatah_b(pair, xi, eta)
        res = np.abs(1j * q - b * sym.phase_denominator(pair, xi, eta))
        worst_k = max(worst_k, (res / (1.0 + np.abs(q))).max())
    rows.append(("shatah_kernel_identity", worst_k <= 1e-12, f"rel={worst_k:.2e}"))
    return rows


def suite_scattering(seed: int = 1234):
    rows = []
    rng = np.random.default_rng(seed)
    grid = GridSpec(128, 8 * math.pi)
    spec = np.zeros(128, complex)
    act = np.abs(grid.k) <= 13
    spec[act] = rng.normal(size=act.sum()) + 1j * rng.normal(size=act.sum())
    g_field = inverse_transform(grid, spec) * 0.1

    w = profile_spectrum(grid, g_field, 2.3)
    uni = abs(np.sqrt((np.abs(w) ** 2).sum() / grid.box_length) - l2_norm(grid, g_field))
    rows.append(("profile_unitary", uni < 1e-13, f"err={uni:.2e}"))

    acc = PhaseAccumulator(grid)
    amp = 1.7
    const = np.sqrt(amp) * np.ones(128, complex)
    for t in np.linspace(0, 4, 321):
        acc.push(const, t)
    exact = -sym.c_star(grid.xi) * bracket(grid.xi) ** 3 * amp / (2 * np.pi) * np.log(5.0)
    rel = np.abs(acc.theta - exact).max() / np.abs(exact).max()
    rows.append(("phase_trapezoid", rel < 1e-4, f"rel={rel:.2e}"))
    rows.append(("phase_zero_mode", acc.theta[grid.index_of(0)] == 0.0, "theta(0)=0"))

    ctx = NormalFormContext(grid, dealias=False)
    t = 0.9
    lhs = np.exp(1j * t * bracket(grid.xi)) * forward_transform(grid, cubic_n(ctx, g_field))
    wh = profile_spectrum(grid, g_field, t)
    tot = np.zeros(128, complex)
    for tr in sym.SIGN_TRIPLES:
        tot += cubic_interaction(grid, tr, wh, t)
    rel = np.abs(lhs - 1j * tot).max() / np.abs(lhs).max()
    rows.append(("interaction_consistency", rel < 1e-9, f"rel={rel:.2e}"))

    n1 = cubic_n(ctx, 2.0 * g_field)
    hom = np.abs(n1 - 8.0 * cubic_n(ctx, g_field)).max() / np.abs(n1).max()
    rows.append(("cubic_homogeneity", hom <= 1e-12, f"rel={hom:.2e}"))
    q_ratio = (l2_norm(grid, quartic_remainder(ctx, g_field * 0.1))
               / l2_norm(grid, quartic_remainder(ctx, g_field * 0.05)))
    rows.append(("quartic_scaling", 14.0 <= q_ratio <= 18.0, f"ratio={q_ratio:.2f}"))
    return rows


def suite_appendix(seed: int = 1234):
    rows = []
    errs = {lam: quadrature_check_bump(lam, 2.0) for lam in (20, 40, 80, 100)}
    c_rec = errs[100] * 100 ** 2 * 2 ** 2
    rows.append(("bump_integral_c_recorded", np.isfinite(c_rec),
                 f"C={c_rec:.3e} (err={errs[100]:.3e})"))
    mu_errs = [quadrature_check_bump(20.0, mu) for mu in (1.0, 2.0, 4.0)]
    rows.append(("bump_integral_mu_trend",
                 mu_errs[0] > mu_errs[1] > mu_errs[2],
                 "err(mu=1,2,4)=" + ",".join(f"{e:.2e}" for e in mu_errs)))
    r1, r2 = errs[20] / errs[40], errs[40] / errs[80]
    rows.append(("bump_integral_quartering", 2.0 <= r1 <= 6.0 and 2.0 <= r2 <= 6.0,
                 f"ratios={r1:.1f},{r2:.1f} (plateau bump decays faster; see ledger)"))

    sups = []
    for npts in (8192, 16384):
        grid = GridSpec(npts, 1600 * math.pi)
        f = np.exp(-((grid.x / 4.0) ** 2)) * np.cos(grid.x)
        ts = np.geomspace(1, 500, 30)
        tv = 0.5 * grid.box_length - 4.0 * math.sqrt(math.log(1e10))
        _, _, sup, flagged = dispersive_constant_check(grid, f, ts, tv)
        sups.append(sup)
        if npts == 8192:
            rows.append(("dispersive_no_wraparound", not flagged, f"flag={flagged}"))
    drift = abs(sups[1] - sups[0]) / sups[0]
    rows.append(("dispersive_sup_finite", all(np.isfinite(sups)),
                 f"supR={sups[0]:.4f}"))
    rows.append(("dispersive_grid_stable", drift <= 0.2, f"drift={drift:.2%}"))

    grid = GridSpec(8192, 1600 * math.pi)
    f = np.exp(-((grid.x / 1.0) ** 2)) * np.cos(grid.x)
    spec = forward_transform(grid, f)
    ts = np.geomspace(1, 500, 40)
    sups_t = [float(np.abs(inverse_transform(
        grid, np.exp(1j * t * bracket(grid.xi)) * spec)).max()) for t in ts]
    fit = rate_fit(ts, sups_t, (30, 500))
    rows.append(("dispersive_decay_rate", abs(fit.slope + 0.5) <= 0.05,
                 f"slope={fit.slope:.4f}+-{fit.band:.3f}"))
    return rows


SUITES = {
    "symbols": suite_symbols,
    "identities": suite_identities,
    "scattering": suite_scattering,
    "appendix": suite_appendix,
}


def run_suite(name: str, seed: int = 1234):
    if name == "all":
        rows = []
        for key in ("symbols", "identities", "scattering", "appendix"):
            rows.extend((f"{key}.{n}", ok, d) for n, ok, d in SUITES[key](seed))
        return rows
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{sorted(SUITES)} or 'all'")
    return SUITES[name](seed)
