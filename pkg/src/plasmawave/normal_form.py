"""Quadratic-elimination transforms and their residual certificates.

Two transformations are built here:

* the energy normal form Phi = U + O[u,A1]U + O[r,A2]U + O[u,C1]U +
  O[r,C2]U, whose evolution has cubic-order forcing in energy estimates;
* the scalar transform g = h + O[h,b++]h + O[h,b+-]conj(h) +
  O[conj(h),b--]conj(h), which removes the quadratic terms of the complex
  Klein-Gordon form exactly, leaving the cubic term N(h) and, relative to
  N(g), a quartic remainder.

Every bilinear output here is dealiased, matching the solver's quadratic
terms, so the defining cancellation (d/dt + i<dx>) g = N(h) holds to the
discretization floor independent of amplitude: residual_g measures exactly
that with centered time differences over stored snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import symbols as sym
from .bilinear import BilinearPlan, apply_bilinear, make_plan
from .grid import GridSpec, apply_multiplier, bracket, l2_norm

__all__ = [
    "NormalFormContext", "phi_transform", "shatah_g", "cubic_n",
    "quartic_remainder", "residual_g", "quadratic_sum",
]

_MATRIX_NAMES = ("Q1", "Q2", "S1", "S2", "B1", "B2", "A1", "A2", "C1", "C2")


@dataclass
class NormalFormContext:
    """Lazily built, then immutable, inventory of bilinear plans."""

    grid: GridSpec
    n_sob: int = 6
    cutoff: sym.CutoffParams = field(default_factory=sym.CutoffParams)
    dealias: bool = True
    _plans: dict = field(default_factory=dict, repr=False)

    def plan(self, name: str) -> BilinearPlan:
        if name in self._plans:
            return self._plans[name]
        if name in ("Q1", "Q2", "S1", "S2"):
            fn = lambda a, b, k=name: sym.q_matrix(k, a, b, self.cutoff)
            matrix = True
        elif name in ("B1", "B2"):
            fn = lambda a, b, k=name: sym.b_matrix(k, self.n_sob, a, b, self.cutoff)
            matrix = True
        elif name in ("A1", "A2", "C1", "C2"):
            fn = lambda a, b, k=name: sym.normal_form_matrix(k, self.n_sob, a, b, self.cutoff)
            matrix = True
        elif name.startswith("b") and name[1:] in sym.SIGN_PAIRS:
            fn = lambda a, b, p=name[1:]: sym.shatah_b(p, a, b)
            matrix = False
        elif name.startswith("q") and name[1:] in sym.SIGN_PAIRS:
            fn = lambda a, b, p=name[1:]: sym.shatah_q(p, a, b)
            matrix = False
        else:
            raise KeyError(f"unknown plan {name!r}")
        p = make_plan(self.grid, fn, matrix=matrix, label=name,
                      dealias_output=self.dealias)
        self._plans[name] = p
        return p


def phi_transform(ctx: NormalFormContext, u_vec):
    """Energy normal form of the 2-vector U = (r, u)."""
    u_vec = np.atleast_2d(np.asarray(u_vec))
    r, u = u_vec
    out = u_vec.astype(complex)
    out = out + apply_bilinear(ctx.plan("A1"), u, u_vec)
    out = out + apply_bilinear(ctx.plan("A2"), r, u_vec)
    out = out + apply_bilinear(ctx.plan("C1"), u, u_vec)
    out = out + apply_bilinear(ctx.plan("C2"), r, u_vec)
    return out.real if np.isrealobj(u_vec) else out


def shatah_g(ctx: NormalFormContext, h):
    """Quadratic-free unknown g built from h."""
    h = np.asarray(h, dtype=complex)
    hb = np.conj(h)
    return (h
            + apply_bilinear(ctx.plan("b++"), h, h)
            + apply_bilinear(ctx.plan("b+-"), h, hb)
            + apply_bilinear(ctx.plan("b--"), hb, hb))


def quadratic_sum(ctx: NormalFormContext, h):
    """Sum of the quadratic interactions O[h^i1, q^{i1 i2}] h^i2."""
    h = np.asarray(h, dtype=complex)
    hb = np.conj(h)
    return (apply_bilinear(ctx.plan("q++"), h, h)
            + apply_bilinear(ctx.plan("q+-"), h, hb)
            + apply_bilinear(ctx.plan("q--"), hb, hb))


def cubic_n(ctx: NormalFormContext, h):
    """Cubic term N(h): the quadratic tendency pushed through the b kernels.

    The six nested sums collapse by bilinearity onto the combined quadratic
    field K = sum O[h^i1, q]h^i2 placed in each slot of the g-correction.
    """
    h = np.asarray(h, dtype=complex)
    hb = np.conj(h)
    k = quadratic_sum(ctx, h)
    kb = np.conj(k)
    return (apply_bilinear(ctx.plan("b++"), k, h)
            + apply_bilinear(ctx.plan("b++"), h, k)
            + apply_bilinear(ctx.plan("b+-"), k, hb)
            + apply_bilinear(ctx.plan("b+-"), h, kb)
            + apply_bilinear(ctx.plan("b--"), kb, hb)
            + apply_bilinear(ctx.plan("b--"), hb, kb))


def quartic_remainder(ctx: NormalFormContext, h):
    """N_R = N(h) - N(g): quartic at leading order in the amplitude."""
    return cubic_n(ctx, h) - cubic_n(ctx, shatah_g(ctx, h))


def _pair_signs(pair: str):
    return tuple(1 if c == "+" else -1 for c in pair)


def _shatah_pair_block(xi_j, eta, br_j, br_eta, br_k, ratio_k, pair):
    """b^{pair}(xi_j, eta) from precomputed 1D/gathered tables.

    xi_j, br_j are column vectors (input index); br_k, ratio_k row vectors
    (output index, ratio_k = xi_k/<xi_k>); eta, br_eta the offset gathers.
    """
    i1, i2 = _pair_signs(pair)
    prod = br_j * br_eta
    cross = xi_j * eta
    if pair == "++":
        q = 0.5 * xi_j * br_eta + 0.25 * ratio_k * (prod + cross)
    elif pair == "+-":
        q = -0.5 * xi_j * br_eta + 0.5 * br_j * eta + 0.5 * ratio_k * (cross - prod)
    else:
        q = -0.5 * xi_j * br_eta + 0.25 * ratio_k * (prod + cross)
    den = br_k - i1 * br_j - i2 * br_eta
    return q / den  # times i applied by the caller


def shatah_g_fast(grid: GridSpec, h, dealias: bool = True, tol: float = 0.0):
    """Large-grid Shatah transform equivalent to :func:`shatah_g`.

    Same truncated-convolution semantics as the plan path, but the sum runs
    over convolution diagonals (fixed second frequency), where every table
    is a scalar or a contiguous slice: no symbol lattice is ever formed.
    Diagonals whose spectral weight is below ``tol`` times the peak are
    skipped (tol = 0 keeps the evaluation exact; the run pipeline uses a
    sub-roundoff threshold).  Agrees with the plan path to roundoff.
    """
    from .grid import dealias as dealias_spec, forward_transform, inverse_transform

    h = np.asarray(h, dtype=complex)
    n = grid.num_points
    xi = grid.xi
    br = bracket(xi)
    ratio = xi / br
    hs = forward_transform(grid, h)
    hbs = forward_transform(grid, np.conj(h))
    corr = np.zeros(n, dtype=complex)
    scale = max(np.abs(hs).max(), np.abs(hbs).max())
    cut = tol * scale
    for d in range(n):
        w_h, w_hb = hs[d], hbs[d]
        if abs(w_h) <= cut and abs(w_hb) <= cut:
            continue
        eta = xi[d]
        beta = br[d]
        off = d - n // 2
        j0, j1 = max(0, -off), min(n, n - off)
        if j0 >= j1:
            continue
        sj = slice(j0, j1)
        sk = slice(j0 + off, j1 + off)
        xj, bj, bk, rk = xi[sj], br[sj], br[sk], ratio[sk]
        prod = bj * beta
        cross = xj * eta
        q_pp = 0.5 * xj * beta + 0.25 * rk * (prod + cross)
        q_pm = -0.5 * xj * beta + 0.5 * bj * eta + 0.5 * rk * (cross - prod)
        q_mm = q_pp - xj * beta
        den_pp = bk - bj - beta
        den_pm = bk - bj + beta
        den_mm = bk + bj + beta
        contrib = (w_h * (q_pp / den_pp) + w_hb * (q_pm / den_pm)) * hs[sj]
        contrib += w_hb * (q_mm / den_mm) * hbs[sj]
        corr[sk] += contrib
    corr *= 1j / grid.box_length
    if dealias:
        corr = dealias_spec(grid, corr)
    return inverse_transform(grid, hs + corr)


def residual_g(ctx: NormalFormContext, h_minus, h_mid, h_plus, dt: float) -> float:
    """L2 norm of (g_t + i<dx>g - N(h)) with centered time differences.

    The three states are snapshots at t - dt, t, t + dt.  A successful
    normal form leaves only discretization error: O(dt_diff^2) from the
    centred difference plus the solver's own O(dt^4), with no quadratic
    amplitude dependence.
    """
    g_m = shatah_g(ctx, h_minus)
    g_0 = shatah_g(ctx, h_mid)
    g_p = shatah_g(ctx, h_plus)
    dgdt = (g_p - g_m) / (2.0 * dt)
    lin = 1j * apply_multiplier(ctx.grid, g_0, bracket)
    res = dgdt + lin - cubic_n(ctx, h_mid)
    return l2_norm(ctx.grid, res)
