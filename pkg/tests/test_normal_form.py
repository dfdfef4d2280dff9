import math

import numpy as np
import pytest

from plasmawave.bilinear import make_plan
from plasmawave.dynamics import RunConfig, initial_state, step_ifrk4_h
from plasmawave.grid import GridSpec, l2_norm, sobolev_norm, wk_inf_norm
from plasmawave.normal_form import (NormalFormContext, cubic_n, phi_transform,
                                    quartic_remainder, residual_g, shatah_g,
                                    shatah_g_fast)
from conftest import band_limited_complex, band_limited_real


@pytest.fixture(scope="module")
def ctx256():
    return NormalFormContext(GridSpec(256, 20 * math.pi))


@pytest.fixture(scope="module")
def hfield(ctx256):
    rng = np.random.default_rng(11)
    return 0.01 * band_limited_complex(ctx256.grid, rng, 28)


def test_phi_zero(ctx256):
    z = np.zeros((2, 256))
    assert np.abs(phi_transform(ctx256, z)).max() == 0.0


def test_phi_quadratic_correction_scaling(ctx256, hfield):
    u_vec = np.stack([hfield.real, hfield.imag])
    d1 = phi_transform(ctx256, u_vec) - u_vec
    d2 = phi_transform(ctx256, 0.5 * u_vec) - 0.5 * u_vec
    ratio = l2_norm(ctx256.grid, d1) / l2_norm(ctx256.grid, d2)
    assert abs(ratio - 4.0) <= 0.2


def test_phi_norm_equivalence():
    cfg = RunConfig(num_points=512, box_length=50 * math.pi, amplitude=0.01,
                    packet_width=6.0, dt=0.05, t_final=1.0)
    st = initial_state(cfg)
    from plasmawave.dynamics import convert
    u_vec = convert(st, "ru").vec
    ctx = NormalFormContext(st.grid)
    phi = phi_transform(ctx, u_vec)
    r = sobolev_norm(st.grid, phi, 6) / sobolev_norm(st.grid, u_vec, 6)
    assert 0.5 <= r <= 2.0


def test_shatah_g_zero(ctx256):
    assert np.abs(shatah_g(ctx256, np.zeros(256, complex))).max() == 0.0


def test_shatah_correction_scaling(ctx256, hfield):
    d1 = shatah_g(ctx256, hfield) - hfield
    d2 = shatah_g(ctx256, 0.5 * hfield) - 0.5 * hfield
    ratio = l2_norm(ctx256.grid, d1) / l2_norm(ctx256.grid, d2)
    assert abs(ratio - 4.0) <= 0.2


def test_fast_path_matches_plans(ctx256, hfield):
    a = shatah_g(ctx256, hfield)
    b = shatah_g_fast(ctx256.grid, hfield)
    assert np.abs(a - b).max() / np.abs(a).max() < 1e-13


def test_cubic_homogeneity(ctx256, hfield):
    n2 = cubic_n(ctx256, 2.0 * hfield)
    n1 = cubic_n(ctx256, hfield)
    assert np.abs(n2 - 8.0 * n1).max() / np.abs(n2).max() <= 1e-12


def test_cubic_zero(ctx256):
    assert np.abs(cubic_n(ctx256, np.zeros(256, complex))).max() == 0.0


def test_cubic_against_trilinear_oracle():
    """Nested bilinear evaluation equals a flat trilinear composition."""
    from plasmawave.bilinear import apply_trilinear
    from plasmawave import symbols as sym

    g = GridSpec(128, 8 * math.pi)
    rng = np.random.default_rng(3)
    h = 0.1 * band_limited_complex(g, rng, 12)
    ctx = NormalFormContext(g, dealias=False)
    nested = cubic_n(ctx, h)

    hb = np.conj(h)
    pieces = np.zeros(128, complex)
    # first slot: O[O[h^i1 q]h^i2, b^{++}] h  -> flat symbols b(a+b, c) q(a, b)
    for pair, f1, f2 in (("++", h, h), ("+-", h, hb), ("--", hb, hb)):
        comp = lambda a, b, c, p=pair: sym.shatah_b("++", a + b, c) * sym.shatah_q(p, a, b)
        pieces += apply_trilinear(g, f1, f2, comp, h)
        # second slot: O[h, b^{++}] O[h^i1 q]h^i2 -> b(a, b+c) q(b, c)
        comp2 = lambda a, b, c, p=pair: sym.shatah_b("++", a, b + c) * sym.shatah_q(p, b, c)
        pieces += apply_trilinear(g, h, f1, comp2, f2)
    # compare against the matching two terms of the full cubic term
    from plasmawave.bilinear import apply_bilinear
    k = (apply_bilinear(ctx.plan("q++"), h, h)
         + apply_bilinear(ctx.plan("q+-"), h, hb)
         + apply_bilinear(ctx.plan("q--"), hb, hb))
    two_terms = (apply_bilinear(ctx.plan("b++"), k, h)
                 + apply_bilinear(ctx.plan("b++"), h, k))
    assert np.abs(pieces - two_terms).max() / np.abs(two_terms).max() < 1e-10


def test_quartic_remainder_scaling(ctx256, hfield):
    r1 = quartic_remainder(ctx256, hfield)
    r2 = quartic_remainder(ctx256, 0.5 * hfield)
    ratio = l2_norm(ctx256.grid, r1) / l2_norm(ctx256.grid, r2)
    assert 14.0 <= ratio <= 18.0


def test_quartic_zero(ctx256):
    assert np.abs(quartic_remainder(ctx256, np.zeros(256, complex))).max() == 0.0


class TestResidual:
    """Centered-difference certificate of the transformed evolution."""

    @pytest.fixture(scope="class")
    def snapshots(self):
        cfg = RunConfig(num_points=512, box_length=50 * math.pi, amplitude=0.01,
                        packet_width=6.0, carrier=1.0, dt=0.0005, t_final=1.05,
                        diag_interval=1.0)
        st = initial_state(cfg)
        keep = {}
        targets = {round(t / cfg.dt): t for t in
                   (1.0 - 0.02, 1.0 - 0.01, 1.0, 1.0 + 0.01, 1.0 + 0.02)}
        n = int(round(cfg.t_final / cfg.dt))
        for i in range(1, n + 1):
            st = step_ifrk4_h(st, cfg.dt)
            st.t = i * cfg.dt
            if i in targets:
                keep[targets[i]] = st.h.copy()
        return cfg, keep

    def test_richardson_ratio(self, snapshots):
        cfg, keep = snapshots
        ctx = NormalFormContext(cfg.grid())
        r2 = residual_g(ctx, keep[0.98], keep[1.0], keep[1.02], 0.02)
        r1 = residual_g(ctx, keep[0.99], keep[1.0], keep[1.01], 0.01)
        assert 3.5 <= r2 / r1 <= 4.5

    def test_kernels_matter(self, snapshots):
        cfg, keep = snapshots
        grid = cfg.grid()
        ctx = NormalFormContext(grid)

        class ZeroKernels(NormalFormContext):
            def plan(self, name):
                if name.startswith("b"):
                    return make_plan(self.grid, lambda a, b: np.zeros(
                        np.broadcast(a, b).shape), matrix=False,
                        dealias_output=True, label="0")
                return super().plan(name)

        zctx = ZeroKernels(grid)
        r = residual_g(ctx, keep[0.99], keep[1.0], keep[1.01], 0.01)
        rz = residual_g(zctx, keep[0.99], keep[1.0], keep[1.01], 0.01)
        assert rz / r >= 100.0

    def test_amplitude_independent_floor(self, snapshots):
        # identical run at half amplitude: the floor is set by dt, not eps
        cfg, keep = snapshots
        half = RunConfig(**{**cfg.__dict__, "amplitude": cfg.amplitude / 2})
        st = initial_state(half)
        keep2 = {}
        targets = {round(t / half.dt): t for t in (0.99, 1.0, 1.01)}
        for i in range(1, int(round(1.01 / half.dt)) + 1):
            st = step_ifrk4_h(st, half.dt)
            st.t = i * half.dt
            if i in targets:
                keep2[targets[i]] = st.h.copy()
        ctx = NormalFormContext(cfg.grid())
        r_full = residual_g(ctx, keep[0.99], keep[1.0], keep[1.01], 0.01)
        r_half = residual_g(ctx, keep2[0.99], keep2[1.0], keep2[1.01], 0.01)
        # both at the discretization floor: scales with amplitude (g ~ eps),
        # not with amplitude^2 (quadratic leakage)
        ratio = r_full / r_half
        assert 1.5 <= ratio <= 2.5


def test_shatah_w5inf_decay_shape():
    """||h - g||_{W^{5,inf}} tracks eps^2 (1+t)^{-1} along a run (fitted C)."""
    cfg = RunConfig(num_points=1024, box_length=100 * math.pi, amplitude=0.01,
                    packet_width=3.0, carrier=1.0, dt=0.1, t_final=40.0,
                    diag_interval=1.0, store_fields=True)
    res = __import__("plasmawave.dynamics", fromlist=["run"]).run(cfg)
    ctx = NormalFormContext(cfg.grid())
    traj = res.trajectory
    consts = []
    for t in (10.0, 20.0, 40.0):
        st = traj.state_at(t)
        diff = st.h - shatah_g(ctx, st.h)
        val = wk_inf_norm(cfg.grid(), diff, 5)
        consts.append(val * (1.0 + t) / cfg.amplitude ** 2)
    mid = sorted(consts)[1]
    assert all(abs(c - mid) / mid <= 0.5 for c in consts)
