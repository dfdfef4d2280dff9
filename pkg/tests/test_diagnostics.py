import io
import math

import numpy as np
import pytest

from plasmawave.diagnostics import (DiagnosticsRecord, ShockMonitor,
                                    gamma_field, gamma_tilde_direct,
                                    gamma_tilde_profile, max_density_gradient,
                                    rate_fit, records_from_csv, records_to_csv,
                                    shock_detect, spectral_tail_ratio)
from plasmawave.dynamics import (ComplexState, RunConfig, StateNV, convert,
                                 initial_state, rhs, run)
from plasmawave.grid import GridSpec, apply_multiplier, bracket, l2_norm, sobolev_norm
from plasmawave.normal_form import NormalFormContext, cubic_n, shatah_g
from conftest import band_limited_complex


def test_gamma_at_time_zero(rng):
    g = GridSpec(256, 30.0)
    u = np.stack([np.exp(-g.x ** 2), np.exp(-2 * g.x ** 2)])
    du = np.stack([np.cos(g.x) * np.exp(-g.x ** 2), np.zeros(256)])
    out = gamma_field(g, u, 0.0, du)
    assert np.abs(out - g.x * du).max() < 1e-14


def test_gamma_zero_field(rng):
    g = GridSpec(128, 10.0)
    z = np.zeros((2, 128))
    assert np.abs(gamma_field(g, z, 3.0, z)).max() == 0.0


def test_gamma_finite_difference_oracle():
    """Gamma U against a finite-difference evaluation along a trajectory."""
    cfg = RunConfig(num_points=512, box_length=50 * math.pi, amplitude=0.01,
                    packet_width=4.0, dt=0.01, t_final=2.02, diag_interval=0.01,
                    store_fields=True)
    res = run(cfg)
    traj = res.trajectory
    g = cfg.grid()
    t0 = 1.0
    st = traj.state_at(t0)
    ru = convert(st, "ru")
    d = rhs(ru)
    gam = gamma_field(g, ru.vec, t0, np.stack([d.r, d.u]))
    # finite differences in t of the stored trajectory; fourth order in x
    sm = convert(traj.state_at(t0 - 0.01), "ru").vec
    sp = convert(traj.state_at(t0 + 0.01), "ru").vec
    dt_fd = (sp - sm) / 0.02

    def ddx4(f):
        return (8 * (np.roll(f, -1) - np.roll(f, 1))
                - (np.roll(f, -2) - np.roll(f, 2))) / (12 * g.dx)

    dx_fd = np.stack([ddx4(ru.vec[0]), ddx4(ru.vec[1])])
    ref = t0 * dx_fd + g.x * dt_fd
    num = l2_norm(g, gam - ref)
    assert num / l2_norm(g, ref) < 1e-3


def test_gamma_tilde_two_routes(rng):
    g = GridSpec(512, 60.0)
    gg = band_limited_complex(g, rng, 50) * np.exp(-((g.x / 5.0) ** 2))
    direct = gamma_tilde_direct(g, gg, 2.0)
    via = gamma_tilde_profile(g, gg, 2.0, np.zeros_like(gg))
    assert np.abs(direct - via).max() / np.abs(direct).max() < 1e-10


def test_gamma_tilde_zero():
    g = GridSpec(128, 10.0)
    z = np.zeros(128, complex)
    assert np.abs(gamma_tilde_profile(g, z, 1.0, z)).max() == 0.0


def test_gamma_tilde_spectral_identity():
    """<xi> d/dxi of the profile equals the transported weighted field."""
    cfg = RunConfig(num_points=1024, box_length=100 * math.pi, amplitude=0.01,
                    packet_width=5.0, dt=0.05, t_final=3.0, diag_interval=1.0,
                    store_fields=True)
    res = run(cfg)
    st = res.trajectory.state_at(2.0)
    g = cfg.grid()
    ctx = NormalFormContext(g)
    gf = shatah_g(ctx, st.h)
    nh = cubic_n(ctx, st.h)
    t = st.t
    from plasmawave.grid import forward_transform
    ghat = forward_transform(g, gf)
    what = np.exp(1j * t * bracket(g.xi)) * ghat
    dxi = g.xi[1] - g.xi[0]
    lhs = bracket(g.xi[1:-1]) * (what[2:] - what[:-2]) / (2 * dxi)
    gt = gamma_tilde_profile(g, gf, t, nh)
    rhs_v = (np.exp(1j * t * bracket(g.xi)) * forward_transform(g, gt))[1:-1]
    # centered d/dxi is second order; compare on the energetic band
    band = np.abs(what[1:-1]) > 1e-6 * np.abs(what).max()
    err = np.abs(lhs - rhs_v)[band]
    scale = np.abs(lhs[band]).max()
    assert err.max() / scale < 0.05


def test_rate_fit_exact_power_law():
    ts = np.linspace(10, 100, 30)
    fit = rate_fit(ts, 3.0 * ts ** -0.5, (10, 100))
    assert abs(fit.slope + 0.5) < 1e-12
    fit0 = rate_fit(ts, 2.0 * np.ones_like(ts), (10, 100))
    assert abs(fit0.slope) < 1e-12


def test_rate_fit_window_guard():
    ts = np.linspace(1, 5, 5)
    with pytest.raises(ValueError):
        rate_fit(ts, ts, (1, 5))


def test_record_csv_round_trip():
    recs = [DiagnosticsRecord(t=0.5 * i, sup_abs_h=1e-3 / (1 + i),
                              sobolev_u=0.1, winf_u=0.2, gamma_u_h_n1=0.3,
                              xu_h_n1=0.4, xw_h_n1m4=0.5, neutrality=1e-17,
                              tail_ratio=1e-20, max_grad_n=0.01,
                              weighted_profile_sup=7.0, phase_at_carrier=1e-4,
                              wraparound_valid=1) for i in range(5)]
    buf = io.StringIO()
    records_to_csv(recs, buf, comment="test")
    buf.seek(0)
    back = records_from_csv(buf)
    assert len(back) == 5
    for a, b in zip(recs, back):
        assert a == b


def test_equilibrium_run_clean():
    cfg = RunConfig(num_points=256, box_length=20 * math.pi, amplitude=0.0,
                    dt=0.1, t_final=5.0, diag_interval=1.0)
    res = run(cfg)
    assert res.status == "clean"


def test_shock_detect_offline_steepening():
    times = list(np.linspace(0, 10, 41))
    grads = list(np.exp(np.linspace(0, 3.5, 41)))   # accelerating growth
    tails = [0.0] * 41
    status, t = shock_detect(times, grads, tails)
    assert status == "steepening"
    assert t <= 10.0


def test_shock_detect_offline_resolution():
    times = list(np.linspace(0, 10, 41))
    grads = [1.0] * 41
    tails = [0.0] * 20 + [1e-3] * 21
    status, t = shock_detect(times, grads, tails)
    assert status == "resolution_loss"
    assert t == times[20]


def test_shock_detect_priority():
    # both cross: steepening wins even though the tail crossed earlier
    times = list(np.linspace(0, 10, 41))
    grads = list(np.exp(np.linspace(0, 3.5, 41)))
    tails = [1e-3] * 41
    status, _ = shock_detect(times, grads, tails)
    assert status == "steepening"


def test_tail_ratio_concentrated_state():
    g = GridSpec(256, 2 * math.pi)
    st = StateNV(g, 1.0 + 0.01 * np.cos(g.x), 0.01 * np.sin(g.x))
    assert spectral_tail_ratio(st) < 1e-20


def test_max_density_gradient_formulations():
    g = GridSpec(256, 2 * math.pi)
    nv = StateNV(g, 1.0 + 0.01 * np.cos(g.x), np.zeros(256))
    want = 0.01
    assert abs(max_density_gradient(nv) - want) < 1e-12
    for target in ("ev", "ru", "h"):
        st = convert(nv, target)
        assert abs(max_density_gradient(st) - want) < 1e-10
