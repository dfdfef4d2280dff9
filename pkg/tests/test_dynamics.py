import math

import numpy as np
import pytest

from plasmawave.dynamics import (ComplexState, NeutralityError, RunConfig,
                                 StateNV, StateRU, CflError, convert,
                                 initial_state, neutrality_residual,
                                 riemann_blowup_oracle, rhs, run,
                                 step_ifrk4_h, step_ifrk4_ru, step_rk4_nv,
                                 valid_horizon)
from plasmawave.grid import GridSpec, bracket, l2_norm


def small_config(**kw):
    base = dict(num_points=512, box_length=50 * math.pi, amplitude=0.01,
                packet_width=6.0, carrier=1.0, dt=0.05, t_final=5.0,
                diag_interval=1.0)
    base.update(kw)
    return RunConfig(**base)


def test_equilibrium_conversions():
    g = GridSpec(128, 2 * math.pi)
    st = StateNV(g, np.ones(128), np.zeros(128))
    for target in ("ev", "ru", "h"):
        out = convert(st, target)
        arrays = [out.h] if target == "h" else [out.e if target == "ev" else out.r,
                                                out.v if target == "ev" else out.u]
        for a in arrays:
            assert np.abs(a).max() == 0.0


def test_single_mode_conversion():
    g = GridSpec(128, 2 * math.pi)
    eps = 0.1
    ev_state = convert(StateNV(g, 1.0 + np.gradient(np.zeros(128)), np.zeros(128)), "ev")
    from plasmawave.dynamics import StateEV
    st = StateEV(g, eps * np.cos(g.x), np.zeros(128))
    h = convert(st, "h").h
    assert np.abs(h.imag).max() < 1e-15
    assert np.abs(h.real - 0.5 * eps * np.cos(g.x)).max() < 1e-13


def test_conversion_round_trip(rng):
    cfg = small_config()
    st = initial_state(cfg)
    nv = convert(st, "nv")
    back = convert(convert(convert(convert(convert(nv, "ev"), "ru"), "h"), "ru"), "nv")
    assert np.abs(back.n - nv.n).max() < 1e-12
    assert np.abs(back.v - nv.v).max() < 1e-12


def test_neutrality_guard():
    g = GridSpec(128, 2 * math.pi)
    with pytest.raises(NeutralityError):
        convert(StateNV(g, np.ones(128) * 1.01, np.zeros(128)), "ev")


def test_zero_state_zero_tendency():
    g = GridSpec(128, 2 * math.pi)
    d = rhs(ComplexState(g, np.zeros(128, complex)))
    assert np.abs(d.h).max() == 0.0


def test_linear_dispersion_single_mode():
    g = GridSpec(64, 2 * math.pi)
    h = np.exp(1j * g.x)
    d = rhs(ComplexState(g, h), nonlinear=False)
    assert np.abs(d.h + 1j * math.sqrt(2) * h).max() < 1e-12


def test_rhs_cross_formulation(rng):
    cfg = small_config()
    st = initial_state(cfg)
    ru = convert(st, "ru")
    d_ru = rhs(ru)
    d_h = rhs(convert(st, "h"))
    num = np.abs((d_ru.r + 1j * d_ru.u) - d_h.h).max()
    assert num / np.abs(d_h.h).max() < 1e-10


def test_ifrk4_linear_exact():
    g = GridSpec(64, 2 * math.pi)
    h = np.exp(1j * g.x)
    out = step_ifrk4_h(ComplexState(g, h), 0.04, nonlinear=False)
    exact = np.exp(-1j * 0.04 * math.sqrt(2)) * h
    assert np.abs(out.h - exact).max() < 1e-13


def test_ifrk4_self_convergence():
    cfg = small_config(amplitude=0.2, t_final=1.0)

    def integrate(dt):
        s = initial_state(cfg)
        for i in range(int(round(1.0 / dt))):
            s = step_ifrk4_h(s, dt)
        return s.h

    ref = integrate(0.00625)
    e1 = np.abs(integrate(0.05) - ref).max()
    e2 = np.abs(integrate(0.025) - ref).max()
    assert 14.0 <= e1 / e2 <= 18.0


def test_cfl_guard():
    g = GridSpec(512, 2 * math.pi)     # dx ~ 0.0123
    with pytest.raises(CflError):
        step_ifrk4_h(ComplexState(g, np.zeros(512, complex)), 0.1)


def test_neutrality_conservation_many_steps():
    cfg = small_config(dt=0.01, t_final=1.0)
    st = initial_state(cfg)
    drift = []
    for i in range(10_000):
        st = step_ifrk4_h(st, 0.0005)
        if i % 1000 == 0:
            drift.append(neutrality_residual(st))
    assert max(drift) <= 1e-12


def test_formulation_equivalence():
    cfg = small_config(t_final=10.0, dt=0.05)
    s_h = initial_state(cfg)
    s_ru = convert(s_h, "ru")
    for _ in range(200):
        s_h = step_ifrk4_h(s_h, 0.05)
        s_ru = step_ifrk4_ru(s_ru, 0.05)
    diff = np.abs((s_ru.r + 1j * s_ru.u) - s_h.h).max()
    assert diff / np.abs(s_h.h).max() < 1e-8


def test_time_reversal():
    cfg = small_config(t_final=2.0, dt=0.02)
    s0 = initial_state(cfg)
    s = ComplexState(s0.grid, s0.h.copy(), 0.0)
    for _ in range(100):
        s = step_ifrk4_h(s, 0.02)
    for _ in range(100):
        s = step_ifrk4_h(s, -0.02)
    assert np.abs(s.h - s0.h).max() / np.abs(s0.h).max() < 1e-7


def test_zero_amplitude_constant_run():
    # nothing propagates at zero amplitude, so the horizon guard can lift
    cfg = small_config(amplitude=0.0, t_final=100.0, dt=0.1,
                       diag_interval=10.0, allow_wraparound=True)
    res = run(cfg)
    assert res.status == "clean"
    assert np.abs(res.final_state.h).max() <= 1e-11


def test_small_data_run_clean():
    cfg = small_config(t_final=20.0, dt=0.05, diag_interval=0.5)
    res = run(cfg)
    assert res.status == "clean"
    assert res.resolution_time is None


def test_run_rejects_beyond_horizon():
    cfg = small_config(t_final=1e4)
    with pytest.raises(ValueError):
        run(cfg)


def test_riemann_oracle_sine():
    g = GridSpec(256, 2 * math.pi)
    n0 = 1.0 - 0.1 * np.sin(g.x)
    t = riemann_blowup_oracle(g, n0, np.zeros(256))
    assert abs(t - 10.0) < 1e-9


def test_riemann_oracle_no_compression():
    g = GridSpec(256, 2 * math.pi)
    assert riemann_blowup_oracle(g, np.ones(256), np.zeros(256)) is None


def test_euler_steepening_vs_oracle():
    # coarse, fast check of detector-vs-oracle agreement on a sine wave:
    # fully compressive data on a small box with shock-resolving cutoff
    g = GridSpec(1024, 2 * math.pi)
    eps = 0.05
    n0 = 1.0 - eps * np.sin(g.x)
    v0 = np.zeros(1024)
    t_star = riemann_blowup_oracle(g, n0, v0)
    cfg = RunConfig(num_points=1024, box_length=2 * math.pi, amplitude=eps,
                    dt=0.001, t_final=1.25 * t_star, formulation="nv",
                    electric_field_on=False, diag_interval=t_star / 80,
                    allow_wraparound=True)
    res = run(cfg, state=StateNV(g, n0, v0, 0.0))
    assert res.status == "steepening"
    assert abs(res.detector_time - t_star) / t_star <= 0.15


def test_valid_horizon_positive():
    cfg = small_config()
    assert 0 < valid_horizon(cfg) < 0.5 * cfg.box_length
