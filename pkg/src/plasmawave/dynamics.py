"""Time evolution of the electron plasma system in its equivalent forms.

Four formulations of the same dynamics are supported and interconvertible:

* (n, v): density/velocity with the self-consistent field E = dx^{-1}(n-1);
* (E, v): field/velocity;
* (r, u) = (E/2, -v/(2<dx>)): symmetric 2-vector form, linear part a
  Klein-Gordon rotation;
* h = r + i u: complex scalar Klein-Gordon form.

The (r, u) and h forms advance with an integrating-factor RK4: the linear
flow is a unitary frequency rotation (no stiffness), which the integrating
factor applies exactly, so one linear step is exact phase rotation and the
nonlinear error is fourth order.  The (n, v) form, used for pure-Euler
comparison runs, advances with plain RK4.

Pure-Euler mode (electric field off) is genuinely hyperbolic: with cubic
pressure the characteristics decouple and v +- n ride Burgers equations,
which gives an exact characteristic blowup time used as the independent
oracle for the shock detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .grid import (GridSpec, apply_multiplier, bracket, dealias,
                   derivative, forward_transform, inverse_transform,
                   multiply_dealiased)

__all__ = [
    "StateNV", "StateEV", "StateRU", "ComplexState",
    "RunConfig", "RunResult", "Trajectory",
    "initial_state", "convert", "rhs", "quadratic_rhs_h",
    "step_ifrk4_h", "step_ifrk4_ru", "step_rk4_nv",
    "run", "riemann_blowup_oracle", "neutrality_residual",
    "valid_horizon", "NeutralityError", "CflError", "NanError",
]


class NeutralityError(ValueError):
    """mean(n - 1) must vanish for the field E to be periodic."""


class CflError(RuntimeError):
    pass


class NanError(RuntimeError):
    def __init__(self, where: int, t: float):
        super().__init__(f"non-finite sample at index {where}, t={t:.6g}")
        self.where = where
        self.t = t


@dataclass
class StateNV:
    grid: GridSpec
    n: np.ndarray
    v: np.ndarray
    t: float = 0.0


@dataclass
class StateEV:
    grid: GridSpec
    e: np.ndarray
    v: np.ndarray
    t: float = 0.0


@dataclass
class StateRU:
    grid: GridSpec
    r: np.ndarray
    u: np.ndarray
    t: float = 0.0

    @property
    def vec(self) -> np.ndarray:
        return np.stack([self.r, self.u])


@dataclass
class ComplexState:
    grid: GridSpec
    h: np.ndarray
    t: float = 0.0


def neutrality_residual(state) -> float:
    """|mean(n-1)|; exactly conserved by the flux form of the continuity law."""
    nv = convert(state, "nv")
    return float(abs(np.mean(nv.n - 1.0)))


def _inv_dx(grid: GridSpec, f):
    """dx^{-1} with zero-mean gauge."""
    def sym(xi):
        safe = np.where(xi == 0, 1.0, xi)
        return np.where(xi == 0, 0.0, 1.0 / (1j * safe))
    out = apply_multiplier(grid, f, sym, mean_mode=0.0)
    return out.real if np.isrealobj(f) else out


def _inv_bracket(grid: GridSpec, f):
    out = apply_multiplier(grid, f, lambda xi: 1.0 / bracket(xi))
    return out.real if np.isrealobj(f) else out


def convert(state, target: str):
    """Convert between the four formulations; E is gauged to zero mean."""
    grid, t = state.grid, state.t
    if isinstance(state, StateNV):
        m = float(np.mean(state.n - 1.0))
        if abs(m) > 1e-10:
            raise NeutralityError(f"mean(n-1) = {m:.3e} != 0")
        ev = StateEV(grid, _inv_dx(grid, state.n - 1.0), state.v.copy(), t)
    elif isinstance(state, StateEV):
        ev = state
    elif isinstance(state, StateRU):
        ev = StateEV(grid, 2.0 * state.r,
                     -2.0 * apply_multiplier(grid, state.u, bracket).real, t)
    elif isinstance(state, ComplexState):
        ru = StateRU(grid, state.h.real.copy(), state.h.imag.copy(), t)
        return convert(ru, target) if target != "ru" else ru
    else:
        raise TypeError(f"unknown state {type(state)!r}")

    if target == "ev":
        return ev
    if target == "nv":
        return StateNV(grid, 1.0 + derivative(grid, ev.e), ev.v.copy(), t)
    if target == "ru":
        return StateRU(grid, 0.5 * ev.e, -0.5 * _inv_bracket(grid, ev.v), t)
    if target == "h":
        ru = convert(ev, "ru")
        return ComplexState(grid, ru.r + 1j * ru.u, t)
    raise ValueError(f"unknown formulation {target!r}")


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _quadratic_ru(grid: GridSpec, r, u):
    """Nonlinear part of the (r, u) system: (2<dx>u r_x, dx/<dx>[(<dx>u)^2 + r_x^2])."""
    bu = apply_multiplier(grid, u, bracket).real
    rx = derivative(grid, r)
    f1 = 2.0 * multiply_dealiased(grid, bu, rx)
    sq = multiply_dealiased(grid, bu, bu) + multiply_dealiased(grid, rx, rx)
    f2 = apply_multiplier(grid, sq, lambda xi: 1j * xi / bracket(xi)).real
    return f1, f2


def quadratic_rhs_h(grid: GridSpec, h):
    """Quadratic terms of the complex form: f1 + i f2 of the (r, u) split."""
    f1, f2 = _quadratic_ru(grid, h.real, h.imag)
    return f1 + 1j * f2


def rhs(state, electric_field_on: bool = True, nonlinear: bool = True):
    """Full tendency in the state's own formulation.

    With ``electric_field_on`` False the (n, v) form becomes the pure Euler
    system (cubic pressure, no field); the KG-based forms require the field.
    """
    grid = state.grid
    if isinstance(state, StateNV):
        n, v = state.n, state.v
        dn = -derivative(grid, multiply_dealiased(grid, n, v) if nonlinear
                         else v)  # (nv)_x; linearized: v_x
        if nonlinear:
            flux = 0.5 * (multiply_dealiased(grid, v, v) + multiply_dealiased(grid, n, n))
            dv = -derivative(grid, flux)
        else:
            dv = -derivative(grid, n)
        if electric_field_on:
            dv = dv + _inv_dx(grid, n - 1.0)
        _guard_finite(dn, state.t)
        _guard_finite(dv, state.t)
        return StateNV(grid, dn, dv, state.t)
    if not electric_field_on:
        raise ValueError("pure-Euler mode runs in the (n, v) formulation")
    if isinstance(state, StateRU):
        r, u = state.r, state.u
        lr = apply_multiplier(grid, u, bracket).real
        lu = -apply_multiplier(grid, r, bracket).real
        if nonlinear:
            f1, f2 = _quadratic_ru(grid, r, u)
            lr, lu = lr + f1, lu + f2
        _guard_finite(lr, state.t)
        return StateRU(grid, lr, lu, state.t)
    if isinstance(state, ComplexState):
        dh = -1j * apply_multiplier(grid, state.h, bracket)
        if nonlinear:
            dh = dh + quadratic_rhs_h(grid, state.h)
        _guard_finite(dh, state.t)
        return ComplexState(grid, dh, state.t)
    raise TypeError(f"no tendency for {type(state)!r}")


def _guard_finite(arr, t):
    if not np.all(np.isfinite(arr)):
        bad = int(np.argmax(~np.isfinite(np.atleast_1d(arr).ravel())))
        raise NanError(bad, t)


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

def _cfl_guard(grid: GridSpec, dt: float):
    if dt > 0.5 * grid.dx + 1e-15:
        raise CflError(f"dt={dt} exceeds 0.5*dx={0.5 * grid.dx}")


def step_ifrk4_h(state: ComplexState, dt: float, nonlinear: bool = True) -> ComplexState:
    """Integrating-factor RK4 on the complex form; exact on the linear flow."""
    grid = state.grid
    _cfl_guard(grid, dt)
    rot_h = np.exp(-0.5j * dt * bracket(grid.xi))
    rot_f = rot_h * rot_h

    def nl(h):
        if not nonlinear:
            return np.zeros_like(h)
        return quadratic_rhs_h(grid, h)

    to_spec = lambda f: forward_transform(grid, f)
    to_phys = lambda s: inverse_transform(grid, s)

    hs = to_spec(state.h)
    a = to_spec(nl(state.h))
    hb = to_phys(rot_h * (hs + 0.5 * dt * a))
    b = to_spec(nl(hb))
    hc = to_phys(rot_h * hs + 0.5 * dt * b)
    c = to_spec(nl(hc))
    hd = to_phys(rot_f * hs + dt * rot_h * c)
    d = to_spec(nl(hd))
    new = rot_f * hs + dt / 6.0 * (rot_f * a + 2.0 * rot_h * (b + c) + d)
    return ComplexState(grid, to_phys(new), state.t + dt)


def _rotate_ru(grid: GridSpec, rs, us, phi):
    """Exact linear flow over angle phi = dt*<xi> in spectral space."""
    c, s = np.cos(phi), np.sin(phi)
    return c * rs + s * us, -s * rs + c * us


def step_ifrk4_ru(state: StateRU, dt: float, nonlinear: bool = True) -> StateRU:
    """Integrating-factor RK4 on the (r, u) system; mirrors the complex form."""
    grid = state.grid
    _cfl_guard(grid, dt)
    phi_h = 0.5 * dt * bracket(grid.xi)

    def nl(r, u):
        if not nonlinear:
            z = np.zeros_like(r)
            return z, z
        return _quadratic_ru(grid, r, u)

    fwd = lambda f: forward_transform(grid, f)
    inv = lambda s: inverse_transform(grid, s).real

    rs, us = fwd(state.r), fwd(state.u)
    a1, a2 = map(fwd, nl(state.r, state.u))
    tb = _rotate_ru(grid, rs + 0.5 * dt * a1, us + 0.5 * dt * a2, phi_h)
    b1, b2 = map(fwd, nl(inv(tb[0]), inv(tb[1])))
    rh, uh = _rotate_ru(grid, rs, us, phi_h)
    c1, c2 = map(fwd, nl(inv(rh + 0.5 * dt * b1), inv(uh + 0.5 * dt * b2)))
    rf, uf = _rotate_ru(grid, rs, us, 2.0 * phi_h)
    cr, cu = _rotate_ru(grid, c1, c2, phi_h)
    d1, d2 = map(fwd, nl(inv(rf + dt * cr), inv(uf + dt * cu)))
    ar, au = _rotate_ru(grid, a1, a2, 2.0 * phi_h)
    br, bu = _rotate_ru(grid, b1 + c1, b2 + c2, phi_h)
    new_r = rf + dt / 6.0 * (ar + 2.0 * br + d1)
    new_u = uf + dt / 6.0 * (au + 2.0 * bu + d2)
    return StateRU(grid, inv(new_r), inv(new_u), state.t + dt)


def step_rk4_nv(state: StateNV, dt: float, electric_field_on: bool = True,
                nonlinear: bool = True) -> StateNV:
    """Classical RK4 on the (n, v) form; the pure-Euler path."""
    grid = state.grid
    _cfl_guard(grid, dt)

    def f(n, v, t):
        d = rhs(StateNV(grid, n, v, t), electric_field_on, nonlinear)
        return d.n, d.v

    n, v, t = state.n, state.v, state.t
    k1 = f(n, v, t)
    k2 = f(n + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], t + 0.5 * dt)
    k3 = f(n + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], t + 0.5 * dt)
    k4 = f(n + dt * k3[0], v + dt * k3[1], t + dt)
    nn = n + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    vv = v + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return StateNV(grid, nn, vv, t + dt)


# ---------------------------------------------------------------------------
# run orchestration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything one integration needs, with wraparound-safe defaults."""

    num_points: int = 8192
    box_length: float = 800.0 * math.pi
    amplitude: float = 0.01
    packet_width: float = 20.0
    carrier: float = 1.0
    dt: float = 0.1
    t_final: float = 300.0
    formulation: str = "h"           # "h" | "ru" | "nv"
    electric_field_on: bool = True
    diag_interval: float = 0.5
    n_sob: int = 6
    n1_sob: int = 5
    p0: float = 1e-3
    nonlinear: bool = True
    allow_wraparound: bool = False
    store_fields: bool = False       # keep full state snapshots at cadence

    def grid(self) -> GridSpec:
        return GridSpec(self.num_points, self.box_length)

    def validate(self):
        g = self.grid()
        if self.dt > 0.5 * g.dx + 1e-15:
            raise CflError(f"dt={self.dt} exceeds 0.5*dx={0.5 * g.dx:.6g}")
        if self.formulation not in ("h", "ru", "nv"):
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if not self.electric_field_on and self.formulation != "nv":
            raise ValueError("pure-Euler runs use the nv formulation")
        tv = valid_horizon(self)
        if self.t_final > tv and not self.allow_wraparound:
            raise ValueError(
                f"t_final={self.t_final} exceeds wraparound horizon {tv:.1f} "
                f"(set allow_wraparound to override)")


def initial_state(config: RunConfig):
    """Gaussian-packet field/velocity data; neutrality exact via n-1 = E_x."""
    g = config.grid()
    x = g.x
    env = np.exp(-((x / config.packet_width) ** 2))
    e0 = config.amplitude * env * np.cos(config.carrier * x)
    v0 = config.amplitude * env * np.sin(config.carrier * x)
    ev = StateEV(g, e0, v0, 0.0)
    return convert(ev, config.formulation)


def support_radius(config: RunConfig, rel: float = 1e-10) -> float:
    """Radius beyond which the initial packet is below rel * peak."""
    if config.amplitude == 0.0:
        return 0.0
    # exp(-(x/s)^2) < rel  =>  |x| > s*sqrt(log(1/rel))
    return config.packet_width * math.sqrt(math.log(1.0 / rel))


def valid_horizon(config: RunConfig) -> float:
    """Wraparound-safe horizon: group speeds are below one."""
    return 0.5 * config.box_length - support_radius(config)


@dataclass
class Trajectory:
    """Snapshots kept at the diagnostic cadence."""

    config: RunConfig
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def push(self, state):
        self.times.append(state.t)
        self.states.append(state)

    def state_at(self, t: float):
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.states[i]


@dataclass
class RunResult:
    status: str                      # clean | steepening | resolution_loss | nan
    config: RunConfig
    final_state: object
    records: list
    trajectory: Optional[Trajectory]
    detector_time: Optional[float] = None
    valid_horizon: float = 0.0
    resolution_time: Optional[float] = None   # first tail crossing, if any


def _stepper_for(config: RunConfig):
    if config.formulation == "h":
        return lambda s, dt: step_ifrk4_h(s, dt, config.nonlinear)
    if config.formulation == "ru":
        return lambda s, dt: step_ifrk4_ru(s, dt, config.nonlinear)
    return lambda s, dt: step_rk4_nv(s, dt, config.electric_field_on, config.nonlinear)


def run(config: RunConfig, observer: Optional[Callable] = None,
        state=None) -> RunResult:
    """Integrate to t_final, emitting diagnostics at the configured cadence.

    ``observer(state)`` is called at every diagnostic time and may return a
    record (collected into the result) and raise StopIteration-like control
    via the shock detector embedded in the caller.  Terminal anomalies
    (NaN, steepening, resolution loss) end the run with a structured status
    rather than an exception.
    """
    from .diagnostics import ShockMonitor

    config.validate()
    if state is None:
        state = initial_state(config)
    t_start = state.t
    step = _stepper_for(config)
    monitor = ShockMonitor(config)
    traj = Trajectory(config) if config.store_fields else None
    records = []

    n_steps = int(round((config.t_final - t_start) / config.dt))
    every = max(1, int(round(config.diag_interval / config.dt)))
    tv = valid_horizon(config)

    def observe(s):
        if traj is not None:
            traj.push(s)
        if observer is not None:
            rec = observer(s)
            if rec is not None:
                records.append(rec)

    status, det_t = None, None
    observe(state)
    monitor.update(state)
    for i in range(1, n_steps + 1):
        try:
            state = step(state, config.dt)
        except NanError:
            status, det_t = "nan", state.t
            break
        # keep t exact to avoid cadence drift
        state.t = t_start + i * config.dt
        if i % every == 0 or i == n_steps:
            observe(state)
            verdict = monitor.update(state)
            if verdict is not None:
                status, det_t = verdict
                break
    if status is None:
        status, det_t = monitor.final_status()
    return RunResult(status, config, state, records, traj, det_t, tv,
                     monitor.resolution_time)


def riemann_blowup_oracle(grid: GridSpec, n0, v0) -> Optional[float]:
    """Characteristic blowup time of the pure Euler flow, if any.

    With cubic pressure the invariants v +- n obey Burgers equations, so a
    negative initial slope s < 0 steepens to infinite gradient at -1/s.
    Returns the earliest such time over both invariants, None when neither
    is compressed.
    """
    best = None
    for w in (v0 + n0, v0 - n0):
        slope = float(derivative(grid, w).min())
        if slope < 0.0:
            t = -1.0 / slope
            best = t if best is None else min(best, t)
    return best
