"""Run-time monitors: vector-field norms, growth/decay fits, shock detection.

A run emits one DiagnosticsRecord per cadence point; the CSV schema is the
record's field order, floats printed with 17 significant digits so files
round-trip bit-exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import (GridSpec, apply_multiplier, boundary_clean, bracket,
                   dealias_cutoff, derivative, forward_transform,
                   l2_norm, sobolev_norm, wk_inf_norm)

__all__ = [
    "DiagnosticsRecord", "records_to_csv", "records_from_csv",
    "gamma_field", "gamma_tilde_profile", "gamma_tilde_direct",
    "rate_fit", "RateFit", "spectral_tail_ratio", "max_density_gradient",
    "ShockMonitor", "shock_detect",
]


@dataclass
class DiagnosticsRecord:
    """One time-stamped row of every monitored quantity."""

    t: float
    sup_abs_h: float
    sobolev_u: float            # ||U||_{H^{n_sob}}
    winf_u: float               # ||U||_{W^{n1_sob+10,inf}}
    gamma_u_h_n1: float         # ||Gamma U||_{H^{n1_sob}}
    xu_h_n1: float              # ||x U||_{H^{n1_sob}}
    xw_h_n1m4: float            # ||x w||_{H^{n1_sob-4}}
    neutrality: float
    tail_ratio: float
    max_grad_n: float
    weighted_profile_sup: float  # sup_xi <xi>^{n1_sob+10} |what|
    phase_at_carrier: float
    wraparound_valid: int

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def records_to_csv(records: Sequence[DiagnosticsRecord], stream: io.TextIOBase,
                   comment: str = ""):
    if comment:
        stream.write(f"# {comment}\n")
    stream.write(",".join(DiagnosticsRecord.header()) + "\n")
    for rec in records:
        cells = []
        for v in rec.row():
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append("%.17g" % float(v))
        stream.write(",".join(cells) + "\n")


def records_from_csv(stream) -> list[DiagnosticsRecord]:
    rows = []
    header = None
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            if header != DiagnosticsRecord.header():
                raise ValueError(f"unexpected CSV header {header}")
            continue
        vals = line.split(",")
        kwargs = dict(zip(header, vals))
        kwargs = {k: (int(v) if k == "wraparound_valid" else float(v))
                  for k, v in kwargs.items()}
        rows.append(DiagnosticsRecord(**kwargs))
    return rows


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

def gamma_field(grid: GridSpec, u_vec, t: float, dt_u_vec):
    """Gamma U = t * dU/dx + x * dU/dt with the centered coordinate."""
    u_vec = np.atleast_2d(np.asarray(u_vec))
    dt_u_vec = np.atleast_2d(np.asarray(dt_u_vec))
    out = np.empty_like(u_vec, dtype=u_vec.dtype)
    for i in range(u_vec.shape[0]):
        dx_u = derivative(grid, u_vec[i])
        out[i] = t * dx_u + grid.x * dt_u_vec[i]
    return out


def gamma_tilde_direct(grid: GridSpec, g_field, t: float):
    """t*dg/dx - i*<dx>(x g), straight from the definition."""
    dg = apply_multiplier(grid, g_field, lambda xi: 1j * xi)
    xg = grid.x * np.asarray(g_field)
    return t * dg - 1j * apply_multiplier(grid, xg, bracket)


def gamma_tilde_profile(grid: GridSpec, g_field, t: float, cubic_term,
                        dt_g=None):
    """The weighted vector field via the Gamma relation.

    Gamma~ g = Gamma g - x*(cubic term) + i(dx/<dx>)g, with dg/dt supplied
    or reconstructed from the evolution law -i<dx>g + cubic.
    """
    g_field = np.asarray(g_field)
    if dt_g is None:
        dt_g = -1j * apply_multiplier(grid, g_field, bracket) + np.asarray(cubic_term)
    gamma_g = t * apply_multiplier(grid, g_field, lambda xi: 1j * xi) + grid.x * dt_g
    corr = apply_multiplier(grid, g_field, lambda xi: 1j * (1j * xi) / bracket(xi))
    return gamma_g - grid.x * np.asarray(cubic_term) + corr


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------

@dataclass
class RateFit:
    slope: float
    band: float        # bootstrap half-width (95%)
    n_points: int
    window: tuple


def rate_fit(ts, ys, window: tuple, n_boot: int = 400, seed: int = 0) -> RateFit:
    """Least-squares slope of log y vs log t with a bootstrap band."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi) & (ys > 0) & (ts > 0)
    if sel.sum() < 8:
        raise ValueError(f"rate window {window} has {int(sel.sum())} usable points; need >= 8")
    lt, ly = np.log(ts[sel]), np.log(ys[sel])

    def ols(a, b):
        am = a - a.mean()
        return float(np.dot(am, b - b.mean()) / np.dot(am, am))

    slope = ols(lt, ly)
    rng = np.random.default_rng(seed)
    n = lt.size
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, n)
        if np.ptp(lt[idx]) == 0:
            continue
        boots.append(ols(lt[idx], ly[idx]))
    band = 2.0 * float(np.std(boots)) if boots else 0.0
    return RateFit(slope, band, int(n), window)


# ---------------------------------------------------------------------------
# shock detection
# ---------------------------------------------------------------------------

def max_density_gradient(state) -> float:
    """max |dn/dx| in the state's own variables (n - 1 = 2 r_x = E_x)."""
    from . import dynamics as dyn

    grid = state.grid
    if isinstance(state, dyn.StateNV):
        return float(np.abs(derivative(grid, state.n)).max())
    if isinstance(state, dyn.StateEV):
        return float(np.abs(derivative(grid, state.e, 2)).max())
    if isinstance(state, dyn.StateRU):
        return float(np.abs(2.0 * derivative(grid, state.r, 2)).max())
    return float(np.abs(2.0 * derivative(grid, state.h.real, 2)).max())


def spectral_tail_ratio(state) -> float:
    """Energy fraction in the top third of the dealias-retained band.

    Products are dealiased, so modes above N/3 are identically zero; loss of
    resolution shows up as energy piling against that cutoff.
    """
    from . import dynamics as dyn

    grid = state.grid
    if isinstance(state, dyn.StateNV):
        comps = [state.n - 1.0, state.v]
    elif isinstance(state, dyn.StateEV):
        comps = [state.e, state.v]
    elif isinstance(state, dyn.StateRU):
        comps = [state.r, state.u]
    else:
        comps = [state.h]
    cut = dealias_cutoff(grid)
    lo = (2 * cut) // 3
    total, tail = 0.0, 0.0
    for c in comps:
        p = np.abs(forward_transform(grid, c)) ** 2
        k = np.abs(grid.k)
        total += float(p[k <= cut].sum())
        tail += float(p[(k > lo) & (k <= cut)].sum())
    return tail / total if total > 0 else 0.0


class ShockMonitor:
    """Streaming detector: steepening and resolution-loss crossings.

    Both first-crossing times are tracked.  Only steepening terminates the
    run: tail energy reaching the cutoff is an early warning that precedes
    gradient blowup on compressive runs (the cascade fills the band well
    before characteristics cross), so a run that steepens reports the
    steepening time, and the tail crossing stays recorded alongside.
    """

    STEEPEN_FACTOR = 10.0
    TAIL_THRESHOLD = 1e-4

    def __init__(self, config):
        self.config = config
        self.initial_grad: Optional[float] = None
        self.resolution_time: Optional[float] = None
        self.history: list[tuple[float, float]] = []

    def update(self, state) -> Optional[tuple[str, float]]:
        g = max_density_gradient(state)
        if self.initial_grad is None:
            self.initial_grad = max(g, 1e-300)
        self.history.append((state.t, g))
        if self.resolution_time is None:
            if spectral_tail_ratio(state) > self.TAIL_THRESHOLD:
                self.resolution_time = state.t
        if g > self.STEEPEN_FACTOR * self.initial_grad and self._accelerating():
            return ("steepening", state.t)
        return None

    def final_status(self) -> tuple[str, Optional[float]]:
        """Terminal verdict when no steepening fired."""
        if self.resolution_time is not None:
            return ("resolution_loss", self.resolution_time)
        return ("clean", None)

    def _accelerating(self) -> bool:
        if len(self.history) < 3:
            return False
        (_, a), (_, b), (_, c) = self.history[-3:]
        return (c - b) > (b - a) > 0


def shock_detect(times, grads, tails, initial_grad: Optional[float] = None):
    """Offline variant over a stored history; returns (status, time).

    Same priority as the streaming monitor: steepening wins; a tail
    crossing alone reports resolution_loss at its first time.
    """
    g0 = initial_grad if initial_grad is not None else max(grads[0], 1e-300)
    res_t = None
    for i, (t, g, tl) in enumerate(zip(times, grads, tails)):
        if res_t is None and tl > ShockMonitor.TAIL_THRESHOLD:
            res_t = t
        if i >= 2 and g > ShockMonitor.STEEPEN_FACTOR * g0:
            d1, d2 = grads[i - 1] - grads[i - 2], g - grads[i - 1]
            if d2 > d1 > 0:
                return ("steepening", t)
    if res_t is not None:
        return ("resolution_loss", res_t)
    return ("clean", None)
