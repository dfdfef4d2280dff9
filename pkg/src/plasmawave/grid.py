"""Periodic grid, Fourier transforms, multipliers, projectors and norms.

All spectral machinery uses one fixed DFT convention, chosen so that the
discrete coefficients approximate the continuum Fourier transform

    fhat(xi_k) = dx * sum_j f(x_j) exp(-i x_j xi_k),
    f(x_j)     = (1/L) * sum_k fhat(xi_k) exp(+i x_j xi_k),

on the centered box x_j = -L/2 + j*dx with frequencies xi_k = 2*pi*k/L,
k = -N/2 .. N/2-1.  With this normalization discrete Sobolev norms converge
to their continuum values, and Parseval reads

    sum_j |f(x_j)|^2 dx = (1/L) * sum_k |fhat(xi_k)|^2.

Spectra are stored in increasing-k ("math") order.  The single unpaired
Nyquist mode k = -N/2 breaks Hermitian symmetry under odd multipliers such
as i*xi, so every multiplier application zeroes it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "GridSpec",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "derivative",
    "bracket",
    "bump",
    "lp_project",
    "lp_project_le",
    "dealias",
    "dealias_cutoff",
    "sobolev_norm",
    "l2_norm",
    "wk_inf_norm",
    "xweighted_sobolev",
    "boundary_clean",
    "multiply_dealiased",
    "SingularSymbolError",
    "GridMismatchError",
]

# Littlewood-Paley bump: 1 on [0, 5/4], supported in [0, 8/5], quintic
# smoothstep transition in between (C^2, monotone).
_BUMP_LO = 1.25
_BUMP_HI = 1.6


class GridMismatchError(ValueError):
    """Field length does not match the grid it claims to live on."""


class SingularSymbolError(ValueError):
    """A Fourier multiplier is non-finite on the frequency lattice."""


def _smoothstep(s):
    """Quintic smoothstep: 0 at s<=0, 1 at s>=1, C^2 monotone between."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def bump(r):
    """The radial cutoff: 1 for |r| <= 5/4, 0 for |r| >= 8/5."""
    r = np.abs(np.asarray(r, dtype=float))
    return _smoothstep((_BUMP_HI - r) / (_BUMP_HI - _BUMP_LO))


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L/2, L/2) with 2*pi*k/L frequencies."""

    num_points: int
    box_length: float

    def __post_init__(self):
        n = self.num_points
        if n <= 0 or n % 2 != 0 or (n & (n - 1)) != 0:
            raise ValueError(f"num_points must be a positive even power of two, got {n}")
        if not (self.box_length > 0):
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def dx(self) -> float:
        return self.box_length / self.num_points

    @property
    def x(self) -> np.ndarray:
        n = self.num_points
        return -0.5 * self.box_length + self.dx * np.arange(n)

    @property
    def k(self) -> np.ndarray:
        n = self.num_points
        return np.arange(n) - n // 2

    @property
    def xi(self) -> np.ndarray:
        return 2.0 * np.pi * self.k / self.box_length

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx

    @property
    def nyquist_index(self) -> int:
        return 0  # math order puts k = -N/2 first

    def index_of(self, k: int) -> int:
        """Array index of wavenumber k (math order)."""
        return int(k) + self.num_points // 2

    def __hash__(self):
        return hash((self.num_points, self.box_length))


def _check(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[-1] != grid.num_points:
        raise GridMismatchError(
            f"field of length {f.shape[-1]} on grid of {grid.num_points} points")
    return f


def forward_transform(grid: GridSpec, f) -> np.ndarray:
    """Samples -> spectrum in the continuum-approximation normalization."""
    f = _check(grid, f)
    n = grid.num_points
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)  # e^{+i L xi_k / 2}
    return np.fft.fftshift(grid.dx * sign * np.fft.fft(f), axes=-1)


def inverse_transform(grid: GridSpec, spec) -> np.ndarray:
    """Spectrum -> samples; inverse of :func:`forward_transform`."""
    spec = _check(grid, spec)
    n = grid.num_points
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return np.fft.ifft(sign * np.fft.ifftshift(spec, axes=-1)) / grid.dx


def apply_multiplier(grid: GridSpec, f, m: Callable, mean_mode=None,
                     spectral_in: bool = False, spectral_out: bool = False):
    """Apply the Fourier multiplier m(xi) to a field.

    ``m`` is evaluated on the frequency lattice.  A non-finite value raises
    SingularSymbolError naming the offending wavenumber, except at xi = 0
    where a caller-supplied ``mean_mode`` gauge value is substituted
    (singular symbols such as 1/(i xi) are only defined up to the mean).
    The Nyquist mode is always zeroed.
    """
    spec = np.asarray(f) if spectral_in else forward_transform(grid, f)
    mvals = np.asarray(m(grid.xi), dtype=complex)
    zero = grid.index_of(0)
    if mean_mode is not None and not np.isfinite(mvals[zero]):
        mvals = mvals.copy()
        mvals[zero] = mean_mode
    if not np.all(np.isfinite(mvals)):
        bad = grid.k[~np.isfinite(mvals)]
        raise SingularSymbolError(f"multiplier non-finite at wavenumber(s) k={bad[:5]}")
    out = spec * mvals
    out[..., grid.nyquist_index] = 0.0
    if spectral_out:
        return out
    return inverse_transform(grid, out)


def derivative(grid: GridSpec, f, order: int = 1):
    """Spectral d^n/dx^n; output real when input is real."""
    out = apply_multiplier(grid, f, lambda xi: (1j * xi) ** order)
    if np.isrealobj(f):
        return out.real
    return out


def bracket(xi):
    """<xi> = sqrt(1 + xi^2)."""
    return np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2)


def lp_project(grid: GridSpec, f, k: int):
    """Dyadic frequency shell: multiply fhat by bump(|xi|/2^k)-bump(|xi|/2^{k-1})."""
    return apply_multiplier(
        grid, f, lambda xi: bump(np.abs(xi) / 2.0 ** k) - bump(np.abs(xi) / 2.0 ** (k - 1)))


def lp_project_le(grid: GridSpec, f, a: float):
    """Low-pass projector with symbol bump(|xi|/a), a > 0."""
    if not a > 0:
        raise ValueError("cut level must be positive")
    return apply_multiplier(grid, f, lambda xi: bump(np.abs(xi) / a))


def dealias_cutoff(grid: GridSpec) -> int:
    return grid.num_points // 3


def dealias(grid: GridSpec, spec) -> np.ndarray:
    """Zero all modes with |k| > N/3 (2/3 rule for quadratic products)."""
    spec = _check(grid, np.asarray(spec)).copy()
    keep = np.abs(grid.k) <= dealias_cutoff(grid)
    spec[..., ~keep] = 0.0
    return spec


def multiply_dealiased(grid: GridSpec, f, g):
    """Pseudospectral product f*g with 2/3-rule dealiasing."""
    prod = np.asarray(f) * np.asarray(g)
    spec = dealias(grid, forward_transform(grid, prod))
    out = inverse_transform(grid, spec)
    if np.isrealobj(f) and np.isrealobj(g):
        return out.real
    return out


def _spec2(grid: GridSpec, f):
    """|fhat|^2 summed over leading (component) axes."""
    spec = forward_transform(grid, np.atleast_2d(f))
    return np.sum(np.abs(spec) ** 2, axis=0)


def sobolev_norm(grid: GridSpec, f, s: float) -> float:
    """H^s norm: sqrt((1/L) sum_k <xi_k>^{2s} |fhat|^2), components summed."""
    w = bracket(grid.xi) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * _spec2(grid, f)) / grid.box_length))


def l2_norm(grid: GridSpec, f) -> float:
    return sobolev_norm(grid, f, 0.0)


def wk_inf_norm(grid: GridSpec, f, k: int) -> float:
    """W^{k,inf}: max over derivatives of order <= k of the sup norm."""
    f = np.atleast_2d(f)
    best = 0.0
    for comp in f:
        spec = forward_transform(grid, comp)
        for j in range(k + 1):
            d = spec * (1j * grid.xi) ** j
            d[..., grid.nyquist_index] = 0.0
            best = max(best, float(np.abs(inverse_transform(grid, d)).max()))
    return best


def boundary_clean(grid: GridSpec, f, frac: float = 0.05, rel: float = 1e-10) -> bool:
    """True when the field is negligible within ``frac`` of the box ends."""
    f = np.atleast_2d(f)
    peak = np.abs(f).max()
    if peak == 0.0:
        return True
    m = max(1, int(frac * grid.num_points))
    edge = max(np.abs(f[:, :m]).max(), np.abs(f[:, -m:]).max())
    return bool(edge < rel * peak)


def xweighted_sobolev(grid: GridSpec, f, s: float) -> tuple[float, bool]:
    """H^s norm of x*f with centered x; flags wraparound-ambiguous support.

    The returned flag is True when the field is cleanly supported away from
    the box ends (so the centered coordinate is unambiguous).
    """
    clean = boundary_clean(grid, f)
    xf = grid.x * np.atleast_2d(f)
    return sobolev_norm(grid, xf, s), clean
