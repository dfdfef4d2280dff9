"""Closed-form frequency symbols of the quadratic and cubic interactions.

Everything here is a pure function of one to three frequencies:

* the paraproduct cutoff ``theta`` splitting products into low-high,
  high-low and high-high ranges;
* the quadratic interaction matrices Q1, Q2 (low-high, one derivative on
  the high factor) and S1, S2 (high-high remainder);
* the self-adjoint energy matrices B1, B2 built from Q1, Q2 with the
  2N-Sobolev weight, satisfying B(xi1, xi2) = conj(B^T(-xi1, xi1+xi2));
* the normal-form matrices A (right-hand side B) and C (right-hand side S)
  solving the 4x4 linear relation that cancels quadratic terms in the
  2-vector evolution;
* the scalar symbols q/b of the complex Klein-Gordon form, the cubic
  interaction symbols c^{i1 i2 i3}, the oscillatory phases Psi and the
  space-time resonance coefficient c*.

The Sobolev weight <xi1+xi2>^{2N} / (<xi1+xi2>^{2N} + <xi2>^{2N}) is never
formed directly: it is evaluated as a logistic of 2N*(log<xi1+xi2> -
log<xi2>), stable for any N up to 300 and |xi| up to 1e6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .grid import bracket

__all__ = [
    "CutoffParams",
    "theta",
    "q_matrix",
    "b_matrix",
    "solve_normal_form",
    "normal_form_matrix",
    "sobolev_weight",
    "shatah_q",
    "shatah_b",
    "cubic_symbol",
    "interaction_phase",
    "c_star",
    "SIGN_PAIRS",
    "SIGN_TRIPLES",
    "ANTIDIAG_KINDS",
    "DIAG_KINDS",
]

SIGN_PAIRS = ("++", "+-", "--")
SIGN_TRIPLES = ("++-", "+--", "+++", "---")

# anti-diagonal matrices act r<->u, diagonal ones act componentwise
ANTIDIAG_KINDS = ("Q1", "S1", "B1", "A1", "C1")
DIAG_KINDS = ("Q2", "S2", "B2", "A2", "C2")


@dataclass(frozen=True)
class CutoffParams:
    """Parameters of the low-high cutoff: plateau for |xi1| <~ eps1*<xi2>,
    vanishing for |xi1| >~ eps2*<xi2>, quintic transition between."""

    eps1: float = 0.1
    eps2: float = 0.4

    def __post_init__(self):
        if not (0.0 < 2.0 * self.eps1 < self.eps2 < 0.5):
            raise ValueError(
                f"cutoff parameters must satisfy 0 < 2*eps1 < eps2 < 1/2, "
                f"got eps1={self.eps1}, eps2={self.eps2}")


DEFAULT_CUTOFF = CutoffParams()


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def theta(xi1, xi2, params: CutoffParams = DEFAULT_CUTOFF):
    """Smooth low-high cutoff, a function of xi1^2 and xi2^2 only.

    theta = chi(|xi1|^2 / (eps2^2 * (1 + xi2^2))) with chi = 1 below
    (eps1/eps2)^2 and 0 above 1.  The symmetries
    theta(-xi1, xi2) = theta(xi1, xi2) = theta(-xi1, -xi2) hold exactly.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    s = xi1 * xi1 / ((params.eps2 ** 2) * (1.0 + xi2 * xi2))
    lo = (params.eps1 / params.eps2) ** 2
    return _smoothstep((1.0 - s) / (1.0 - lo))


def _q_entries(kind: str, xi1, xi2, params: CutoffParams):
    """Entry pair of a quadratic matrix: (off12, off21) or (diag11, diag22)."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    b1, b2, b12 = bracket(xi1), bracket(xi2), bracket(xi1 + xi2)
    if kind in ("Q1", "Q2"):
        cut = theta(xi1, xi2, params)
        scale = 2.0
    elif kind in ("S1", "S2"):
        cut = 1.0 - theta(xi1, xi2, params) - theta(xi2, xi1, params)
        scale = 1.0
    else:
        raise ValueError(f"unknown quadratic kind {kind!r}")
    if kind in ("Q1", "S1"):
        top = scale * 1j * xi1 * b2 * cut
        bot = -scale * 1j * (xi1 + xi2) * xi1 * xi2 / b12 * cut
        return top, bot
    top = scale * 1j * xi2 * b1 * cut
    bot = scale * 1j * (xi1 + xi2) * b1 * b2 / b12 * cut
    return top, bot


def _as_matrix(kind: str, e_top, e_bot):
    """Assemble the 2x2 array from the two nonzero entries."""
    shape = np.broadcast(e_top, e_bot).shape
    m = np.zeros(shape + (2, 2), dtype=complex)
    if kind in ANTIDIAG_KINDS:
        m[..., 0, 1] = e_top
        m[..., 1, 0] = e_bot
    else:
        m[..., 0, 0] = e_top
        m[..., 1, 1] = e_bot
    return m


def q_matrix(kind: str, xi1, xi2, params: CutoffParams = DEFAULT_CUTOFF):
    """Quadratic interaction matrix Q1, Q2, S1 or S2 at (xi1, xi2)."""
    return _as_matrix(kind, *_q_entries(kind, xi1, xi2, params))


def sobolev_weight(n_sob: int, xi1, xi2):
    """<xi1+xi2>^{2N} / (<xi1+xi2>^{2N} + <xi2>^{2N}) in logistic form."""
    d = np.log(bracket(np.asarray(xi1) + np.asarray(xi2))) - np.log(bracket(xi2))
    return expit(2.0 * n_sob * d)


def _b_entries(kind: str, n_sob: int, xi1, xi2, params: CutoffParams):
    if kind not in ("B1", "B2"):
        raise ValueError(f"unknown energy kind {kind!r}")
    qk = "Q1" if kind == "B1" else "Q2"
    lam = sobolev_weight(n_sob, xi1, xi2)
    t_here, b_here = _q_entries(qk, xi1, xi2, params)
    # conj(Q^T(-xi1, xi1+xi2)): transpose swaps the entries of the
    # anti-diagonal Q1 and fixes the diagonal Q2
    t_ref, b_ref = _q_entries(qk, -np.asarray(xi1), np.asarray(xi1) + np.asarray(xi2), params)
    if kind == "B1":
        t_ref, b_ref = b_ref, t_ref
    top = lam * t_here + (1.0 - lam) * np.conj(t_ref)
    bot = lam * b_here + (1.0 - lam) * np.conj(b_ref)
    return top, bot


def b_matrix(kind: str, n_sob: int, xi1, xi2, params: CutoffParams = DEFAULT_CUTOFF):
    """Self-adjoint energy matrix B1 or B2 for Sobolev exponent n_sob."""
    if n_sob < 1:
        raise ValueError("Sobolev exponent must be >= 1")
    return _as_matrix(kind, *_b_entries(kind, n_sob, xi1, xi2, params))


def _rhs_entries(rhs_kind: str, n_sob: int, xi1, xi2, params: CutoffParams):
    """(e1, e2, e3, e4) entries feeding the 4x4 normal-form system."""
    if rhs_kind == "A":
        e1, e4 = _b_entries("B1", n_sob, xi1, xi2, params)
        e2, e3 = _b_entries("B2", n_sob, xi1, xi2, params)
    elif rhs_kind == "C":
        e1, e4 = _q_entries("S1", xi1, xi2, params)
        e2, e3 = _q_entries("S2", xi1, xi2, params)
    else:
        raise ValueError(f"unknown normal-form kind {rhs_kind!r}")
    return e1, e2, e3, e4


def solve_normal_form(kind: str, n_sob: int, xi1, xi2,
                      params: CutoffParams = DEFAULT_CUTOFF):
    """Coefficients (a1, a2, a3, a4) or (c1, ..., c4) of the normal form.

    Closed-form solution of the 4x4 linear system

        [-g1   g2  -g12  0  ] [a1]   [-e1]
        [ 0    g12 -g2  -g1 ] [a2] = [-e4]
        [-g2   g1   0   -g12] [a3]   [-e2]
        [ g12  0    g1   g2 ] [a4]   [-e3]

    with g1 = <xi1>, g2 = <xi2>, g12 = <xi1+xi2> and right-hand entries
    e_j from B (kind="A") or from S (kind="C").  The determinant-positive
    combination G = 2*xi1^2 + 2*xi2^2 + 2*(xi1+xi2)^2 + 3 never vanishes.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    e1, e2, e3, e4 = _rhs_entries(kind, n_sob, xi1, xi2, params)
    g1, g2, g12 = bracket(xi1), bracket(xi2), bracket(xi1 + xi2)
    big_g = 2.0 * xi1 ** 2 + 2.0 * xi2 ** 2 + 2.0 * (xi1 + xi2) ** 2 + 3.0
    p = -g1 ** 2 + g2 ** 2 + g12 ** 2
    u = g1 * e1 - g2 * e2 + g12 * e3
    v = g1 * e4 + g2 * e3 - g12 * e2
    s = g1 * e2 - g2 * e1 - g12 * e4
    w = g1 * e3 + g2 * e4 + g12 * e1
    a1 = (p * u - 2.0 * g2 * g12 * v) / big_g
    a2 = (-p * s - 2.0 * g2 * g12 * w) / big_g
    a3 = (-p * w - 2.0 * g2 * g12 * s) / big_g
    a4 = (p * v - 2.0 * g2 * g12 * u) / big_g
    return a1, a2, a3, a4


def normal_form_matrix(kind: str, n_sob: int, xi1, xi2,
                       params: CutoffParams = DEFAULT_CUTOFF):
    """A1/A2 (kind "A1".."A2") or C1/C2 as 2x2 arrays."""
    base = kind[0]
    a1, a2, a3, a4 = solve_normal_form(base, n_sob, xi1, xi2, params)
    if kind in ("A1", "C1"):
        return _as_matrix(kind, a1, a4)
    if kind in ("A2", "C2"):
        return _as_matrix(kind, a2, a3)
    raise ValueError(f"unknown normal-form matrix {kind!r}")


# ---------------------------------------------------------------------------
# scalar symbols of the complex Klein-Gordon form
# ---------------------------------------------------------------------------

def shatah_q(pair: str, xi, eta):
    """Real quadratic symbols of the complex form; pair in {++, +-, --}."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    bx, be, bs = bracket(xi), bracket(eta), bracket(xi + eta)
    ratio = (xi + eta) / bs
    if pair == "++":
        return 0.5 * xi * be + 0.25 * ratio * bx * be + 0.25 * ratio * xi * eta
    if pair == "+-":
        return (-0.5 * xi * be + 0.5 * bx * eta
                - 0.5 * ratio * bx * be + 0.5 * ratio * xi * eta)
    if pair == "--":
        return -0.5 * xi * be + 0.25 * ratio * bx * be + 0.25 * ratio * xi * eta
    raise ValueError(f"unknown sign pair {pair!r}")


def _signs(pair: str):
    return tuple(1 if c == "+" else -1 for c in pair)


def phase_denominator(pair: str, xi, eta):
    """<xi+eta> - i1*<xi> - i2*<eta>; bounded below by 1/(sum of brackets)."""
    i1, i2 = _signs(pair)
    return bracket(np.asarray(xi) + np.asarray(eta)) - i1 * bracket(xi) - i2 * bracket(eta)


def shatah_b(pair: str, xi, eta):
    """Normal-form kernels b = i*q/denominator (purely imaginary)."""
    return 1j * shatah_q(pair, xi, eta) / phase_denominator(pair, xi, eta)


def interaction_phase(triple: str, xi, eta, sigma):
    """Psi = <xi> - i1*<xi-eta> - i2*<eta-sigma> - i3*<sigma>."""
    i1, i2, i3 = _signs(triple)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    return (bracket(xi) - i1 * bracket(xi - eta)
            - i2 * bracket(eta - sigma) - i3 * bracket(sigma))


def cubic_symbol(triple: str, xi, eta, sigma):
    """Cubic interaction symbols c^{i1 i2 i3} (real-valued)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    b, q = shatah_b, shatah_q
    if triple == "++-":
        val = (b("++", eta, xi - eta) * q("+-", eta - sigma, sigma)
               + b("++", xi - eta, eta) * q("+-", eta - sigma, sigma)
               + b("+-", xi - sigma, sigma) * q("++", xi - eta, eta - sigma)
               + b("+-", xi - eta, eta) * q("+-", -sigma, sigma - eta)
               + b("--", xi - sigma, sigma) * q("--", eta - xi, sigma - eta)
               + b("--", sigma, xi - sigma) * q("--", eta - xi, sigma - eta))
    elif triple == "+--":
        val = (b("++", eta, xi - eta) * q("--", eta - sigma, sigma)
               + b("++", xi - eta, eta) * q("--", eta - sigma, sigma)
               + b("+-", xi - sigma, sigma) * q("+-", xi - eta, eta - sigma)
               + b("+-", xi - eta, eta) * q("++", sigma - eta, -sigma)
               + b("--", xi - sigma, sigma) * q("+-", sigma - eta, eta - xi)
               + b("--", sigma, xi - sigma) * q("+-", sigma - eta, eta - xi))
    elif triple == "+++":
        val = (b("++", eta, xi - eta) * q("++", eta - sigma, sigma)
               + b("++", xi - eta, eta) * q("++", eta - sigma, sigma)
               + b("+-", xi - eta, eta) * q("--", sigma - eta, -sigma))
    elif triple == "---":
        val = (b("+-", xi - sigma, sigma) * q("--", xi - eta, eta - sigma)
               + b("--", xi - sigma, sigma) * q("++", eta - xi, sigma - eta)
               + b("--", sigma, xi - sigma) * q("++", eta - xi, sigma - eta))
    else:
        raise ValueError(f"unknown sign triple {triple!r}")
    return (val / 1j).real


def c_star(xi):
    """Space-time resonance coefficient: c^{++-} evaluated at (xi, 0, -xi).

    Vanishes to second order at xi = 0 and satisfies
    |c*(xi)| <= C * xi^2 * <xi>^3.
    """
    xi = np.asarray(xi, dtype=float)
    g = bracket(xi)
    g2 = bracket(2.0 * xi)
    return xi ** 2 * (
        2.0 * g
        - (2.0 * g + g2) * (g * g2 + xi ** 2 + g ** 2) ** 2 / (6.0 * g * g2)
        + (g * g2 - g ** 2 - xi ** 2) ** 2 / (2.0 * (2.0 * g + g2) * g * g2))
