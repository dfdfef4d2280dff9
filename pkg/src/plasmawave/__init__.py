"""Pseudospectral toolkit for 1D electron plasma waves.

Simulates the electron Euler-Poisson system (gamma = 3) and its equivalent
Klein-Gordon formulations on a large periodic box, together with an
executable library for the frequency-space machinery the analysis rests on:
paraproduct cutoffs, quadratic symbol matrices, energy and Shatah normal
forms, space-time resonances and the modified-scattering phase correction.
"""

__version__ = "0.1.0"

from .grid import GridSpec  # noqa: F401
