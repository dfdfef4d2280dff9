"""Figures from plasmawave export bundles; no physics is recomputed here."""

__version__ = "0.1.0"

from .bundle import PlotBundle, SchemaError, load_bundle  # noqa: F401
from .figures import plot_decay, plot_scattering, plot_shock_compare  # noqa: F401
