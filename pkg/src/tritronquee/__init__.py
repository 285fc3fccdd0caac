"""Tritronquee solutions of the second member of the Painleve-I hierarchy.

Large-x series, the degenerate model curve, Stokes data, a Chebyshev
boundary value solver along complex lines and diagnostics on its output.
"""
from . import series, model_curve, stokes_data, spectral, bvp_solver

__version__ = "0.1.0"
__all__ = ["series", "model_curve", "stokes_data", "spectral", "bvp_solver", "__version__"]
