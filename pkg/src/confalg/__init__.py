"""Exact verification toolkit for conformal superintegrable systems and Bocher contractions."""
from .exactalg import Scalar, var, variables
from .gaussrat import GaussRat

__all__ = ["GaussRat", "Scalar", "var", "variables"]
__version__ = "0.1.0"
