"""Numerical laboratory for continuous-time geometric RSK, triangle
flows, and the indefinite tridiagonal Lax lattice, with the structured
maps connecting them."""

from ._core import BACKEND
from .triangle import LaxMatrix, Triangle

__version__ = "0.1.0"

__all__ = ["BACKEND", "LaxMatrix", "Triangle", "__version__"]
