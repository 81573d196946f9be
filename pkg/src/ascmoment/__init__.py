"""Spectral analysis of the q^{-1}-Al-Salam-Chihara difference operator.

Modules
-------
qcore      q-shifted factorials, theta functions and basic hypergeometric series
lattice    the lattice -q^N u zq^Z, its weight, q-integrals and Casorati determinants
eigenfun   the operator L, Al-Salam-Chihara polynomials and eigenfunctions
spectral   discrete spectrum, spectral measure, orthogonality and the resolvent
transform  the transform F, its inverse G and truncated inner products
crosscheck finite-matrix spectrum of L
cli        command-line verification harness
"""

from .errors import (AscMomentError, ConfigError, ContourError, DegenerateError, DivergenceError,
                     DomainError, GridMismatch, PoleError, RangeError, SupportError, SymmetryError)
from .lattice import NEG, POS, Grid, GridFunction, QParams
from .spectral import SpectralMeasure, build_measure, discrete_spectrum, orthogonality_matrix

__version__ = "0.1.0"

__all__ = [
    "AscMomentError", "ConfigError", "ContourError", "DegenerateError", "DivergenceError",
    "DomainError", "GridMismatch", "PoleError", "RangeError", "SupportError", "SymmetryError",
    "NEG", "POS", "Grid", "GridFunction", "QParams",
    "SpectralMeasure", "build_measure", "discrete_spectrum", "orthogonality_matrix",
]
