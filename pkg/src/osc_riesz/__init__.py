"""Laguerre spectral calculus, explicit kernels and numerical checks for the
Riesz transform of the harmonic oscillator in spherical coordinates.

Submodules
----------
specfun
    Laguerre and Hermite functions, scaled Bessel functions, quadrature rules.
measure
    Ball measures of d mu_alpha, A_p constants, maximal operator, Rubio de Francia weights.
spectral_ops
    Expansions in Laguerre functions, heat semigroup, Riesz and angular operators.
kernel_lab
    Kernel integrals of the twisted operators, lemma checks and CZ sweeps.
spherical
    Spherical-harmonic channels and the oscillator Riesz transform in dimensions 2 and 3.
cli
    Command-line suites emitting JSON or CSV reports.
"""
__version__ = "0.1.0"

from . import kernel_lab, measure, specfun, spectral_ops, spherical  # noqa: E402

__all__ = ["specfun", "measure", "spectral_ops", "kernel_lab", "spherical", "__version__"]
