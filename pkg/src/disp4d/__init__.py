"""Numerical laboratory for zero-energy thresholds of -Delta + V on R^4.

Subpackages build on each other roughly in this order: ``specfun``
(Bessel/Hankel machinery), ``kernels`` (closed-form resolvent and
zero-energy kernels), ``discretize`` (radial grids and Nystrom assembly),
``potentials`` (threshold tuning), ``spectral`` (classification and
inversion of the Birman-Schwinger family), ``evolution`` (propagator
quadrature), ``decayfit`` (rate fitting), ``oscint`` (oscillatory-integral
checks) and ``cli``.
"""

__version__ = "0.1.0"
