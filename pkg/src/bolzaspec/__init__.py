"""Numerical verification suite for the extremal genus-2 spectral family.

Modules, in dependency order: params (the angle parameter), quadrature
(double-exponential rules), quartet (the four half-line integrals), curve
(points, sheets, symmetries, cycles), forms (1-forms and reductions),
periods (period table, 6x6 system, critical angles), immersion (Weierstrass
data and support functions), fem (sector spectra on the fundamental
domain), cli (reporting front end).
"""

__version__ = "0.1.0"

from .params import ThetaParam

__all__ = ["ThetaParam", "__version__"]
