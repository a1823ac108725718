"""Second-order difference equations with matrix coefficients.

Fundamental systems of block tridiagonal recurrences, variation of
constants, and numerical checks of lp-membership and its invariance in z.
"""

__version__ = "0.1.0"
