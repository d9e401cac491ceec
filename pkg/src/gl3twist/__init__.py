"""Desk-scale verification toolkit for GL(3) x Dirichlet-twist subconvexity machinery.

Submodules:
    arith          exact integer / modular / multiplicative-function arithmetic
    characters     primitive Dirichlet characters mod a prime and Gauss sums
    expsums        Kloosterman-type exponential sums, correlation and spacing scans
    oscint         oscillatory quadrature, stationary phase, derivative tests
    bessel3        the degree-3 Bessel kernel via Mellin-Barnes contours
    voronoi        coefficient providers and two-sided Voronoi summation checks
    decomposition  the amplified sum, its dual term, and the exponent optimizer
    cli            batch experiment runner with machine-readable reports
"""

__version__ = "0.1.0"
