"""Toric Kahler-Ricci shrinker pipeline.

Labeled polyhedra and their orbifold data, exponential-weight quadrature,
symplectic potentials, soliton vectors, the soliton Monge-Ampere solver,
and Ding-functional convexity scans.
"""

__version__ = "0.1.0"
