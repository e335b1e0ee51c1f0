"""Generalized n-locality inequalities for star networks.

A star network has ``n`` independent sources, each linking an edge party to
one central party. The central party has ``m`` inputs and every edge party has
``2**(m-1)`` inputs whose observables obey linear constraints.
"""

__version__ = "0.1.0"
