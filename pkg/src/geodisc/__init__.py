"""geodisc: extremal analytic discs and invariant metrics in strongly
convex domains of C^n.

The package computes stationary (extremal) analytic discs through interior
points of a bounded strongly convex domain, the associated two-point and
infinitesimal extremal values, and certified left inverses, by Fourier
collocation, Newton iteration, and homotopy continuation from the unit
ball.
"""

__version__ = "0.1.0"
