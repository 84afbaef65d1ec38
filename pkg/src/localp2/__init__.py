"""Exact-rational generating-series engine for local P2 Gromov-Witten theory,
maximal-contact relative invariants of (P2, E), and the stationary theory of
the elliptic curve."""

from .series import RatSeries, ZPoly, SeriesError

__all__ = ["RatSeries", "ZPoly", "SeriesError"]
__version__ = "0.1.0"
