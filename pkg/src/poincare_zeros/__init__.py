"""Zeros of Poincare series P_{k,m} for SL(2,Z) with m close to alpha k."""

__version__ = "0.1.0"
