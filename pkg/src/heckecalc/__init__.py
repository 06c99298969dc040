"""Exact computations in the Hecke algebra of an almost normal pair (Gamma, G)."""

__version__ = "0.1.0"
