"""Exact experiments with value semigroups of valuations on plane function fields."""

__version__ = "0.1.0"
