"""Numerical laboratory for metric entropy of sets, convex hulls and singular integral operators."""

__version__ = "0.1.0"
