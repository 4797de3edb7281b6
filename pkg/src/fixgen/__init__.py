"""Numerical laboratory for generic fixed points of nonexpansive maps."""
