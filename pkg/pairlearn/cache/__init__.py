"""Decomposition caching."""
