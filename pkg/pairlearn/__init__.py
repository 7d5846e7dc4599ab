"""Pairwise kernel ridge regression: two-step, Kronecker and independent-task models."""
