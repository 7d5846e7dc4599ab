"""Runtime configuration for pairlearn."""
