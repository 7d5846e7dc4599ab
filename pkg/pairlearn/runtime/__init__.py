"""Run metrics and CLI response shaping."""
