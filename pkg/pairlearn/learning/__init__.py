"""Model fitting, hold-out shortcuts and online updates."""
