"""Session clearing and settlement."""
