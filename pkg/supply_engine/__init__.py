"""Production events, monthly offers and the target-production rule."""
