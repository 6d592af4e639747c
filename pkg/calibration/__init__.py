"""Nested calibration of structural parameters and yearly demand deviations."""
