"""Prometheus metrics for simulation runs."""
