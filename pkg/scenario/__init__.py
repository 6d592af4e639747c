"""Scenarios, counterfactual runs, projections and result files."""
