"""
Trade-policy hooks.

A policy decides, at each decision interval, which producers may export and
which buyers may import.
"""
