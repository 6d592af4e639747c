"""Buyer demand: curves, transport costs and the buying-strategy update."""
