"""Domain types, world construction and the monthly step sequencer."""
