"""Balance-sheet ingestion and preparation of simulation inputs."""
