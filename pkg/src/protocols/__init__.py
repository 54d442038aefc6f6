"""Entangled, CSS and prepare-and-measure key distribution sessions."""
