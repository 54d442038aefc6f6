"""Shared utilities: logging, configuration constants and exception types."""
