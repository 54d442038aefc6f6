"""Experiment configuration, batch execution, metrics and the command line."""
