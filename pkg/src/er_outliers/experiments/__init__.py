"""Experiment orchestration: configuration, seeded trials, reports and the command line."""
