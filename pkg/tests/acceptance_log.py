"""Shared store for acceptance results, printed at the end of the run."""

RESULTS: dict[int, tuple[bool, str]] = {}
