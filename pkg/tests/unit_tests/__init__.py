"""Unit tests for the sinkopt library modules."""
