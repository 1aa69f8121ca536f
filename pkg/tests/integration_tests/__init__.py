"""Pipeline and command-line tests."""
