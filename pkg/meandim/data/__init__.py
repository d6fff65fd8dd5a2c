"""Packaged data files (Sobol' direction numbers)."""
