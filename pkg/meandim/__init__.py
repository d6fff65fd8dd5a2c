"""meandim: mean dimension of radial basis functions."""

__version__ = "0.1.0"
