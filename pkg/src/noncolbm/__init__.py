"""Noncolliding Brownian motions, Gaussian matrix ensembles, and the
statistical verification suites tying them together."""

from . import densities, haar, linalg, paths, sde, verify  # noqa: F401

__version__ = "0.1.0"
