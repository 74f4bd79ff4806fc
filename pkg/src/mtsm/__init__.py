"""Approximation of manifold-valued functions by blending tangent-space
submodels with weighted Fréchet means, with moving-least-squares and
single-tangent-space baselines and a benchmark harness."""

from . import bench, clustering, data, geometry, interp, kernels, mean, models

__all__ = ["bench", "clustering", "data", "geometry", "interp", "kernels",
           "mean", "models"]

__version__ = "0.1.0"
