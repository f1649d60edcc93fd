"""Disk-step continuous-state random walk: discrete harmonic measure, the
overshoot constant K, and the first-order boundary correction density."""

__version__ = "0.1.0"

from .config import MCEstimate, PlanePoint, WalkConfig, plane_point
from .domain import AnalyticDomain, GeometryError, make_domain

__all__ = [
    "AnalyticDomain",
    "GeometryError",
    "MCEstimate",
    "PlanePoint",
    "WalkConfig",
    "make_domain",
    "plane_point",
    "__version__",
]
