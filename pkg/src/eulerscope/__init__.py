"""Periodic-box incompressible Euler solver with singularity-criterion diagnostics."""

__version__ = "0.1.0"

from .spectral import (
    GridSpec,
    RealField,
    SpectralField,
    forward,
    inverse,
    derivative,
    gradient,
    divergence,
    curl,
    dealias,
    leray_project,
    inverse_laplacian,
)

__all__ = [
    "__version__",
    "GridSpec",
    "RealField",
    "SpectralField",
    "forward",
    "inverse",
    "derivative",
    "gradient",
    "divergence",
    "curl",
    "dealias",
    "leray_project",
    "inverse_laplacian",
]
