"""Homogenization toolkit for saturated rigid porous media.

Upscales a periodic voxel unit cell into effective conductivity and
permeability tensors (steady, memory-kernel, and inertial variants) and
time-steps the resulting macroscopic seepage/heat system, with built-in
fine-scale verification oracles.
"""

__version__ = "0.1.0"

from .errors import (
    ThermoporoError,
    GeometryError,
    ConfigError,
    LayoutError,
    ConvergenceError,
    IncompatibleDataError,
)
from .geometry import UnitCellGeometry, MacroDomain, load_geometry, save_geometry
from .params import LimitParameters, Regime, DnsParameters, validate, classify

__all__ = [
    "__version__",
    "ThermoporoError",
    "GeometryError",
    "ConfigError",
    "LayoutError",
    "ConvergenceError",
    "IncompatibleDataError",
    "UnitCellGeometry",
    "MacroDomain",
    "load_geometry",
    "save_geometry",
    "LimitParameters",
    "Regime",
    "DnsParameters",
    "validate",
    "classify",
]
