"""
PALM - 불확실 PWA 근사 모델
"""

from .model import (
    AffineSubmodel,
    ErrorBounds,
    PwaModel,
    ValidationReport,
    build_pwa_model,
    estimate_error_bounds,
    linearize,
    locate,
    partition_of,
    region_index,
    validate_model,
)
from .regions import PartitionSpec, Region, SlabSpec, parse_partition, refine_partition, slab_to_ellipsoid
from .system import NonlinearSystem, get_system, register_system, registered_systems

__all__ = [
    "AffineSubmodel",
    "ErrorBounds",
    "NonlinearSystem",
    "PartitionSpec",
    "PwaModel",
    "Region",
    "SlabSpec",
    "ValidationReport",
    "build_pwa_model",
    "estimate_error_bounds",
    "get_system",
    "linearize",
    "locate",
    "partition_of",
    "parse_partition",
    "refine_partition",
    "region_index",
    "register_system",
    "registered_systems",
    "slab_to_ellipsoid",
    "validate_model",
]
