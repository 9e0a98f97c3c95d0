"""
Synthesis - 공칭 이득, 오프셋, 적분 슬라이딩 면 설계
"""

from .design import ControllerDesign, design_controller, reaching_offsets, select_gamma, stabilizable
from .io import ControllerDoc, design_from_document, design_to_document, load_design, save_design
from .margin import MarginCheck, MarginReport, robustness_margin
from .nominal import (
    NominalDesign,
    OffsetGrid,
    assemble_nominal_lmis,
    closed_loop_matrix,
    sample_offsets,
    selectors,
    solve_nominal,
)
from .surface import SurfaceDesign, assemble_surface_lmis, origin_bound_ceiling, solve_surface

__all__ = [
    "ControllerDesign",
    "ControllerDoc",
    "MarginCheck",
    "MarginReport",
    "NominalDesign",
    "OffsetGrid",
    "SurfaceDesign",
    "assemble_nominal_lmis",
    "assemble_surface_lmis",
    "closed_loop_matrix",
    "design_controller",
    "design_from_document",
    "design_to_document",
    "load_design",
    "origin_bound_ceiling",
    "reaching_offsets",
    "robustness_margin",
    "sample_offsets",
    "save_design",
    "select_gamma",
    "selectors",
    "solve_nominal",
    "solve_surface",
    "stabilizable",
]
