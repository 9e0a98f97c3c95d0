"""
LMI - 엄격한 선형 행렬 부등식 실현 가능성
"""

from .expr import DecisionVariable, MatrixExpr, VariableKind, fixed_matrix_expr
from .problem import (
    Constraint,
    ConstraintResidual,
    FeasibilityProblem,
    FeasibilitySolution,
    FeasibilityStatus,
    ResidualReport,
    Sense,
    check_residuals,
)
from .solver import solve_feasibility

__all__ = [
    "Constraint",
    "ConstraintResidual",
    "DecisionVariable",
    "FeasibilityProblem",
    "FeasibilitySolution",
    "FeasibilityStatus",
    "MatrixExpr",
    "ResidualReport",
    "Sense",
    "VariableKind",
    "check_residuals",
    "fixed_matrix_expr",
    "solve_feasibility",
]
