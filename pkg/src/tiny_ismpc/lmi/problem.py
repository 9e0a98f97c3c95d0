"""
Feasibility Problems
====================
엄격한 LMI 시스템 (제약 목록 + 결정 변수) 과 해, 잔차 검사.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ShapeError
from .expr import DecisionVariable, MatrixExpr, VariableKind, symmetry_defect

logger = logging.getLogger(__name__)


class Sense(str, Enum):
    NEGATIVE_DEFINITE = "negative_definite"
    POSITIVE_DEFINITE = "positive_definite"


class FeasibilityStatus(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"


@dataclass
class Constraint:
    expr: MatrixExpr
    sense: Sense = Sense.NEGATIVE_DEFINITE
    name: str = ""


@dataclass
class FeasibilityProblem:
    """
    엄격한 LMI 실현 가능성 문제

    변수의 positive 플래그는 별도 제약 (행렬 ≻ 0, 스칼라 > 0) 으로 취급한다.
    """

    variables: List[DecisionVariable]
    constraints: List[Constraint] = field(default_factory=list)
    name: str = "problem"

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ShapeError(f"duplicate variable names: {', '.join(dupes)}")
        declared = {v.name: v for v in self.variables}
        for k, c in enumerate(self.constraints):
            if not c.name:
                c.name = f"c{k}"
            for var in c.expr.variables():
                if var.name not in declared:
                    raise ShapeError(f"constraint '{c.name}' references undeclared variable '{var.name}'")
                if declared[var.name] != var:
                    raise ShapeError(f"constraint '{c.name}' uses a different definition of '{var.name}'")

    def add(self, expr: MatrixExpr, sense: Sense = Sense.NEGATIVE_DEFINITE, name: str = "") -> Constraint:
        constraint = Constraint(expr, sense, name or f"c{len(self.constraints)}")
        declared = {v.name for v in self.variables}
        for var in expr.variables():
            if var.name not in declared:
                raise ShapeError(f"constraint '{constraint.name}' references undeclared variable '{var.name}'")
        self.constraints.append(constraint)
        return constraint

    def variable(self, name: str) -> DecisionVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def size(self) -> int:
        return sum(v.size for v in self.variables)

    def layout(self) -> Dict[str, Tuple[int, DecisionVariable]]:
        out = {}
        offset = 0
        for v in self.variables:
            out[v.name] = (offset, v)
            offset += v.size
        return out

    def pack(self, assignment: Mapping[str, object]) -> np.ndarray:
        return np.concatenate([v.to_vector(assignment[v.name]) for v in self.variables]) if self.variables else np.zeros(0)

    def unpack(self, y: np.ndarray) -> Dict[str, object]:
        out = {}
        for name, (offset, v) in self.layout().items():
            out[name] = v.from_vector(y[offset: offset + v.size])
        return out

    def initial_assignment(self) -> Dict[str, object]:
        return {v.name: v.initial_value() for v in self.variables}


@dataclass
class FeasibilitySolution:
    assignment: Dict[str, object]
    margin: float
    iterations: int
    status: FeasibilityStatus
    # 종료 시 t - ν/τ (0 이상이면 실현 불가능 증명)
    lower_bound: float = float("-inf")
    t: float = float("inf")

    @property
    def feasible(self) -> bool:
        return self.status == FeasibilityStatus.FEASIBLE


# ---------------------------------------------------------------------------
# 잔차
# ---------------------------------------------------------------------------

@dataclass
class ConstraintResidual:
    name: str
    sense: Sense
    # negative_definite: λ_max, positive_definite: λ_min
    extreme_eigenvalue: float
    symmetry_defect: float

    @property
    def distance(self) -> float:
        """요구 방향으로 0 에서 떨어진 거리 (양수면 만족)"""
        if self.sense == Sense.NEGATIVE_DEFINITE:
            return -self.extreme_eigenvalue
        return self.extreme_eigenvalue

    @property
    def passed(self) -> bool:
        return self.distance > 0.0


@dataclass
class ResidualReport:
    rows: List[ConstraintResidual]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def margin(self) -> float:
        return min((r.distance for r in self.rows), default=float("inf"))

    @property
    def failures(self) -> List[ConstraintResidual]:
        return [r for r in self.rows if not r.passed]

    def row(self, name: str) -> Optional[ConstraintResidual]:
        return next((r for r in self.rows if r.name == name), None)


def _variable_matrix(var: DecisionVariable, value) -> np.ndarray:
    if var.kind == VariableKind.SCALAR:
        return np.array([[float(np.asarray(value).reshape(-1)[0])]])
    arr = np.asarray(value, dtype=float)
    if arr.shape != var.shape:
        raise ShapeError(f"variable '{var.name}' expects shape {var.shape}, got {arr.shape}")
    return arr


def check_residuals(problem: FeasibilityProblem, assignment: Mapping[str, object]) -> ResidualReport:
    """
    각 제약의 λ_max (또는 λ_min) 와 대칭 결함. 엄격 부등식, 허용오차 0.
    positive 변수 (W ≻ 0, λ > 0) 도 한 줄씩 포함된다.
    """
    missing = [v.name for v in problem.variables if v.name not in assignment]
    if missing:
        raise ShapeError(f"assignment is missing {', '.join(missing)}")

    rows = []
    for c in problem.constraints:
        raw = c.expr.evaluate_raw(assignment)
        E = 0.5 * (raw + raw.T)
        eig = np.linalg.eigvalsh(E)
        extreme = eig[-1] if c.sense == Sense.NEGATIVE_DEFINITE else eig[0]
        rows.append(ConstraintResidual(c.name, c.sense, float(extreme), symmetry_defect(raw)))

    for v in problem.variables:
        if not v.positive:
            continue
        V = _variable_matrix(v, assignment[v.name])
        lam_min = float(np.linalg.eigvalsh(0.5 * (V + V.T))[0])
        rows.append(ConstraintResidual(f"{v.name} > 0", Sense.POSITIVE_DEFINITE, lam_min, symmetry_defect(V)))
    return ResidualReport(rows)
