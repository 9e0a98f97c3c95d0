"""
Error Hierarchy
===============
tiny-ismpc 전체에서 사용하는 예외 계층.
"""

from typing import Any, List, Optional


class IsmpcError(Exception):
    """모든 tiny-ismpc 예외의 루트"""


# --- palm ---

class DomainError(IsmpcError):
    """점이 X × U 박스 밖에 있음"""


class EvaluationError(IsmpcError):
    """동역학 평가 결과가 유한하지 않음"""


class AssumptionViolation(IsmpcError):
    """원점이 도메인 밖이거나 f(0, 0) ≠ 0"""


class InvalidSlab(IsmpcError):
    """β1 ≥ β2 이거나 법선 벡터가 0"""


class CoverageError(IsmpcError):
    """도메인 내부 점을 포함하는 영역이 없음"""


class DegenerateRegion(IsmpcError):
    """slab ∩ 도메인 박스에서 샘플을 뽑을 수 없음"""


class InvalidBounds(IsmpcError):
    """오차 한계가 음수이거나 유한하지 않음"""


# --- lmi ---

class ShapeError(IsmpcError):
    """행렬 차원 불일치"""


class SymmetryError(IsmpcError):
    """평가된 행렬식이 대칭이 아님"""


class ConditioningError(IsmpcError):
    """정규화 후에도 Newton 시스템이 특이함"""


# --- synthesis ---

class NoFeasibleOffsets(IsmpcError):
    """오프셋 격자 전체가 실현 불가능"""


class SynthesisFailed(IsmpcError):
    """파티션을 l_max 까지 늘려도 설계 실패"""

    def __init__(self, message: str, attempts: Optional[List[str]] = None):
        super().__init__(message)
        self.attempts = list(attempts or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.attempts:
            return base
        log = "\n".join(f"  - {line}" for line in self.attempts)
        return f"{base}\n{log}"


# --- sim ---

class DivergenceError(IsmpcError):
    """상태가 유한하지 않게 됨 (부분 궤적 포함)"""

    def __init__(self, message: str, trajectory: Any = None):
        super().__init__(message)
        self.trajectory = trajectory


# --- artifacts ---

class ArtifactError(IsmpcError):
    """JSON 산출물 파싱/검증 실패"""

    def __init__(self, path: str, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        where = path
        if line is not None:
            where = f"{path}:{line}:{column if column is not None else 0}"
        super().__init__(f"{where}: {message}")
