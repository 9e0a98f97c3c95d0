"""
Configuration Models
====================
솔버, 오프셋 격자, 설계 절차, 시뮬레이션 설정 (pydantic 검증).
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SolverOptions(BaseModel):
    """배리어 내점법 옵션"""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(default=1e-7, gt=0.0)
    max_iter: int = Field(default=1000, ge=1)
    # 결정 변수 벡터의 노름 상한 (동차 LMI의 스케일 고정)
    radius: float = Field(default=1e4, gt=0.0)
    growth: float = Field(default=10.0, gt=1.0)
    rel_gap: float = Field(default=1e-6, gt=0.0)
    stall_steps: int = Field(default=50, ge=1)


class GridSpec(BaseModel):
    """오프셋 D_i 격자 (range 는 D_i 마다 [lo, hi])"""

    model_config = ConfigDict(frozen=True)

    ranges: Optional[List[Tuple[float, float]]] = None
    points_per_axis: int = Field(default=5, ge=1)
    max_refinements: int = Field(default=3, ge=0)
    max_points: int = Field(default=64, ge=1)
    # (i, j): D_j = -D_i, 영역 번호는 1부터
    symmetric_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    # 고정 오프셋 (1-point grid)
    fixed: Optional[List[List[float]]] = None

    @field_validator("ranges")
    @classmethod
    def _check_ranges(cls, value):
        if value is None:
            return value
        for lo, hi in value:
            if lo > hi:
                raise ValueError(f"range lower bound {lo} exceeds upper bound {hi}")
        return value

    @field_validator("symmetric_pairs")
    @classmethod
    def _check_pairs(cls, value):
        seen = set()
        for i, j in value:
            if i < 1 or j < 1 or i == j:
                raise ValueError(f"invalid symmetric pair ({i}, {j})")
            if i in seen or j in seen:
                raise ValueError(f"region {i if i in seen else j} appears in two pairs")
            seen.update((i, j))
        return value


class ErrorBoundsOverride(BaseModel):
    """사용자가 지정하는 오차 한계 (추정값 대신 사용)"""

    model_config = ConfigDict(frozen=True)

    eps_f0: float = Field(ge=0.0)
    eps_f: float = Field(ge=0.0)
    eps_g: float = Field(ge=0.0)


class DesignOptions(BaseModel):
    """설계 절차 (선형화 → 공칭 설계 → 슬라이딩 면 → γ) 옵션"""

    model_config = ConfigDict(frozen=True)

    samples_per_region: int = Field(default=256, ge=100)
    seed: int = 0
    l_max: int = Field(default=32, ge=0)
    gamma: Optional[float] = Field(default=None, gt=0.0)
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    bounds: Optional[ErrorBoundsOverride] = None
    workers: int = Field(default=4, ge=1)
    # 면 LMI 가 실패하면 같은 파티션에서 다음 공칭 감쇠율로 다시 푼다
    decay_rates: List[float] = Field(default_factory=lambda: [0.0, 1.0, 4.0, 16.0])
    # 초 단위, 풀이 사이에서 검사
    time_budget: Optional[float] = Field(default=300.0, gt=0.0)

    @field_validator("decay_rates")
    @classmethod
    def _check_decay_rates(cls, value):
        if not value:
            raise ValueError("at least one decay rate is required")
        if any(a < 0.0 for a in value):
            raise ValueError(f"decay rates must be non-negative, got {value}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"decay rates must be strictly increasing, got {value}")
        return value


class SimConfig(BaseModel):
    """고정 스텝 시뮬레이션 설정"""

    model_config = ConfigDict(frozen=True)

    h: float = Field(default=1e-3, gt=0.0)
    T: float = Field(default=10.0, gt=0.0)
    sigma: float = Field(default=0.0, ge=0.0)
    integrator: Literal["RK4"] = "RK4"
    record_stride: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_horizon(self):
        if self.T < self.h:
            raise ValueError(f"duration T={self.T} is shorter than step h={self.h}")
        return self

    @property
    def n_records(self) -> int:
        """기록 샘플 수 = floor(T / (h·stride)) + 1"""
        return int(self.T / (self.h * self.record_stride) + 1e-9) + 1

    @property
    def n_steps(self) -> int:
        return (self.n_records - 1) * self.record_stride


class UncertaintyPolicy(BaseModel):
    """슬라이딩 운동 시뮬레이션의 불확실성 주입 정책"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["zero", "random_bounded", "adversarial"] = "zero"
    seed: int = 0
