"""
Chua's Circuit
==============
제어 전류 u 를 갖는 Chua 회로.

    C₁ẋ₁ = (x₂ - x₁)/R - g(x₁) - u,   g(x₁) = a·x₁ + c·x₁³
    C₂ẋ₂ = (x₁ - x₂)/R - x₃
    Lẋ₃  = x₂ - R₀·x₃

기본 회로 상수 (R = 5, C₁ = C₂ = 1, L = 2, R₀ = 0, a = -0.1, c = 0.05) 에서는 인쇄된 K̄₀ 의
원점 영역 공칭 폐루프 특성다항식이 s⁴ + 2.8596s³ + 7.2997s² + 12.4245s + 5.2346 으로 Hurwitz 이고,
±3 동작점의 K̄₁, K̄₂ 폐루프도 안정이다. 모든 상수는 바꿀 수 있다.
파티션은 x₁ 방향 slab 셋 (0, ±3).
"""

import logging

import numpy as np

from ..config import SimConfig
from ..palm import NonlinearSystem, PartitionSpec
from .fixtures import Fixture

logger = logging.getLogger(__name__)

OPERATING_VOLTAGES = (0.0, 3.0, -3.0)

PRINTED_K = [
    [[6.0518, 49.6777, 20.8074, -2.5596]],
    [[6.1412, 49.5742, 20.8064, -2.5411]],
    [[5.7869, 48.5033, 20.3217, -2.5140]],
]
PRINTED_D = [[0.0], [0.200], [-0.200]]
PRINTED_S_BAR = [[-0.3318, -4.8582, -1.6437, 0.4322]]
# 원점 근처에서 h·γ/σ 가 RK4 안정 구간 안에 들도록 작게 둔다
CHUA_GAMMA = 0.5


def chua_system(R: float = 5.0, C1: float = 1.0, C2: float = 1.0, L: float = 2.0,
                R0: float = 0.0, a: float = -0.1, c: float = 0.05) -> NonlinearSystem:
    def dynamics(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        x1, x2, x3 = x
        g = a * x1 + c * x1 ** 3
        return np.array([
            ((x2 - x1) / R - g - u[0]) / C1,
            ((x1 - x2) / R - x3) / C2,
            (x2 - R0 * x3) / L,
        ])

    return NonlinearSystem(
        name="chua",
        state_dim=3,
        input_dim=1,
        dynamics=dynamics,
        domain_lo=[-6.0, -3.0, -6.0, -100.0],
        domain_hi=[6.0, 3.0, 6.0, 100.0],
        params={"R": R, "C1": C1, "C2": C2, "L": L, "R0": R0, "a": a, "c": c},
    )


def chua_partition(system: NonlinearSystem) -> PartitionSpec:
    points = [np.array([v, 0.0, 0.0, 0.0]) for v in OPERATING_VOLTAGES]
    return PartitionSpec.from_operating_points(np.eye(4)[0], points, system)


def fixture_chua() -> Fixture:
    system = chua_system()
    fixture = Fixture(
        name="chua",
        system=system,
        partition=chua_partition(system),
        K=PRINTED_K,
        D=PRINTED_D,
        S_bar=PRINTED_S_BAR,
        xbar0=[4.0, 1.0, 0.0, 0.0],
        sim=SimConfig(h=1e-3, T=50.0, sigma=0.001, record_stride=10),
        gamma=CHUA_GAMMA,
        notes="circuit constants chosen so that the printed region-0 gain gives a Hurwitz nominal loop",
    )
    logger.info("chua printed-gain region 0 spectral abscissa %.4g", fixture.printed_gain_spectral_abscissa())
    return fixture
