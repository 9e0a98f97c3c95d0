"""
Inverted Pendulum
=================
카트 위 역진자.

    ẋ₁ = x₂
    ẋ₂ = (g sin x₁ - a·m·l·x₂²·sin(2x₁)/2 - a·cos(x₁)·k·u) / (4l/3 - a·m·l·cos²x₁),   a = 1/(M + m)

k 는 입력 배율 (물리 플랜트는 1). 인쇄된 Ā_i 의 입력 열은 명시된 파라미터로 다시 계산한 값의
정확히 2배이므로 픽스처 플랜트는 k = 2 로 인쇄된 모델과 맞춘다.

X × U = [-π/2, π/2] × [-3, 3] × [-300, 300], 동작점 x₁ ∈ {0, π/3, 13π/30, -π/3, -13π/30}.
"""

import logging
import math

import numpy as np

from ..config import SimConfig
from ..palm import NonlinearSystem, PartitionSpec, linearize
from .fixtures import Fixture

logger = logging.getLogger(__name__)

OPERATING_ANGLES = (0.0, math.pi / 3, 13 * math.pi / 30, -math.pi / 3, -13 * math.pi / 30)

# 인쇄된 행렬 (영역 순서는 OPERATING_ANGLES 와 같음)
PRINTED_A_BAR = [
    [[0.0, 1.0, 0.0], [19.6000, 0.0, -0.6667]],
    [[0.0, 1.0, 0.0], [4.7040, 0.0, -0.2667]],
    [[0.0, 1.0, 0.0], [1.5955, 0.0, -0.1585]],
    [[0.0, 1.0, 0.0], [4.7040, 0.0, -0.2667]],
    [[0.0, 1.0, 0.0], [1.5955, 0.0, -0.1585]],
]
PRINTED_C = [
    [0.0, 0.0],
    [0.0, 8.6533],
    [0.0, 12.3638],
    [0.0, -8.6533],
    [0.0, -12.3638],
]
PRINTED_K = [
    [[46381.5662, 13843.0990, -437.2131]],
    [[13997.0179, 4213.0535, -133.2537]],
    [[8287.5168, 1620.6117, -51.5002]],
    [[13997.0179, 4213.0535, -133.2537]],
    [[8287.5168, 1620.6117, -51.5002]],
]
PRINTED_D = [[0.0], [3.00], [5.00], [-3.00], [-5.00]]
PRINTED_S_BAR = [[-0.1269, -0.0501, 0.00066]]
# 인쇄된 입력 열 / 명시된 파라미터의 입력 열
PRINTED_INPUT_GAIN = 2.0


def pendulum_system(g: float = 9.8, M: float = 4.0, m: float = 2.0, l: float = 0.5,
                    u_max: float = 300.0, input_gain: float = 1.0) -> NonlinearSystem:
    a = 1.0 / (M + m)

    def dynamics(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        x1, x2 = x
        c = math.cos(x1)
        num = g * math.sin(x1) - a * m * l * x2 * x2 * math.sin(2.0 * x1) / 2.0 - a * c * input_gain * u[0]
        den = 4.0 * l / 3.0 - a * m * l * c * c
        return np.array([x2, num / den])

    return NonlinearSystem(
        name="pendulum",
        state_dim=2,
        input_dim=1,
        dynamics=dynamics,
        domain_lo=[-math.pi / 2, -3.0, -u_max],
        domain_hi=[math.pi / 2, 3.0, u_max],
        params={"g": g, "M": M, "m": m, "l": l, "u_max": u_max, "input_gain": input_gain},
    )


def pendulum_partition(system: NonlinearSystem) -> PartitionSpec:
    points = [np.array([angle, 0.0, 0.0]) for angle in OPERATING_ANGLES]
    return PartitionSpec.from_operating_points(np.eye(3)[0], points, system)


def fixture_pendulum() -> Fixture:
    system = pendulum_system(input_gain=PRINTED_INPUT_GAIN)
    fixture = Fixture(
        name="pendulum",
        system=system,
        partition=pendulum_partition(system),
        K=PRINTED_K,
        D=PRINTED_D,
        S_bar=PRINTED_S_BAR,
        xbar0=[math.radians(82.0), 0.0, 0.0],
        sim=SimConfig(h=1e-4, T=8.0, sigma=0.020, record_stride=10),
        A_bar=PRINTED_A_BAR,
        C=PRINTED_C,
        notes="printed input coefficients are twice the value recomputed from the stated parameters; "
              "the plant input is scaled by 2 to match them",
    )
    printed, recomputed = input_coefficient_discrepancy(fixture)
    logger.info("pendulum region 0 input coefficient: printed %.4f, stated parameters give %.4f, "
                "plant input gain %.1f", printed, recomputed, PRINTED_INPUT_GAIN)
    return fixture


def input_coefficient_discrepancy(fixture: Fixture):
    """Ā₀ 의 (2, 3) 원소: 인쇄값과 입력 배율 1 (명시된 파라미터) 플랜트의 원점 선형화 값"""
    printed = float(fixture.A_bar[0][1, 2])
    params = dict(fixture.system.params, input_gain=1.0)
    recomputed = float(linearize(pendulum_system(**params), np.zeros(3), origin=True).B[1, 0])
    return printed, recomputed
