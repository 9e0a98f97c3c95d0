"""
Fixed-Step Integrator
=====================
고전적 4차 Runge-Kutta 한 스텝.
"""

from typing import Callable

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]

# 음의 실수축 위 RK4 안정 구간의 끝 (h·λ ≥ -2.785)
RK4_STABILITY_LIMIT = 2.785


def rk4_step(fn: Rhs, t: float, w: np.ndarray, h: float) -> np.ndarray:
    """
    w(t) 에서 w(t + h) 로 한 스텝 전진.

    Args:
        fn: (t, w) -> ẇ
        t: 현재 시각
        w: 현재 상태
        h: 스텝 크기

    Returns:
        다음 상태 (새 배열)
    """
    k1 = fn(t, w)
    k2 = fn(t + 0.5 * h, w + 0.5 * h * k1)
    k3 = fn(t + 0.5 * h, w + 0.5 * h * k2)
    k4 = fn(t + h, w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
