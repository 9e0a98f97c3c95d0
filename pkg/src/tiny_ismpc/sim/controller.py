"""
Integral Sliding-Mode Controller
================================
적분 슬라이딩 면과 동적 제어기.

    s(t) = S_x(x - x(0)) + S_u(u - u(0)) - z,   ż = S̄((R₁Ā_i + R₂K̄_i)x̄ + C̄_i)
    u̇   = F_i x + G_i u + D_i - (γ + β_i + σ_i)·S_u⁻¹·sgn_σ(s),   σ_i = ε_i‖S_x‖‖x̄‖

ε_0 = ε_f0, ε_j = ε_f (j ≥ 1).
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..palm import locate
from ..synthesis import ControllerDesign, selectors


def sign_sigma(s: np.ndarray, sigma: float) -> np.ndarray:
    """σ > 0 이면 s/(‖s‖ + σ), σ = 0 이면 원소별 부호"""
    if sigma > 0.0:
        return s / (np.linalg.norm(s) + sigma)
    return np.sign(s)


@dataclass
class AugmentedState:
    """플랜트 상태 x, 제어 입력 u, 면의 적분항 z"""

    x: np.ndarray
    u: np.ndarray
    z: np.ndarray
    t: float = 0.0
    x0: Optional[np.ndarray] = None
    u0: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.u = np.asarray(self.u, dtype=float).reshape(-1)
        self.z = np.asarray(self.z, dtype=float).reshape(-1)
        if self.x0 is None:
            self.x0 = self.x.copy()
        if self.u0 is None:
            self.u0 = np.zeros_like(self.u)

    @classmethod
    def initial(cls, x0, m: int) -> "AugmentedState":
        """u(0) = 0, z(0) = 0 이므로 s(0) = 0"""
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        return cls(x=x0.copy(), u=np.zeros(m), z=np.zeros(m), t=0.0, x0=x0.copy(), u0=np.zeros(m))

    @property
    def xbar(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.u, self.z])


class ControlLaw:
    """
    설계에서 영역별 행렬을 미리 계산해 둔 제어 법칙.

    시뮬레이터의 우변에서 스테이지마다 호출되므로 행렬 연산만 남긴다.
    """

    def __init__(self, design: ControllerDesign, sigma: float = 0.0, model=None):
        self.design = design
        self.model = model if model is not None else design.model
        self.sigma = float(sigma)
        n, m = self.model.n, self.model.m
        self.n, self.m = n, m
        R1, R2 = selectors(n, m)
        self.S_bar = np.asarray(design.S_bar, dtype=float)
        self.S_x = self.S_bar[:, :n]
        self.S_u = self.S_bar[:, n:]
        self.S_u_inv = np.linalg.inv(self.S_u)
        self.sx_norm = float(np.linalg.norm(self.S_x, 2))
        self.K: List[np.ndarray] = [np.asarray(K, dtype=float) for K in design.K]
        self.D: List[np.ndarray] = [np.asarray(d, dtype=float).reshape(m) for d in design.D]
        self.A_cl = [R1 @ sub.Abar + R2 @ K for sub, K in zip(self.model.submodels, self.K)]
        self.C_cl = [self.model.C_bar(i, self.D[i]) for i in range(self.model.l + 1)]
        bounds = design.bounds
        self.slopes = [bounds.slope(i) for i in range(self.model.l + 1)]
        self.beta = list(design.beta)
        self.gamma = float(design.gamma)

    def region(self, xbar: np.ndarray) -> Tuple[int, bool]:
        return locate(self.model, xbar)

    def gain(self, index: int, xbar: np.ndarray) -> float:
        """γ + β_i + ε_i‖S_x‖‖x̄‖"""
        return self.gamma + self.beta[index] + self.slopes[index] * self.sx_norm * float(np.linalg.norm(xbar))

    def nominal_rate(self, index: int, xbar: np.ndarray) -> np.ndarray:
        """(R₁Ā_i + R₂K̄_i)x̄ + C̄_i"""
        return self.A_cl[index] @ xbar + self.C_cl[index]

    def surface_rate(self, index: int, xbar: np.ndarray) -> np.ndarray:
        """ż = S̄·(공칭 폐루프 우변)"""
        return self.S_bar @ self.nominal_rate(index, xbar)

    def surface(self, x: np.ndarray, u: np.ndarray, z: np.ndarray, x0: np.ndarray,
                u0: Optional[np.ndarray] = None) -> np.ndarray:
        du = u if u0 is None else u - u0
        return self.S_x @ (x - x0) + self.S_u @ du - z

    def input_rate(self, index: int, xbar: np.ndarray, s: np.ndarray) -> np.ndarray:
        nominal = self.K[index] @ xbar + self.D[index]
        switching = self.gain(index, xbar) * (self.S_u_inv @ sign_sigma(s, self.sigma))
        return nominal - switching


def surface_value(design: ControllerDesign, state: AugmentedState) -> np.ndarray:
    """s = S_x(x - x(0)) + S_u(u - u(0)) - z"""
    n = design.model.n
    S_bar = np.asarray(design.S_bar, dtype=float)
    return S_bar[:, :n] @ (state.x - state.x0) + S_bar[:, n:] @ (state.u - state.u0) - state.z


def controller_derivative(design: ControllerDesign, state: AugmentedState, s: np.ndarray,
                          sigma: float = 0.0, index: Optional[int] = None) -> np.ndarray:
    """
    u̇ 계산. index 가 없으면 현재 x̄ 의 영역을 찾는다.
    """
    law = ControlLaw(design, sigma)
    xbar = state.xbar
    if index is None:
        index, _ = law.region(xbar)
    return law.input_rate(index, xbar, np.asarray(s, dtype=float).reshape(-1))
