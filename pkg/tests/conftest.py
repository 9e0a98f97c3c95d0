"""
공용 픽스처: 1차 선형 플랜트 ẋ = a·x + u 와 손으로 인증한 제어기.

K̄ = [-43, -20], W = [[1, -2], [-2, 5]], P = W⁻¹ = [[5, 2], [2, 1]] 에서
    (R₁Ā + R₂K̄)W + W(·)ᵀ = diag(-2, -28)
이고 S̄ = R₂ᵀP = [2, 1] 이다.
"""

import numpy as np
import pytest

from tiny_ismpc.palm import ErrorBounds, NonlinearSystem, PartitionSpec, build_pwa_model, register_system
from tiny_ismpc.synthesis import ControllerDesign, NominalDesign, SurfaceDesign

CERT_K = np.array([[-43.0, -20.0]])
CERT_W = np.array([[1.0, -2.0], [-2.0, 5.0]])
CERT_P = np.array([[5.0, 2.0], [2.0, 1.0]])


def scalar_plant(a: float = 1.0) -> NonlinearSystem:
    return NonlinearSystem(
        name="scalar",
        state_dim=1,
        input_dim=1,
        dynamics=lambda x, u: np.array([a * x[0] + u[0]]),
        domain_lo=[-1.0, -1.0],
        domain_hi=[1.0, 1.0],
        params={"a": a},
    )


register_system("scalar", scalar_plant)


@pytest.fixture
def plant() -> NonlinearSystem:
    return scalar_plant()


@pytest.fixture
def linear_model(plant):
    return build_pwa_model(plant, PartitionSpec.single(plant), bounds=ErrorBounds(0.0, 0.0, 0.0))


def make_design(model, bounds=None, gamma: float = 1.0, certified: bool = True) -> ControllerDesign:
    nominal = NominalDesign(
        W=CERT_W.copy() if certified else None,
        Y=[CERT_K @ CERT_W] if certified else [],
        lam=[],
        K=[CERT_K.copy()],
        D=[np.zeros(1)],
    )
    surface = SurfaceDesign(P=CERT_P.copy() if certified else None, S_bar=CERT_P[1:, :], eta0=100.0 if certified else 0.0)
    return ControllerDesign(model=model, nominal=nominal, surface=surface, gamma=gamma, bounds=bounds)


@pytest.fixture
def certified_design(linear_model) -> ControllerDesign:
    return make_design(linear_model)
