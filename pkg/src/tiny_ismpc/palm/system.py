"""
Nonlinear Plant
===============
비선형 플랜트 ẋ = f(x, u) 와 X × U 도메인 박스, 그리고 이름 기반 레지스트리.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from ..errors import AssumptionViolation, DomainError, EvaluationError

logger = logging.getLogger(__name__)

Dynamics = Callable[[np.ndarray, np.ndarray], np.ndarray]

ORIGIN_TOL = 1e-9


@dataclass
class NonlinearSystem:
    """
    비선형 시스템

    Args:
        name: 레지스트리 이름 (직렬화에 사용)
        state_dim: n
        input_dim: m
        dynamics: (x, u) -> ẋ
        domain_lo / domain_hi: X × U 박스의 좌표별 하한/상한 (길이 n+m)
        params: 팩토리에 다시 넘길 파라미터
    """

    name: str
    state_dim: int
    input_dim: int
    dynamics: Dynamics
    domain_lo: np.ndarray
    domain_hi: np.ndarray
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.state_dim <= 0 or self.input_dim <= 0:
            raise AssumptionViolation(
                f"dimensions must be positive, got n={self.state_dim}, m={self.input_dim}"
            )
        self.domain_lo = np.asarray(self.domain_lo, dtype=float).reshape(-1)
        self.domain_hi = np.asarray(self.domain_hi, dtype=float).reshape(-1)
        dim = self.dim
        if self.domain_lo.shape != (dim,) or self.domain_hi.shape != (dim,):
            raise AssumptionViolation(f"domain bounds must have length n+m={dim}")
        if np.any(self.domain_lo >= self.domain_hi):
            raise AssumptionViolation("every domain interval needs lo < hi")
        if np.any(self.domain_lo > 0.0) or np.any(self.domain_hi < 0.0):
            raise AssumptionViolation("domain box must contain the origin")

        f0 = self.evaluate(np.zeros(self.state_dim), np.zeros(self.input_dim))
        if np.linalg.norm(f0) > ORIGIN_TOL:
            raise AssumptionViolation(f"f(0, 0) = {f0.tolist()} is not zero")

    @property
    def dim(self) -> int:
        return self.state_dim + self.input_dim

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.domain_hi - self.domain_lo))

    def evaluate(self, x, u) -> np.ndarray:
        """ẋ = f(x, u), 유한성 검사 포함"""
        value = np.asarray(self.dynamics(np.asarray(x, dtype=float), np.asarray(u, dtype=float)), dtype=float)
        value = value.reshape(-1)
        if value.shape != (self.state_dim,):
            raise EvaluationError(f"dynamics returned shape {value.shape}, expected ({self.state_dim},)")
        if not np.all(np.isfinite(value)):
            raise EvaluationError(f"dynamics returned non-finite value at x={x}, u={u}")
        return value

    def evaluate_bar(self, xbar) -> np.ndarray:
        xbar = np.asarray(xbar, dtype=float)
        return self.evaluate(xbar[: self.state_dim], xbar[self.state_dim:])

    def contains(self, xbar, atol: float = 0.0) -> bool:
        xbar = np.asarray(xbar, dtype=float)
        return bool(np.all(xbar >= self.domain_lo - atol) and np.all(xbar <= self.domain_hi + atol))

    def require_inside(self, xbar) -> np.ndarray:
        xbar = np.asarray(xbar, dtype=float).reshape(-1)
        if xbar.shape != (self.dim,):
            raise DomainError(f"point has length {xbar.size}, expected {self.dim}")
        if not self.contains(xbar):
            raise DomainError(f"point {xbar.tolist()} lies outside the domain box")
        return xbar

    def clamp(self, xbar) -> np.ndarray:
        return np.clip(xbar, self.domain_lo, self.domain_hi)


# ---------------------------------------------------------------------------
# 레지스트리
# ---------------------------------------------------------------------------

_REGISTRY: Dict[str, Callable[..., NonlinearSystem]] = {}
_REGISTRY_LOCK = threading.Lock()


def register_system(name: str, factory: Callable[..., NonlinearSystem]) -> None:
    """이름으로 시스템 팩토리 등록 (같은 이름은 덮어씀)"""
    with _REGISTRY_LOCK:
        _REGISTRY[name] = factory


def get_system(name: str, params: Optional[Dict[str, float]] = None) -> NonlinearSystem:
    if name not in _REGISTRY:
        # bench 모듈이 pendulum / chua 를 등록한다
        from .. import bench  # noqa: F401
    with _REGISTRY_LOCK:
        factory = _REGISTRY.get(name)
    if factory is None:
        available = ", ".join(sorted(_REGISTRY)) or "none"
        raise KeyError(f"unknown system '{name}' (available: {available})")
    return factory(**(params or {}))


def registered_systems() -> list:
    with _REGISTRY_LOCK:
        return sorted(_REGISTRY)
