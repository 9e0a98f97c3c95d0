"""
Reaching Test
=============
정확한 부호 함수로 슬라이딩 변수의 도달 시간을 확인한다.

    ṡ = S_x(ΔĀ_i x̄ + ΔC_i) - (γ + β_i + σ_i)·sgn(s)

주입 항은 한 스텝 동안 상수이고, 그 구간에서 ṡ 는 부호가 바뀔 때까지 상수이므로 스텝을
영점 통과 시각에서 나눠 정확히 적분한다. 0 에 닿은 성분은 등가 제어로 0 에 머문다.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config import SimConfig, UncertaintyPolicy
from ..palm import locate
from ..synthesis import ControllerDesign

logger = logging.getLogger(__name__)

REACH_TOL = 1e-6


@dataclass
class ReachReport:
    s0_norm: float
    gamma: float
    reach_time: Optional[float]
    bound: float
    steps: int

    @property
    def passed(self) -> bool:
        return self.reach_time is not None and self.reach_time <= self.bound


def _first_entry(a: np.ndarray, v: np.ndarray, span: float, tol: float) -> Optional[float]:
    """τ ∈ [0, span] 에서 ‖a + τv‖ ≤ tol 이 처음 성립하는 τ"""
    if np.linalg.norm(a) <= tol:
        return 0.0
    vv = float(v @ v)
    if vv == 0.0:
        return None
    av = float(a @ v)
    c = float(a @ a) - tol * tol
    disc = av * av - vv * c
    if disc < 0.0:
        return None
    tau = (-av - np.sqrt(disc)) / vv
    return tau if 0.0 <= tau <= span else None


def _injection(design: ControllerDesign, index: int, xbar: np.ndarray, s: np.ndarray,
               policy: UncertaintyPolicy, rng: np.random.Generator) -> np.ndarray:
    bounds = design.bounds
    S_x = design.S_x
    eps, eps_g = bounds.slope(index), bounds.offset(index)
    if policy.kind == "zero":
        return np.zeros(design.model.m)
    if policy.kind == "adversarial":
        # 허용 한계 크기로 s 방향을 민다
        size = float(np.linalg.norm(S_x, 2)) * (eps * float(np.linalg.norm(xbar)) + eps_g)
        norm = float(np.linalg.norm(s))
        return size * s / norm if norm > 0.0 else np.zeros_like(s)
    n, N = design.model.n, design.model.n + design.model.m
    dA = rng.standard_normal((n, N))
    dA *= eps / np.linalg.norm(dA, 2)
    dC = rng.standard_normal(n)
    dC *= eps_g / np.linalg.norm(dC)
    return S_x @ (dA @ xbar + dC)


def reaching_test(design: ControllerDesign, config: SimConfig, s0, policy: Optional[UncertaintyPolicy] = None,
                  xbar=None) -> ReachReport:
    """
    ‖s‖ ≤ 1e-6 에 처음 닿는 시각과 상한 ‖s0‖/γ + h 를 보고.

    Args:
        design: γ, β_i, S_x, 오차 한계를 제공하는 설계
        config: 스텝 h 와 최소 적분 구간 T
        s0: 초기 슬라이딩 변수
        policy: 주입 정책 (zero / random_bounded / adversarial)
        xbar: σ_i 와 영역을 정하는 고정 상태점 (기본 원점)
    """
    policy = policy or UncertaintyPolicy()
    rng = np.random.default_rng(policy.seed)
    m = design.model.m
    s = np.asarray(s0, dtype=float).reshape(m).copy()
    xbar = np.zeros(design.model.n + m) if xbar is None else np.asarray(xbar, dtype=float)
    index, _ = locate(design.model, xbar)
    gain = design.gamma + design.beta[index] + design.bounds.slope(index) * float(np.linalg.norm(design.S_x, 2)) \
        * float(np.linalg.norm(xbar))

    h = config.h
    s0_norm = float(np.linalg.norm(s))
    bound = s0_norm / design.gamma + h
    horizon = max(config.T, bound + 2.0 * h)
    sliding = s == 0.0

    t, steps = 0.0, 0
    reach = 0.0 if s0_norm <= REACH_TOL else None
    while reach is None and t < horizon:
        d = _injection(design, index, xbar, s, policy, rng)
        remaining = h
        while remaining > 0.0 and reach is None:
            v = np.where(sliding, 0.0, d - gain * np.sign(s))
            # 다음 영점 통과까지
            with np.errstate(divide="ignore", invalid="ignore"):
                cross = np.where(~sliding & (s * v < 0.0), -s / v, np.inf)
            span = min(remaining, float(np.min(cross)))
            tau = _first_entry(s, v, span, REACH_TOL)
            if tau is not None:
                reach = t + (h - remaining) + tau
                break
            s = s + span * v
            hit = cross <= span
            s[hit] = 0.0
            sliding |= hit
            remaining -= span
        t += h
        steps += 1

    report = ReachReport(s0_norm=s0_norm, gamma=design.gamma, reach_time=reach, bound=bound, steps=steps)
    logger.debug("reach time %s (bound %.6g, %d steps)", reach, bound, steps)
    return report
