"""
Robustness Margin
=================
근사 오차 한계 조건의 노름 증폭 계수와 좌변을 계산한다.

    (1 + ‖R₂S_u⁻¹‖‖S_x‖)·ε_f + max(ε_f, ε_g)  <  [1 - (2 + ‖R₂S_u⁻¹‖‖S_x‖)·λ]·b₃/b₄   (지수 안정)
                                               <  [1 - (2 + ‖R₂S_u⁻¹‖‖S_x‖)·μ]·ρ/h    (점근 안정)

b₃, b₄, ρ, h, λ, μ 는 역 Lyapunov 구성에서 나오는 상수라 계산할 수 없고 사용자 입력으로만 받는다.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import ControllerDesign

logger = logging.getLogger(__name__)


@dataclass
class MarginCheck:
    form: str
    ratio: float
    weight: float
    weight_limit: float
    rhs: float
    origin_passed: bool
    region_passed: bool

    @property
    def weight_admissible(self) -> bool:
        return 0.0 < self.weight < self.weight_limit

    @property
    def passed(self) -> bool:
        return self.weight_admissible and self.origin_passed and self.region_passed


@dataclass
class MarginReport:
    su_inv_norm: float
    sx_norm: float
    factor: float
    lhs: float
    eps_f0: float
    eps_f: float
    eps_g: float
    exponential: Optional[MarginCheck] = None
    asymptotic: Optional[MarginCheck] = None

    @property
    def weight_limit(self) -> float:
        """λ, μ 의 상한 1/(1 + factor)"""
        return 1.0 / (1.0 + self.factor)

    @property
    def verdict(self) -> Optional[bool]:
        """상수가 하나도 주어지지 않으면 None"""
        checks = [c for c in (self.exponential, self.asymptotic) if c is not None]
        if not checks:
            return None
        return all(c.passed for c in checks)


def _check(form: str, ratio: float, weight: float, report: MarginReport) -> MarginCheck:
    limit = report.weight_limit
    rhs = (1.0 - (1.0 + report.factor) * weight) * ratio
    return MarginCheck(
        form=form,
        ratio=ratio,
        weight=weight,
        weight_limit=limit,
        rhs=rhs,
        origin_passed=report.eps_f0 < ratio,
        region_passed=report.lhs < rhs,
    )


def robustness_margin(design: ControllerDesign, b3: Optional[float] = None, b4: Optional[float] = None,
                      lam: Optional[float] = None, rho: Optional[float] = None, h: Optional[float] = None,
                      mu: Optional[float] = None) -> MarginReport:
    """
    증폭 계수 1 + ‖R₂S_u⁻¹‖‖S_x‖ 와 좌변을 보고.

    (b3, b4, lam) 이 모두 주어지면 지수 안정 형태를, (rho, h, mu) 가 모두 주어지면
    점근 안정 형태를 판정한다. 원점 영역 조건은 ε_f0 < b₃/b₄ (또는 ρ/h).
    """
    bounds = design.bounds
    # R₂ 는 등거리 사상이라 ‖R₂S_u⁻¹‖ = ‖S_u⁻¹‖
    su_inv = float(np.linalg.norm(np.linalg.inv(design.S_u), 2))
    sx = float(np.linalg.norm(design.S_x, 2))
    factor = 1.0 + su_inv * sx
    lhs = factor * bounds.eps_f + max(bounds.eps_f, bounds.eps_g)
    report = MarginReport(
        su_inv_norm=su_inv,
        sx_norm=sx,
        factor=factor,
        lhs=lhs,
        eps_f0=bounds.eps_f0,
        eps_f=bounds.eps_f,
        eps_g=bounds.eps_g,
    )
    if b3 is not None and b4 is not None and lam is not None:
        report.exponential = _check("exponential", b3 / b4, lam, report)
    if rho is not None and h is not None and mu is not None:
        report.asymptotic = _check("asymptotic", rho / h, mu, report)
    logger.info("margin factor %.4g, lhs %.4g", factor, lhs)
    return report
