"""
Controller Design Procedure
===========================
PWA 모델 → 공칭 이득/오프셋 → 슬라이딩 면 → γ 선택.
실패하면 공칭 감쇠율을 올리고, 그래도 안 되면 가장 넓은 slab 을 나눠 다시 시도한다 (l ≤ l_max).
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..config import DesignOptions, GridSpec
from ..errors import NoFeasibleOffsets, SynthesisFailed
from ..palm import ErrorBounds, NonlinearSystem, PartitionSpec, PwaModel, build_pwa_model, linearize, refine_partition
from .nominal import NominalDesign, sample_offsets, selectors
from .surface import SurfaceDesign, origin_bound_ceiling, solve_surface

logger = logging.getLogger(__name__)

GAMMA_FLOOR = 1e-3


@dataclass
class ControllerDesign:
    """
    완성된 제어기: 공칭 이득 K̄_i, 오프셋 D_i, 면 행렬 S̄, 도달 이득 γ, β_i.
    """

    model: PwaModel
    nominal: NominalDesign
    surface: SurfaceDesign
    gamma: float
    beta: List[float] = field(default_factory=list)
    bounds: Optional[ErrorBounds] = None

    def __post_init__(self):
        if self.bounds is None:
            self.bounds = self.model.bounds
        if not self.beta:
            self.beta = reaching_offsets(self.bounds, self.surface.S_x, self.model.l)
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def l(self) -> int:
        return self.model.l

    @property
    def K(self) -> List[np.ndarray]:
        return self.nominal.K

    @property
    def D(self) -> List[np.ndarray]:
        return self.nominal.D

    @property
    def S_bar(self) -> np.ndarray:
        return self.surface.S_bar

    @property
    def S_x(self) -> np.ndarray:
        return self.surface.S_x

    @property
    def S_u(self) -> np.ndarray:
        return self.surface.S_u

    @property
    def certified(self) -> bool:
        """LMI 인증서 (W, P) 를 가지고 있는지"""
        return self.nominal.W is not None and self.surface.P is not None

    def closed_loop(self, index: int) -> np.ndarray:
        R1, R2 = selectors(self.model.n, self.model.m)
        return R1 @ self.model.submodels[index].Abar + R2 @ self.K[index]

    def C_bar(self, index: int) -> np.ndarray:
        return self.model.C_bar(index, self.D[index])


def reaching_offsets(bounds: ErrorBounds, S_x: np.ndarray, l: int) -> List[float]:
    """β_0 = 0, β_j = ε_g‖S_x‖₂"""
    beta_j = bounds.eps_g * float(np.linalg.norm(S_x, 2))
    return [0.0] + [beta_j] * l


def select_gamma(surface: SurfaceDesign, system: NonlinearSystem, bounds: ErrorBounds) -> float:
    """γ = max(1e-3, 0.1·‖S_x‖·diam(X × U)·max(ε_f0, ε_f))"""
    raw = 0.1 * float(np.linalg.norm(surface.S_x, 2)) * system.diameter * bounds.max_slope
    return max(GAMMA_FLOOR, raw)


def stabilizable(system: NonlinearSystem, tol: float = 1e-9) -> bool:
    """원점 선형화의 증강 쌍 ([[A₀, B₀], [0, 0]], R₂) 에 대한 PBH 안정화 가능성 검사"""
    n, m = system.state_dim, system.input_dim
    sub = linearize(system, np.zeros(system.dim), origin=True)
    R1, R2 = selectors(n, m)
    A = R1 @ sub.Abar
    N = n + m
    for lam in np.linalg.eigvals(A):
        if lam.real < -tol:
            continue
        pencil = np.hstack([A - lam * np.eye(N), R2])
        if np.linalg.matrix_rank(pencil, tol=1e-8 * max(1.0, np.linalg.norm(pencil))) < N:
            return False
    return True


def _grid_after_refinement(grid: GridSpec) -> GridSpec:
    # 영역 번호가 바뀌므로 영역별 설정은 버린다
    ranges = grid.ranges if grid.ranges is not None and len(grid.ranges) == 1 else None
    return grid.model_copy(update={"ranges": ranges, "symmetric_pairs": []})


def design_controller(system: NonlinearSystem, partition: PartitionSpec,
                      options: Optional[DesignOptions] = None) -> ControllerDesign:
    """
    전체 설계 절차.

    파티션마다 감쇠율 α 를 options.decay_rates 순서로 올려 가며 공칭 설계와 면 LMI 를 푼다.
    ε_f0 가 origin_bound_ceiling 이상이면 풀지 않고 원점 slab 을 나눈다.

    Args:
        system: 비선형 플랜트
        partition: 초기 slab 파티션
        options: 샘플 수, 격자, 솔버, l_max, γ, 감쇠율, 시간 예산 등

    Returns:
        ControllerDesign

    Raises:
        SynthesisFailed: 안정화 불가능, l 이 l_max 를 넘음, 또는 시간 예산 초과
    """
    options = options or DesignOptions()
    if not stabilizable(system):
        raise SynthesisFailed(
            f"{system.name}: origin linearization is not stabilizable through the input",
            ["PBH test failed for ([[A0, B0], [0, 0]], R2)"],
        )

    override = None
    if options.bounds is not None:
        override = ErrorBounds(options.bounds.eps_f0, options.bounds.eps_f, options.bounds.eps_g)

    started = time.monotonic()
    deadline = None if options.time_budget is None else started + options.time_budget

    def check_budget(attempts: List[str]):
        if deadline is not None and time.monotonic() > deadline:
            raise SynthesisFailed(f"time budget of {options.time_budget:g}s exhausted after "
                                  f"{time.monotonic() - started:.1f}s", attempts)

    grid = options.grid
    attempts: List[str] = []
    while True:
        if partition.l > options.l_max:
            raise SynthesisFailed(f"no design with l ≤ {options.l_max}", attempts)
        check_budget(attempts)

        model = build_pwa_model(system, partition, options.samples_per_region, options.seed, bounds=override)
        logger.info("attempt with l=%d regions (eps_f0=%.3g eps_f=%.3g eps_g=%.3g)", model.l,
                    model.bounds.eps_f0, model.bounds.eps_f, model.bounds.eps_g)

        ceiling = origin_bound_ceiling(model)
        if model.bounds.eps_f0 >= ceiling:
            attempts.append(f"l={model.l}: eps_f0={model.bounds.eps_f0:.4g} is not below {ceiling:.4g}, "
                            f"origin block cannot hold")
            if override is not None or grid.fixed is not None:
                raise SynthesisFailed("eps_f0 rules out the origin block for every gain and the origin slab "
                                      "cannot be refined", attempts)
            partition = refine_partition(partition, index=0)
            grid = _grid_after_refinement(grid)
            continue

        for alpha in options.decay_rates:
            check_budget(attempts)
            try:
                nominal = sample_offsets(model, grid, options.solver, options.workers, decay_rate=alpha,
                                         deadline=deadline)
            except NoFeasibleOffsets as exc:
                # 더 큰 α 는 더 강한 조건
                attempts.append(f"l={model.l}, alpha={alpha:g}: nominal gains: {exc}")
                break

            check_budget(attempts)
            surface, solution = solve_surface(model, nominal, options.solver)
            if surface is not None:
                gamma = options.gamma if options.gamma is not None else select_gamma(surface, system, model.bounds)
                design = ControllerDesign(model=model, nominal=nominal, surface=surface, gamma=gamma)
                logger.info("design found with l=%d, decay rate %g, gamma=%.4g", model.l, alpha, gamma)
                return design
            attempts.append(f"l={model.l}, alpha={alpha:g}: sliding surface {solution.status.value} "
                            f"(t={solution.t:.3e}, lower bound {solution.lower_bound:.3e})")

        if grid.fixed is not None:
            raise SynthesisFailed("fixed offsets pin the partition; refinement is not possible", attempts)
        partition = refine_partition(partition)
        grid = _grid_after_refinement(grid)
