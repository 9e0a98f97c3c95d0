"""
Uncertain PWA Model
===================
영역별 아핀 부분모델 (A_i, B_i, C_i) 과 근사 오차 한계 (ε_f0, ε_f, ε_g).

동작점 선형화, 영역 판정, 오차 한계 추정, 모델 검증을 제공한다.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from ..errors import CoverageError, DegenerateRegion, InvalidBounds, InvalidSlab, ShapeError
from .regions import PartitionSpec, Region, SlabSpec, premise_extent
from .system import NonlinearSystem

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1.1
ZERO_NORM = 1e-12


@dataclass(frozen=True)
class AffineSubmodel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    operating_point: np.ndarray

    @property
    def Abar(self) -> np.ndarray:
        """[A_i, B_i] (n × (n+m))"""
        return np.hstack([self.A, self.B])

    def residual(self, system: NonlinearSystem, xbar) -> np.ndarray:
        """r(x̄) = f(x, u) - A x - B u - C"""
        xbar = np.asarray(xbar, dtype=float)
        return system.evaluate_bar(xbar) - self.Abar @ xbar - self.C


@dataclass(frozen=True)
class ErrorBounds:
    eps_f0: float
    eps_f: float
    eps_g: float

    def __post_init__(self):
        for name in ("eps_f0", "eps_f", "eps_g"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                raise InvalidBounds(f"{name} must be finite and nonnegative, got {value}")

    def slope(self, index: int) -> float:
        return self.eps_f0 if index == 0 else self.eps_f

    def offset(self, index: int) -> float:
        return 0.0 if index == 0 else self.eps_g

    @property
    def max_slope(self) -> float:
        return max(self.eps_f0, self.eps_f)


ZERO_BOUNDS = ErrorBounds(0.0, 0.0, 0.0)


@dataclass
class PwaModel:
    """
    불확실 PWA 모델.

    regions[0] 이 원점 영역이고 submodels 는 regions 와 같은 순서.
    """

    system: NonlinearSystem
    regions: List[Region]
    submodels: List[AffineSubmodel]
    bounds: ErrorBounds = ZERO_BOUNDS
    _theta: np.ndarray = field(init=False, repr=False)
    _beta1: np.ndarray = field(init=False, repr=False)
    _beta2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, m = self.n, self.m
        if not self.regions:
            raise CoverageError("model needs at least the origin region")
        if len(self.regions) != len(self.submodels):
            raise ShapeError(f"{len(self.regions)} regions but {len(self.submodels)} submodels")
        for i, (region, sub) in enumerate(zip(self.regions, self.submodels)):
            if region.index != i:
                raise ShapeError(f"region at position {i} carries index {region.index}")
            if region.theta.shape != (n + m,):
                raise ShapeError(f"region {i} normal has length {region.theta.size}, expected {n + m}")
            if sub.A.shape != (n, n) or sub.B.shape != (n, m) or sub.C.shape != (n,):
                raise ShapeError(
                    f"submodel {i} has shapes A{sub.A.shape} B{sub.B.shape} C{sub.C.shape}, "
                    f"expected A({n}, {n}) B({n}, {m}) C({n},)"
                )
        if np.any(self.submodels[0].C != 0.0):
            raise ShapeError("origin submodel must have C_0 = 0")

        origin = np.zeros(n + m)
        if not self.regions[0].contains(origin):
            raise CoverageError("region 0 does not contain the origin")
        for region in self.regions[1:]:
            if region.contains_in_interior(origin):
                raise InvalidSlab(f"region {region.index} contains the origin in its interior")

        self._theta = np.vstack([r.theta for r in self.regions])
        self._beta1 = np.array([r.beta1 for r in self.regions])
        self._beta2 = np.array([r.beta2 for r in self.regions])
        self._check_coverage()

    @property
    def n(self) -> int:
        return self.system.state_dim

    @property
    def m(self) -> int:
        return self.system.input_dim

    @property
    def l(self) -> int:
        return len(self.regions) - 1

    def with_bounds(self, bounds: ErrorBounds) -> "PwaModel":
        return replace(self, bounds=bounds)

    def C_bar(self, index: int, D) -> np.ndarray:
        """C̄_i = [C_i; D_i]"""
        return np.concatenate([self.submodels[index].C, np.asarray(D, dtype=float).reshape(-1)])

    def _check_coverage(self) -> None:
        # 법선이 모두 같을 때만 1차원 구간 합집합으로 판정 (아니면 validate_model 의 샘플 검사)
        if not np.allclose(self._theta, self._theta[0]):
            return
        lo, hi = premise_extent(self._theta[0], self.system.domain_lo, self.system.domain_hi)
        scale = max(1.0, abs(lo), abs(hi))
        reach = lo
        for b1, b2 in sorted(zip(self._beta1, self._beta2)):
            if b1 > reach + 1e-9 * scale:
                raise CoverageError(f"premise interval [{reach:.6g}, {b1:.6g}] is not covered")
            reach = max(reach, b2)
        if reach < hi - 1e-9 * scale:
            raise CoverageError(f"premise interval [{reach:.6g}, {hi:.6g}] is not covered")

    def _match(self, xbar: np.ndarray) -> Optional[int]:
        p = self._theta @ xbar
        inside = (self._beta1 <= p) & (p <= self._beta2)
        if inside[0]:
            return 0
        hits = np.flatnonzero(inside)
        return int(hits[0]) if hits.size else None

    def _nearest(self, xbar: np.ndarray) -> int:
        return int(np.argmin([r.distance(xbar) for r in self.regions]))


# ---------------------------------------------------------------------------
# 선형화
# ---------------------------------------------------------------------------

def fd_step(value: float) -> float:
    return max(1e-6, 1e-6 * abs(value))


def linearize(system: NonlinearSystem, point, origin: bool = False) -> AffineSubmodel:
    """
    동작점에서 중앙 차분 선형화.

    Args:
        system: 비선형 시스템
        point: 동작점 (x*, u*), 도메인 박스 안
        origin: True 이면 C 를 정확히 0 으로 둔다 (원점 영역)

    Returns:
        AffineSubmodel (A = ∂f/∂x, B = ∂f/∂u, C = f* - A x* - B u*)
    """
    xbar = system.require_inside(point)
    n, dim = system.state_dim, system.dim

    jac = np.empty((n, dim))
    for k in range(dim):
        h = fd_step(xbar[k])
        plus, minus = xbar.copy(), xbar.copy()
        plus[k] += h
        minus[k] -= h
        jac[:, k] = (system.evaluate_bar(plus) - system.evaluate_bar(minus)) / (2.0 * h)

    A, B = jac[:, :n], jac[:, n:]
    if origin:
        C = np.zeros(n)
    else:
        C = system.evaluate_bar(xbar) - jac @ xbar
    return AffineSubmodel(A=A, B=B, C=C, operating_point=xbar)


# ---------------------------------------------------------------------------
# 영역 판정
# ---------------------------------------------------------------------------

def locate(model: PwaModel, xbar) -> Tuple[int, bool]:
    """
    x̄ 를 포함하는 영역과 도메인 이탈 여부.

    경계 위의 점은 가장 작은 인덱스 (영역 0 우선). 도메인 밖의 점은 박스로 clamp 한 뒤
    판정하고, 그래도 없으면 가장 가까운 slab 을 고른다.
    """
    xbar = np.asarray(xbar, dtype=float)
    exited = not model.system.contains(xbar)
    target = model.system.clamp(xbar) if exited else xbar
    index = model._match(target)
    if index is None:
        if not exited:
            raise CoverageError(f"no region contains {xbar.tolist()}")
        index = model._nearest(target)
    return index, exited


def region_index(model: PwaModel, xbar) -> int:
    index, exited = locate(model, xbar)
    if exited:
        logger.debug("point %s outside the domain, dispatched to region %d", np.asarray(xbar).tolist(), index)
    return index


# ---------------------------------------------------------------------------
# 샘플링 / 오차 한계
# ---------------------------------------------------------------------------

def _axis_ends(center: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """중심을 지나는 좌표축 방향의 박스 끝점들"""
    ends = []
    for k in range(center.size):
        for bound in (lo[k], hi[k]):
            p = center.copy()
            p[k] = bound
            ends.append(p)
    return np.asarray(ends)


def sample_region(system: NonlinearSystem, region: Region, count: int, seed: int,
                  center=None) -> np.ndarray:
    """
    slab ∩ 도메인 박스에서 준난수 (scrambled Halton) 샘플 추출.

    축 정렬 slab 은 박스를 잘라서 바로 뽑고, 그 외는 기각 샘플링.
    center 가 주어지면 그 점을 지나는 축 방향 끝점도 포함한다.
    """
    dim = system.dim
    lo, hi = system.domain_lo.copy(), system.domain_hi.copy()
    rng = np.random.default_rng([seed, region.index])
    nonzero = np.flatnonzero(region.theta)

    if nonzero.size == 1:
        k = int(nonzero[0])
        ends = sorted((region.beta1 / region.theta[k], region.beta2 / region.theta[k]))
        lo[k], hi[k] = max(lo[k], ends[0]), min(hi[k], ends[1])
        if not hi[k] > lo[k]:
            raise DegenerateRegion(f"region {region.index} has no volume inside the domain box")
        sampler = qmc.Halton(d=dim, scramble=True, seed=rng)
        points = qmc.scale(sampler.random(count), lo, hi)
    else:
        sampler = qmc.Halton(d=dim, scramble=True, seed=rng)
        accepted: List[np.ndarray] = []
        total = 0
        for _ in range(50):
            batch = qmc.scale(sampler.random(4 * count), lo, hi)
            p = batch @ region.theta
            keep = batch[(p >= region.beta1) & (p <= region.beta2)]
            accepted.append(keep)
            total += len(keep)
            if total >= count:
                break
        if total == 0:
            raise DegenerateRegion(f"region {region.index} has no volume inside the domain box")
        points = np.vstack(accepted)[:count]
        if total < count:
            logger.warning("region %d: only %d of %d samples accepted", region.index, total, count)

    if center is not None:
        extra = _axis_ends(np.clip(center, lo, hi), lo, hi)
        p = extra @ region.theta
        extra = extra[(p >= region.beta1) & (p <= region.beta2)]
        points = np.vstack([points, extra]) if len(extra) else points
    return points


def _residuals(system: NonlinearSystem, sub: AffineSubmodel, points: np.ndarray) -> np.ndarray:
    return np.array([sub.residual(system, x) for x in points])


def estimate_error_bounds(system: NonlinearSystem, model: PwaModel, samples_per_region: int = 256,
                          seed: int = 0, safety: float = SAFETY_FACTOR) -> ErrorBounds:
    """
    샘플 기반 근사 오차 한계 추정.

    - ε_g: 영역 j ≥ 1 동작점에서의 잔차 노름 최대값
    - ε_f: ‖r(x̄) - r(x̄*)‖/‖x̄ - x̄*‖ 와 (‖r(x̄)‖ - ε_g)/‖x̄‖ 의 최대값
    - ε_f0: 원점 영역에서 ‖r(x̄)‖/‖x̄‖ 의 최대값
    모두 safety 배.
    """
    if samples_per_region < 100:
        raise ValueError(f"samples_per_region must be at least 100, got {samples_per_region}")

    r_star = [sub.residual(system, sub.operating_point) for sub in model.submodels]
    eps_g = safety * max((float(np.linalg.norm(r)) for r in r_star[1:]), default=0.0)

    eps_f0 = 0.0
    eps_f = 0.0
    for region, sub in zip(model.regions, model.submodels):
        points = sample_region(system, region, samples_per_region, seed, center=sub.operating_point)
        residuals = _residuals(system, sub, points)
        r_norm = np.linalg.norm(residuals, axis=1)
        x_norm = np.linalg.norm(points, axis=1)
        away = x_norm > ZERO_NORM

        if region.index == 0:
            if np.any(away):
                eps_f0 = max(eps_f0, float(np.max(r_norm[away] / x_norm[away])))
            continue

        dist = np.linalg.norm(points - sub.operating_point, axis=1)
        apart = dist > ZERO_NORM
        slope = 0.0
        if np.any(apart):
            change = np.linalg.norm(residuals[apart] - r_star[region.index], axis=1)
            slope = float(np.max(change / dist[apart]))
        consistency = 0.0
        if np.any(away):
            consistency = float(np.max((r_norm[away] - eps_g) / x_norm[away]))
        eps_f = max(eps_f, slope, consistency)
        logger.debug("region %d: slope %.4g, consistency %.4g", region.index, slope, consistency)

    bounds = ErrorBounds(eps_f0=safety * eps_f0, eps_f=safety * eps_f, eps_g=eps_g)
    logger.info("error bounds: eps_f0=%.4g eps_f=%.4g eps_g=%.4g", bounds.eps_f0, bounds.eps_f, bounds.eps_g)
    return bounds


# ---------------------------------------------------------------------------
# 검증
# ---------------------------------------------------------------------------

@dataclass
class RegionValidation:
    index: int
    samples: int
    max_residual: float
    worst_excess: float
    violations: List[List[float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass
class ValidationReport:
    regions: List[RegionValidation]
    coverage_holes: List[List[float]]
    tolerance: float

    @property
    def passed(self) -> bool:
        return not self.coverage_holes and all(r.passed for r in self.regions)

    @property
    def failed_regions(self) -> List[int]:
        return [r.index for r in self.regions if not r.passed]


def validate_model(model: PwaModel, system: NonlinearSystem, tolerance: float = 1e-9,
                   samples_per_region: int = 256, seed: int = 1,
                   coverage_samples: int = 1024) -> ValidationReport:
    """
    오차 한계 자기일관성 검사: 모든 샘플에서 ‖r(x̄)‖ ≤ ε‖x̄‖ + ε_g + tolerance.
    도메인 박스 전체에서 어느 영역에도 속하지 않는 점을 coverage hole 로 보고한다.
    """
    bounds = model.bounds
    results = []
    for region, sub in zip(model.regions, model.submodels):
        points = sample_region(system, region, samples_per_region, seed, center=sub.operating_point)
        residuals = _residuals(system, sub, points)
        r_norm = np.linalg.norm(residuals, axis=1)
        allowed = bounds.slope(region.index) * np.linalg.norm(points, axis=1) + bounds.offset(region.index)
        excess = r_norm - allowed
        bad = excess > tolerance
        results.append(RegionValidation(
            index=region.index,
            samples=len(points),
            max_residual=float(np.max(r_norm)) if len(r_norm) else 0.0,
            worst_excess=float(np.max(excess)) if len(excess) else 0.0,
            violations=points[bad].tolist(),
        ))
        if np.any(bad):
            logger.info("region %d: %d of %d samples exceed the bound", region.index, int(bad.sum()), len(points))

    sampler = qmc.Halton(d=system.dim, scramble=True, seed=np.random.default_rng([seed, 0xC0FE]))
    grid = qmc.scale(sampler.random(coverage_samples), system.domain_lo, system.domain_hi)
    holes = [x.tolist() for x in grid if model._match(x) is None]
    return ValidationReport(regions=results, coverage_holes=holes, tolerance=tolerance)


# ---------------------------------------------------------------------------
# 모델 생성
# ---------------------------------------------------------------------------

def build_pwa_model(system: NonlinearSystem, partition: PartitionSpec, samples_per_region: int = 256,
                    seed: int = 0, submodels: Optional[Sequence[AffineSubmodel]] = None,
                    bounds: Optional[ErrorBounds] = None) -> PwaModel:
    """
    파티션의 각 동작점에서 선형화 (또는 주어진 부분모델 사용) 후 오차 한계 추정.
    bounds 가 주어지면 추정을 건너뛴다.
    """
    regions = partition.regions()
    if submodels is None:
        submodels = [linearize(system, p, origin=(i == 0)) for i, p in enumerate(partition.operating_points())]
    model = PwaModel(system=system, regions=regions, submodels=list(submodels))
    if bounds is None:
        bounds = estimate_error_bounds(system, model, samples_per_region, seed)
    return model.with_bounds(bounds)


def partition_of(model: PwaModel) -> PartitionSpec:
    """모델의 slab 과 동작점으로 파티션 복원 (공통 법선 필요)"""
    normal = model.regions[0].theta
    if any(not np.allclose(r.theta, normal) for r in model.regions):
        raise InvalidSlab("regions do not share a common premise normal")
    slabs = [
        SlabSpec(r.beta1, r.beta2, tuple(sub.operating_point.tolist()))
        for r, sub in zip(model.regions, model.submodels)
    ]
    return PartitionSpec(normal=normal.copy(), slabs=slabs)
