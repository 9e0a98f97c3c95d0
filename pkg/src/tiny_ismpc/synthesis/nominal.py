"""
Nominal Closed-Loop Design
==========================
공칭 폐루프 x̄̇ = (R₁Ā_i + R₂K̄_i) x̄ + C̄_i 의 이득 설계 LMI 와 오프셋 D_i 격자 탐색.

원점 영역:   R₁Ā₀W + R₂Y₀ + (·)ᵀ + 2αW ≺ 0
영역 i ≥ 1: [[Ω_i + 2αW - λ_i C̄_iC̄_iᵀ, WQ_iᵀ - λ_i C̄_i f_i], [⋆, λ_i(1 - f_i²)]] ≺ 0
K̄_j = Y_j W⁻¹. 감쇠율 α ≥ 0 (기본 0) 은 공칭 폐루프가 V = x̄ᵀW⁻¹x̄ 를 e^{-2αt} 이상 빠르게 줄이도록 한다.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..config import GridSpec, SolverOptions
from ..errors import NoFeasibleOffsets, ShapeError
from ..lmi import DecisionVariable, FeasibilityProblem, FeasibilitySolution, MatrixExpr, solve_feasibility
from ..palm import PwaModel
from ..parallel_runner import ParallelRunner

logger = logging.getLogger(__name__)


def selectors(n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """R₁ = [I_n; 0], R₂ = [0; I_m]"""
    R1 = np.vstack([np.eye(n), np.zeros((m, n))])
    R2 = np.vstack([np.zeros((n, m)), np.eye(m)])
    return R1, R2


def closed_loop_matrix(model: PwaModel, K: np.ndarray, index: int) -> np.ndarray:
    """R₁Ā_i + R₂K̄_i"""
    R1, R2 = selectors(model.n, model.m)
    return R1 @ model.submodels[index].Abar + R2 @ np.asarray(K, dtype=float)


@dataclass
class NominalDesign:
    W: np.ndarray
    Y: List[np.ndarray]
    lam: List[float]
    K: List[np.ndarray]
    D: List[np.ndarray]
    solution: Optional[FeasibilitySolution] = None
    candidates_tried: int = 0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.D and np.any(self.D[0] != 0.0):
            raise ShapeError("D_0 must be zero")

    @property
    def l(self) -> int:
        return len(self.K) - 1

    def F(self, index: int) -> np.ndarray:
        n = self.K[index].shape[1] - self.K[index].shape[0]
        return self.K[index][:, :n]

    def G(self, index: int) -> np.ndarray:
        n = self.K[index].shape[1] - self.K[index].shape[0]
        return self.K[index][:, n:]

    def reconstruction_error(self) -> float:
        """max_j ‖K̄_j W - Y_j‖ (인증서가 없으면 0)"""
        if self.W is None or not self.Y:
            return 0.0
        return max(float(np.linalg.norm(K @ self.W - Y)) for K, Y in zip(self.K, self.Y))


# ---------------------------------------------------------------------------
# LMI 조립
# ---------------------------------------------------------------------------

def _check_offsets(model: PwaModel, D: Sequence) -> List[np.ndarray]:
    if len(D) != model.l:
        raise ShapeError(f"expected {model.l} offsets (regions 1..l), got {len(D)}")
    out = []
    for i, d in enumerate(D, start=1):
        arr = np.asarray(d, dtype=float).reshape(-1)
        if arr.shape != (model.m,):
            raise ShapeError(f"offset D_{i} has length {arr.size}, expected {model.m}")
        out.append(arr)
    return out


def assemble_nominal_lmis(model: PwaModel, D: Sequence, decay_rate: float = 0.0) -> FeasibilityProblem:
    """
    공칭 이득 LMI 조립.

    Args:
        model: PWA 모델
        D: 영역 1..l 의 오프셋 (각 m-벡터)
        decay_rate: 모든 블록의 (0,0) 에 더하는 2αW 의 α

    Returns:
        변수 W (PD), Y_0..Y_l, λ_1..λ_l (> 0) 의 FeasibilityProblem
    """
    offsets = _check_offsets(model, D)
    if decay_rate < 0.0:
        raise ValueError(f"decay rate must be non-negative, got {decay_rate}")
    n, m, N = model.n, model.m, model.n + model.m
    R1, R2 = selectors(n, m)

    W = DecisionVariable.symmetric("W", N)
    Y = [DecisionVariable.rectangular(f"Y{j}", m, N) for j in range(model.l + 1)]
    lam = [DecisionVariable.scalar(f"lambda{i}") for i in range(1, model.l + 1)]
    problem = FeasibilityProblem(variables=[W, *Y, *lam], name="nominal")

    origin = MatrixExpr([N])
    origin.add_term(0, 0, W, left=R1 @ model.submodels[0].Abar, symmetric=True)
    origin.add_term(0, 0, Y[0], left=R2, symmetric=True)
    if decay_rate > 0.0:
        origin.add_term(0, 0, W, left=decay_rate * np.eye(N), symmetric=True)
    problem.add(origin, name="origin")

    for i in range(1, model.l + 1):
        region = model.regions[i]
        Cbar = model.C_bar(i, offsets[i - 1]).reshape(N, 1)
        Q = region.Q.reshape(1, N)
        f = region.f

        expr = MatrixExpr([N, 1])
        expr.add_term(0, 0, W, left=R1 @ model.submodels[i].Abar, symmetric=True)
        expr.add_term(0, 0, Y[i], left=R2, symmetric=True)
        if decay_rate > 0.0:
            expr.add_term(0, 0, W, left=decay_rate * np.eye(N), symmetric=True)
        expr.add_term(0, 0, lam[i - 1], left=-Cbar @ Cbar.T)
        expr.add_term(0, 1, W, right=Q.T)
        expr.add_term(0, 1, lam[i - 1], left=-f * Cbar)
        expr.add_term(1, 1, lam[i - 1], left=[[1.0 - f * f]])
        problem.add(expr, name=f"region{i}")
    return problem


def extract_nominal(model: PwaModel, D: Sequence, solution: FeasibilitySolution,
                    decay_rate: float = 0.0) -> NominalDesign:
    """해에서 W 를 ‖W‖₂ = 1 로 정규화 (동차) 하고 K̄_j = Y_j W⁻¹"""
    a = solution.assignment
    W = np.asarray(a["W"], dtype=float)
    scale = float(np.linalg.norm(W, 2))
    W = W / scale
    Y = [np.asarray(a[f"Y{j}"], dtype=float) / scale for j in range(model.l + 1)]
    lam = [float(a[f"lambda{i}"]) / scale for i in range(1, model.l + 1)]
    K = [linalg.solve(W, Yj.T, assume_a="sym").T for Yj in Y]
    offsets = [np.zeros(model.m)] + _check_offsets(model, D)
    return NominalDesign(W=W, Y=Y, lam=lam, K=K, D=offsets, solution=solution, decay_rate=decay_rate)


def solve_nominal(model: PwaModel, D: Sequence, options: Optional[SolverOptions] = None,
                  decay_rate: float = 0.0) -> Tuple[Optional[NominalDesign], FeasibilitySolution]:
    solution = solve_feasibility(assemble_nominal_lmis(model, D, decay_rate), options)
    if not solution.feasible:
        return None, solution
    return extract_nominal(model, D, solution, decay_rate), solution


# ---------------------------------------------------------------------------
# 오프셋 격자
# ---------------------------------------------------------------------------

def van_der_corput(k: int, base: int = 2) -> float:
    value, denom = 0.0, 1.0
    while k:
        k, digit = divmod(k, base)
        denom *= base
        value += digit / denom
    return value


def axis_order(points: int) -> List[int]:
    """
    한 축의 격자 인덱스 방문 순서: 중앙, 양 끝, 이후 van der Corput 채우기.
    예: 5 → [2, 0, 4, 1, 3]
    """
    if points == 1:
        return [0]
    order = [int(round(0.5 * (points - 1)))]
    for end in (0, points - 1):
        if end not in order:
            order.append(end)
    k = 1
    while len(order) < points:
        idx = int(round(van_der_corput(k) * (points - 1)))
        if idx not in order:
            order.append(idx)
        k += 1
        if k > 64 * points:
            order.extend(i for i in range(points) if i not in order)
    return order


def _tuples_with(axes: int, top: int, total: int) -> Iterator[Tuple[int, ...]]:
    """각 성분 ≤ top, 최소 하나는 = top, 합 = total 인 튜플을 사전순으로"""

    def rec(prefix: List[int], remaining: int, used_top: bool):
        slots = axes - len(prefix)
        if slots == 0:
            if remaining == 0 and used_top:
                yield tuple(prefix)
            return
        for v in range(0, min(top, remaining) + 1):
            rest = remaining - v
            now_top = used_top or v == top
            if rest > top * (slots - 1):
                continue
            if not now_top and (slots - 1 == 0 or rest < top):
                continue
            prefix.append(v)
            yield from rec(prefix, rest, now_top)
            prefix.pop()

    yield from rec([], total, False)


def rank_tuples(axes: int, points: int) -> Iterator[Tuple[int, ...]]:
    """(최대 rank, rank 합, 사전순) 순서로 모든 rank 튜플"""
    if axes == 0:
        yield ()
        return
    for top in range(points):
        for total in range(top, top * axes + 1):
            yield from _tuples_with(axes, top, total)


@dataclass
class OffsetGrid:
    """
    D = [D_1, ..., D_l] 후보 생성기.

    symmetric_pairs 의 (i, j) 는 D_j = -D_i 로 묶여 i 만 자유 축이 된다.
    """

    model: PwaModel
    spec: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        l, m = self.model.l, self.model.m
        for i, j in self.spec.symmetric_pairs:
            if max(i, j) > l:
                raise ShapeError(f"symmetric pair ({i}, {j}) refers past region {l}")
        self.mirrors: Dict[int, int] = {j: i for i, j in self.spec.symmetric_pairs}
        self.free_regions = [i for i in range(1, l + 1) if i not in self.mirrors]
        ranges = self.spec.ranges
        if ranges is None:
            ranges = [default_range(self.model)] * (len(self.free_regions) * m)
        elif len(ranges) == 1:
            ranges = list(ranges) * (len(self.free_regions) * m)
        elif len(ranges) == len(self.free_regions):
            ranges = [r for r in ranges for _ in range(m)]
        if len(ranges) != len(self.free_regions) * m:
            raise ShapeError(
                f"grid has {len(ranges)} ranges, need one per free offset "
                f"({len(self.free_regions)}) or per component ({len(self.free_regions) * m})"
            )
        self.ranges = [tuple(map(float, r)) for r in ranges]
        if self.spec.fixed is not None and len(self.spec.fixed) != l:
            raise ShapeError(f"fixed offsets list has {len(self.spec.fixed)} entries, expected {l}")

    @property
    def axes(self) -> int:
        return len(self.ranges)

    def expand(self, values: Sequence[float]) -> List[np.ndarray]:
        """자유 축 값 → D_1..D_l"""
        m = self.model.m
        D: Dict[int, np.ndarray] = {}
        for k, i in enumerate(self.free_regions):
            D[i] = np.asarray(values[k * m:(k + 1) * m], dtype=float)
        for j, i in self.mirrors.items():
            D[j] = -D[i]
        return [D[i] for i in range(1, self.model.l + 1)]

    def candidates(self, points: int) -> Iterator[List[np.ndarray]]:
        if self.spec.fixed is not None:
            yield [np.asarray(d, dtype=float) for d in self.spec.fixed]
            return
        order = axis_order(points)
        for ranks in rank_tuples(self.axes, points):
            values = []
            for (lo, hi), r in zip(self.ranges, ranks):
                idx = order[r]
                values.append(0.5 * (lo + hi) if points == 1 else lo + (hi - lo) * idx / (points - 1))
            yield self.expand(values)


def default_range(model: PwaModel) -> Tuple[float, float]:
    """[-2·max‖C_i‖, 2·max‖C_i‖], C 가 모두 0 이면 [-1, 1]"""
    scale = 2.0 * max(float(np.linalg.norm(s.C)) for s in model.submodels)
    return (-scale, scale) if scale > 0.0 else (-1.0, 1.0)


def _key(D: Sequence[np.ndarray]) -> Tuple[float, ...]:
    return tuple(round(float(v), 12) for d in D for v in np.ravel(d))


def sample_offsets(model: PwaModel, grid: Optional[GridSpec] = None, solver: Optional[SolverOptions] = None,
                   workers: int = 1, decay_rate: float = 0.0, deadline: Optional[float] = None) -> NominalDesign:
    """
    격자점을 정해진 순서로 돌며 공칭 LMI 를 푼다. 첫 실현 가능 해를 반환.

    같은 수준에서 찾지 못하면 축당 점 수를 p → 2p - 1 로 늘린다 (max_refinements 회).
    병렬로 풀어도 순서상 먼저인 실현 가능 후보가 이긴다.
    deadline (time.monotonic 기준) 이 지나면 남은 후보를 버리고 NoFeasibleOffsets.
    """
    grid = grid or GridSpec()
    offset_grid = OffsetGrid(model, grid)
    runner = ParallelRunner(max_workers=workers)
    tried = set()
    total = 0
    points = grid.points_per_axis

    levels = 1 if (grid.fixed is not None or offset_grid.axes == 0) else grid.max_refinements + 1
    for level in range(levels):
        batch: List[List[np.ndarray]] = []
        for D in offset_grid.candidates(points):
            key = _key(D)
            if key in tried:
                continue
            tried.add(key)
            batch.append(D)
            if len(batch) >= grid.max_points:
                break
        logger.info("offset grid level %d: %d points per axis, %d new candidates", level, points, len(batch))

        step = max(1, runner.max_workers)
        for start in range(0, len(batch), step):
            if deadline is not None and time.monotonic() > deadline:
                raise NoFeasibleOffsets(f"time budget reached after {total} candidates")
            chunk = batch[start:start + step]
            tasks = [{"id": f"D{start + k}", "D": D} for k, D in enumerate(chunk)]
            results = runner.run_ordered(tasks, lambda task: solve_nominal(model, task["D"], solver, decay_rate))
            for k, res in enumerate(results):
                total += 1
                if not res.success:
                    logger.debug("candidate %s raised: %s", tasks[k]["id"], res.error)
                    continue
                design, solution = res.result
                if design is not None:
                    design.candidates_tried = total
                    logger.info("feasible offsets %s after %d candidates",
                                [d.tolist() for d in design.D[1:]], total)
                    return design
        points = 2 * points - 1

    raise NoFeasibleOffsets(f"no feasible offsets among {total} candidates (decay rate {decay_rate:g})")
