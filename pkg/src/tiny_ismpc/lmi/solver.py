"""
Barrier Interior-Point Feasibility Solver
=========================================
최대 마진 재정식화:

    minimize t  s.t.  G_k(y) ≺ t·I  (모든 제약 블록 k),  ‖y‖ < R

negative_definite 제약은 G = E, positive_definite 제약은 G = -E, positive 변수는
G = -V (스칼라는 -s). 로그-행렬식 배리어와 Newton 스텝, 백트래킹 선탐색을 쓴다.
t* < 0 이면 엄격하게 실현 가능. R 은 동차 LMI 의 스케일을 고정한다.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..config import SolverOptions
from ..errors import ConditioningError, ShapeError
from .expr import VariableKind
from .problem import (
    FeasibilityProblem,
    FeasibilitySolution,
    FeasibilityStatus,
    Sense,
    check_residuals,
)

logger = logging.getLogger(__name__)

MAX_PROBLEM_SIZE = 5000
CENTERING_STEPS = 50
CENTERING_TOL = 1e-10
ARMIJO = 0.25


@dataclass
class _Block:
    name: str
    G0: np.ndarray
    G: np.ndarray


def compile_blocks(problem: FeasibilityProblem) -> List[_Block]:
    """각 제약과 positive 변수를 G_k(y) = G0 + Σ y_a G_a 형태로 변환"""
    layout = problem.layout()
    size = problem.size
    blocks = []
    for c in problem.constraints:
        F0, F = c.expr.linear_parts(layout, size)
        sign = 1.0 if c.sense == Sense.NEGATIVE_DEFINITE else -1.0
        blocks.append(_Block(c.name, sign * F0, sign * F))

    for name, (offset, var) in layout.items():
        if not var.positive:
            continue
        k = var.rows
        G = np.zeros((size, k, k))
        if var.kind == VariableKind.SCALAR:
            G[offset, 0, 0] = -1.0
        else:
            for a, B in enumerate(var.basis()):
                G[offset + a] = -B
        blocks.append(_Block(f"{name} > 0", np.zeros((k, k)), G))
    return blocks


class BarrierSolver:
    def __init__(self, problem: FeasibilityProblem, options: Optional[SolverOptions] = None):
        if not problem.constraints:
            raise ShapeError("problem needs at least one constraint")
        if problem.size > MAX_PROBLEM_SIZE:
            raise ShapeError(f"problem has {problem.size} scalar unknowns, limit is {MAX_PROBLEM_SIZE}")
        self.problem = problem
        self.options = options or SolverOptions()
        self.blocks = compile_blocks(problem)
        self.size = problem.size
        self.nu = sum(b.G0.shape[0] for b in self.blocks) + 1
        self.radius = self.options.radius

    # --- 배리어 ---

    def _operator(self, block: _Block, y: np.ndarray) -> np.ndarray:
        if self.size == 0:
            return block.G0
        return block.G0 + np.tensordot(y, block.G, axes=1)

    def max_eigenvalue(self, y: np.ndarray) -> float:
        return max(float(np.linalg.eigvalsh(self._operator(b, y))[-1]) for b in self.blocks)

    def _factors(self, y: np.ndarray, t: float) -> Optional[List[np.ndarray]]:
        factors = []
        for b in self.blocks:
            S = t * np.eye(b.G0.shape[0]) - self._operator(b, y)
            try:
                factors.append(linalg.cholesky(S, lower=True))
            except linalg.LinAlgError:
                return None
        return factors

    def value(self, y: np.ndarray, t: float, tau: float) -> float:
        q = self.radius ** 2 - float(y @ y)
        if q <= 0.0:
            return np.inf
        factors = self._factors(y, t)
        if factors is None:
            return np.inf
        logdet = sum(2.0 * float(np.sum(np.log(np.diag(L)))) for L in factors)
        return tau * t - logdet - np.log(q)

    def derivatives(self, y: np.ndarray, t: float, tau: float) -> Tuple[np.ndarray, np.ndarray]:
        d = self.size
        g = np.zeros(d + 1)
        H = np.zeros((d + 1, d + 1))
        for b in self.blocks:
            k = b.G0.shape[0]
            S = t * np.eye(k) - self._operator(b, y)
            Z = linalg.cho_solve(linalg.cho_factor(S, lower=True), np.eye(k))
            Z = 0.5 * (Z + Z.T)
            ZZ = Z @ Z
            if d:
                ZG = np.einsum("ij,ajk->aik", Z, b.G)
                g[:d] += np.einsum("aii->a", ZG)
                H[:d, :d] += np.einsum("aij,bji->ab", ZG, ZG)
                cross = -np.einsum("aij,ji->a", b.G, ZZ)
                H[:d, d] += cross
                H[d, :d] += cross
            g[d] -= np.trace(Z)
            H[d, d] += float(np.sum(Z * Z))

        q = self.radius ** 2 - float(y @ y)
        g[:d] += 2.0 * y / q
        H[:d, :d] += 2.0 * np.eye(d) / q + 4.0 * np.outer(y, y) / q ** 2
        g[d] += tau
        return g, H

    @staticmethod
    def newton_direction(g: np.ndarray, H: np.ndarray) -> np.ndarray:
        """Jacobi 스케일링 후 Cholesky. 실패하면 정규화해서 재시도"""
        scale = 1.0 / np.sqrt(np.maximum(np.diag(H), 1e-300))
        Hs = H * np.outer(scale, scale)
        gs = g * scale
        eye = np.eye(len(g))
        for reg in (0.0, 1e-12, 1e-9, 1e-6):
            try:
                factor = linalg.cho_factor(Hs + reg * eye, lower=True)
            except linalg.LinAlgError:
                continue
            step = -linalg.cho_solve(factor, gs) * scale
            if np.all(np.isfinite(step)):
                if reg:
                    logger.debug("Newton system regularized with %.0e", reg)
                return step
        raise ConditioningError("Newton system is numerically singular")

    # --- 풀이 ---

    def initial_point(self) -> Tuple[np.ndarray, float]:
        y0 = self.problem.pack(self.problem.initial_assignment())
        self.radius = max(self.options.radius, 10.0 * (float(np.linalg.norm(y0)) + 1.0))
        t0 = self.max_eigenvalue(y0) + 1.0
        return y0, t0

    def solve(self) -> FeasibilitySolution:
        opts = self.options
        y, t = self.initial_point()
        tau = self.nu / (abs(t) + 1.0)
        d = self.size

        steps = 0
        best_t = t
        stall = 0
        outer = 0
        verdict: Optional[FeasibilityStatus] = None
        lower_bound = -np.inf

        while verdict is None:
            centered = False
            for _ in range(CENTERING_STEPS):
                if steps >= opts.max_iter:
                    verdict = FeasibilityStatus.MAX_ITERATIONS
                    break
                g, H = self.derivatives(y, t, tau)
                dz = self.newton_direction(g, H)
                slope = float(g @ dz)
                if -slope / 2.0 <= CENTERING_TOL:
                    centered = True
                    break

                f0 = self.value(y, t, tau)
                alpha = 1.0
                accepted = False
                while alpha > 1e-14:
                    y_new, t_new = y + alpha * dz[:d], t + alpha * dz[d]
                    if self.value(y_new, t_new, tau) <= f0 + ARMIJO * alpha * slope:
                        accepted = True
                        break
                    alpha *= 0.5
                if not accepted:
                    centered = True
                    break
                y, t = y_new, t_new
                steps += 1

                if t < best_t - 1e-12 * max(1.0, abs(best_t)):
                    best_t = t
                    stall = 0
                elif outer > 0 and t > -opts.tol:
                    stall += 1
                    if stall >= opts.stall_steps:
                        logger.debug("t stalled at %.3e for %d steps", t, stall)
                        verdict = FeasibilityStatus.INFEASIBLE
                        break

            if verdict is not None:
                break

            gap = self.nu / tau
            lower_bound = t - gap
            logger.debug("outer %d: tau=%.3e t=%.6e gap=%.3e steps=%d", outer, tau, t, gap, steps)
            if centered and lower_bound >= -opts.tol:
                verdict = FeasibilityStatus.INFEASIBLE
            elif gap <= max(opts.tol, opts.rel_gap * abs(t)) and t <= -opts.tol:
                verdict = FeasibilityStatus.FEASIBLE
            elif gap <= 1e-14 * max(1.0, abs(t)):
                verdict = FeasibilityStatus.INFEASIBLE if t > -opts.tol else FeasibilityStatus.FEASIBLE
            else:
                tau *= opts.growth
                outer += 1

        assignment = self.problem.unpack(y)
        report = check_residuals(self.problem, assignment)
        status = verdict
        if status == FeasibilityStatus.FEASIBLE and not (t <= -opts.tol and report.passed):
            status = FeasibilityStatus.INFEASIBLE
        if status == FeasibilityStatus.MAX_ITERATIONS:
            logger.warning("solver hit max_iter=%d (t=%.3e)", opts.max_iter, t)

        return FeasibilitySolution(
            assignment=assignment,
            margin=report.margin,
            iterations=steps,
            status=status,
            lower_bound=float(lower_bound),
            t=float(t),
        )


def solve_feasibility(problem: FeasibilityProblem, options: Optional[SolverOptions] = None) -> FeasibilitySolution:
    """
    엄격한 LMI 실현 가능성 판정.

    Feasible: t ≤ -tol 이고 잔차 검사 통과. Infeasible: 하한 t - ν/τ ≥ -tol 또는 t 정체.
    """
    solution = BarrierSolver(problem, options).solve()
    logger.info("%s: %s after %d steps (margin %.3e)", problem.name, solution.status.value,
                solution.iterations, solution.margin)
    return solution
