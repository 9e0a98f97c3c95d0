"""
Sliding Surface Design
======================
슬라이딩 운동 안정성 LMI 를 (P, η) 에 대해 풀고 S̄ = R₂ᵀP 를 얻는다.

원점 영역 (블록 [N, n, m]):
    [[Λ₀ + η₀ε_f0²I, PR₁, PR₂], [⋆, R₁ᵀPR₁ - η₀I, 0], [⋆, ⋆, -R₂ᵀPR₂]] ≺ 0
영역 i ≥ 1 (블록 [N, n, n, 1, m]):
    (0,0) Λ_i + η_i1ε_f²I - η_i3Q_iᵀQ_i, (0,1) PR₁, (0,2) PR₁, (0,3) PC̄_i - η_i3Q_iᵀf_i, (0,4) PR₂
    (1,1) R₁ᵀPR₁ - η_i1I, (2,2) R₁ᵀPR₁ - η_i2I, (3,3) η_i2ε_g² - η_i3(f_i² - 1), (4,4) -½R₂ᵀPR₂
Λ_i = P(R₁Ā_i + R₂K̄_i) + (·)ᵀP.

Px̄ = R₁w (w ⊥ range B₀) 방향에서는 K̄₀ 가 사라지므로 원점 블록은
ε_f0 < min ‖A₀ᵀw‖/‖w‖ 일 때만 성립할 수 있다 (origin_bound_ceiling).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..config import SolverOptions
from ..errors import ShapeError
from ..lmi import DecisionVariable, FeasibilityProblem, FeasibilitySolution, MatrixExpr, solve_feasibility
from ..palm import PwaModel
from .nominal import NominalDesign, closed_loop_matrix, selectors

logger = logging.getLogger(__name__)


@dataclass
class SurfaceDesign:
    P: Optional[np.ndarray]
    S_bar: np.ndarray
    eta0: float = 0.0
    eta: List[Tuple[float, float, float]] = field(default_factory=list)
    solution: Optional[FeasibilitySolution] = None

    def __post_init__(self):
        self.S_bar = np.atleast_2d(np.asarray(self.S_bar, dtype=float))
        m, N = self.S_bar.shape
        if N <= m:
            raise ShapeError(f"surface matrix must be m×(n+m), got {self.S_bar.shape}")

    @property
    def m(self) -> int:
        return self.S_bar.shape[0]

    @property
    def n(self) -> int:
        return self.S_bar.shape[1] - self.m

    @property
    def S_x(self) -> np.ndarray:
        return self.S_bar[:, : self.n]

    @property
    def S_u(self) -> np.ndarray:
        return self.S_bar[:, self.n:]


def assemble_surface_lmis(model: PwaModel, nominal: NominalDesign) -> FeasibilityProblem:
    """
    슬라이딩 면 LMI 조립.

    Args:
        model: 오차 한계가 설정된 PWA 모델
        nominal: 이득 K̄_j 와 오프셋 D_i

    Returns:
        변수 P (PD), η0, η_i1, η_i2, η_i3 (> 0) 의 FeasibilityProblem
    """
    n, m, N = model.n, model.m, model.n + model.m
    if len(nominal.K) != model.l + 1 or len(nominal.D) != model.l + 1:
        raise ShapeError(f"nominal design has {len(nominal.K)} gains and {len(nominal.D)} offsets, "
                         f"model has {model.l + 1} regions")
    for j, K in enumerate(nominal.K):
        if np.shape(K) != (m, N):
            raise ShapeError(f"gain K_{j} has shape {np.shape(K)}, expected ({m}, {N})")

    R1, R2 = selectors(n, m)
    bounds = model.bounds

    P = DecisionVariable.symmetric("P", N)
    eta0 = DecisionVariable.scalar("eta0")
    etas = [
        (DecisionVariable.scalar(f"eta{i}_1"), DecisionVariable.scalar(f"eta{i}_2"), DecisionVariable.scalar(f"eta{i}_3"))
        for i in range(1, model.l + 1)
    ]
    problem = FeasibilityProblem(variables=[P, eta0, *[e for trio in etas for e in trio]], name="surface")

    origin = MatrixExpr([N, n, m])
    origin.add_term(0, 0, P, right=closed_loop_matrix(model, nominal.K[0], 0), symmetric=True)
    origin.add_term(0, 0, eta0, left=bounds.eps_f0 ** 2 * np.eye(N))
    origin.add_term(0, 1, P, right=R1)
    origin.add_term(0, 2, P, right=R2)
    origin.add_term(1, 1, P, left=R1.T, right=R1)
    origin.add_term(1, 1, eta0, left=-np.eye(n))
    origin.add_term(2, 2, P, left=-R2.T, right=R2)
    problem.add(origin, name="origin")

    for i in range(1, model.l + 1):
        region = model.regions[i]
        eta1, eta2, eta3 = etas[i - 1]
        Q = region.Q.reshape(1, N)
        f = region.f
        Cbar = model.C_bar(i, nominal.D[i]).reshape(N, 1)

        expr = MatrixExpr([N, n, n, 1, m])
        expr.add_term(0, 0, P, right=closed_loop_matrix(model, nominal.K[i], i), symmetric=True)
        expr.add_term(0, 0, eta1, left=bounds.eps_f ** 2 * np.eye(N))
        expr.add_term(0, 0, eta3, left=-Q.T @ Q)
        expr.add_term(0, 1, P, right=R1)
        expr.add_term(0, 2, P, right=R1)
        expr.add_term(0, 3, P, right=Cbar)
        expr.add_term(0, 3, eta3, left=-f * Q.T)
        expr.add_term(0, 4, P, right=R2)
        expr.add_term(1, 1, P, left=R1.T, right=R1)
        expr.add_term(1, 1, eta1, left=-np.eye(n))
        expr.add_term(2, 2, P, left=R1.T, right=R1)
        expr.add_term(2, 2, eta2, left=-np.eye(n))
        expr.add_term(3, 3, eta2, left=[[bounds.eps_g ** 2]])
        expr.add_term(3, 3, eta3, left=[[-(f * f - 1.0)]])
        expr.add_term(4, 4, P, left=-0.5 * R2.T, right=R2)
        problem.add(expr, name=f"region{i}")
    return problem


def extract_surface(model: PwaModel, solution: FeasibilitySolution) -> SurfaceDesign:
    """P 를 ‖P‖₂ = 1 로 정규화 (η 도 같은 배율) 후 S̄ = R₂ᵀP"""
    a = solution.assignment
    P = np.asarray(a["P"], dtype=float)
    scale = float(np.linalg.norm(P, 2))
    P = P / scale
    _, R2 = selectors(model.n, model.m)
    eta = [
        (float(a[f"eta{i}_1"]) / scale, float(a[f"eta{i}_2"]) / scale, float(a[f"eta{i}_3"]) / scale)
        for i in range(1, model.l + 1)
    ]
    return SurfaceDesign(P=P, S_bar=R2.T @ P, eta0=float(a["eta0"]) / scale, eta=eta, solution=solution)


def solve_surface(model: PwaModel, nominal: NominalDesign,
                  options: Optional[SolverOptions] = None) -> Tuple[Optional[SurfaceDesign], FeasibilitySolution]:
    solution = solve_feasibility(assemble_surface_lmis(model, nominal), options)
    if not solution.feasible:
        return None, solution
    surface = extract_surface(model, solution)
    logger.info("surface S_bar = %s (margin %.3e)", np.array2string(surface.S_bar, precision=4), solution.margin)
    return surface, solution


def origin_bound_ceiling(model: PwaModel) -> float:
    """
    원점 블록이 실현 가능하려면 필요한 ε_f0 의 상한.

    B₀ᵀw = 0 인 w 에 대해 x̄ = P⁻¹R₁w 를 넣으면 Λ₀ 에서 이득 항이 빠지고
    η₀ 항은 최소 2ε_f0‖x̄‖‖w‖ 이므로 ε_f0 < ‖A₀ᵀw‖/‖w‖ 가 필요하다.
    B₀ 의 행 공간이 전체면 상한이 없다 (inf).
    """
    sub = model.submodels[0]
    n = model.n
    A0, B0 = sub.Abar[:, :n], sub.Abar[:, n:]
    basis = linalg.null_space(B0.T)
    if basis.shape[1] == 0:
        return float("inf")
    return float(linalg.svdvals(A0.T @ basis)[-1])
