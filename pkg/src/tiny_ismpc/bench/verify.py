"""
Design Verification
===================
저장된 제어기를 모델에 대해 다시 검사한다.

- 공칭 이득 LMI 와 슬라이딩 면 LMI 잔차 (인증서 W, P 가 있을 때)
- S_u 정칙성 (인증서가 있으면 양정치)
- β_0 = 0, β_j = ε_g‖S_x‖
- K̄_j W = Y_j 재구성 오차
- 공칭 폐루프 궤적에서 x̄ᵀW⁻¹x̄ 감소
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..config import SimConfig
from ..lmi import FeasibilitySolution, FeasibilityStatus, ResidualReport, check_residuals
from ..lmi.io import problem_to_document, solution_to_document
from ..palm import PwaModel
from ..palm.io import write_document
from ..parallel_runner import ParallelRunner
from ..synthesis import ControllerDesign, assemble_nominal_lmis, assemble_surface_lmis, reaching_offsets
from ..sim import nominal_step, simulate_nominal

logger = logging.getLogger(__name__)

BETA_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
DESCENT_TOL = 1e-9
DESCENT_STEPS = 2000


@dataclass
class DescentRun:
    index: int
    xbar0: List[float]
    worst_increase: float
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.worst_increase <= 0.0


@dataclass
class VerificationReport:
    certified: bool
    nominal: Optional[ResidualReport]
    surface: Optional[ResidualReport]
    su_min_singular: float
    su_positive: Optional[bool]
    beta_error: float
    reconstruction_error: float
    descent: List[DescentRun] = field(default_factory=list)
    model_mismatch: List[str] = field(default_factory=list)

    @property
    def su_ok(self) -> bool:
        return self.su_min_singular > 0.0 and self.su_positive is not False

    @property
    def beta_ok(self) -> bool:
        return self.beta_error <= BETA_TOL

    @property
    def reconstruction_ok(self) -> bool:
        return self.reconstruction_error <= RECONSTRUCTION_TOL

    @property
    def descent_failures(self) -> List[int]:
        return [r.index for r in self.descent if not r.passed]

    @property
    def passed(self) -> bool:
        residuals_ok = all(r is None or r.passed for r in (self.nominal, self.surface))
        return (residuals_ok and self.su_ok and self.beta_ok and self.reconstruction_ok
                and not self.descent_failures and not self.model_mismatch)

    def checks(self) -> List[tuple]:
        """(이름, 통과 여부 또는 None, 설명)"""
        return [
            ("nominal LMIs", None if self.nominal is None else self.nominal.passed,
             "no certificate" if self.nominal is None else f"margin {self.nominal.margin:.3e}"),
            ("surface LMIs", None if self.surface is None else self.surface.passed,
             "no certificate" if self.surface is None else f"margin {self.surface.margin:.3e}"),
            ("S_u nonsingular", self.su_ok, f"sigma_min {self.su_min_singular:.3e}"),
            ("beta definitions", self.beta_ok, f"error {self.beta_error:.3e}"),
            ("gain reconstruction", self.reconstruction_ok, f"error {self.reconstruction_error:.3e}"),
            ("nominal descent", None if not self.descent else not self.descent_failures,
             f"{len(self.descent) - len(self.descent_failures)}/{len(self.descent)} runs"),
            ("model match", not self.model_mismatch, "; ".join(self.model_mismatch) or "ok"),
        ]


def _compare_models(design: ControllerDesign, model: PwaModel) -> List[str]:
    issues = []
    if design.model.l != model.l:
        issues.append(f"controller has {design.model.l + 1} regions, model has {model.l + 1}")
        return issues
    for a, b in zip(design.model.regions, model.regions):
        if not (np.allclose(a.theta, b.theta) and np.isclose(a.beta1, b.beta1) and np.isclose(a.beta2, b.beta2)):
            issues.append(f"region {a.index} slab differs")
    for i, (a, b) in enumerate(zip(design.model.submodels, model.submodels)):
        if not (np.allclose(a.Abar, b.Abar) and np.allclose(a.C, b.C)):
            issues.append(f"submodel {i} differs")
    return issues


def nominal_assignment(design: ControllerDesign) -> dict:
    nominal = design.nominal
    out = {"W": nominal.W}
    out.update({f"Y{j}": Y for j, Y in enumerate(nominal.Y)})
    out.update({f"lambda{i}": lam for i, lam in enumerate(nominal.lam, start=1)})
    return out


def surface_assignment(design: ControllerDesign) -> dict:
    surface = design.surface
    out = {"P": surface.P, "eta0": surface.eta0}
    for i, (e1, e2, e3) in enumerate(surface.eta, start=1):
        out.update({f"eta{i}_1": e1, f"eta{i}_2": e2, f"eta{i}_3": e3})
    return out


def worst_increase(V: np.ndarray, tol: float = DESCENT_TOL) -> float:
    """연속 샘플 사이 V 증가량 중 tol 을 넘는 최대값 (절대 허용치, 없으면 0)"""
    V = np.asarray(V, dtype=float)
    if V.size < 2:
        return 0.0
    return max(float(np.max(np.diff(V))) - tol, 0.0)


def _descent_run(model: PwaModel, design: ControllerDesign, W_inv: np.ndarray, config: SimConfig,
                 index: int, xbar0: np.ndarray) -> DescentRun:
    traj = simulate_nominal(model, design, config, xbar0, lyapunov=W_inv)
    return DescentRun(index=index, xbar0=xbar0.tolist(), worst_increase=worst_increase(traj.V))


def verify_design(design: ControllerDesign, model: Optional[PwaModel] = None, runs: int = 20, seed: int = 0,
                  workers: int = 1, dump: Optional[Path] = None) -> VerificationReport:
    """
    Args:
        design: 검사할 제어기
        model: 비교 대상 모델 (없으면 설계에 포함된 모델)
        runs: 공칭 감소 검사 궤적 수
        seed: 초기 상태 샘플링 시드
        workers: 병렬 시뮬레이션 수
        dump: 주어지면 LMI 문제/해 문서를 이 디렉토리에 기록
    """
    model = model or design.model
    mismatch = _compare_models(design, model)

    nominal_report = surface_report = None
    if design.certified:
        nominal_problem = assemble_nominal_lmis(model.with_bounds(design.bounds), design.D[1:],
                                                design.nominal.decay_rate)
        surface_problem = assemble_surface_lmis(model.with_bounds(design.bounds), design.nominal)
        nominal_report = check_residuals(nominal_problem, nominal_assignment(design))
        surface_report = check_residuals(surface_problem, surface_assignment(design))
        if dump is not None:
            _dump(Path(dump), nominal_problem, nominal_report, nominal_assignment(design))
            _dump(Path(dump), surface_problem, surface_report, surface_assignment(design))

    S_u = np.asarray(design.S_u, dtype=float)
    su_min = float(np.linalg.svd(S_u, compute_uv=False)[-1])
    su_positive = None
    if design.certified:
        su_positive = bool(np.linalg.eigvalsh(0.5 * (S_u + S_u.T))[0] > 0.0)

    expected = reaching_offsets(design.bounds, design.S_x, design.l)
    beta_error = float(np.max(np.abs(np.asarray(design.beta) - np.asarray(expected)))) \
        if len(design.beta) == len(expected) else float("inf")

    descent: List[DescentRun] = []
    if design.nominal.W is not None and runs > 0:
        W_inv = np.linalg.inv(design.nominal.W)
        h = nominal_step(design)
        config = SimConfig(h=h, T=DESCENT_STEPS * h)
        rng = np.random.default_rng(seed)
        system = model.system
        starts = rng.uniform(system.domain_lo, system.domain_hi, size=(runs, system.dim))
        tasks = [{"id": f"run{k}", "index": k, "xbar0": starts[k]} for k in range(runs)]
        results = ParallelRunner(max_workers=workers).run_ordered(
            tasks, lambda task: _descent_run(model, design, W_inv, config, task["index"], task["xbar0"]))
        for task, res in zip(tasks, results):
            if res.success:
                descent.append(res.result)
            else:
                descent.append(DescentRun(task["index"], task["xbar0"].tolist(), float("inf"), res.error))

    report = VerificationReport(
        certified=design.certified,
        nominal=nominal_report,
        surface=surface_report,
        su_min_singular=su_min,
        su_positive=su_positive,
        beta_error=beta_error,
        reconstruction_error=design.nominal.reconstruction_error(),
        descent=descent,
        model_mismatch=mismatch,
    )
    logger.info("verification %s", "passed" if report.passed else "failed")
    return report


def _dump(directory: Path, problem, report: ResidualReport, assignment: dict) -> None:
    status = FeasibilityStatus.FEASIBLE if report.passed else FeasibilityStatus.INFEASIBLE
    solution = FeasibilitySolution(assignment=assignment, margin=report.margin, iterations=0, status=status)
    write_document(problem_to_document(problem), directory / f"{problem.name}_problem.json")
    write_document(solution_to_document(solution), directory / f"{problem.name}_solution.json")
