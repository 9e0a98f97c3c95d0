"""
Closed-Loop Simulation
======================
실제 폐루프 (플랜트 + 동적 제어기), 공칭 폐루프, 등가 제어 슬라이딩 운동의 고정 스텝 시뮬레이션.

영역 인덱스는 RK4 스테이지마다 다시 판정한다.
"""

import logging
from typing import Callable, Optional

import numpy as np

from ..config import SimConfig, UncertaintyPolicy
from ..errors import DivergenceError, EvaluationError
from ..palm import NonlinearSystem, PwaModel
from ..synthesis import ControllerDesign, selectors
from .controller import ControlLaw
from .integrate import RK4_STABILITY_LIMIT, rk4_step
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


class _Recorder:
    """stride 마다 샘플을 채운다"""

    def __init__(self, config: SimConfig, n: int, m: int, lyapunov: Optional[np.ndarray]):
        self.config = config
        self.lyapunov = None if lyapunov is None else np.asarray(lyapunov, dtype=float)
        self.trajectory = Trajectory.allocate(config.n_records, n, m, with_v=self.lyapunov is not None)
        self.count = 0

    def record(self, t: float, x, u, s, region: int, exited: bool) -> None:
        traj, k = self.trajectory, self.count
        traj.t[k] = t
        traj.x[k] = x
        traj.u[k] = u
        traj.s[k] = s
        traj.region[k] = region
        traj.domain_exit[k] = exited
        if traj.V is not None:
            xbar = np.concatenate([x, u])
            traj.V[k] = float(xbar @ self.lyapunov @ xbar)
        self.count += 1

    def partial(self) -> Trajectory:
        return self.trajectory.truncated(self.count)


def _integrate(rhs: Callable[[float, np.ndarray], np.ndarray], w0: np.ndarray, config: SimConfig,
               observe: Callable[[float, np.ndarray], None], recorder: _Recorder, label: str,
               before_step: Optional[Callable[[float, np.ndarray], None]] = None) -> Trajectory:
    h, stride = config.h, config.record_stride
    w = w0
    observe(0.0, w)
    for k in range(1, config.n_steps + 1):
        t = (k - 1) * h
        if before_step is not None:
            before_step(t, w)
        try:
            w = rk4_step(rhs, t, w, h)
        except EvaluationError as exc:
            raise DivergenceError(f"{label}: {exc} at t={t:.6g}", recorder.partial()) from exc
        if not np.all(np.isfinite(w)):
            raise DivergenceError(f"{label}: state became non-finite at t={k * h:.6g}", recorder.partial())
        if k % stride == 0:
            observe(k * h, w)
    traj = recorder.trajectory
    if traj.exit_count:
        logger.info("%s: %d of %d samples outside the domain box", label, traj.exit_count, len(traj))
    return traj


# ---------------------------------------------------------------------------
# 실제 폐루프
# ---------------------------------------------------------------------------

def simulate_practical(system: NonlinearSystem, design: ControllerDesign, config: SimConfig, x0,
                       lyapunov: Optional[np.ndarray] = None) -> Trajectory:
    """
    플랜트 ẋ = f(x, u) 와 동적 제어기를 함께 적분.

    증강 상태 w = [x, u, z], u(0) = 0, z(0) = 0. 도메인을 벗어나면 표시만 하고
    영역 판정은 박스로 clamp 한 점으로 한다.

    Raises:
        DivergenceError: 상태가 유한하지 않게 됨 (부분 궤적 포함)
    """
    n, m = system.state_dim, system.input_dim
    x0 = np.asarray(x0, dtype=float).reshape(n)
    law = ControlLaw(design, config.sigma)
    check_step(design, config)

    def rhs(t: float, w: np.ndarray) -> np.ndarray:
        x, u, z = w[:n], w[n:n + m], w[n + m:]
        xbar = w[:n + m]
        index, _ = law.region(xbar)
        s = law.S_x @ (x - x0) + law.S_u @ u - z
        return np.concatenate([
            system.evaluate(x, u),
            law.input_rate(index, xbar, s),
            law.surface_rate(index, xbar),
        ])

    recorder = _Recorder(config, n, m, lyapunov)

    def observe(t: float, w: np.ndarray) -> None:
        x, u, z = w[:n], w[n:n + m], w[n + m:]
        index, exited = law.region(w[:n + m])
        recorder.record(t, x, u, law.S_x @ (x - x0) + law.S_u @ u - z, index, exited)

    w0 = np.concatenate([x0, np.zeros(m), np.zeros(m)])
    return _integrate(rhs, w0, config, observe, recorder, f"{system.name} practical loop")


# ---------------------------------------------------------------------------
# 공칭 폐루프 / 슬라이딩 운동
# ---------------------------------------------------------------------------

class _Perturbation:
    """
    스텝마다 다시 뽑는 (ΔĀ, ΔC) 방향. 크기는 스테이지의 영역에 맞춰 ε_i, ε_g 로 맞춘다.
    """

    def __init__(self, model: PwaModel, law: ControlLaw, policy: UncertaintyPolicy,
                 lyapunov: Optional[np.ndarray]):
        n, m = model.n, model.m
        R1, R2 = selectors(n, m)
        self.model = model
        self.law = law
        self.policy = policy
        self.rng = np.random.default_rng(policy.seed)
        self.M = R1 - R2 @ law.S_u_inv @ law.S_x
        self.P = np.eye(n + m) if lyapunov is None else np.asarray(lyapunov, dtype=float)
        self.dA = np.zeros((n, n + m))
        self.dC = np.zeros(n)
        self.sign = 1.0

    def _unit_matrix(self, rows: int, cols: int) -> np.ndarray:
        G = self.rng.standard_normal((rows, cols))
        return G / np.linalg.norm(G, 2)

    def _unit_vector(self, size: int) -> np.ndarray:
        c = self.rng.standard_normal(size)
        return c / np.linalg.norm(c)

    def term(self, index: int, xbar: np.ndarray) -> np.ndarray:
        bounds = self.model.bounds
        inject = bounds.slope(index) * (self.dA @ xbar) + bounds.offset(index) * self.dC
        return self.sign * (self.M @ inject)

    def resample(self, t: float, xbar: np.ndarray) -> None:
        n, N = self.model.n, self.model.n + self.model.m
        self.dA = self._unit_matrix(n, N)
        self.dC = self._unit_vector(n)
        self.sign = 1.0
        if self.policy.kind == "adversarial":
            index, _ = self.law.region(xbar)
            base = self.law.nominal_rate(index, xbar)
            term = self.term(index, xbar)
            # V̇ = 2x̄ᵀP·x̄̇ 를 크게 만드는 부호
            up = xbar @ self.P @ (base + term)
            down = xbar @ self.P @ (base - term)
            self.sign = 1.0 if up >= down else -1.0


def _simulate_pwa(model: PwaModel, design: ControllerDesign, config: SimConfig, xbar0,
                  lyapunov: Optional[np.ndarray], perturbation: Optional[UncertaintyPolicy],
                  label: str) -> Trajectory:
    n, m = model.n, model.m
    xbar0 = np.asarray(xbar0, dtype=float).reshape(n + m)
    law = ControlLaw(design, 0.0, model=model)
    recorder = _Recorder(config, n, m, lyapunov)
    zeros = np.zeros(m)

    pert = None
    if perturbation is not None and perturbation.kind != "zero":
        pert = _Perturbation(model, law, perturbation, lyapunov if lyapunov is not None else design.surface.P)

    if pert is None:
        def rhs(t: float, w: np.ndarray) -> np.ndarray:
            index, _ = law.region(w)
            return law.nominal_rate(index, w)
    else:
        def rhs(t: float, w: np.ndarray) -> np.ndarray:
            index, _ = law.region(w)
            return law.nominal_rate(index, w) + pert.term(index, w)

    def observe(t: float, w: np.ndarray) -> None:
        index, exited = law.region(w)
        # 공칭 폐루프와 슬라이딩 운동은 면 위에 있다 (s ≡ 0)
        recorder.record(t, w[:n], w[n:], zeros, index, exited)

    return _integrate(rhs, xbar0, config, observe, recorder, label,
                      before_step=None if pert is None else pert.resample)


def simulate_nominal(model: PwaModel, design: ControllerDesign, config: SimConfig, xbar0,
                     lyapunov: Optional[np.ndarray] = None) -> Trajectory:
    """x̄̇ = (R₁Ā_i + R₂K̄_i)x̄ + C̄_i"""
    return _simulate_pwa(model, design, config, xbar0, lyapunov, None, "nominal loop")


def simulate_sliding_motion(model: PwaModel, design: ControllerDesign, config: SimConfig, xbar0,
                            policy: Optional[UncertaintyPolicy] = None,
                            lyapunov: Optional[np.ndarray] = None) -> Trajectory:
    """
    등가 제어 하의 슬라이딩 운동.

        x̄̇ = (R₁Ā_i + R₂K̄_i)x̄ + C̄_i + (R₁ - R₂S_u⁻¹S_x)(ΔĀ_i x̄ + ΔC_i)

    ‖ΔĀ_i‖ = ε_i, ‖ΔC_i‖ = ε_g (원점 영역은 0) 로 스텝마다 다시 뽑는다.
    adversarial 은 V = x̄ᵀPx̄ 의 증가율이 큰 쪽 부호를 고른다 (P 가 없으면 lyapunov, 그것도 없으면 I).
    zero 정책은 simulate_nominal 과 같은 경로를 탄다.
    """
    policy = policy or UncertaintyPolicy()
    return _simulate_pwa(model, design, config, xbar0, lyapunov, policy, f"sliding motion ({policy.kind})")


# ---------------------------------------------------------------------------
# 스텝 크기 진단
# ---------------------------------------------------------------------------

def max_switching_gain(design: ControllerDesign) -> float:
    """도메인 박스에서 가장 먼 꼭짓점에서의 γ + max β_i + max ε_i·‖S_x‖·‖x̄‖"""
    system = design.model.system
    corner = np.maximum(np.abs(system.domain_lo), np.abs(system.domain_hi))
    sx = float(np.linalg.norm(design.S_x, 2))
    bounds = design.bounds
    return design.gamma + max(design.beta) + bounds.max_slope * sx * float(np.linalg.norm(corner))


def stable_step(design: ControllerDesign, sigma: float, safety: float = 0.5) -> Optional[float]:
    """
    완화된 부호 함수의 선형 구간 기울기 k/σ 에 대해 h·k/σ ≤ safety·2.785 가 되는 최대 h.
    σ = 0 이면 None.
    """
    if sigma <= 0.0:
        return None
    return safety * RK4_STABILITY_LIMIT * sigma / max_switching_gain(design)


def nominal_step(design: ControllerDesign) -> float:
    """min(1e-3, 0.1/ρ_max), ρ_max 는 영역별 공칭 폐루프 행렬의 최대 스펙트럼 반경"""
    rho = max(float(np.max(np.abs(np.linalg.eigvals(design.closed_loop(i))))) for i in range(design.l + 1))
    return min(1e-3, 0.1 / rho) if rho > 0.0 else 1e-3


def check_step(design: ControllerDesign, config: SimConfig) -> bool:
    """스텝이 RK4 안정 구간 밖이면 경고하고 False"""
    limit = stable_step(design, config.sigma, safety=1.0)
    if limit is not None and config.h > limit:
        logger.warning("step h=%.3g exceeds the RK4 stability limit %.3g of the smoothed switching term "
                       "(sigma=%.3g); expect numerical chattering", config.h, limit, config.sigma)
        return False
    return True
