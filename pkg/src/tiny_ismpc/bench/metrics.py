"""
Benchmark Metrics
=================
궤적에서 슬라이딩 도달과 수렴 지표를 뽑는다.
"""

from dataclasses import dataclass

import numpy as np

from ..sim import Trajectory


@dataclass
class BenchmarkMetrics:
    max_s: float
    slide_ratio: float
    settle_ratio: float
    exit_count: int
    final_norm: float
    initial_norm: float

    def passed(self, slide_tol: float = 0.05, settle_tol: float = 0.05) -> bool:
        return self.slide_ratio <= slide_tol and self.settle_ratio <= settle_tol


def benchmark_metrics(trajectory: Trajectory, t_slide: float, t_settle: float) -> BenchmarkMetrics:
    """
    Args:
        trajectory: 실제 폐루프 궤적
        t_slide: 이후 |s| 를 max|s| 대비로 보는 시각
        t_settle: 이후 ‖x‖ 를 ‖x(0)‖ 대비로 보는 시각

    Returns:
        max|s|, sup_{t≥t_slide}‖s‖/max‖s‖, sup_{t≥t_settle}‖x‖/‖x(0)‖, 도메인 이탈 수
    """
    s_norm = np.linalg.norm(trajectory.s, axis=1)
    x_norm = np.linalg.norm(trajectory.x, axis=1)
    max_s = float(np.max(s_norm)) if len(s_norm) else 0.0

    late = trajectory.t >= t_slide
    slide_ratio = 0.0
    if max_s > 0.0 and np.any(late):
        slide_ratio = float(np.max(s_norm[late])) / max_s

    settled = trajectory.t >= t_settle
    initial = float(x_norm[0]) if len(x_norm) else 0.0
    settle_ratio = 0.0
    if initial > 0.0 and np.any(settled):
        settle_ratio = float(np.max(x_norm[settled])) / initial

    return BenchmarkMetrics(
        max_s=max_s,
        slide_ratio=slide_ratio,
        settle_ratio=settle_ratio,
        exit_count=trajectory.exit_count,
        final_norm=float(x_norm[-1]) if len(x_norm) else 0.0,
        initial_norm=initial,
    )
