"""
Report Rendering
================
검증 결과, 설계 요약, 벤치마크 지표를 rich 테이블로 출력합니다.
"""

from typing import Iterable, List, Optional

import numpy as np
from rich.console import Console, Group
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..bench import BenchmarkMetrics, VerificationReport
from ..lmi import ResidualReport
from ..palm import ValidationReport
from ..synthesis import ControllerDesign, MarginReport


def _verdict(passed: Optional[bool]) -> Text:
    if passed is None:
        return Text("n/a", style="dim")
    return Text("PASS", style="bold green") if passed else Text("FAIL", style="bold red")


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def _matrix(value) -> str:
    return np.array2string(np.asarray(value, dtype=float), precision=4, suppress_small=True)


def residual_panel(report: ResidualReport, title: str = "LMI residuals") -> Panel:
    table = Table(expand=True)
    table.add_column("Constraint", style="cyan")
    table.add_column("Sense", style="dim")
    table.add_column("Extreme eig", justify="right")
    table.add_column("Distance", justify="right")
    table.add_column("Sym. defect", justify="right", style="dim")
    table.add_column("Status")
    for row in report.rows:
        table.add_row(row.name, row.sense.value, _fmt(row.extreme_eigenvalue), _fmt(row.distance),
                      _fmt(row.symmetry_defect), _verdict(row.passed))
    caption = f"margin {_fmt(report.margin)}"
    return Panel(table, title=title, subtitle=caption, border_style="green" if report.passed else "red")


def validation_panel(report: ValidationReport) -> Panel:
    table = Table(expand=True)
    table.add_column("Region", style="cyan")
    table.add_column("Samples", justify="right")
    table.add_column("max ‖r‖", justify="right")
    table.add_column("Worst excess", justify="right")
    table.add_column("Violations", justify="right")
    table.add_column("Status")
    for r in report.regions:
        table.add_row(str(r.index), str(r.samples), _fmt(r.max_residual), _fmt(r.worst_excess),
                      str(len(r.violations)), _verdict(r.passed))
    subtitle = f"coverage holes: {len(report.coverage_holes)} | tolerance {report.tolerance:g}"
    return Panel(table, title="PWA model validation", subtitle=subtitle,
                 border_style="green" if report.passed else "red")


def design_panel(design: ControllerDesign) -> Panel:
    bounds = design.bounds
    table = Table(expand=True)
    table.add_column("Region", style="cyan")
    table.add_column("K̄_i", ratio=2)
    table.add_column("D_i")
    table.add_column("β_i", justify="right")
    table.add_column("Re λ max", justify="right")
    for i in range(design.l + 1):
        abscissa = float(np.max(np.real(np.linalg.eigvals(design.closed_loop(i)))))
        table.add_row(str(i), _matrix(design.K[i]), _matrix(design.D[i]), _fmt(design.beta[i]),
                      Text(_fmt(abscissa), style="green" if abscissa < 0 else "yellow"))

    header = Text.assemble(
        ("S̄", "bold"),
        f" = {_matrix(design.S_bar)}\n"
        f"γ = {_fmt(design.gamma)} | ε_f0 = {_fmt(bounds.eps_f0)}, ε_f = {_fmt(bounds.eps_f)}, "
        f"ε_g = {_fmt(bounds.eps_g)} | certificate: {'yes' if design.certified else 'no'}"
    )
    return Panel(Group(header, table), title=f"Controller ({design.model.system.name}, l={design.l})",
                 border_style="magenta")


def margin_panel(report: MarginReport) -> Panel:
    lines: List[str] = [
        f"‖R₂S_u⁻¹‖ = {_fmt(report.su_inv_norm)}, ‖S_x‖ = {_fmt(report.sx_norm)}",
        f"amplification factor = {_fmt(report.factor)}",
        f"LHS = factor·ε_f + max(ε_f, ε_g) = {_fmt(report.lhs)}",
        f"admissible λ, μ ∈ (0, {_fmt(report.weight_limit)})",
    ]
    table = Table(expand=True)
    table.add_column("Form", style="cyan")
    table.add_column("Ratio", justify="right")
    table.add_column("Weight", justify="right")
    table.add_column("RHS", justify="right")
    table.add_column("Origin", justify="center")
    table.add_column("Regions", justify="center")
    table.add_column("Status")
    for check in (report.exponential, report.asymptotic):
        if check is None:
            continue
        table.add_row(check.form, _fmt(check.ratio), _fmt(check.weight), _fmt(check.rhs),
                      _verdict(check.origin_passed), _verdict(check.region_passed), _verdict(check.passed))
    body = [Text("\n".join(lines))]
    if table.row_count:
        body.append(table)
    else:
        body.append(Text("no verdict: supply b3, b4, lam or rho, h, mu", style="dim"))
    return Panel(Group(*body), title="Robustness margin", border_style="cyan")


def metrics_panel(name: str, metrics: BenchmarkMetrics, slide_tol: float = 0.05,
                  settle_tol: float = 0.05) -> Panel:
    table = Table.grid(padding=(0, 2))
    table.add_column(style="dim")
    table.add_column(justify="right")
    table.add_row("max ‖s‖", _fmt(metrics.max_s))
    table.add_row("late ‖s‖ / max ‖s‖", _fmt(metrics.slide_ratio))
    table.add_row("late ‖x‖ / ‖x(0)‖", _fmt(metrics.settle_ratio))
    table.add_row("final ‖x‖", _fmt(metrics.final_norm))
    table.add_row("domain exits", str(metrics.exit_count))
    table.add_row("status", _verdict(metrics.passed(slide_tol, settle_tol)))
    return Panel(table, title=f"Benchmark: {name}", border_style="blue")


def print_panels(panels: Iterable[Panel], console: Optional[Console] = None) -> None:
    console = console or Console()
    for panel in panels:
        console.print(panel)


def verification_panel(report: VerificationReport) -> Panel:
    table = Table(expand=True)
    table.add_column("Check", style="cyan")
    table.add_column("Detail")
    table.add_column("Status")
    for name, passed, detail in report.checks():
        table.add_row(name, detail, _verdict(passed))
    return Panel(table, title="Controller verification", border_style="green" if report.passed else "red")
