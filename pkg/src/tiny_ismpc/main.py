"""
Tiny ISMPC CLI 진입점
=====================
tiny-ismpc [-v] [--seed N] [--workers N] <command> ...

    model       비선형 플랜트 → 불확실 PWA 모델 (model.json)
    synthesize  model.json → 제어기 (controller.json)
    simulate    controller.json 또는 --fixture → 궤적 CSV
    verify      controller.json model.json → LMI 잔차 / β / 공칭 감소 재검사
    margin      controller.json → 근사 오차 한계 조건
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .bench import benchmark_metrics, get_fixture, verify_design
from .config import DesignOptions, GridSpec, SimConfig
from .errors import DivergenceError, IsmpcError, SynthesisFailed
from .palm import build_pwa_model, get_system, parse_partition, partition_of, validate_model
from .palm.io import load_model, save_model
from .palm.regions import parse_vector
from .sim import simulate_practical, write_plot_script
from .synthesis import design_controller, load_design, robustness_margin, save_design
from .ui.report import design_panel, margin_panel, metrics_panel, validation_panel, verification_panel

console = Console()
logger = logging.getLogger("tiny_ismpc")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _params(pairs: Optional[List[str]]) -> dict:
    params = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"parameter '{pair}' is not of the form name=value")
        params[key.strip()] = float(parse_vector(value)[0])
    return params


def _pairs(items: Optional[List[str]]) -> List[tuple]:
    out = []
    for item in items or []:
        i, j = (int(v) for v in item.split(","))
        out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# 명령
# ---------------------------------------------------------------------------

def cmd_model(args) -> int:
    system = get_system(args.system, _params(args.param))
    partition = parse_partition(args.partition, system, args.axis)
    model = build_pwa_model(system, partition, args.samples, args.seed)
    path = save_model(model, args.output)
    console.print(f"[green]✅ model with {model.l + 1} regions written to {path}[/green]")
    console.print(f"   eps_f0={model.bounds.eps_f0:.4g}  eps_f={model.bounds.eps_f:.4g}  eps_g={model.bounds.eps_g:.4g}")
    if args.validate:
        report = validate_model(model, system, samples_per_region=args.samples, seed=args.seed + 1)
        console.print(validation_panel(report))
        if not report.passed:
            return EXIT_FAILED
    return EXIT_OK


def cmd_synthesize(args) -> int:
    model = load_model(args.model)
    grid = GridSpec(
        ranges=[tuple(parse_vector(r)) for r in args.range] if args.range else None,
        points_per_axis=args.points,
        symmetric_pairs=_pairs(args.symmetric),
        fixed=[parse_vector(d).tolist() for d in args.fixed.split(";")] if args.fixed else None,
    )
    options = DesignOptions(
        samples_per_region=args.samples,
        seed=args.seed,
        l_max=args.l_max,
        gamma=args.gamma,
        grid=grid,
        workers=args.workers,
        decay_rates=parse_vector(args.decay_rates).tolist(),
        time_budget=args.time_budget if args.time_budget > 0 else None,
    )
    try:
        design = design_controller(model.system, partition_of(model), options)
    except SynthesisFailed as exc:
        console.print(f"[bold red]❌ synthesis failed:[/bold red] {exc}")
        return EXIT_ERROR
    path = save_design(design, args.output)
    console.print(design_panel(design))
    console.print(f"[green]✅ controller written to {path}[/green]")
    return EXIT_OK


def cmd_simulate(args) -> int:
    fixture = get_fixture(args.fixture) if args.fixture else None
    if args.controller:
        design = load_design(args.controller)
    elif fixture is not None:
        design = fixture.published_design(fixture.published_model(seed=args.seed))
    else:
        raise ValueError("simulate needs a controller file or --fixture")

    system = design.model.system
    base = fixture.sim if fixture is not None else SimConfig()
    updates = {k: v for k, v in (("h", args.h), ("T", args.T), ("sigma", args.sigma),
                                 ("record_stride", args.stride)) if v is not None}
    config = SimConfig(**{**base.model_dump(), **updates})

    if args.x0:
        x0 = parse_vector(args.x0)
    elif fixture is not None:
        x0 = fixture.x0
    else:
        raise ValueError("simulate needs --x0 when no fixture is given")
    x0 = x0[: system.state_dim]

    try:
        traj = simulate_practical(system, design, config, x0)
    except DivergenceError as exc:
        console.print(f"[bold red]❌ {exc}[/bold red]")
        if exc.trajectory is not None and len(exc.trajectory):
            exc.trajectory.to_csv(args.output)
            console.print(f"   partial trajectory ({len(exc.trajectory)} samples) written to {args.output}")
        return EXIT_ERROR

    path = traj.to_csv(args.output)
    if args.plot_script:
        write_plot_script(traj, path, args.plot_script, title=f"{system.name} closed loop")
    metrics = benchmark_metrics(traj, t_slide=min(1.5, config.T), t_settle=0.75 * config.T)
    console.print(metrics_panel(system.name, metrics))
    console.print(f"[green]✅ {len(traj)} samples written to {path}[/green]")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_model(args.model)
    design = load_design(args.controller)
    report = verify_design(design, model, runs=args.runs, seed=args.seed, workers=args.workers,
                           dump=Path(args.dump) if args.dump else None)
    console.print(verification_panel(report))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_margin(args) -> int:
    design = load_design(args.controller)
    report = robustness_margin(design, b3=args.b3, b4=args.b4, lam=args.lam, rho=args.rho, h=args.h, mu=args.mu)
    console.print(margin_panel(report))
    return EXIT_FAILED if report.verdict is False else EXIT_OK


# ---------------------------------------------------------------------------
# 파서
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiny-ismpc",
        description="Tiny ISMPC - PWA 모델 기반 적분 슬라이딩 모드 제어기 설계",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예제:
  tiny-ismpc model pendulum "0,pi/3,13pi/30,-pi/3,-13pi/30" -o model.json
  tiny-ismpc synthesize model.json -o controller.json
  tiny-ismpc simulate --fixture pendulum -o traj.csv --plot-script traj.gp
  tiny-ismpc verify controller.json model.json
        """,
    )
    parser.add_argument("--verbose", "-v", action="count", default=0, help="-v: INFO, -vv: DEBUG")
    parser.add_argument("--seed", type=int, default=0, help="모든 확률적 단계의 시드 (default: 0)")
    parser.add_argument("--workers", type=int, default=4, help="병렬 작업 수 (default: 4)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="PWA 모델 생성")
    p.add_argument("system", help="등록된 시스템 이름 (pendulum, chua, ...)")
    p.add_argument("partition", help="premise 값 목록 ('0,pi/3,...', 'deg' 허용) 또는 파티션 JSON")
    p.add_argument("-o", "--output", default="model.json")
    p.add_argument("--axis", type=int, default=0, help="premise 좌표 (default: 0)")
    p.add_argument("--samples", type=int, default=256, help="영역당 샘플 수 (≥ 100)")
    p.add_argument("--param", action="append", help="시스템 파라미터 name=value (반복 가능)")
    p.add_argument("--validate", action="store_true", help="오차 한계 자기일관성 검사")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("synthesize", help="제어기 설계")
    p.add_argument("model")
    p.add_argument("-o", "--output", default="controller.json")
    p.add_argument("--gamma", type=float, default=None, help="도달 이득 γ (기본: 자동)")
    p.add_argument("--points", type=int, default=5, help="오프셋 격자 축당 점 수")
    p.add_argument("--range", action="append", help="오프셋 범위 'lo,hi' (한 번 또는 자유 오프셋마다)")
    p.add_argument("--symmetric", action="append", help="D_j = -D_i 로 묶을 쌍 'i,j'")
    p.add_argument("--fixed", default=None, help="고정 오프셋 'D1;D2;...' (각 D 는 쉼표 구분)")
    p.add_argument("--l-max", type=int, default=32)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--decay-rates", default="0,1,4,16", help="면 LMI 실패 시 차례로 시도할 공칭 감쇠율")
    p.add_argument("--time-budget", type=float, default=300.0, help="설계 시간 예산 (초, 0 이면 무제한)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="실제 폐루프 시뮬레이션")
    p.add_argument("controller", nargs="?", default=None)
    p.add_argument("--fixture", choices=["chua", "pendulum"], default=None)
    p.add_argument("--x0", default=None, help="초기 상태 (예: '82deg,0')")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("-o", "--output", default="trajectory.csv")
    p.add_argument("--plot-script", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="제어기 재검사")
    p.add_argument("controller")
    p.add_argument("model")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--dump", default=None, help="LMI 문제/해 문서를 기록할 디렉토리")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("margin", help="근사 오차 한계 조건")
    p.add_argument("controller")
    for name in ("b3", "b4", "lam", "rho", "h", "mu"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.set_defaults(func=cmd_margin)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    logger.debug("command %s with seed %d", args.command, args.seed)
    try:
        return args.func(args)
    except (IsmpcError, ValidationError, KeyError, ValueError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        console.print(f"[bold red]❌ {type(exc).__name__}:[/bold red] {message}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
