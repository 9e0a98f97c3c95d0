"""
벤치마크 실행 스크립트
=====================
출판된 제어기로 두 사례 연구를 시뮬레이션하고 지표를 확인
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tiny_ismpc.bench import FIXTURES, benchmark_metrics, get_fixture  # noqa: E402
from tiny_ismpc.errors import DivergenceError  # noqa: E402
from tiny_ismpc.sim import simulate_practical, write_plot_script  # noqa: E402

# 사례별 지표 시각 (t_slide, t_settle)
WINDOWS = {
    "pendulum": {
        "t_slide": 1.5,
        "t_settle": 6.0,
        "description": "역진자 (82° 에서 시작, σ = 0.020)",
    },
    "chua": {
        "t_slide": 1.5,
        "t_settle": 37.5,
        "description": "Chua 회로 (x₀ = [4, 1, 0], σ = 0.001)",
    },
}


def run_benchmark(name: str, out_dir: Path, seed: int = 0) -> bool:
    """단일 사례 실행"""
    if name not in FIXTURES:
        print(f"❌ Unknown fixture: {name}")
        print(f"Available: {', '.join(FIXTURES)}")
        return False

    window = WINDOWS[name]
    print(f"\n▶ Running: {window['description']}")
    fixture = get_fixture(name)
    design = fixture.published_design(fixture.published_model(seed=seed))
    print(f"   γ = {design.gamma:.4g}, h = {fixture.sim.h:g}, T = {fixture.sim.T:g}")

    try:
        traj = simulate_practical(fixture.system, design, fixture.sim, fixture.x0)
    except DivergenceError as e:
        print(f"❌ Diverged: {e}")
        return False

    csv_path = traj.to_csv(out_dir / f"{name}.csv")
    write_plot_script(traj, csv_path, out_dir / f"{name}.gp", title=f"{name} closed loop")
    metrics = benchmark_metrics(traj, window["t_slide"], window["t_settle"])
    mark = "✅" if metrics.passed() else "⚠️"
    print(f"{mark} {name}: max‖s‖={metrics.max_s:.3g}, slide ratio={metrics.slide_ratio:.3g}, "
          f"settle ratio={metrics.settle_ratio:.3g}, domain exits={metrics.exit_count}")
    print(f"   CSV: {csv_path}")
    return metrics.passed()


def run_all(out_dir: Path, seed: int = 0) -> bool:
    """모든 사례 실행"""
    print("🚀 Tiny ISMPC 벤치마크")
    print("=" * 50)

    results = {name: run_benchmark(name, out_dir, seed) for name in FIXTURES}

    print("\n" + "=" * 50)
    for name, ok in results.items():
        print(f"  {name}: {'PASS' if ok else 'FAIL'}")
    return all(results.values())


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Tiny ISMPC 벤치마크 실행")
    parser.add_argument(
        "fixtures",
        nargs="*",
        help="실행할 사례 (없으면 전부)",
    )
    parser.add_argument(
        "--out", "-o",
        default="bench_out",
        help="CSV / gnuplot 출력 디렉토리",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--list", "-l",
        action="store_true",
        help="사용 가능한 사례 목록",
    )

    args = parser.parse_args()
    out = Path(args.out)

    if args.list:
        print("사용 가능한 사례:")
        for key, info in WINDOWS.items():
            print(f"  {key}: {info['description']}")
    elif args.fixtures:
        ok = all([run_benchmark(name, out, args.seed) for name in args.fixtures])
        sys.exit(0 if ok else 2)
    else:
        sys.exit(0 if run_all(out, args.seed) else 2)
