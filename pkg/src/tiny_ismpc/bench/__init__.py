"""
Bench - 두 사례 연구 (Chua 회로, 역진자)
"""

from ..palm import register_system
from .chua import chua_system, fixture_chua
from .fixtures import Fixture, FixtureDoc, dump_fixture, load_fixture, parse_fixture, save_fixture
from .metrics import BenchmarkMetrics, benchmark_metrics
from .pendulum import fixture_pendulum, input_coefficient_discrepancy, pendulum_system
from .verify import DescentRun, VerificationReport, verify_design

register_system("pendulum", pendulum_system)
register_system("chua", chua_system)

FIXTURES = {
    "chua": fixture_chua,
    "pendulum": fixture_pendulum,
}


def get_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture '{name}' (available: {', '.join(sorted(FIXTURES))})")
    return FIXTURES[name]()


__all__ = [
    "FIXTURES",
    "BenchmarkMetrics",
    "DescentRun",
    "Fixture",
    "FixtureDoc",
    "benchmark_metrics",
    "chua_system",
    "dump_fixture",
    "fixture_chua",
    "fixture_pendulum",
    "get_fixture",
    "input_coefficient_discrepancy",
    "load_fixture",
    "parse_fixture",
    "pendulum_system",
    "save_fixture",
    "VerificationReport",
    "verify_design",
]
