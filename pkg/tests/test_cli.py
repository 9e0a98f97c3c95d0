import numpy as np
import pytest
from rich.console import Console

from conftest import make_design
from tiny_ismpc.bench import benchmark_metrics, verify_design
from tiny_ismpc.main import EXIT_ERROR, EXIT_FAILED, EXIT_OK, build_parser, main
from tiny_ismpc.palm import ErrorBounds
from tiny_ismpc.palm.io import load_model, save_model
from tiny_ismpc.sim import Trajectory
from tiny_ismpc.synthesis import robustness_margin, save_design
from tiny_ismpc.ui.report import design_panel, margin_panel, metrics_panel, verification_panel


def render(panel) -> str:
    console = Console(record=True, width=140)
    console.print(panel)
    return console.export_text()


@pytest.fixture
def controller_file(linear_model, tmp_path):
    design = make_design(linear_model, bounds=ErrorBounds(0.01, 0.1, 0.2))
    return str(save_design(design, tmp_path / "controller.json"))


class TestCommands:
    def test_model(self, tmp_path):
        out = tmp_path / "model.json"
        code = main(["model", "scalar", "0", "-o", str(out), "--samples", "100", "--param", "a=2"])
        assert code == EXIT_OK
        model = load_model(out)
        assert model.l == 0
        assert model.system.params == {"a": 2.0}
        assert model.submodels[0].A[0, 0] == pytest.approx(2.0, abs=1e-6)

    def test_unknown_system(self, tmp_path):
        assert main(["model", "no-such-plant", "0", "-o", str(tmp_path / "m.json")]) == EXIT_ERROR

    def test_margin_verdicts(self, controller_file):
        assert main(["margin", controller_file]) == EXIT_OK
        assert main(["margin", controller_file, "--b3", "2", "--b4", "1", "--lam", "0.1"]) == EXIT_OK
        assert main(["margin", controller_file, "--rho", "2", "--h", "1", "--mu", "0.3"]) == EXIT_FAILED

    def test_missing_controller(self, tmp_path):
        assert main(["margin", str(tmp_path / "nope.json")]) == EXIT_ERROR

    def test_simulate(self, tmp_path, linear_model):
        controller = str(save_design(make_design(linear_model), tmp_path / "controller.json"))
        csv = tmp_path / "traj.csv"
        script = tmp_path / "traj.gp"
        code = main(["simulate", controller, "--x0", "0.4", "--T", "1", "--sigma", "0.01",
                     "-o", str(csv), "--plot-script", str(script)])
        assert code == EXIT_OK
        traj = Trajectory.from_csv(csv)
        assert len(traj) == 1001
        assert traj.x[0, 0] == pytest.approx(0.4)
        assert script.exists()

    def test_simulate_needs_initial_state(self, controller_file, tmp_path):
        assert main(["simulate", controller_file, "-o", str(tmp_path / "t.csv")]) == EXIT_ERROR

    def test_verify(self, tmp_path, linear_model):
        controller = str(save_design(make_design(linear_model), tmp_path / "controller.json"))
        model = str(save_model(linear_model, tmp_path / "model.json"))
        assert main(["--workers", "1", "verify", controller, model, "--runs", "3"]) == EXIT_OK

    def test_verify_against_other_model(self, tmp_path, linear_model):
        controller = str(save_design(make_design(linear_model), tmp_path / "controller.json"))
        other = tmp_path / "other.json"
        assert main(["model", "scalar", "0", "-o", str(other), "--samples", "100", "--param", "a=2"]) == EXIT_OK
        assert main(["verify", controller, str(other), "--runs", "0"]) == EXIT_FAILED

    def test_global_flags(self):
        args = build_parser().parse_args(["-vv", "--seed", "7", "verify", "c.json", "m.json"])
        assert args.verbose == 2
        assert args.seed == 7
        assert args.workers == 4
        assert args.runs == 20


class TestPanels:
    def test_design_panel(self, certified_design):
        text = render(design_panel(certified_design))
        assert "Controller (scalar, l=0)" in text
        assert "certificate: yes" in text

    def test_margin_panel_without_constants(self, linear_model):
        report = robustness_margin(make_design(linear_model, bounds=ErrorBounds(0.01, 0.1, 0.2)))
        text = render(margin_panel(report))
        assert "amplification factor = 3" in text
        assert "no verdict" in text

    def test_verification_panel(self, certified_design):
        text = render(verification_panel(verify_design(certified_design, runs=2, workers=1)))
        assert "nominal LMIs" in text
        assert "FAIL" not in text

    def test_metrics_panel(self):
        traj = Trajectory.allocate(3, 1, 1)
        traj.t[:] = [0.0, 1.0, 2.0]
        traj.x[:, 0] = [1.0, 0.5, 0.01]
        text = render(metrics_panel("scalar", benchmark_metrics(traj, 1.5, 1.5)))
        assert "Benchmark: scalar" in text
        assert "PASS" in text
        assert np.isclose(float(text.split("final ‖x‖")[1].split()[0]), 0.01)
