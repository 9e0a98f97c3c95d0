import math

import numpy as np
import pytest

from conftest import make_design, scalar_plant
from tiny_ismpc.bench import (
    benchmark_metrics,
    dump_fixture,
    get_fixture,
    input_coefficient_discrepancy,
    parse_fixture,
    verify_design,
)
from tiny_ismpc.bench.verify import worst_increase
from tiny_ismpc.palm import ErrorBounds, NonlinearSystem, PartitionSpec, build_pwa_model, get_system, linearize
from tiny_ismpc.parallel_runner import ParallelRunner
from tiny_ismpc.sim import Trajectory, simulate_practical
from tiny_ismpc.synthesis import ControllerDesign, SurfaceDesign, sample_offsets, selectors, solve_nominal


class TestPendulum:
    def test_printed_input_coefficient_is_doubled(self):
        printed, recomputed = input_coefficient_discrepancy(get_fixture("pendulum"))
        assert printed == pytest.approx(-0.6667)
        assert recomputed == pytest.approx(-1.0 / 3.0, abs=1e-6)

    @pytest.mark.parametrize("angle,a21,c2", [
        (math.pi / 3, 4.7040, 8.6533),
        (13 * math.pi / 30, 1.5955, 12.3638),
        (-math.pi / 3, 4.7040, -8.6533),
    ])
    def test_state_columns_match_printed_matrices(self, angle, a21, c2):
        sub = linearize(get_system("pendulum"), [angle, 0.0, 0.0])
        assert sub.A[1, 0] == pytest.approx(a21, abs=2e-3)
        assert sub.C[1] == pytest.approx(c2, abs=2e-3)

    def test_published_model_uses_printed_values(self):
        fixture = get_fixture("pendulum")
        model = fixture.published_model(samples_per_region=100)
        assert model.l == 4
        assert model.submodels[1].B[1, 0] == pytest.approx(-0.2667)
        assert model.bounds.eps_f0 > 0.0

    def test_fixture_plant_reproduces_printed_input_column(self):
        fixture = get_fixture("pendulum")
        assert fixture.system.params["input_gain"] == 2.0
        sub = linearize(fixture.system, np.zeros(3), origin=True)
        assert sub.B[1, 0] == pytest.approx(fixture.A_bar[0][1, 2], abs=1e-3)
        assert sub.A[1, 0] == pytest.approx(19.6, abs=1e-4)

    @pytest.mark.slow
    def test_published_design_slides_and_settles(self):
        fixture = get_fixture("pendulum")
        traj = simulate_practical(fixture.system, fixture.published_design(), fixture.sim, fixture.x0)
        assert np.all(traj.s[0] == 0.0)
        metrics = benchmark_metrics(traj, t_slide=1.5, t_settle=6.0)
        assert metrics.passed(), metrics
        assert metrics.exit_count == 0


class TestChua:
    def test_origin_linearization(self):
        sub = linearize(get_system("chua"), np.zeros(4), origin=True)
        assert np.allclose(sub.A, [[-0.1, 0.2, 0.0], [0.2, -0.2, -1.0], [0.0, 0.5, 0.0]], atol=1e-6)
        assert np.allclose(sub.B, [[-1.0], [0.0], [0.0]], atol=1e-6)

    def test_printed_gain_stabilizes_default_circuit(self):
        fixture = get_fixture("chua")
        assert fixture.printed_gain_spectral_abscissa() < 0.0
        poly = fixture.printed_gain_char_poly()
        assert np.allclose(poly, [1.0, 2.8596, 7.2997, 12.4245, 5.2346], atol=1e-3)

    def test_outer_gains_stabilize_their_regions(self):
        fixture = get_fixture("chua")
        design = fixture.published_design(fixture.published_model(samples_per_region=100))
        for i in (1, 2):
            assert np.max(np.real(np.linalg.eigvals(design.closed_loop(i)))) < 0.0

    def test_partition_is_symmetric(self):
        fixture = get_fixture("chua")
        slabs = fixture.partition.slabs
        assert fixture.partition.l == 2
        assert slabs[1].beta1 == pytest.approx(-slabs[2].beta2)
        assert slabs[0].beta2 == pytest.approx(1.5)

    @pytest.mark.slow
    def test_published_design_contracts(self):
        fixture = get_fixture("chua")
        traj = simulate_practical(fixture.system, fixture.published_design(), fixture.sim, fixture.x0)
        assert traj.t[-1] == pytest.approx(50.0)
        assert np.all(np.isfinite(traj.x)) and np.all(np.isfinite(traj.u))
        assert np.linalg.norm(traj.xbar[-1]) < np.linalg.norm(fixture.xbar0)
        assert np.linalg.norm(traj.s[-1]) <= 10.0 * fixture.sim.sigma


class TestFixtureDocuments:
    @pytest.mark.parametrize("name", ["chua", "pendulum"])
    def test_dump_and_parse(self, name):
        fixture = get_fixture(name)
        again = parse_fixture(dump_fixture(fixture), f"{name}.json")
        assert again.name == fixture.name
        assert np.array_equal(again.S_bar, fixture.S_bar)
        assert all(np.array_equal(a, b) for a, b in zip(again.K, fixture.K))
        assert again.sim == fixture.sim
        assert again.partition.l == fixture.partition.l
        assert again.gamma == fixture.gamma

    @pytest.mark.parametrize("name", ["chua", "pendulum"])
    def test_dump_is_stable(self, name):
        text = dump_fixture(get_fixture(name))
        assert dump_fixture(parse_fixture(text)) == text

    def test_unknown_fixture(self):
        with pytest.raises(KeyError):
            get_fixture("van-der-pol")


class TestMetrics:
    def test_ratios(self):
        traj = Trajectory.allocate(4, 1, 1)
        traj.t[:] = [0.0, 1.0, 2.0, 3.0]
        traj.x[:, 0] = [2.0, 1.0, 0.1, 0.05]
        traj.s[:, 0] = [0.0, 0.4, -0.1, 0.0]
        traj.domain_exit[1] = True
        metrics = benchmark_metrics(traj, t_slide=2.0, t_settle=2.0)
        assert metrics.max_s == pytest.approx(0.4)
        assert metrics.slide_ratio == pytest.approx(0.25)
        assert metrics.settle_ratio == pytest.approx(0.05)
        assert metrics.exit_count == 1
        assert metrics.final_norm == pytest.approx(0.05)
        assert not metrics.passed()
        assert metrics.passed(slide_tol=0.3)


class TestVerify:
    def test_certified_design_passes(self, certified_design, tmp_path):
        report = verify_design(certified_design, runs=5, seed=1, workers=2, dump=tmp_path)
        assert report.passed, report.checks()
        assert report.su_positive
        assert len(report.descent) == 5
        assert [r.index for r in report.descent] == list(range(5))
        for stem in ("nominal", "surface"):
            assert (tmp_path / f"{stem}_problem.json").exists()
            assert (tmp_path / f"{stem}_solution.json").exists()

    def test_uncertified_design_skips_lmis(self, linear_model):
        report = verify_design(make_design(linear_model, certified=False), runs=3)
        assert report.passed
        assert report.nominal is None and report.surface is None
        assert report.descent == []

    def test_model_mismatch(self, certified_design):
        plant = scalar_plant(a=2.0)
        other = build_pwa_model(plant, PartitionSpec.single(plant), bounds=ErrorBounds(0.0, 0.0, 0.0))
        report = verify_design(certified_design, model=other, runs=0)
        assert not report.passed
        assert report.model_mismatch == ["submodel 0 differs"]

    def test_wrong_reaching_offsets(self, linear_model):
        design = make_design(linear_model)
        design.beta = [0.5]
        report = verify_design(design, runs=0)
        assert not report.beta_ok
        assert not report.passed

    def test_increase_tolerance_is_absolute(self):
        # 큰 V 에서도 1e-9 를 넘는 증가는 잡아낸다
        assert worst_increase(np.array([1e6, 1e6 + 1e-6])) > 0.0
        assert worst_increase(np.array([1.0, 1.0 + 5e-10, 0.5])) == 0.0
        assert worst_increase(np.array([3.0, 2.0, 1.0])) == 0.0
        assert worst_increase(np.array([1.0])) == 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_nominal_descent_on_random_stable_plants(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((2, 2))
        A -= (np.max(np.real(np.linalg.eigvals(A))) + 0.5) * np.eye(2)
        B = rng.standard_normal((2, 1))
        plant = NonlinearSystem(f"stable{seed}", 2, 1, lambda x, u: A @ x + B @ u,
                                [-1.0, -1.0, -2.0], [1.0, 1.0, 2.0])
        points = [np.zeros(3), np.array([0.6, 0.0, 0.0]), np.array([-0.6, 0.0, 0.0])]
        partition = PartitionSpec.from_operating_points(np.eye(3)[0], points, plant)
        model = build_pwa_model(plant, partition, bounds=ErrorBounds(0.0, 0.0, 0.0))
        nominal = sample_offsets(model)
        self._assert_descent(model, nominal)

    def test_nominal_descent_on_pendulum(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, PartitionSpec.single(system), bounds=ErrorBounds(0.0, 0.0, 0.0))
        nominal, solution = solve_nominal(model, [], decay_rate=1.0)
        assert solution.feasible
        self._assert_descent(model, nominal)

    @staticmethod
    def _assert_descent(model, nominal):
        _, R2 = selectors(model.n, model.m)
        surface = SurfaceDesign(P=None, S_bar=R2.T)
        design = ControllerDesign(model=model, nominal=nominal, surface=surface, gamma=1.0)
        report = verify_design(design, runs=20, seed=5)
        assert len(report.descent) == 20
        assert report.descent_failures == [], [r.worst_increase for r in report.descent]


class TestParallelRunner:
    @pytest.mark.parametrize("workers", [1, 3])
    def test_results_keep_task_order(self, workers):
        def work(task):
            if task["value"] == 2:
                raise ValueError("bad value")
            return task["value"] ** 2

        tasks = [{"id": f"t{k}", "value": k} for k in range(5)]
        results = ParallelRunner(max_workers=workers).run_ordered(tasks, work)
        assert [r.task_id for r in results] == ["t0", "t1", "t2", "t3", "t4"]
        assert [r.result for r in results if r.success] == [0, 1, 9, 16]
        assert results[2].error == "bad value"
        assert isinstance(results[2].exception, ValueError)
