import time

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import CERT_K, make_design
from tiny_ismpc.config import DesignOptions, GridSpec
from tiny_ismpc.errors import NoFeasibleOffsets, ShapeError, SynthesisFailed
from tiny_ismpc.lmi import check_residuals
from tiny_ismpc.palm import ErrorBounds, NonlinearSystem, PartitionSpec, build_pwa_model, get_system, refine_partition
from tiny_ismpc.synthesis import (
    NominalDesign,
    OffsetGrid,
    assemble_nominal_lmis,
    assemble_surface_lmis,
    closed_loop_matrix,
    design_controller,
    load_design,
    origin_bound_ceiling,
    reaching_offsets,
    robustness_margin,
    sample_offsets,
    save_design,
    select_gamma,
    selectors,
    solve_nominal,
    solve_surface,
    stabilizable,
)
from tiny_ismpc.synthesis.nominal import axis_order, default_range, rank_tuples
from tiny_ismpc.bench import benchmark_metrics, get_fixture
from tiny_ismpc.bench.chua import chua_partition
from tiny_ismpc.bench.pendulum import pendulum_partition
from tiny_ismpc.sim import simulate_practical, stable_step


def spectral_abscissa(M: np.ndarray) -> float:
    return float(np.max(np.real(np.linalg.eigvals(M))))


@pytest.fixture
def chua_model():
    system = get_system("chua")
    return build_pwa_model(system, chua_partition(system), bounds=ErrorBounds(0.0, 0.0, 0.0))


class TestSelectors:
    def test_shapes(self):
        R1, R2 = selectors(3, 1)
        assert R1.shape == (4, 3) and R2.shape == (4, 1)
        assert np.array_equal(R1.T @ R1, np.eye(3))
        assert np.array_equal(R1.T @ R2, np.zeros((3, 1)))


class TestOffsetGrid:
    def test_axis_order(self):
        assert axis_order(5) == [2, 0, 4, 1, 3]
        assert axis_order(1) == [0]
        assert sorted(axis_order(9)) == list(range(9))

    def test_rank_tuples_cover_grid_once(self):
        assert list(rank_tuples(2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        tuples = list(rank_tuples(3, 3))
        assert len(tuples) == 27
        assert len(set(tuples)) == 27

    def test_symmetric_pair_mirrors(self, chua_model):
        grid = OffsetGrid(chua_model, GridSpec(ranges=[(-1.0, 1.0)], symmetric_pairs=[(1, 2)]))
        assert grid.axes == 1
        D = grid.expand([0.25])
        assert np.allclose(D[0], [0.25])
        assert np.allclose(D[1], [-0.25])

    def test_first_candidate_is_grid_center(self, chua_model):
        grid = OffsetGrid(chua_model, GridSpec(ranges=[(-1.0, 1.0)], points_per_axis=5))
        first = next(grid.candidates(5))
        assert np.allclose(first, [[0.0], [0.0]])

    def test_fixed_offsets(self, chua_model):
        grid = OffsetGrid(chua_model, GridSpec(fixed=[[0.2], [-0.2]]))
        assert [d.tolist() for d in next(grid.candidates(5))] == [[0.2], [-0.2]]

    def test_pair_past_last_region(self, chua_model):
        with pytest.raises(ShapeError):
            OffsetGrid(chua_model, GridSpec(symmetric_pairs=[(1, 3)]))

    def test_default_range_follows_offsets(self, chua_model):
        lo, hi = default_range(chua_model)
        scale = 2.0 * max(np.linalg.norm(s.C) for s in chua_model.submodels)
        assert (lo, hi) == (-scale, scale)


class TestNominal:
    def test_single_region_gain_is_stabilizing(self, linear_model):
        design, solution = solve_nominal(linear_model, [])
        assert solution.feasible
        assert spectral_abscissa(closed_loop_matrix(linear_model, design.K[0], 0)) < 0.0
        assert np.linalg.norm(design.W, 2) == pytest.approx(1.0)
        assert design.reconstruction_error() < 1e-6

    def test_certificate_satisfies_assembled_lmis(self, linear_model, certified_design):
        problem = assemble_nominal_lmis(linear_model, [])
        report = check_residuals(problem, {"W": certified_design.nominal.W, "Y0": certified_design.nominal.Y[0]})
        assert report.passed
        assert report.row("origin").extreme_eigenvalue == pytest.approx(-2.0)

    def test_offset_count_checked(self, chua_model):
        with pytest.raises(ShapeError):
            assemble_nominal_lmis(chua_model, [[0.0]])

    def test_region_lmi_shapes(self, chua_model):
        problem = assemble_nominal_lmis(chua_model, [[0.2], [-0.2]])
        assert [c.name for c in problem.constraints] == ["origin", "region1", "region2"]
        assert problem.constraints[1].expr.dim == 5
        assert {v.name for v in problem.variables} == {"W", "Y0", "Y1", "Y2", "lambda1", "lambda2"}

    def test_sample_offsets_single_region(self, linear_model):
        design = sample_offsets(linear_model)
        assert design.candidates_tried == 1
        assert design.D[0].tolist() == [0.0]
        assert spectral_abscissa(closed_loop_matrix(linear_model, design.K[0], 0)) < 0.0

    def test_uncontrollable_mode_has_no_offsets(self):
        blocked = NonlinearSystem("blocked", 2, 1, lambda x, u: np.array([x[0], u[0]]),
                                  [-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        model = build_pwa_model(blocked, PartitionSpec.single(blocked), bounds=ErrorBounds(0.0, 0.0, 0.0))
        with pytest.raises(NoFeasibleOffsets):
            sample_offsets(model)

    def test_offset_zero_must_vanish(self):
        with pytest.raises(ShapeError):
            NominalDesign(W=None, Y=[], lam=[], K=[np.zeros((1, 2))], D=[np.ones(1)])

    def test_decay_rate_tightens_certificate(self, linear_model, certified_design):
        point = {"W": certified_design.nominal.W, "Y0": certified_design.nominal.Y[0]}
        # diag(-2, -28) + 2αW 는 α = 0.5 에서 음정치, α = 1 에서 부정치
        assert check_residuals(assemble_nominal_lmis(linear_model, [], decay_rate=0.5), point).passed
        assert not check_residuals(assemble_nominal_lmis(linear_model, [], decay_rate=1.0), point).passed

    def test_decay_rate_bounds_closed_loop_spectrum(self, linear_model):
        design, solution = solve_nominal(linear_model, [], decay_rate=2.0)
        assert solution.feasible
        assert design.decay_rate == 2.0
        assert spectral_abscissa(closed_loop_matrix(linear_model, design.K[0], 0)) < -2.0

    def test_negative_decay_rate(self, linear_model):
        with pytest.raises(ValueError):
            assemble_nominal_lmis(linear_model, [], decay_rate=-0.1)

    def test_expired_deadline_stops_search(self, linear_model):
        with pytest.raises(NoFeasibleOffsets, match="time budget"):
            sample_offsets(linear_model, deadline=time.monotonic() - 1.0)


class TestSurface:
    def test_fast_gain_admits_surface(self, linear_model):
        nominal = NominalDesign(W=None, Y=[], lam=[], K=[CERT_K.copy()], D=[np.zeros(1)])
        surface, solution = solve_surface(linear_model, nominal)
        assert solution.feasible
        assert np.linalg.norm(surface.P, 2) == pytest.approx(1.0)
        R1, R2 = selectors(1, 1)
        assert np.allclose(surface.S_bar, R2.T @ surface.P)
        # S_u = R₂ᵀPR₂ ≻ 0
        assert surface.S_u[0, 0] > 0.0

    def test_certificate_satisfies_surface_lmis(self, linear_model, certified_design):
        problem = assemble_surface_lmis(linear_model, certified_design.nominal)
        report = check_residuals(problem, {"P": certified_design.surface.P, "eta0": 100.0})
        assert report.passed

    def test_gain_shape_checked(self, linear_model):
        nominal = NominalDesign(W=None, Y=[], lam=[], K=[np.zeros((1, 3))], D=[np.zeros(1)])
        with pytest.raises(ShapeError):
            assemble_surface_lmis(linear_model, nominal)

    def test_origin_bound_ceiling(self, linear_model, chua_model):
        pendulum = get_system("pendulum")
        model = build_pwa_model(pendulum, PartitionSpec.single(pendulum), bounds=ErrorBounds(0.0, 0.0, 0.0))
        # ẋ₁ = x₂ 행은 입력을 받지 않는다
        assert origin_bound_ceiling(model) == pytest.approx(1.0, abs=1e-6)
        assert origin_bound_ceiling(chua_model) == pytest.approx(0.488, abs=1e-3)
        assert origin_bound_ceiling(linear_model) == float("inf")

    def test_bound_above_ceiling_is_infeasible_for_any_gain(self):
        double = NonlinearSystem("double", 2, 1, lambda x, u: np.array([x[1], u[0]]),
                                 [-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        model = build_pwa_model(double, PartitionSpec.single(double), bounds=ErrorBounds(1.2, 0.0, 0.0))
        assert origin_bound_ceiling(model) == pytest.approx(1.0, abs=1e-6)
        for alpha in (0.0, 5.0):
            nominal, solution = solve_nominal(model, [], decay_rate=alpha)
            assert solution.feasible
            surface, solution = solve_surface(model, nominal)
            assert surface is None
            assert not solution.feasible

    def test_pendulum_origin_slab_must_shrink(self):
        system = get_system("pendulum")
        partition = pendulum_partition(system)
        model = build_pwa_model(system, partition, samples_per_region=100)
        assert model.bounds.eps_f0 > origin_bound_ceiling(model)
        refined = build_pwa_model(system, refine_partition(partition, index=0), samples_per_region=100)
        assert refined.bounds.eps_f0 < origin_bound_ceiling(refined)


class TestDesign:
    def test_reaching_offsets(self):
        beta = reaching_offsets(ErrorBounds(0.1, 0.2, 0.5), np.array([[3.0, 4.0]]), 2)
        assert beta == [0.0, pytest.approx(2.5), pytest.approx(2.5)]

    def test_gamma_floor(self, certified_design, plant):
        assert select_gamma(certified_design.surface, plant, ErrorBounds(0.0, 0.0, 0.0)) == 1e-3
        raw = select_gamma(certified_design.surface, plant, ErrorBounds(0.5, 0.5, 0.0))
        assert raw == pytest.approx(0.1 * 2.0 * np.sqrt(8.0) * 0.5)

    def test_stabilizable(self, plant):
        assert stabilizable(plant)
        assert stabilizable(get_system("pendulum"))
        blocked = NonlinearSystem("blocked", 2, 1, lambda x, u: np.array([x[0], u[0]]),
                                  [-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        assert not stabilizable(blocked)

    def test_design_properties(self, certified_design):
        assert certified_design.certified
        assert np.array_equal(certified_design.S_x, [[2.0]])
        assert np.array_equal(certified_design.S_u, [[1.0]])
        assert certified_design.beta == [0.0]
        assert spectral_abscissa(certified_design.closed_loop(0)) < 0.0

    def test_document_round_trip(self, certified_design, tmp_path):
        path = save_design(certified_design, tmp_path / "controller.json")
        loaded = load_design(path)
        assert loaded.certified
        assert np.array_equal(loaded.K[0], certified_design.K[0])
        assert np.array_equal(loaded.S_bar, certified_design.S_bar)
        assert loaded.gamma == certified_design.gamma
        assert loaded.model.system.name == "scalar"

    def test_published_style_design_has_no_certificate(self, linear_model, tmp_path):
        design = make_design(linear_model, certified=False)
        loaded = load_design(save_design(design, tmp_path / "controller.json"))
        assert not loaded.certified
        assert loaded.nominal.W is None and loaded.surface.P is None

    @pytest.mark.slow
    def test_full_procedure_on_linear_plant(self, plant):
        design = design_controller(plant, PartitionSpec.single(plant),
                                   DesignOptions(samples_per_region=100, l_max=0, workers=1))
        assert design.certified
        assert design.l == 0
        assert spectral_abscissa(design.closed_loop(0)) < 0.0
        assert design.gamma == pytest.approx(1e-3)

    def test_decay_rate_survives_document(self, linear_model, tmp_path):
        design = make_design(linear_model)
        design.nominal.decay_rate = 0.5
        loaded = load_design(save_design(design, tmp_path / "controller.json"))
        assert loaded.nominal.decay_rate == 0.5

    def test_decay_rates_must_increase(self):
        with pytest.raises(ValidationError):
            DesignOptions(decay_rates=[1.0, 0.5])
        with pytest.raises(ValidationError):
            DesignOptions(decay_rates=[])
        with pytest.raises(ValidationError):
            DesignOptions(decay_rates=[-1.0, 0.0])

    def test_exhausted_budget_fails(self, plant):
        with pytest.raises(SynthesisFailed, match="time budget"):
            design_controller(plant, PartitionSpec.single(plant),
                              DesignOptions(samples_per_region=100, workers=1, time_budget=1e-9))

    def test_fixed_bound_above_ceiling_fails_fast(self):
        double = NonlinearSystem("double", 2, 1, lambda x, u: np.array([x[1], u[0]]),
                                 [-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        options = DesignOptions(samples_per_region=100, workers=1,
                                bounds={"eps_f0": 1.5, "eps_f": 0.0, "eps_g": 0.0})
        with pytest.raises(SynthesisFailed) as info:
            design_controller(double, PartitionSpec.single(double), options)
        assert len(info.value.attempts) == 1
        assert "origin block cannot hold" in info.value.attempts[0]

    @pytest.mark.slow
    def test_pendulum_synthesis_respects_budget(self):
        system = get_system("pendulum")
        started = time.monotonic()
        try:
            design = design_controller(system, pendulum_partition(system),
                                       DesignOptions(workers=1, time_budget=120.0))
        except SynthesisFailed as exc:
            assert exc.attempts
            design = None
        assert time.monotonic() - started < 240.0
        if design is not None:
            assert design.certified
            assert design.model.bounds.eps_f0 < origin_bound_ceiling(design.model)

    @pytest.mark.slow
    @pytest.mark.xfail(strict=False, reason="certification of the pendulum within the default budget is not guaranteed")
    def test_pendulum_synthesis_end_to_end(self):
        system = get_system("pendulum")
        started = time.monotonic()
        design = design_controller(system, pendulum_partition(system), DesignOptions(workers=1))
        assert time.monotonic() - started < 300.0
        fixture = get_fixture("pendulum")
        h = min(fixture.sim.h, stable_step(design, fixture.sim.sigma) or fixture.sim.h)
        config = fixture.sim.model_copy(update={"h": h})
        traj = simulate_practical(system, design, config, fixture.x0)
        assert benchmark_metrics(traj, 1.5, 6.0).passed(slide_tol=0.1, settle_tol=0.1)


class TestMargin:
    def test_factor_and_lhs(self, linear_model):
        design = make_design(linear_model, bounds=ErrorBounds(0.01, 0.1, 0.2))
        report = robustness_margin(design)
        # ‖S_u⁻¹‖ = 1, ‖S_x‖ = 2
        assert report.factor == pytest.approx(3.0)
        assert report.lhs == pytest.approx(3.0 * 0.1 + 0.2)
        assert report.weight_limit == pytest.approx(0.25)
        assert report.verdict is None

    def test_exponential_form(self, linear_model):
        design = make_design(linear_model, bounds=ErrorBounds(0.01, 0.1, 0.2))
        report = robustness_margin(design, b3=2.0, b4=1.0, lam=0.1)
        check = report.exponential
        assert check.rhs == pytest.approx((1.0 - 4.0 * 0.1) * 2.0)
        assert check.passed and report.verdict is True

    def test_weight_outside_limit(self, linear_model):
        design = make_design(linear_model, bounds=ErrorBounds(0.01, 0.1, 0.2))
        report = robustness_margin(design, rho=2.0, h=1.0, mu=0.3)
        assert not report.asymptotic.weight_admissible
        assert report.verdict is False

    def test_origin_condition(self, linear_model):
        design = make_design(linear_model, bounds=ErrorBounds(0.6, 0.0, 0.0))
        report = robustness_margin(design, b3=1.0, b4=2.0, lam=0.1)
        assert not report.exponential.origin_passed
        assert report.exponential.region_passed
