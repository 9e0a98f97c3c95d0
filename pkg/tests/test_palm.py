import math

import numpy as np
import pytest

from tiny_ismpc.errors import ArtifactError, AssumptionViolation, CoverageError, EvaluationError, InvalidBounds, InvalidSlab
from tiny_ismpc.palm import (
    ErrorBounds,
    NonlinearSystem,
    PartitionSpec,
    PwaModel,
    build_pwa_model,
    get_system,
    linearize,
    locate,
    parse_partition,
    partition_of,
    refine_partition,
    region_index,
    slab_to_ellipsoid,
    validate_model,
)
from tiny_ismpc.palm.io import PwaModelDoc, load_model, parse_document, save_model
from tiny_ismpc.palm.regions import parse_scalar


def cubic_plant() -> NonlinearSystem:
    """ẋ = x³ + u, 원점 근방에서 |r| = |x|³"""
    return NonlinearSystem("cubic", 1, 1, lambda x, u: np.array([x[0] ** 3 + u[0]]), [-1.0, -1.0], [1.0, 1.0])


class TestSlabs:
    def test_ellipsoid_form(self):
        Q, f = slab_to_ellipsoid([1.0, 0.0], -1.0, 3.0)
        assert np.allclose(Q, [0.5, 0.0])
        assert f == pytest.approx(-0.5)
        # 경계 위의 점은 ‖Qx̄ + f‖ = 1
        assert abs(Q @ np.array([3.0, 7.0]) + f) == pytest.approx(1.0)
        assert abs(Q @ np.array([1.0, 0.0]) + f) == pytest.approx(0.0)

    @pytest.mark.parametrize("theta,b1,b2", [([0.0, 0.0], -1.0, 1.0), ([1.0, 0.0], 1.0, 1.0), ([1.0, 0.0], 2.0, 1.0)])
    def test_invalid_slab(self, theta, b1, b2):
        with pytest.raises(InvalidSlab):
            slab_to_ellipsoid(theta, b1, b2)

    def test_partition_boundaries_are_midpoints(self):
        system = get_system("pendulum")
        partition = parse_partition("0,pi/3,13pi/30,-pi/3,-13pi/30", system)
        assert partition.l == 4
        zero = partition.slabs[0]
        assert zero.beta1 == pytest.approx(-math.pi / 6)
        assert zero.beta2 == pytest.approx(math.pi / 6)
        assert partition.slabs[2].beta2 == pytest.approx(math.pi / 2)
        assert partition.slabs[1].beta2 == pytest.approx(23 * math.pi / 60)

    def test_refine_splits_widest_slab(self):
        system = get_system("pendulum")
        partition = parse_partition("0,pi/3,13pi/30,-pi/3,-13pi/30", system)
        refined = refine_partition(partition)
        assert refined.l == partition.l + 2
        assert refined.slabs[0].beta2 == pytest.approx(math.pi / 12)
        ordered = sorted(refined.slabs, key=lambda s: s.beta1)
        for left, right in zip(ordered, ordered[1:]):
            assert left.beta2 == pytest.approx(right.beta1)

    def test_refine_named_slab(self):
        system = get_system("pendulum")
        partition = parse_partition("0,pi/3,13pi/30,-pi/3,-13pi/30", system)
        refined = refine_partition(partition, index=2)
        assert refined.l == partition.l + 1
        assert refined.slabs[0] == partition.slabs[0]
        assert refined.slabs[2].beta1 == pytest.approx(partition.slabs[2].beta1)
        assert refined.slabs[2].beta2 == pytest.approx(refined.slabs[-1].beta1)
        assert refined.slabs[-1].beta2 == pytest.approx(math.pi / 2)
        with pytest.raises(InvalidSlab):
            refine_partition(partition, index=9)

    def test_slab_and_ellipsoid_membership_agree(self):
        system = get_system("pendulum")
        regions = parse_partition("0,pi/3,13pi/30,-pi/3,-13pi/30", system).regions()
        rng = np.random.default_rng(7)
        points = rng.uniform(system.domain_lo, system.domain_hi, size=(10000, 3))
        # 경계 위의 점 포함
        edges = [r.beta1 for r in regions] + [r.beta2 for r in regions]
        points[: 50 * len(edges), 0] = np.repeat(edges, 50)

        mismatches = 0
        for region in regions:
            for x in points:
                value = region.ellipsoid_value(x)
                if region.contains(x):
                    mismatches += value > 1.0 + 1e-12
                else:
                    mismatches += value <= 1.0 - 1e-12
        assert mismatches == 0

    def test_first_operating_point_must_be_origin(self, plant):
        with pytest.raises(InvalidSlab):
            PartitionSpec.from_operating_points([1.0, 0.0], [np.array([0.5, 0.0])], plant)

    @pytest.mark.parametrize("token,value", [
        ("82deg", math.radians(82.0)),
        ("-13pi/30", -13 * math.pi / 30),
        ("pi/3", math.pi / 3),
        ("2*pi", 2 * math.pi),
        ("0.5", 0.5),
    ])
    def test_parse_scalar(self, token, value):
        assert parse_scalar(token) == pytest.approx(value)


class TestSystem:
    def test_origin_must_be_equilibrium(self):
        with pytest.raises(AssumptionViolation):
            NonlinearSystem("shifted", 1, 1, lambda x, u: np.array([x[0] + 1.0]), [-1.0, -1.0], [1.0, 1.0])

    def test_domain_must_contain_origin(self):
        with pytest.raises(AssumptionViolation):
            NonlinearSystem("away", 1, 1, lambda x, u: np.array([x[0]]), [0.5, -1.0], [1.0, 1.0])

    def test_non_finite_dynamics(self):
        system = NonlinearSystem("pole", 1, 1, lambda x, u: np.array([x[0] / (1.0 - abs(x[0])) if abs(x[0]) < 1 else np.inf]),
                                 [-2.0, -1.0], [2.0, 1.0])
        with pytest.raises(EvaluationError):
            system.evaluate([1.5], [0.0])

    def test_unknown_system(self):
        with pytest.raises(KeyError):
            get_system("no-such-plant")


class TestModel:
    def test_linearize_linear_plant(self, plant):
        sub = linearize(plant, [0.3, -0.2])
        assert sub.A[0, 0] == pytest.approx(1.0, abs=1e-8)
        assert sub.B[0, 0] == pytest.approx(1.0, abs=1e-8)
        assert sub.C[0] == pytest.approx(0.0, abs=1e-8)

    def test_linearized_bounds_vanish_for_linear_plant(self, plant):
        model = build_pwa_model(plant, PartitionSpec.single(plant), samples_per_region=100)
        assert model.bounds.eps_f0 < 1e-8
        assert model.bounds.eps_f == 0.0
        assert model.bounds.eps_g == 0.0

    def test_pendulum_jacobian(self):
        sub = linearize(get_system("pendulum"), np.zeros(3), origin=True)
        # g / (4l/3 - m·l/(M + m))
        assert sub.A[1, 0] == pytest.approx(19.6, abs=1e-4)
        assert sub.A[0, 1] == pytest.approx(1.0, abs=1e-8)

    def test_cubic_origin_bound_covers_dense_grid(self):
        system = cubic_plant()
        model = build_pwa_model(system, PartitionSpec.single(system), samples_per_region=100)
        assert model.bounds.eps_f0 >= 1.0
        sub = model.submodels[0]
        axis = np.linspace(-1.0, 1.0, 201)
        for x in axis:
            for u in axis:
                xbar = np.array([x, u])
                r = float(np.linalg.norm(sub.residual(system, xbar)))
                assert r <= model.bounds.eps_f0 * np.linalg.norm(xbar) + 1e-12

    @pytest.mark.parametrize("seed", [3, 11])
    def test_cubic_bounds_hold_for_fresh_seed(self, seed):
        system = cubic_plant()
        partition = PartitionSpec.from_operating_points([1.0, 0.0], [[0.0, 0.0], [0.6, 0.0], [-0.6, 0.0]], system)
        model = build_pwa_model(system, partition, samples_per_region=128, seed=0)
        report = validate_model(model, system, samples_per_region=256, seed=seed)
        assert report.passed, report.failed_regions

    def test_refinement_does_not_loosen_bounds(self):
        system = cubic_plant()
        points = [[0.0, 0.0], [0.4, 0.0], [-0.4, 0.0], [0.8, 0.0], [-0.8, 0.0]]
        partition = PartitionSpec.from_operating_points([1.0, 0.0], points, system)
        history = [build_pwa_model(system, partition, samples_per_region=100).bounds]
        partition = refine_partition(partition, index=0)
        history.append(build_pwa_model(system, partition, samples_per_region=100).bounds)
        while partition.l < 8:
            partition = refine_partition(partition)
            history.append(build_pwa_model(system, partition, samples_per_region=100).bounds)

        assert partition.l == 8
        for before, after in zip(history, history[1:]):
            assert after.eps_f <= before.eps_f + 1e-12
            assert after.eps_f0 <= before.eps_f0 + 1e-12
        # 첫 분할은 원점 slab 을 절반으로
        assert history[1].eps_f0 < history[0].eps_f0

    def test_origin_submodel_has_no_offset(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, parse_partition("0,pi/3,-pi/3", system), samples_per_region=100)
        assert np.all(model.submodels[0].C == 0.0)
        assert model.submodels[1].C[1] > 0.0
        assert model.submodels[2].C[1] == pytest.approx(-model.submodels[1].C[1])

    def test_bounds_are_self_consistent(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, parse_partition("0,pi/3,-pi/3", system), samples_per_region=100, seed=0)
        assert model.bounds.eps_f0 > 0.0
        report = validate_model(model, system, samples_per_region=100, seed=0)
        assert report.passed, report.failed_regions

    def test_locate_prefers_origin_region_on_boundary(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, parse_partition("0,pi/3,-pi/3", system), samples_per_region=100)
        boundary = np.array([model.regions[0].beta2, 0.0, 0.0])
        assert locate(model, boundary) == (0, False)
        index, exited = locate(model, np.array([1.0, 0.0, 0.0]))
        assert (index, exited) == (1, False)

    def test_region_index(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, parse_partition("0,pi/3,-pi/3", system), samples_per_region=100)
        assert region_index(model, np.array([-1.2, 0.0, 0.0])) == 2
        assert region_index(model, np.zeros(3)) == 0

    def test_locate_outside_domain_clamps(self):
        system = get_system("pendulum")
        model = build_pwa_model(system, parse_partition("0,pi/3,-pi/3", system), samples_per_region=100)
        index, exited = locate(model, np.array([2.0, 0.0, 500.0]))
        assert exited
        assert index == 1

    def test_uncovered_premise_range(self, plant, linear_model):
        region = linear_model.regions[0]
        narrow = type(region).from_slab(0, region.theta, -0.5, 0.5)
        with pytest.raises(CoverageError):
            PwaModel(system=plant, regions=[narrow], submodels=linear_model.submodels)

    def test_negative_bound_rejected(self):
        with pytest.raises(InvalidBounds):
            ErrorBounds(-1.0, 0.0, 0.0)


class TestDocuments:
    def test_save_and_load(self, tmp_path):
        system = get_system("pendulum")
        partition = parse_partition("0,pi/3,-pi/3", system)
        model = build_pwa_model(system, partition, samples_per_region=100)
        path = save_model(model, tmp_path / "model.json")
        loaded = load_model(path)
        assert loaded.l == model.l
        assert loaded.bounds == model.bounds
        for a, b in zip(loaded.submodels, model.submodels):
            assert np.array_equal(a.Abar, b.Abar)
            assert np.array_equal(a.C, b.C)
        rebuilt = partition_of(loaded)
        assert [s.beta1 for s in rebuilt.slabs] == [s.beta1 for s in partition.slabs]
        assert np.allclose(rebuilt.operating_points()[1], partition.operating_points()[1])

    def test_malformed_json_reports_position(self):
        with pytest.raises(ArtifactError) as info:
            parse_document('{\n  "system": \n}', PwaModelDoc, "model.json")
        assert info.value.line == 3

    def test_schema_violation(self):
        with pytest.raises(ArtifactError):
            parse_document('{"system": {"name": "pendulum"}}', PwaModelDoc, "model.json")
