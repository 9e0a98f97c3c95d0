import numpy as np
import pytest
from scipy import linalg

from tiny_ismpc.config import SolverOptions
from tiny_ismpc.errors import ShapeError, SymmetryError
from tiny_ismpc.lmi import (
    DecisionVariable,
    FeasibilityProblem,
    FeasibilityStatus,
    MatrixExpr,
    Sense,
    check_residuals,
    fixed_matrix_expr,
    solve_feasibility,
)
from tiny_ismpc.lmi.io import problem_from_document, problem_to_document, solution_to_document


def lyapunov_problem(A: np.ndarray) -> FeasibilityProblem:
    n = A.shape[0]
    P = DecisionVariable.symmetric("P", n)
    expr = MatrixExpr([n])
    expr.add_term(0, 0, P, right=A, symmetric=True)
    problem = FeasibilityProblem(variables=[P], name="lyapunov")
    problem.add(expr, name="decrease")
    return problem


def interval_problem(lo: float, hi: float) -> FeasibilityProblem:
    """lo < s < hi"""
    s = DecisionVariable.scalar("s", positive=False)
    upper = MatrixExpr([1]).add_constant(0, 0, -hi).add_term(0, 0, s)
    lower = MatrixExpr([1]).add_constant(0, 0, lo).add_term(0, 0, s, left=[[-1.0]])
    problem = FeasibilityProblem(variables=[s], name="interval")
    problem.add(upper, name="upper")
    problem.add(lower, name="lower")
    return problem


class TestExpressions:
    def test_off_diagonal_block_mirrors(self):
        X = DecisionVariable.rectangular("X", 2, 1)
        expr = MatrixExpr([2, 1]).add_term(0, 1, X)
        E = expr.evaluate({"X": np.array([[1.0], [2.0]])})
        assert np.array_equal(E, [[0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [1.0, 2.0, 0.0]])

    def test_asymmetric_diagonal_term(self):
        Y = DecisionVariable.rectangular("Y", 2, 2)
        expr = MatrixExpr([2]).add_term(0, 0, Y)
        with pytest.raises(SymmetryError):
            expr.evaluate({"Y": np.array([[0.0, 1.0], [0.0, 0.0]])})

    def test_shape_mismatch(self):
        P = DecisionVariable.symmetric("P", 2)
        with pytest.raises(ShapeError):
            MatrixExpr([3]).add_term(0, 0, P)

    def test_duplicate_variable_names(self):
        with pytest.raises(ShapeError):
            FeasibilityProblem(variables=[DecisionVariable.scalar("a"), DecisionVariable.scalar("a")])

    def test_residuals_of_known_point(self):
        problem = lyapunov_problem(-np.eye(2))
        report = check_residuals(problem, {"P": np.eye(2)})
        assert report.passed
        assert report.row("decrease").extreme_eigenvalue == pytest.approx(-2.0)
        assert report.row("P > 0").extreme_eigenvalue == pytest.approx(1.0)
        assert report.margin == pytest.approx(1.0)

    def test_residuals_flag_violation(self):
        problem = lyapunov_problem(np.eye(2))
        report = check_residuals(problem, {"P": np.eye(2)})
        assert not report.passed
        assert [r.name for r in report.failures] == ["decrease"]

    def test_constant_expression(self):
        expr = fixed_matrix_expr([[1.0, 2.0], [2.0, -3.0]])
        assert np.array_equal(expr.evaluate({}), [[1.0, 2.0], [2.0, -3.0]])


class TestSolver:
    def test_interval_feasible(self):
        solution = solve_feasibility(interval_problem(1.0, 3.0))
        assert solution.status == FeasibilityStatus.FEASIBLE
        assert 1.0 < solution.assignment["s"] < 3.0
        # 최대 마진 해는 구간 중앙
        assert solution.assignment["s"] == pytest.approx(2.0, abs=1e-3)

    def test_interval_infeasible(self):
        solution = solve_feasibility(interval_problem(1.0, -1.0))
        assert solution.status == FeasibilityStatus.INFEASIBLE
        assert not solution.feasible
        assert solution.lower_bound > -1e-6 or solution.t > 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_lyapunov_for_stable_matrix(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((3, 3))
        A -= (np.max(np.real(np.linalg.eigvals(A))) + 0.5) * np.eye(3)
        # 안정 행렬이면 연속 Lyapunov 방정식의 해가 존재
        X = linalg.solve_continuous_lyapunov(A.T, -np.eye(3))
        assert np.all(np.linalg.eigvalsh(X) > 0.0)

        solution = solve_feasibility(lyapunov_problem(A))
        assert solution.status == FeasibilityStatus.FEASIBLE
        P = solution.assignment["P"]
        assert np.all(np.linalg.eigvalsh(P) > 0.0)
        assert np.all(np.linalg.eigvalsh(A.T @ P + P @ A) < 0.0)

    def test_lyapunov_for_unstable_matrix(self):
        A = np.diag([1.0, -1.0])
        solution = solve_feasibility(lyapunov_problem(A))
        assert solution.status == FeasibilityStatus.INFEASIBLE

    def test_iteration_cap(self):
        solution = solve_feasibility(interval_problem(1.0, 3.0), SolverOptions(max_iter=1))
        assert solution.status == FeasibilityStatus.MAX_ITERATIONS
        assert solution.iterations == 1

    def test_deterministic(self):
        a = solve_feasibility(lyapunov_problem(-np.eye(2) + np.array([[0.0, 1.0], [0.0, 0.0]])))
        b = solve_feasibility(lyapunov_problem(-np.eye(2) + np.array([[0.0, 1.0], [0.0, 0.0]])))
        assert np.array_equal(a.assignment["P"], b.assignment["P"])
        assert a.iterations == b.iterations

    def test_options_carry_no_seed(self):
        # 시작점이 고정이라 난수를 쓰지 않는다
        assert "seed" not in SolverOptions.model_fields

    @pytest.mark.parametrize("seed", range(20))
    def test_verdict_follows_spectral_abscissa(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(2, 5))
        stable = seed % 2 == 0
        G = rng.standard_normal((n, n))
        A = G - (np.max(np.real(np.linalg.eigvals(G))) + (0.5 if stable else -0.5)) * np.eye(n)

        solution = solve_feasibility(lyapunov_problem(A))
        expected = FeasibilityStatus.FEASIBLE if stable else FeasibilityStatus.INFEASIBLE
        assert solution.status == expected

        X = linalg.solve_continuous_lyapunov(A.T, -np.eye(n))
        X = 0.5 * (X + X.T)
        assert check_residuals(lyapunov_problem(A), {"P": X}).passed == stable

    @pytest.mark.parametrize("factor", [0.1, 10.0])
    def test_scaling_keeps_verdict(self, factor):
        stable = np.array([[-1.0, 2.0], [0.0, -3.0]])
        unstable = np.diag([1.0, -1.0])
        assert solve_feasibility(lyapunov_problem(factor * stable)).feasible
        assert not solve_feasibility(lyapunov_problem(factor * unstable)).feasible

        solution = solve_feasibility(interval_problem(factor * 1.0, factor * 3.0))
        assert solution.feasible
        assert solution.assignment["s"] == pytest.approx(2.0 * factor, rel=1e-3)
        assert not solve_feasibility(interval_problem(factor * 1.0, -factor * 1.0)).feasible

    def test_redundant_constraint_keeps_infeasible(self):
        problem = interval_problem(1.0, -1.0)
        s = problem.variable("s")
        problem.add(MatrixExpr([1]).add_constant(0, 0, -5.0).add_term(0, 0, s), name="loose upper")
        assert solve_feasibility(problem).status == FeasibilityStatus.INFEASIBLE

        problem = lyapunov_problem(np.diag([1.0, -1.0]))
        problem.add(problem.constraints[0].expr, name="decrease again")
        assert solve_feasibility(problem).status == FeasibilityStatus.INFEASIBLE

    def test_redundant_constraint_keeps_feasible(self):
        problem = interval_problem(1.0, 3.0)
        s = problem.variable("s")
        problem.add(MatrixExpr([1]).add_constant(0, 0, -5.0).add_term(0, 0, s), name="loose upper")
        solution = solve_feasibility(problem)
        assert solution.feasible
        assert 1.0 < solution.assignment["s"] < 3.0


class TestDocuments:
    def test_problem_document_preserves_residuals(self):
        A = np.array([[-1.0, 2.0], [0.0, -3.0]])
        problem = lyapunov_problem(A)
        restored = problem_from_document(problem_to_document(problem))
        point = {"P": np.array([[2.0, 0.5], [0.5, 1.0]])}
        original = check_residuals(problem, point)
        again = check_residuals(restored, point)
        assert [r.name for r in again.rows] == [r.name for r in original.rows]
        assert again.margin == pytest.approx(original.margin)
        assert restored.constraints[0].sense == Sense.NEGATIVE_DEFINITE

    def test_solution_document_status(self):
        solution = solve_feasibility(interval_problem(1.0, 3.0))
        doc = solution_to_document(solution)
        assert doc.status == FeasibilityStatus.FEASIBLE
        assert doc.assignment["s"] == pytest.approx(solution.assignment["s"])
