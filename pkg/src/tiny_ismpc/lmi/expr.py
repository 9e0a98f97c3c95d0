"""
Affine Matrix Expressions
=========================
결정 변수 (스칼라 / 대칭 행렬 / 직사각 행렬) 와 블록 구조의 아핀 행렬식.

블록 (i, j) 에 넣은 항은 (j, i) 에 전치로 자동 반영된다. 대각 블록의 비대칭 항은
symmetric=True 로 X + Xᵀ 형태를 만들어 넣는다.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Tuple

import numpy as np

from ..errors import ShapeError, SymmetryError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


class VariableKind(str, Enum):
    SCALAR = "scalar"
    SYMMETRIC = "symmetric"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class DecisionVariable:
    """
    결정 변수

    positive: 스칼라는 > 0, 대칭 행렬은 ≻ 0 을 요구
    """

    name: str
    kind: VariableKind
    rows: int = 1
    cols: int = 1
    positive: bool = False

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ShapeError(f"variable '{self.name}' needs positive dimensions, got {self.rows}×{self.cols}")
        if self.kind == VariableKind.SYMMETRIC and self.rows != self.cols:
            raise ShapeError(f"symmetric variable '{self.name}' must be square")
        if self.kind == VariableKind.SCALAR and (self.rows, self.cols) != (1, 1):
            raise ShapeError(f"scalar variable '{self.name}' must be 1×1")
        if self.positive and self.kind == VariableKind.RECTANGULAR:
            raise ShapeError(f"rectangular variable '{self.name}' cannot carry a positivity requirement")

    @classmethod
    def scalar(cls, name: str, positive: bool = True) -> "DecisionVariable":
        return cls(name, VariableKind.SCALAR, 1, 1, positive)

    @classmethod
    def symmetric(cls, name: str, dim: int, positive: bool = True) -> "DecisionVariable":
        return cls(name, VariableKind.SYMMETRIC, dim, dim, positive)

    @classmethod
    def rectangular(cls, name: str, rows: int, cols: int) -> "DecisionVariable":
        return cls(name, VariableKind.RECTANGULAR, rows, cols, False)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        """자유 스칼라 개수"""
        if self.kind == VariableKind.SYMMETRIC:
            return self.rows * (self.rows + 1) // 2
        return self.rows * self.cols

    def basis(self) -> List[np.ndarray]:
        """벡터 좌표 하나당 기저 행렬 (대칭은 E_ii, E_ij + E_ji)"""
        if self.kind == VariableKind.SYMMETRIC:
            out = []
            for i, j in zip(*np.triu_indices(self.rows)):
                B = np.zeros(self.shape)
                B[i, j] = 1.0
                B[j, i] = 1.0
                out.append(B)
            return out
        out = []
        for k in range(self.size):
            B = np.zeros(self.shape)
            B.flat[k] = 1.0
            out.append(B)
        return out

    def from_vector(self, vec: np.ndarray):
        vec = np.asarray(vec, dtype=float)
        if self.kind == VariableKind.SCALAR:
            return float(vec[0])
        if self.kind == VariableKind.SYMMETRIC:
            M = np.zeros(self.shape)
            iu = np.triu_indices(self.rows)
            M[iu] = vec
            M.T[iu] = vec
            return M
        return vec.reshape(self.shape).copy()

    def to_vector(self, value) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if self.kind == VariableKind.SCALAR:
            return arr.reshape(-1)[:1].copy()
        if arr.shape != self.shape:
            raise ShapeError(f"variable '{self.name}' expects shape {self.shape}, got {arr.shape}")
        if self.kind == VariableKind.SYMMETRIC:
            return arr[np.triu_indices(self.rows)].copy()
        return arr.reshape(-1).copy()

    def initial_value(self):
        """PD 행렬은 I, 양의 스칼라는 1, 나머지는 0"""
        if self.kind == VariableKind.SCALAR:
            return 1.0 if self.positive else 0.0
        if self.kind == VariableKind.SYMMETRIC and self.positive:
            return np.eye(self.rows)
        return np.zeros(self.shape)

    def as_matrix(self, value, size: int) -> np.ndarray:
        """항 평가용 행렬 값 (스칼라는 v·I_size)"""
        if self.kind == VariableKind.SCALAR:
            return float(np.asarray(value).reshape(-1)[0]) * np.eye(size)
        return np.asarray(value, dtype=float)


@dataclass
class Term:
    """left · X · right (transpose=True 이면 left · Xᵀ · right)"""

    variable: DecisionVariable
    left: np.ndarray
    right: np.ndarray
    transpose: bool = False
    symmetric: bool = False

    def inner_size(self) -> int:
        return self.left.shape[1]

    def apply(self, X: np.ndarray) -> np.ndarray:
        core = X.T if self.transpose else X
        value = self.left @ core @ self.right
        if self.symmetric:
            value = value + value.T
        return value


@dataclass
class MatrixExpr:
    """
    블록 아핀 행렬식 E(x) = E0 + Σ placement(left · X · right)

    Args:
        block_sizes: 행/열 블록 크기 (대칭 블록 구조)
    """

    block_sizes: List[int]
    constant: np.ndarray = field(init=False)
    terms: List[Tuple[int, int, Term]] = field(default_factory=list, init=False)

    def __post_init__(self):
        self.block_sizes = [int(s) for s in self.block_sizes]
        if not self.block_sizes or any(s <= 0 for s in self.block_sizes):
            raise ShapeError(f"block sizes must be positive, got {self.block_sizes}")
        self._offsets = np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)
        self.constant = np.zeros((self.dim, self.dim))

    @property
    def dim(self) -> int:
        return int(sum(self.block_sizes))

    def block_slice(self, index: int) -> slice:
        return slice(self._offsets[index], self._offsets[index + 1])

    def _check_block(self, bi: int, bj: int, value: np.ndarray) -> None:
        expected = (self.block_sizes[bi], self.block_sizes[bj])
        if value.shape != expected:
            raise ShapeError(f"block ({bi}, {bj}) expects shape {expected}, got {value.shape}")

    def add_constant(self, bi: int, bj: int, value) -> "MatrixExpr":
        value = np.atleast_2d(np.asarray(value, dtype=float))
        self._check_block(bi, bj, value)
        self.constant[self.block_slice(bi), self.block_slice(bj)] += value
        if bi != bj:
            self.constant[self.block_slice(bj), self.block_slice(bi)] += value.T
        return self

    def add_term(self, bi: int, bj: int, variable: DecisionVariable, left=None, right=None,
                 transpose: bool = False, symmetric: bool = False) -> "MatrixExpr":
        """
        블록 (bi, bj) 에 left · X · right 추가.

        스칼라 변수는 X = v·I 로 확장되고, left/right 를 생략하면 I (스칼라는 블록 크기의 I).
        """
        rows, cols = self.block_sizes[bi], self.block_sizes[bj]
        if variable.kind == VariableKind.SCALAR:
            left = np.eye(rows) if left is None else np.atleast_2d(np.asarray(left, dtype=float))
            inner_l = left.shape[1]
            right = np.eye(inner_l) if right is None else np.atleast_2d(np.asarray(right, dtype=float))
            inner_r = right.shape[0]
            if inner_l != inner_r:
                raise ShapeError(f"scalar term on '{variable.name}' has inner sizes {inner_l} and {inner_r}")
        else:
            vr, vc = (variable.cols, variable.rows) if transpose else variable.shape
            left = np.eye(vr) if left is None else np.atleast_2d(np.asarray(left, dtype=float))
            right = np.eye(vc) if right is None else np.atleast_2d(np.asarray(right, dtype=float))
            if left.shape[1] != vr or right.shape[0] != vc:
                raise ShapeError(
                    f"term on '{variable.name}' has left {left.shape} and right {right.shape}, "
                    f"variable is {vr}×{vc}"
                )
        if (left.shape[0], right.shape[1]) != (rows, cols):
            raise ShapeError(
                f"term on '{variable.name}' produces {(left.shape[0], right.shape[1])}, "
                f"block ({bi}, {bj}) is {(rows, cols)}"
            )
        if symmetric and bi != bj:
            raise ShapeError("symmetric terms only belong on diagonal blocks")
        self.terms.append((bi, bj, Term(variable, left, right, transpose, symmetric)))
        return self

    def variables(self) -> List[DecisionVariable]:
        seen: Dict[str, DecisionVariable] = {}
        for _, _, term in self.terms:
            seen.setdefault(term.variable.name, term.variable)
        return list(seen.values())

    def _place(self, out: np.ndarray, bi: int, bj: int, value: np.ndarray) -> None:
        out[self.block_slice(bi), self.block_slice(bj)] += value
        if bi != bj:
            out[self.block_slice(bj), self.block_slice(bi)] += value.T

    def evaluate_raw(self, assignment: Mapping[str, object]) -> np.ndarray:
        """대칭화 전 평가값"""
        out = self.constant.copy()
        for bi, bj, term in self.terms:
            if term.variable.name not in assignment:
                raise ShapeError(f"assignment is missing variable '{term.variable.name}'")
            value = assignment[term.variable.name]
            if term.variable.kind == VariableKind.SCALAR:
                X = term.variable.as_matrix(value, term.inner_size())
            else:
                X = np.asarray(value, dtype=float)
                if X.shape != term.variable.shape:
                    raise ShapeError(
                        f"variable '{term.variable.name}' expects shape {term.variable.shape}, got {X.shape}"
                    )
            self._place(out, bi, bj, term.apply(X))
        return out

    def evaluate(self, assignment: Mapping[str, object]) -> np.ndarray:
        """평가 후 (E + Eᵀ)/2. 비대칭이 1e-10·max(1, ‖E‖) 를 넘으면 SymmetryError"""
        E = self.evaluate_raw(assignment)
        defect = symmetry_defect(E)
        if defect > SYMMETRY_TOL * max(1.0, float(np.linalg.norm(E, 2))):
            raise SymmetryError(f"expression is not symmetric (defect {defect:.3g})")
        return 0.5 * (E + E.T)

    def linear_parts(self, layout: Mapping[str, Tuple[int, DecisionVariable]], size: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        벡터화된 결정 변수 y 에 대한 아핀 분해 E(y) = F0 + Σ_a y_a F_a.

        Args:
            layout: 변수 이름 → (벡터 오프셋, 변수)
            size: y 의 전체 길이

        Returns:
            (F0, F): F 는 (size, dim, dim)
        """
        F = np.zeros((size, self.dim, self.dim))
        for bi, bj, term in self.terms:
            offset, variable = layout[term.variable.name]
            for k, B in enumerate(variable.basis()):
                if variable.kind == VariableKind.SCALAR:
                    X = np.eye(term.inner_size())
                else:
                    X = B
                self._place(F[offset + k], bi, bj, term.apply(X))
        F0 = 0.5 * (self.constant + self.constant.T)
        F = 0.5 * (F + np.transpose(F, (0, 2, 1)))
        return F0, F


def symmetry_defect(E: np.ndarray) -> float:
    return float(np.max(np.abs(E - E.T))) if E.size else 0.0


def fixed_matrix_expr(M) -> MatrixExpr:
    """변수 없는 상수 행렬식"""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    expr = MatrixExpr([M.shape[0]])
    expr.add_constant(0, 0, M)
    return expr
