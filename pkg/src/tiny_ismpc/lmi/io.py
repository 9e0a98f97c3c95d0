"""
LMI Documents
=============
FeasibilityProblem / FeasibilitySolution ↔ JSON 문서 (verify --dump 용).
"""

from typing import Dict, List, Union

import numpy as np
from pydantic import BaseModel

from .expr import DecisionVariable, MatrixExpr, Term, VariableKind
from .problem import Constraint, FeasibilityProblem, FeasibilitySolution, FeasibilityStatus, Sense

Matrix = List[List[float]]


class VariableDoc(BaseModel):
    name: str
    kind: VariableKind
    rows: int
    cols: int
    positive: bool


class TermDoc(BaseModel):
    block_row: int
    block_col: int
    variable: str
    left: Matrix
    right: Matrix
    transpose: bool = False
    symmetric: bool = False


class ConstraintDoc(BaseModel):
    name: str
    sense: Sense
    block_sizes: List[int]
    constant: Matrix
    terms: List[TermDoc]


class ProblemDoc(BaseModel):
    name: str
    variables: List[VariableDoc]
    constraints: List[ConstraintDoc]


class SolutionDoc(BaseModel):
    status: FeasibilityStatus
    margin: float
    iterations: int
    lower_bound: float
    t: float
    assignment: Dict[str, Union[float, Matrix]]


def problem_to_document(problem: FeasibilityProblem) -> ProblemDoc:
    constraints = []
    for c in problem.constraints:
        constraints.append(ConstraintDoc(
            name=c.name,
            sense=c.sense,
            block_sizes=list(c.expr.block_sizes),
            constant=c.expr.constant.tolist(),
            terms=[
                TermDoc(block_row=bi, block_col=bj, variable=term.variable.name, left=term.left.tolist(),
                        right=term.right.tolist(), transpose=term.transpose, symmetric=term.symmetric)
                for bi, bj, term in c.expr.terms
            ],
        ))
    return ProblemDoc(
        name=problem.name,
        variables=[VariableDoc(name=v.name, kind=v.kind, rows=v.rows, cols=v.cols, positive=v.positive)
                   for v in problem.variables],
        constraints=constraints,
    )


def problem_from_document(doc: ProblemDoc) -> FeasibilityProblem:
    variables = {v.name: DecisionVariable(v.name, v.kind, v.rows, v.cols, v.positive) for v in doc.variables}
    constraints = []
    for c in doc.constraints:
        expr = MatrixExpr(c.block_sizes)
        expr.constant = np.asarray(c.constant, dtype=float).reshape(expr.dim, expr.dim)
        for t in c.terms:
            expr.terms.append((t.block_row, t.block_col, Term(
                variables[t.variable],
                np.atleast_2d(np.asarray(t.left, dtype=float)),
                np.atleast_2d(np.asarray(t.right, dtype=float)),
                t.transpose,
                t.symmetric,
            )))
        constraints.append(Constraint(expr, c.sense, c.name))
    return FeasibilityProblem(variables=list(variables.values()), constraints=constraints, name=doc.name)


def _value_to_doc(value) -> Union[float, Matrix]:
    if isinstance(value, (float, int, np.floating)):
        return float(value)
    return np.asarray(value, dtype=float).tolist()


def solution_to_document(solution: FeasibilitySolution) -> SolutionDoc:
    return SolutionDoc(
        status=solution.status,
        margin=solution.margin,
        iterations=solution.iterations,
        lower_bound=solution.lower_bound,
        t=solution.t,
        assignment={name: _value_to_doc(v) for name, v in solution.assignment.items()},
    )
