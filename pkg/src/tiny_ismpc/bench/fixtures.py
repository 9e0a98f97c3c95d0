"""
Case-Study Fixtures
===================
벤치마크 플랜트, 파티션, 출판된 행렬 (K̄_i, D_i, S̄, 있으면 Ā_i, C_i), 초기 상태, 시뮬레이션 설정.

출판된 값은 인쇄된 자릿수 그대로 보관한다.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from ..config import SimConfig
from ..errors import ShapeError
from ..palm import AffineSubmodel, NonlinearSystem, PartitionSpec, PwaModel, build_pwa_model, get_system, linearize
from ..palm.io import SystemRef, dump_document, parse_document, read_document, write_document
from ..palm.regions import PartitionDocument, SlabSpec, partition_to_document
from ..synthesis import ControllerDesign, NominalDesign, SurfaceDesign, select_gamma

logger = logging.getLogger(__name__)


@dataclass
class Fixture:
    name: str
    system: NonlinearSystem
    partition: PartitionSpec
    K: List[np.ndarray]
    D: List[np.ndarray]
    S_bar: np.ndarray
    xbar0: np.ndarray
    sim: SimConfig
    A_bar: Optional[List[np.ndarray]] = None
    C: Optional[List[np.ndarray]] = None
    gamma: Optional[float] = None
    notes: str = ""

    def __post_init__(self):
        n, m = self.system.state_dim, self.system.input_dim
        N = n + m
        regions = self.partition.l + 1
        self.K = [np.atleast_2d(np.asarray(k, dtype=float)) for k in self.K]
        self.D = [np.asarray(d, dtype=float).reshape(-1) for d in self.D]
        self.S_bar = np.atleast_2d(np.asarray(self.S_bar, dtype=float))
        self.xbar0 = np.asarray(self.xbar0, dtype=float).reshape(-1)
        if len(self.K) != regions or len(self.D) != regions:
            raise ShapeError(f"{self.name}: {len(self.K)} gains and {len(self.D)} offsets for {regions} regions")
        if any(k.shape != (m, N) for k in self.K):
            raise ShapeError(f"{self.name}: every gain must be {m}×{N}")
        if any(d.shape != (m,) for d in self.D):
            raise ShapeError(f"{self.name}: every offset must have length {m}")
        if self.S_bar.shape != (m, N):
            raise ShapeError(f"{self.name}: S_bar has shape {self.S_bar.shape}, expected ({m}, {N})")
        if self.xbar0.shape != (N,):
            raise ShapeError(f"{self.name}: initial state has length {self.xbar0.size}, expected {N}")
        if self.A_bar is not None:
            self.A_bar = [np.asarray(a, dtype=float).reshape(n, N) for a in self.A_bar]
            self.C = [np.asarray(c, dtype=float).reshape(n) for c in (self.C or [np.zeros(n)] * regions)]
            if len(self.A_bar) != regions or len(self.C) != regions:
                raise ShapeError(f"{self.name}: printed submodels do not match {regions} regions")

    @property
    def x0(self) -> np.ndarray:
        return self.xbar0[: self.system.state_dim]

    def published_submodels(self) -> List[AffineSubmodel]:
        """인쇄된 Ā, C 가 있으면 그대로, 없으면 동작점 선형화"""
        n = self.system.state_dim
        points = self.partition.operating_points()
        if self.A_bar is None:
            return [linearize(self.system, p, origin=(i == 0)) for i, p in enumerate(points)]
        return [
            AffineSubmodel(A=a[:, :n], B=a[:, n:], C=c, operating_point=p)
            for a, c, p in zip(self.A_bar, self.C, points)
        ]

    def published_model(self, seed: int = 0, samples_per_region: int = 256) -> PwaModel:
        """오차 한계는 항상 실제 플랜트에 대해 추정"""
        return build_pwa_model(self.system, self.partition, samples_per_region, seed,
                               submodels=self.published_submodels())

    def published_design(self, model: Optional[PwaModel] = None, gamma: Optional[float] = None) -> ControllerDesign:
        """출판된 K̄, D, S̄ 로 만든 설계 (P, W 인증서 없음). γ 는 인자, 픽스처 값, 기본 규칙 순"""
        model = model or self.published_model()
        nominal = NominalDesign(W=None, Y=[], lam=[], K=list(self.K), D=list(self.D))
        surface = SurfaceDesign(P=None, S_bar=self.S_bar)
        if gamma is None:
            gamma = self.gamma
        if gamma is None:
            gamma = select_gamma(surface, self.system, model.bounds)
        return ControllerDesign(model=model, nominal=nominal, surface=surface, gamma=gamma)

    def region0_closed_loop(self) -> np.ndarray:
        """출판된 K̄_0 와 원점 부분모델의 공칭 폐루프 행렬"""
        sub = self.published_submodels()[0]
        n, m = self.system.state_dim, self.system.input_dim
        top = np.hstack([sub.A, sub.B])
        bottom = self.K[0]
        if bottom.shape != (m, n + m):
            raise ShapeError("region 0 gain has the wrong shape")
        return np.vstack([top, bottom])

    def printed_gain_char_poly(self) -> np.ndarray:
        """원점 영역 공칭 폐루프의 특성다항식 계수 (최고차부터)"""
        return np.real(np.poly(self.region0_closed_loop()))

    def printed_gain_spectral_abscissa(self) -> float:
        return float(np.max(np.real(np.linalg.eigvals(self.region0_closed_loop()))))


# ---------------------------------------------------------------------------
# 문서
# ---------------------------------------------------------------------------

class FixtureDoc(BaseModel):
    name: str
    system: SystemRef
    partition: PartitionDocument
    K: List[List[List[float]]]
    D: List[List[float]]
    S_bar: List[List[float]]
    xbar0: List[float]
    sim: SimConfig
    A_bar: Optional[List[List[List[float]]]] = None
    C: Optional[List[List[float]]] = None
    gamma: Optional[float] = None
    notes: str = ""


def fixture_to_document(fixture: Fixture) -> FixtureDoc:
    return FixtureDoc(
        name=fixture.name,
        system=SystemRef(name=fixture.system.name, params=dict(fixture.system.params)),
        partition=partition_to_document(fixture.partition),
        K=[k.tolist() for k in fixture.K],
        D=[d.tolist() for d in fixture.D],
        S_bar=fixture.S_bar.tolist(),
        xbar0=fixture.xbar0.tolist(),
        sim=fixture.sim,
        A_bar=None if fixture.A_bar is None else [a.tolist() for a in fixture.A_bar],
        C=None if fixture.C is None else [c.tolist() for c in fixture.C],
        gamma=fixture.gamma,
        notes=fixture.notes,
    )


def fixture_from_document(doc: FixtureDoc) -> Fixture:
    partition = PartitionSpec(
        normal=np.asarray(doc.partition.normal, dtype=float),
        slabs=[SlabSpec(s.beta1, s.beta2, tuple(s.operating_point)) for s in doc.partition.slabs],
    )
    return Fixture(
        name=doc.name,
        system=get_system(doc.system.name, doc.system.params),
        partition=partition,
        K=doc.K,
        D=doc.D,
        S_bar=doc.S_bar,
        xbar0=doc.xbar0,
        sim=doc.sim,
        A_bar=doc.A_bar,
        C=doc.C,
        gamma=doc.gamma,
        notes=doc.notes,
    )


def dump_fixture(fixture: Fixture) -> str:
    return dump_document(fixture_to_document(fixture))


def parse_fixture(text: str, source: str = "<string>") -> Fixture:
    return fixture_from_document(parse_document(text, FixtureDoc, source))


def save_fixture(fixture: Fixture, path):
    return write_document(fixture_to_document(fixture), path)


def load_fixture(path) -> Fixture:
    return fixture_from_document(read_document(path, FixtureDoc))
