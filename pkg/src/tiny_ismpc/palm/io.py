"""
PWA Model Documents
===================
PwaModel ↔ JSON 문서 (pydantic 스키마).
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..errors import ArtifactError
from .model import AffineSubmodel, ErrorBounds, PwaModel
from .regions import Region
from .system import NonlinearSystem, get_system

logger = logging.getLogger(__name__)

Doc = TypeVar("Doc", bound=BaseModel)


class SystemRef(BaseModel):
    name: str
    params: Dict[str, float] = Field(default_factory=dict)


class DomainDoc(BaseModel):
    lo: List[float]
    hi: List[float]


class RegionDoc(BaseModel):
    theta: List[float]
    beta1: float
    beta2: float
    Q: List[float]
    f: float


class SubmodelDoc(BaseModel):
    A: List[List[float]]
    B: List[List[float]]
    C: List[float]
    op_point: List[float]


class BoundsDoc(BaseModel):
    eps_f0: float
    eps_f: float
    eps_g: float


class PwaModelDoc(BaseModel):
    system: SystemRef
    n: int
    m: int
    domain: DomainDoc
    regions: List[RegionDoc]
    submodels: List[SubmodelDoc]
    bounds: BoundsDoc


def bounds_to_doc(bounds: ErrorBounds) -> BoundsDoc:
    return BoundsDoc(eps_f0=bounds.eps_f0, eps_f=bounds.eps_f, eps_g=bounds.eps_g)


def bounds_from_doc(doc: BoundsDoc) -> ErrorBounds:
    return ErrorBounds(eps_f0=doc.eps_f0, eps_f=doc.eps_f, eps_g=doc.eps_g)


def model_to_document(model: PwaModel) -> PwaModelDoc:
    system = model.system
    return PwaModelDoc(
        system=SystemRef(name=system.name, params=dict(system.params)),
        n=model.n,
        m=model.m,
        domain=DomainDoc(lo=system.domain_lo.tolist(), hi=system.domain_hi.tolist()),
        regions=[
            RegionDoc(theta=r.theta.tolist(), beta1=r.beta1, beta2=r.beta2, Q=r.Q.tolist(), f=r.f)
            for r in model.regions
        ],
        submodels=[
            SubmodelDoc(A=s.A.tolist(), B=s.B.tolist(), C=s.C.tolist(), op_point=s.operating_point.tolist())
            for s in model.submodels
        ],
        bounds=bounds_to_doc(model.bounds),
    )


def model_from_document(doc: PwaModelDoc, system: NonlinearSystem = None) -> PwaModel:
    """
    문서에서 모델 복원. Q, f 는 (θ, β1, β2) 에서 다시 계산한다.
    system 이 없으면 레지스트리에서 이름으로 찾는다.
    """
    if system is None:
        system = get_system(doc.system.name, doc.system.params)
    if (system.state_dim, system.input_dim) != (doc.n, doc.m):
        raise ArtifactError(doc.system.name, f"document has n={doc.n}, m={doc.m} but system has "
                                             f"n={system.state_dim}, m={system.input_dim}")
    regions = [Region.from_slab(i, r.theta, r.beta1, r.beta2) for i, r in enumerate(doc.regions)]
    for region, r in zip(regions, doc.regions):
        if not np.allclose(region.Q, r.Q, rtol=1e-12, atol=0.0) or not np.isclose(region.f, r.f, rtol=1e-12, atol=1e-15):
            logger.warning("region %d: stored Q/f disagree with the slab, using recomputed values", region.index)
    submodels = [
        AffineSubmodel(
            A=np.asarray(s.A, dtype=float).reshape(doc.n, doc.n),
            B=np.asarray(s.B, dtype=float).reshape(doc.n, doc.m),
            C=np.asarray(s.C, dtype=float),
            operating_point=np.asarray(s.op_point, dtype=float),
        )
        for s in doc.submodels
    ]
    return PwaModel(system=system, regions=regions, submodels=submodels, bounds=bounds_from_doc(doc.bounds))


# ---------------------------------------------------------------------------
# 파일 입출력 (다른 모듈의 문서도 같은 함수를 쓴다)
# ---------------------------------------------------------------------------

def write_document(doc: BaseModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(doc), encoding="utf-8")
    return path


def dump_document(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(mode="json"), indent=2) + "\n"


def read_document(path, schema: Type[Doc]) -> Doc:
    """JSON 파일을 읽어 스키마로 검증. 실패 시 위치 정보가 담긴 ArtifactError."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(str(path), f"cannot read file: {exc.strerror or exc}") from exc
    return parse_document(text, schema, str(path))


def parse_document(text: str, schema: Type[Doc], source: str = "<string>") -> Doc:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(source, exc.msg, exc.lineno, exc.colno) from exc
    try:
        return schema.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ())) or "<root>"
        raise ArtifactError(source, f"{schema.__name__} field '{where}': {first.get('msg')}") from exc


def save_model(model: PwaModel, path) -> Path:
    return write_document(model_to_document(model), path)


def load_model(path, system: NonlinearSystem = None) -> PwaModel:
    return model_from_document(read_document(path, PwaModelDoc), system)
