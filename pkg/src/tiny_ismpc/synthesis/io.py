"""
Controller Documents
====================
ControllerDesign ↔ JSON. 인증서 (P, W) 가 없는 설계 (출판된 행렬) 는 null 로 저장된다.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..errors import ArtifactError
from ..palm import NonlinearSystem, PwaModel
from ..palm.io import BoundsDoc, PwaModelDoc, bounds_from_doc, bounds_to_doc, model_from_document, model_to_document, read_document, write_document
from .design import ControllerDesign
from .nominal import NominalDesign
from .surface import SurfaceDesign

logger = logging.getLogger(__name__)

Matrix = List[List[float]]


class ControllerDoc(BaseModel):
    K: List[Matrix]
    D: List[List[float]]
    S_bar: Matrix
    S_x: Matrix
    S_u: Matrix
    gamma: float
    beta: List[float]
    bounds: BoundsDoc
    P: Optional[Matrix] = None
    W: Optional[Matrix] = None
    Y: List[Matrix] = Field(default_factory=list)
    lam: List[float] = Field(default_factory=list)
    eta0: float = 0.0
    eta: List[List[float]] = Field(default_factory=list)
    decay_rate: float = 0.0
    model: PwaModelDoc


def _matrix(value) -> Optional[Matrix]:
    return None if value is None else np.atleast_2d(np.asarray(value, dtype=float)).tolist()


def design_to_document(design: ControllerDesign) -> ControllerDoc:
    return ControllerDoc(
        K=[_matrix(K) for K in design.K],
        D=[np.asarray(d, dtype=float).reshape(-1).tolist() for d in design.D],
        S_bar=_matrix(design.S_bar),
        S_x=_matrix(design.S_x),
        S_u=_matrix(design.S_u),
        gamma=design.gamma,
        beta=list(design.beta),
        bounds=bounds_to_doc(design.bounds),
        P=_matrix(design.surface.P),
        W=_matrix(design.nominal.W),
        Y=[_matrix(Y) for Y in design.nominal.Y],
        lam=list(design.nominal.lam),
        eta0=design.surface.eta0,
        eta=[list(e) for e in design.surface.eta],
        decay_rate=design.nominal.decay_rate,
        model=model_to_document(design.model),
    )


def design_from_document(doc: ControllerDoc, model: Optional[PwaModel] = None,
                         system: Optional[NonlinearSystem] = None) -> ControllerDesign:
    """
    문서에서 설계 복원.

    Args:
        doc: 제어기 문서
        model: 따로 읽은 모델. 없으면 문서에 포함된 모델을 쓴다
        system: 모델 복원에 쓸 플랜트 (없으면 레지스트리)
    """
    if model is None:
        model = model_from_document(doc.model, system)
    N = model.n + model.m
    if len(doc.K) != model.l + 1 or len(doc.D) != model.l + 1:
        raise ArtifactError("controller", f"{len(doc.K)} gains and {len(doc.D)} offsets for a model "
                                          f"with {model.l + 1} regions")
    K = [np.asarray(k, dtype=float).reshape(model.m, N) for k in doc.K]
    D = [np.asarray(d, dtype=float).reshape(model.m) for d in doc.D]
    W = None if doc.W is None else np.asarray(doc.W, dtype=float)
    P = None if doc.P is None else np.asarray(doc.P, dtype=float)
    nominal = NominalDesign(W=W, Y=[np.asarray(y, dtype=float) for y in doc.Y], lam=list(doc.lam), K=K, D=D,
                           decay_rate=doc.decay_rate)
    surface = SurfaceDesign(P=P, S_bar=np.asarray(doc.S_bar, dtype=float), eta0=doc.eta0,
                            eta=[tuple(e) for e in doc.eta])
    if not np.allclose(surface.S_x, doc.S_x) or not np.allclose(surface.S_u, doc.S_u):
        logger.warning("stored S_x/S_u disagree with S_bar, using the split of S_bar")
    return ControllerDesign(model=model, nominal=nominal, surface=surface, gamma=doc.gamma,
                            beta=list(doc.beta), bounds=bounds_from_doc(doc.bounds))


def save_design(design: ControllerDesign, path):
    return write_document(design_to_document(design), path)


def load_design(path, model: Optional[PwaModel] = None, system: Optional[NonlinearSystem] = None) -> ControllerDesign:
    return design_from_document(read_document(path, ControllerDoc), model, system)
