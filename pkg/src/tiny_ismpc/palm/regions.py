"""
Slab Regions
============
slab 영역 {x̄ : β1 ≤ θᵀx̄ ≤ β2} 와 퇴화 타원체 표현 ‖Q x̄ + f‖ ≤ 1,
그리고 파티션 명세 (생성 / 세분화 / 파싱).
"""

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ..errors import ArtifactError, InvalidSlab
from .system import NonlinearSystem

logger = logging.getLogger(__name__)


def slab_to_ellipsoid(theta, beta1: float, beta2: float) -> Tuple[np.ndarray, float]:
    """slab 을 퇴화 타원체 (Q, f) 로 변환: Q = 2θᵀ/(β2-β1), f = -(β2+β1)/(β2-β1)"""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if not np.any(theta):
        raise InvalidSlab("slab normal must be nonzero")
    if not beta1 < beta2:
        raise InvalidSlab(f"slab needs beta1 < beta2, got [{beta1}, {beta2}]")
    width = beta2 - beta1
    Q = 2.0 * theta / width
    f = -(beta2 + beta1) / width
    return Q, float(f)


@dataclass(frozen=True)
class Region:
    index: int
    theta: np.ndarray
    beta1: float
    beta2: float
    Q: np.ndarray
    f: float

    @classmethod
    def from_slab(cls, index: int, theta, beta1: float, beta2: float) -> "Region":
        theta = np.asarray(theta, dtype=float).reshape(-1)
        Q, f = slab_to_ellipsoid(theta, beta1, beta2)
        return cls(index=index, theta=theta, beta1=float(beta1), beta2=float(beta2), Q=Q, f=f)

    @property
    def width(self) -> float:
        return self.beta2 - self.beta1

    @property
    def center(self) -> float:
        return 0.5 * (self.beta1 + self.beta2)

    def premise(self, xbar) -> float:
        return float(self.theta @ np.asarray(xbar, dtype=float))

    def contains(self, xbar, atol: float = 0.0) -> bool:
        p = self.premise(xbar)
        return self.beta1 - atol <= p <= self.beta2 + atol

    def contains_in_interior(self, xbar) -> bool:
        p = self.premise(xbar)
        return self.beta1 < p < self.beta2

    def ellipsoid_value(self, xbar) -> float:
        """‖Q x̄ + f‖ (1 이하이면 slab 내부)"""
        return abs(float(self.Q @ np.asarray(xbar, dtype=float)) + self.f)

    def distance(self, xbar) -> float:
        """x̄ 에서 slab 까지의 거리"""
        p = self.premise(xbar)
        gap = max(self.beta1 - p, p - self.beta2, 0.0)
        return gap / float(np.linalg.norm(self.theta))


# ---------------------------------------------------------------------------
# 파티션 명세
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlabSpec:
    beta1: float
    beta2: float
    operating_point: Tuple[float, ...]


@dataclass
class PartitionSpec:
    """
    공통 법선 θ 를 갖는 slab 파티션.

    slabs[0] 은 원점을 포함하는 영역이고 동작점은 원점이다.
    """

    normal: np.ndarray
    slabs: List[SlabSpec] = field(default_factory=list)

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float).reshape(-1)
        if not np.any(self.normal):
            raise InvalidSlab("partition normal must be nonzero")
        for slab in self.slabs:
            if not slab.beta1 < slab.beta2:
                raise InvalidSlab(f"slab needs beta1 < beta2, got [{slab.beta1}, {slab.beta2}]")

    @property
    def l(self) -> int:
        return len(self.slabs) - 1

    def regions(self) -> List[Region]:
        return [Region.from_slab(i, self.normal, s.beta1, s.beta2) for i, s in enumerate(self.slabs)]

    def operating_points(self) -> List[np.ndarray]:
        return [np.asarray(s.operating_point, dtype=float) for s in self.slabs]

    @classmethod
    def from_operating_points(cls, normal, points: Sequence, system: NonlinearSystem) -> "PartitionSpec":
        """
        동작점들로부터 slab 경계 생성.

        경계는 θ 방향으로 인접한 동작점의 중점, 바깥 경계는 도메인 박스의 θ 방향 범위.
        영역 순서는 주어진 동작점 순서를 따른다 (첫 동작점은 원점).
        """
        normal = np.asarray(normal, dtype=float).reshape(-1)
        pts = [np.asarray(p, dtype=float).reshape(-1) for p in points]
        if not pts:
            raise InvalidSlab("at least one operating point is required")
        if np.any(pts[0]):
            raise InvalidSlab("the first operating point must be the origin")
        for p in pts:
            if p.shape != normal.shape:
                raise InvalidSlab(f"operating point has length {p.size}, expected {normal.size}")

        lo_extent, hi_extent = premise_extent(normal, system.domain_lo, system.domain_hi)
        premises = [float(normal @ p) for p in pts]
        order = sorted(range(len(pts)), key=lambda k: premises[k])
        sorted_vals = [premises[k] for k in order]
        for a, b in zip(sorted_vals, sorted_vals[1:]):
            if not a < b:
                raise InvalidSlab("operating points must have distinct premise values")

        bounds = {}
        for rank, k in enumerate(order):
            b1 = lo_extent if rank == 0 else 0.5 * (sorted_vals[rank - 1] + sorted_vals[rank])
            b2 = hi_extent if rank == len(order) - 1 else 0.5 * (sorted_vals[rank] + sorted_vals[rank + 1])
            bounds[k] = (b1, b2)

        slabs = [SlabSpec(bounds[k][0], bounds[k][1], tuple(pts[k].tolist())) for k in range(len(pts))]
        return cls(normal=normal, slabs=slabs)

    @classmethod
    def single(cls, system: NonlinearSystem, normal=None) -> "PartitionSpec":
        """원점 영역 하나 (l = 0)"""
        if normal is None:
            normal = np.eye(system.dim)[0]
        return cls.from_operating_points(normal, [np.zeros(system.dim)], system)


def premise_extent(normal, lo, hi) -> Tuple[float, float]:
    """박스 위에서 θᵀx̄ 의 최소/최대"""
    normal = np.asarray(normal, dtype=float)
    low = float(np.sum(np.where(normal >= 0, normal * lo, normal * hi)))
    high = float(np.sum(np.where(normal >= 0, normal * hi, normal * lo)))
    return low, high


def _point_on_normal(normal: np.ndarray, value: float) -> Tuple[float, ...]:
    return tuple((normal * (value / float(normal @ normal))).tolist())


def refine_partition(partition: PartitionSpec, index: Optional[int] = None) -> PartitionSpec:
    """
    가장 넓은 slab (index 가 주어지면 그 slab) 을 나눈다.

    원점 영역이 가장 넓으면 가운데 절반을 새 원점 영역으로 두고 양옆 두 slab 을 추가한다.
    나머지 slab 은 중점에서 이등분, 새 동작점은 각 조각의 중심.
    """
    widths = [s.beta2 - s.beta1 for s in partition.slabs]
    widest = int(np.argmax(widths)) if index is None else int(index)
    if not 0 <= widest < len(widths):
        raise InvalidSlab(f"slab index {widest} out of range for {len(widths)} slabs")
    normal = partition.normal
    slabs = list(partition.slabs)

    if widest == 0:
        zero = slabs[0]
        inner1, inner2 = 0.5 * zero.beta1, 0.5 * zero.beta2
        slabs[0] = SlabSpec(inner1, inner2, zero.operating_point)
        left = SlabSpec(zero.beta1, inner1, _point_on_normal(normal, 0.5 * (zero.beta1 + inner1)))
        right = SlabSpec(inner2, zero.beta2, _point_on_normal(normal, 0.5 * (inner2 + zero.beta2)))
        added = [s for s in (right, left) if s.beta1 < s.beta2]
        slabs.extend(added)
    else:
        old = slabs[widest]
        mid = 0.5 * (old.beta1 + old.beta2)
        slabs[widest] = SlabSpec(old.beta1, mid, _point_on_normal(normal, 0.5 * (old.beta1 + mid)))
        slabs.append(SlabSpec(mid, old.beta2, _point_on_normal(normal, 0.5 * (mid + old.beta2))))

    logger.info("refined slab %d (width %.4g): %d -> %d regions", widest, widths[widest],
                len(partition.slabs), len(slabs))
    return PartitionSpec(normal=normal.copy(), slabs=slabs)


# ---------------------------------------------------------------------------
# 파싱
# ---------------------------------------------------------------------------

class SlabDocument(BaseModel):
    beta1: float
    beta2: float
    operating_point: List[float]


class PartitionDocument(BaseModel):
    normal: List[float]
    slabs: List[SlabDocument]


_PI_RE = re.compile(r"^([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def parse_scalar(token: str) -> float:
    """'82deg', '-13pi/30', 'pi/3', '0.5' 형식의 스칼라 파싱 (각도는 라디안으로 저장)"""
    text = token.strip().lower()
    if not text:
        raise ValueError("empty value")
    if text.endswith("deg"):
        return math.radians(float(text[:-3]))
    match = _PI_RE.match(text)
    if match:
        coef_text, denom_text = match.groups()
        if coef_text in ("", "+"):
            coef = 1.0
        elif coef_text == "-":
            coef = -1.0
        else:
            coef = float(coef_text)
        denom = float(denom_text) if denom_text else 1.0
        return coef * math.pi / denom
    return float(text)


def parse_vector(text: str) -> np.ndarray:
    return np.array([parse_scalar(tok) for tok in text.split(",") if tok.strip()], dtype=float)


def parse_partition(text: str, system: NonlinearSystem, axis: int = 0) -> PartitionSpec:
    """
    파티션 명세 파싱.

    - JSON 파일 경로: PartitionDocument
    - 쉼표로 구분한 premise 값 (첫 값은 0): 좌표 axis 방향 slab
    """
    path = Path(text)
    if text.endswith(".json"):
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ArtifactError(text, f"cannot read partition file: {exc}") from exc
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ArtifactError(text, exc.msg, exc.lineno, exc.colno) from exc
        try:
            doc = PartitionDocument.model_validate(data)
        except Exception as exc:
            raise ArtifactError(text, str(exc)) from exc
        return PartitionSpec(
            normal=np.asarray(doc.normal),
            slabs=[SlabSpec(s.beta1, s.beta2, tuple(s.operating_point)) for s in doc.slabs],
        )

    values = parse_vector(text)
    normal = np.eye(system.dim)[axis]
    points = [normal * v for v in values]
    return PartitionSpec.from_operating_points(normal, points, system)


def partition_to_document(partition: PartitionSpec) -> PartitionDocument:
    return PartitionDocument(
        normal=partition.normal.tolist(),
        slabs=[SlabDocument(beta1=s.beta1, beta2=s.beta2, operating_point=list(s.operating_point))
               for s in partition.slabs],
    )
