"""Pydantic request/response models for the analysis endpoints.

Matrix payloads are nested lists with complex entries encoded as [re, im]
(plain numbers are read as reals); the detailed shape checks live in the
io module, which raises schema errors surfaced as HTTP 400.
"""

from __future__ import annotations

from typing import Any, List, Optional, Union

from pydantic import BaseModel, Field


class QuantumGroupPayload(BaseModel):
    name: Optional[str] = None
    blocks: Optional[List[int]] = None
    weights: Optional[List[float]] = None
    delta: Optional[List[List[Any]]] = None
    cayley: Optional[List[List[int]]] = None
    kind: Optional[str] = Field(
        default=None, description="constructor for cayley input: 'function' or 'group'"
    )

    def as_dict(self):
        return {k: v for k, v in self.model_dump().items() if v is not None}


class ElementPayload(BaseModel):
    blocks: List[int]
    weights: List[float]
    matrices: List[List[List[Any]]]

    def as_dict(self):
        return self.model_dump()


class HomPayload(BaseModel):
    target_blocks: List[int]
    target_weights: List[float]
    images: List[List[List[List[Any]]]]

    def as_dict(self):
        return self.model_dump()


class ComponentPayload(BaseModel):
    blocks: List[int]
    weights: List[float]
    state: Optional[List[List[List[Any]]]] = None

    def as_dict(self):
        return self.model_dump()


class MapPayload(BaseModel):
    blocks: List[int]
    weights: List[float]
    matrix: List[List[Any]]

    def as_dict(self):
        return self.model_dump()


class ValidateRequest(BaseModel):
    qgroup: QuantumGroupPayload


class HaarRequest(BaseModel):
    qgroup: QuantumGroupPayload


class IrrepsRequest(BaseModel):
    qgroup: QuantumGroupPayload
    include_entries: bool = False


class FourierRequest(BaseModel):
    qgroup: QuantumGroupPayload
    input: ElementPayload
    kind: str = Field(default="element", description="'element' or 'state'")


class ImproveRequest(BaseModel):
    qgroup: QuantumGroupPayload
    state: ElementPayload
    samples: int = 10000
    seed: int = 0
    tol: float = 1e-9


class RitterRequest(BaseModel):
    cayley: List[List[int]]
    support: List[int]


class SchurRequest(BaseModel):
    cayley: List[List[int]]
    values: List[Any]
    cross_check_samples: int = 2000
    seed: int = 0


class CesaroRequest(BaseModel):
    qgroup: QuantumGroupPayload
    state: ElementPayload
    iterations: int = 1000


class HopfImageRequest(BaseModel):
    qgroup: QuantumGroupPayload
    hom: HomPayload
    state: Optional[ElementPayload] = None


class FreeprodVerifyRequest(BaseModel):
    components: List[ComponentPayload]
    maps: List[MapPayload]
    q: Union[int, str] = "auto"
    max_len: int = 3
    samples: int = 200
    seed: int = 0


class SelftestRequest(BaseModel):
    seed: int = 0
    samples: int = 300


class BuildRequest(BaseModel):
    cayley: List[List[int]]
    kind: str = "function"
    name: Optional[str] = None


class AnalysisResponse(BaseModel):
    status: str = Field(
        description="ok | negative | indeterminate | invalid | inconsistent"
    )
    report: dict


class HealthResponse(BaseModel):
    status: str
    version: str
