"""Request and response models for the HTTP service.

Complex numbers cross the wire as [re, im] pairs and matrices as
{rows, cols, entries} with row-major [re, im] entries, matching the
package's JSON file format.  Non-finite floats never appear: a density's
log_value is null when the value is exactly zero.
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

Pair = Tuple[float, float]


class MatrixModel(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    entries: List[Pair]

    @model_validator(mode="after")
    def _sized(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")
        return self


class ReportModel(BaseModel):
    statistic: str
    n: int
    N: int
    estimate: Pair
    std_error: float
    se_re: float
    se_im: float
    reference: Pair
    reference_kind: Literal["exact", "limit"]
    z_score: float


class CheckModel(BaseModel):
    name: str
    passed: bool
    observed: float
    bound: float
    detail: str = ""
    gated: bool = True


class ExperimentResponse(BaseModel):
    name: str
    passed: bool
    reports: List[ReportModel]
    checks: List[CheckModel]
    meta: Dict[str, Any]


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    criteria: List[ExperimentResponse]
    meta: Dict[str, Any]


class SampleRequest(BaseModel):
    n: int = Field(ge=1)
    count: int = Field(default=1, ge=1)
    seed: int = 0
    stream: int = Field(default=0, ge=0)
    method: Literal["gs", "qr"] = "gs"
    m: Optional[int] = Field(default=None, ge=1, description="truncate to the m x m block")
    scaled: bool = False


class SampleResponse(BaseModel):
    matrices: List[MatrixModel]
    meta: Dict[str, Any]


class EntriesRequest(BaseModel):
    n: int = Field(ge=2)
    samples: int = Field(default=100_000, ge=2)
    k_list: List[int] = [1, 2, 3]
    seed: int = 0
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)


class CorrelationRequest(BaseModel):
    n: int = Field(ge=2)
    samples: int = Field(default=1_000_000, ge=2)
    seed: int = 0
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)


class MixedQueryModel(BaseModel):
    a: List[int]
    b: List[int]


class TracesRequest(BaseModel):
    n_list: List[int] = [8, 16, 32]
    samples: int = Field(default=200_000, ge=2)
    powers: List[int] = [1, 2, 3]
    k_max: int = Field(default=2, ge=1)
    mixed: List[MixedQueryModel] = []
    seed: int = 0
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    method: Literal["gs", "qr"] = "qr"


class EigenpowersRequest(BaseModel):
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    samples: int = Field(default=10_000, ge=2)
    seed: int = 0
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    allow_low_power: bool = False
    method: Literal["gs", "qr"] = "qr"


class TruncateRequest(BaseModel):
    n_list: List[int]
    m: int = Field(ge=1)
    samples: int = Field(default=10_000, ge=2)
    scaled: bool = True
    seed: int = 0
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _nonempty(self):
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        return self


class DensityRequest(BaseModel):
    kind: Literal["weyl", "truncated", "ginibre", "entry_cdf"]
    n: Optional[int] = None
    m: Optional[int] = None
    angles: Optional[List[List[float]]] = None
    points: Optional[List[List[Pair]]] = None
    x: Optional[List[float]] = None


class DensityPointModel(BaseModel):
    points: List[Pair]
    value: float
    measure: str
    log_value: Optional[float] = None


class CdfValueModel(BaseModel):
    x: float
    value: float


class DensityResponse(BaseModel):
    kind: str
    points: Optional[List[DensityPointModel]] = None
    cdf: Optional[List[CdfValueModel]] = None
    meta: Dict[str, Any]


class FormulasRequest(BaseModel):
    ns: List[int] = [2, 4, 8, 16, 32]
    ks: List[int] = [0, 1, 2, 3]
    ls: List[int] = [1, 2, 3]


class FormulaRowModel(BaseModel):
    n: Optional[int] = None
    k: Optional[int] = None
    l: Optional[int] = None
    value: float
    kind: str


class FormulasResponse(BaseModel):
    rows: List[FormulaRowModel]
    meta: Dict[str, Any]


class VerifyRequest(BaseModel):
    suite: Literal["full"] = "full"
    seed: int = 1
    samples: int = Field(default=100_000, ge=2, description="base count; pinned Ns scale with it")
    streams: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    method: Literal["gs", "qr"] = "qr"
