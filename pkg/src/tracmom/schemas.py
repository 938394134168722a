"""Pydantic request/response models for the solver service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from .linalg import ToleranceConfig
from .rank6 import SearchBudget


class ToleranceOptions(BaseModel):
    tol_rank: float = Field(default=1e-9, gt=0)
    tol_psd: float = Field(default=1e-9, gt=0)
    tol_match: float = Field(default=1e-8, gt=0)

    def to_config(self) -> ToleranceConfig:
        return ToleranceConfig(rank_tol=self.tol_rank, psd_tol=self.tol_psd,
                               match_tol=self.tol_match)


class BudgetOptions(BaseModel):
    lmi_grid: int = Field(default=5, ge=2, le=12)
    lmi_iters: int = Field(default=150, ge=10, le=5000)
    lmi_descents: int = Field(default=24, ge=1, le=500)

    def to_budget(self) -> SearchBudget:
        return SearchBudget(grid=self.lmi_grid, iters=self.lmi_iters,
                            descents=self.lmi_descents)


class AtomModel(BaseModel):
    A: list[list[float]]
    B: list[list[float]]
    density: float


class MeasureModel(BaseModel):
    atoms: list[AtomModel]


class AffineMapModel(BaseModel):
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float


class ChainModel(BaseModel):
    maps: list[AffineMapModel]
    target_case: str


class SolveRequest(BaseModel):
    beta: dict[str, float]
    tolerances: ToleranceOptions = ToleranceOptions()
    budget: BudgetOptions = BudgetOptions()


class SolveResponse(BaseModel):
    verdict: str
    kind: str
    rank: Optional[int]
    case: str
    method: str
    minimal_type: Optional[list[int]]
    uniqueness: str
    reconstruction_error: Optional[float]
    measure: Optional[MeasureModel]
    alternative_measure: Optional[MeasureModel]
    chain: Optional[ChainModel]
    diagnostics: dict


class VerifyRequest(BaseModel):
    beta: dict[str, float]
    measure: MeasureModel
    tolerances: ToleranceOptions = ToleranceOptions()


class VerifyResponse(BaseModel):
    ok: bool
    max_error: float
    tolerance: float
    moments: dict[str, dict[str, float]]


class ReduceRequest(BaseModel):
    beta: dict[str, float]
    tolerances: ToleranceOptions = ToleranceOptions()


class ReduceResponse(BaseModel):
    kind: str
    rank: int
    case: str
    chain: ChainModel
    canonical_beta: dict[str, float]


class FlatCheckRequest(BaseModel):
    beta: dict[str, float]
    relation: Optional[str] = None  # REL1..REL4; autodetected when omitted
    residual_tol: float = Field(default=1e-8, gt=0)
    tolerances: ToleranceOptions = ToleranceOptions()


class FlatCheckResponse(BaseModel):
    relation: str
    feasible: bool
    params: list[float]
    residuals: dict[str, float]
    objective: float
    m3_rank: Optional[int] = None
    m3_psd_margin: Optional[float] = None


class GenRandomRequest(BaseModel):
    case: str
    seed: int = 0


class GenRandomResponse(BaseModel):
    case: str
    seed: int
    beta: dict[str, float]
    measure: MeasureModel
