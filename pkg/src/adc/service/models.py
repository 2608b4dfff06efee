"""Request and response shapes for the HTTP service.

Requests are strict (unknown keys rejected); responses carry nested
engine output as plain dicts where the engine already defines a stable
JSON form of its own.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class _Req(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QsRequest(_Req):
    m: int = Field(ge=1)
    demand: float | None = Field(default=None, gt=0, le=1)
    anchor: int = Field(default=1, ge=1)
    verify_closure: bool = False


class QuorumInfo(BaseModel):
    anchor: int
    rows: int
    cardinality: int
    slots: list[int]


class ClosureInfo(BaseModel):
    quorums: int
    shifts: int
    ok: bool
    witness: tuple[int, int, int] | None = None


class LoadInfo(BaseModel):
    max_load: float
    max_access_frequency: float
    floor: float


class QsResponse(BaseModel):
    m: int
    side: int
    demand: float | None
    quorum: QuorumInfo
    closure: ClosureInfo | None
    load: LoadInfo


class ScheduleRequest(_Req):
    """Exactly one of topology_text (edge-list format) or topology
    (generator / inline spec) selects the input."""

    topology_text: str | None = None
    topology: dict | None = None
    m: int | None = Field(default=None, ge=4)
    selection: Literal["determinate", "random"] = "determinate"
    k_retries: int = Field(default=1, ge=1)
    seed: int = 0


class ValidationInfo(BaseModel):
    ok: bool
    violations: list[str]


class ScheduleResponse(BaseModel):
    m: int
    phi: int
    nodes: int
    sink: int
    schedule_text: str
    validation: ValidationInfo


class SimulateRequest(_Req):
    config: dict


class SimulateResponse(BaseModel):
    report: dict


class SweepRequest(_Req):
    matrix: dict = Field(default_factory=dict)
    jobs: int = Field(default=1, ge=1)


class SweepResponse(BaseModel):
    rows: list[dict]
    csv: str
    trends: dict


class VerifyRequest(_Req):
    fast: bool = False


class CheckInfo(BaseModel):
    name: str
    passed: bool
    cases: int
    detail: str
    elapsed_s: float


class VerifyResponse(BaseModel):
    ok: bool
    elapsed_s: float
    checks: list[CheckInfo]


class HealthResponse(BaseModel):
    status: str
    version: str
