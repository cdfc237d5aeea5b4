from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator


class Verdict(str, Enum):
    """Suite and run verdicts"""
    PASS = "pass"
    FAIL = "fail"


class SuiteName(str, Enum):
    """Verification suites a run can select"""
    STRUCTURE = "structure"
    TANGENCY = "tangency"
    SEMISLANT = "semislant"
    WARPED = "warped"
    LEMMAS = "lemmas"


class Classification(str, Enum):
    """Case labels for a verified TM = D ⊕ D^θ ⊕ ⟨ξ⟩ split"""
    POINTWISE_SLANT = "pointwise-slant"
    INVARIANT = "invariant"
    ANTI_INVARIANT = "anti-invariant"
    CONTACT_CR = "contact-CR"
    SEMI_SLANT = "semi-slant"
    PROPER_POINTWISE_SEMI_SLANT = "proper-pointwise-semi-slant"


# residual values are finite numbers or "refused: <reason>" markers
ResidualValue = Union[float, str]

# ========= Base Models =========

class BaseResponse(BaseModel):
    """Base response model with common fields"""
    success: bool
    timestamp: datetime = Field(default_factory=datetime.utcnow)
    message: Optional[str] = None


class ErrorDetail(BaseModel):
    """Error detail information"""
    code: str
    message: str
    pointer: Optional[str] = None
    details: Optional[Dict[str, Any]] = None


class ErrorResponse(BaseResponse):
    """Emitted instead of a report when the configuration is rejected"""
    success: bool = False
    error: ErrorDetail
    suggestion: Optional[str] = None
    exit_code: int = 2

# ========= Residual Models =========

class ResidualStats(BaseModel):
    """Aggregate of one residual over all points of a suite"""
    max: float = 0.0
    mean: float = 0.0
    count: int = 0
    refused: int = 0
    tolerance: float
    passed: bool

    @field_validator('max', 'mean')
    @classmethod
    def non_negative(cls, v):
        if v < 0.0:
            raise ValueError("residual aggregates are absolute values")
        return v


class PointRecord(BaseModel):
    """One row of a suite's residual table"""
    index: int = Field(ge=0)
    point: List[float]
    residuals: Dict[str, ResidualValue] = Field(default_factory=dict)
    observables: Dict[str, float] = Field(default_factory=dict)
    errors: List[str] = Field(default_factory=list)

    @field_validator('residuals')
    @classmethod
    def refusals_are_marked(cls, v):
        for key, value in v.items():
            if isinstance(value, str) and not value.startswith("refused"):
                raise ValueError(f"residual '{key}' must be a number or a refusal marker")
        return v


class SuiteReport(BaseModel):
    """Per-point table, aggregates, run-level findings and verdict of one suite"""
    suite: SuiteName
    description: str = ""
    verdict: Verdict
    stats: Dict[str, ResidualStats] = Field(default_factory=dict)
    findings: Dict[str, Any] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)
    points: List[PointRecord] = Field(default_factory=list)

    @property
    def error_count(self) -> int:
        return sum(1 for record in self.points if record.errors)

# ========= Run Report =========

class RunReport(BaseResponse):
    """Complete result of one run"""
    engine_version: str
    entry: str
    config: Dict[str, Any] = Field(default_factory=dict)
    sample_count: int = Field(ge=0)
    suites: List[SuiteReport] = Field(default_factory=list)
    classification: Optional[Classification] = None
    theta_statistics: Optional[Dict[str, Any]] = None
    verdict: Verdict
    exit_code: int = Field(ge=0, le=2)

    def suite(self, name: Union[str, SuiteName]) -> SuiteReport:
        name = SuiteName(name)
        for report in self.suites:
            if report.suite == name:
                return report
        raise KeyError(f"suite '{name.value}' not in report")

    def to_json(self, indent: Optional[int] = 2) -> str:
        return self.model_dump_json(indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.model_validate_json(text)

    def canonical_json(self) -> str:
        """Serialization without the timestamp; equal for equal config and seed"""
        return self.model_dump_json(exclude={'timestamp'})

    def residual_records(self) -> List[Dict[str, Any]]:
        """Line-delimited rows, one per (suite, point)"""
        return [
            {'suite': report.suite.value, **record.model_dump(mode='json')}
            for report in self.suites
            for record in report.points
        ]


__all__ = [
    # Enums
    'Verdict',
    'SuiteName',
    'Classification',
    'ResidualValue',

    # Responses
    'BaseResponse',
    'ErrorDetail',
    'ErrorResponse',

    # Report tables
    'ResidualStats',
    'PointRecord',
    'SuiteReport',
    'RunReport',
]
