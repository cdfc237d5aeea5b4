import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from config.settings import settings
from utils.catalog_registry import IMMERSION_SCHEMA, json_pointer, schema_errors

from .report_models import SuiteName

TOLERANCE_NAMES = tuple(settings.get_tolerances())


class ConfigError(ValueError):
    """Rejected run configuration, located by a JSON pointer"""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.detail = message

# ========= Declaration Models =========

class AmbientSpec(BaseModel):
    """Registered ambient structure and its parameter"""
    name: str = Field(min_length=1)
    n: int = Field(ge=1)

    model_config = {"extra": "forbid"}


class ImmersionSpec(BaseModel):
    """Inline immersion: component expressions over named variables"""
    variables: List[str] = Field(min_length=1)
    components: List[str] = Field(min_length=3)
    domain: List[Tuple[float, float]]
    exclusions: List[str] = Field(default_factory=list)
    degeneracies: List[str] = Field(default_factory=list)

    model_config = {"extra": "forbid"}

    @field_validator('domain')
    @classmethod
    def ordered_intervals(cls, v):
        for lo, hi in v:
            if not lo < hi:
                raise ValueError(f"domain interval [{lo}, {hi}] is empty")
        return v

    @model_validator(mode='after')
    def domain_per_variable(self):
        if len(self.domain) != len(self.variables):
            raise ValueError(f"domain needs {len(self.variables)} intervals, one per variable")
        return self


class SplitSpec(BaseModel):
    """Declared D and D^θ as domain-coordinate direction vectors"""
    D: List[List[float]] = Field(default_factory=list)
    Dtheta: List[List[float]] = Field(default_factory=list)

    model_config = {"extra": "forbid"}


class WarpSpec(BaseModel):
    """Base/fiber variables and the base point where f := 1"""
    base_vars: List[str] = Field(min_length=1)
    fiber_vars: List[str] = Field(min_length=1)
    reference_point: List[float] = Field(min_length=1)

    model_config = {"extra": "forbid"}

# ========= Run Configuration =========

class RunConfig(BaseModel):
    """A catalog entry or an inline ambient + immersion, plus run parameters"""
    catalog: Optional[str] = None
    ambient: Optional[AmbientSpec] = None
    immersion: Optional[ImmersionSpec] = None
    split: Optional[SplitSpec] = None
    warp: Optional[WarpSpec] = None
    samples: int = Field(default_factory=lambda: settings.SAMPLE_COUNT, ge=1)
    seed: int = Field(default_factory=lambda: settings.RANDOM_SEED)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    suites: List[SuiteName] = Field(default_factory=list)

    model_config = {"extra": "forbid"}

    @field_validator('tolerances')
    @classmethod
    def known_positive_tolerances(cls, v):
        for name, value in v.items():
            if name not in TOLERANCE_NAMES:
                raise ValueError(f"unknown tolerance '{name}' (known: {', '.join(TOLERANCE_NAMES)})")
            if not value > 0.0:
                raise ValueError(f"tolerance '{name}' must be positive")
        return v

    @field_validator('suites')
    @classmethod
    def unique_suites(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("suites must not repeat")
        return v

    @model_validator(mode='after')
    def catalog_or_inline(self):
        if self.catalog is None and self.immersion is None:
            raise ValueError("either 'catalog' or 'immersion' is required")
        if self.catalog is not None and (self.immersion is not None or self.ambient is not None):
            raise ValueError("'catalog' cannot be combined with an inline ambient or immersion")
        if self.immersion is not None and self.ambient is None:
            raise ValueError("an inline immersion needs an 'ambient'")
        return self

    def effective_tolerances(self) -> Dict[str, float]:
        tolerances = settings.get_tolerances()
        tolerances.update(self.tolerances)
        return tolerances

    def inline_entry(self) -> Dict[str, Any]:
        """Catalog-shaped dictionary for an inline configuration; split and warp are applied separately"""
        entry: Dict[str, Any] = {
            "name": "inline",
            "description": "inline configuration",
            "ambient": self.ambient.model_dump(),
            "immersion": self.immersion.model_dump(),
        }
        entry["immersion"]["domain"] = [list(pair) for pair in self.immersion.domain]
        return entry

# ========= Loading =========

def load_run_config(document: Any) -> RunConfig:
    """
    Validate a parsed config document.

    Raises:
        ConfigError: first violation, with its JSON pointer
    """
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    if isinstance(document.get("immersion"), dict):
        errors = schema_errors(document["immersion"], IMMERSION_SCHEMA)
        if errors:
            pointer, message = errors[0]
            raise ConfigError(message, "/immersion" + pointer)
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first['msg'], json_pointer(first['loc'])) from e


def read_run_config(path: str) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


def parse_tolerance_overrides(items: Iterable[str]) -> Dict[str, float]:
    """NAME=VAL pairs from the command line"""
    overrides: Dict[str, float] = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ConfigError(f"expected NAME=VAL, got '{item}'", "/tolerances")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance value '{value}' is not a number", f"/tolerances/{name}")
    return overrides


__all__ = [
    'ConfigError',
    'AmbientSpec',
    'ImmersionSpec',
    'SplitSpec',
    'WarpSpec',
    'RunConfig',
    'TOLERANCE_NAMES',
    'load_run_config',
    'read_run_config',
    'parse_tolerance_overrides',
]
