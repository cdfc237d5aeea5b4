import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Type

# Internal imports
from geometry.immersion import CatalogEntry
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    """Standardized result of one suite at one sample point"""
    suite_name: str
    index: int
    point: List[float]
    success: bool
    residuals: Dict[str, ResidualValue]
    observables: Dict[str, float]
    execution_time: float
    errors: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization"""
        return {
            'suite_name': self.suite_name,
            'index': self.index,
            'point': self.point,
            'success': self.success,
            'residuals': self.residuals,
            'observables': self.observables,
            'execution_time': self.execution_time,
            'errors': self.errors,
        }


@dataclass
class SuiteSummary:
    """Run-level findings of a suite; any failure fails the suite verdict"""
    findings: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)


SUITE_REGISTRY: Dict[str, Type["BaseSuite"]] = {}


def register_suite(cls: Type["BaseSuite"]) -> Type["BaseSuite"]:
    SUITE_REGISTRY[cls.name.value] = cls
    return cls


class BaseSuite(ABC):
    """
    Base class for contactlab verification suites.
    A suite evaluates residuals point by point and may add run-level
    findings once every point is in.
    """

    name: SuiteName
    description: str = ""
    # prerequisites checked against the resolved run: split, warp, sasakian
    requires: Tuple[str, ...] = ()
    # residual name -> tolerance class; unlisted residuals are second order
    RESIDUAL_CLASSES: Dict[str, str] = {}

    def __init__(self):
        logger.info(f"🔧 Initialized suite: {self.name.value}")

    # ========= Abstract Methods =========

    @abstractmethod
    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        """
        Residuals and observables at one point.

        Returns:
            (residuals, observables); residuals are compared against
            tolerances, observables are reported only
        """
        pass

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        return SuiteSummary()

    # ========= Common Methods =========

    def missing_prerequisites(self, entry: CatalogEntry) -> List[str]:
        missing = []
        if 'split' in self.requires and entry.split is None:
            missing.append("split declaration")
        if 'warp' in self.requires and entry.warp is None:
            missing.append("warp declaration")
        if 'sasakian' in self.requires and not entry.ambient.sasakian:
            missing.append("Sasakian ambient")
        return missing

    def tolerance_class(self, residual: str) -> str:
        return self.RESIDUAL_CLASSES.get(residual, 'second_order')

    def tolerance_for(self, residual: str, tolerances: Dict[str, float]) -> float:
        return tolerances[self.tolerance_class(residual)]

    def log_suite_activity(self, activity: str, details: Optional[Dict[str, Any]] = None):
        """Log suite activity for debugging"""
        log_msg = f"[{self.name.value}] {activity}"
        if details:
            log_msg += f" - {details}"
        logger.info(log_msg)

    def evaluate(self, ctx: PointContext) -> SuiteResult:
        """
        evaluate_point with timing and error capture; never raises.
        Non-finite residuals are recorded as errors.
        """
        start_time = time.perf_counter()
        point = [float(x) for x in ctx.p]
        try:
            residuals, observables = self.evaluate_point(ctx)
            errors = [
                f"residual '{key}' is not finite"
                for key, value in residuals.items()
                if not isinstance(value, str) and not math.isfinite(value)
            ]
            residuals = {
                key: (value if isinstance(value, str) else float(value))
                for key, value in residuals.items()
                if isinstance(value, str) or math.isfinite(value)
            }
            observables = {key: float(value) for key, value in observables.items() if math.isfinite(value)}
            return SuiteResult(
                suite_name=self.name.value,
                index=ctx.index,
                point=point,
                success=not errors,
                residuals=residuals,
                observables=observables,
                execution_time=time.perf_counter() - start_time,
                errors=errors,
            )
        except Exception as e:
            error_msg = f"{type(e).__name__}: {e}"
            logger.error(f"[{self.name.value}] point {ctx.index} failed: {error_msg}", exc_info=True)
            return SuiteResult(
                suite_name=self.name.value,
                index=ctx.index,
                point=point,
                success=False,
                residuals={},
                observables={},
                execution_time=time.perf_counter() - start_time,
                errors=[error_msg],
            )


def worst(values, default: float = 0.0) -> float:
    """max over an iterable of residuals"""
    return max(values, default=default)


__all__ = [
    'BaseSuite',
    'SuiteResult',
    'SuiteSummary',
    'SUITE_REGISTRY',
    'register_suite',
    'worst',
]
