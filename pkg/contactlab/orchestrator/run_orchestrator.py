import asyncio
import logging
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

# Internal imports
from config.settings import settings
from geometry.ambient import UnknownAmbientError
from geometry.immersion import (
    CatalogEntry,
    DeclaredSplit,
    ImmersionSpecError,
    SamplingError,
    WarpDeclaration,
    build_entry,
    catalog,
    sample_points,
    unguarded_degeneracies,
)
from geometry.warped import WarpedCandidate
from models.config_models import ConfigError, RunConfig
from models.report_models import (
    Classification,
    PointRecord,
    ResidualStats,
    RunReport,
    SuiteName,
    SuiteReport,
    Verdict,
)
from numjet.expr import ExpressionSyntaxError
from numjet.jet import JetDomainError
from suites import BaseSuite, SuiteResult, SuiteSummary, create_suite_instance
from utils.catalog_registry import UnknownCatalogEntryError

from . import ENGINE_VERSION
from .context import PointContext, RunContext

logger = logging.getLogger(__name__)

PointRow = Dict[str, SuiteResult]


class RunOrchestrator:
    """
    Runs the selected suites over the sampled points of one configuration.

    Points are evaluated concurrently in worker threads, bounded by
    MAX_CONCURRENT_POINTS; every suite sees a point through one shared
    PointContext. The report is assembled single-threaded in point order.
    """

    def __init__(self, max_concurrency: Optional[int] = None):
        self.max_concurrency = max_concurrency or settings.MAX_CONCURRENT_POINTS
        logger.info(f"🚀 Run orchestrator initialized (max {self.max_concurrency} concurrent points)")

    # ========= Resolution =========

    def resolve(self, config: RunConfig) -> Tuple[RunContext, List[BaseSuite]]:
        """
        Raises:
            ConfigError: unknown entry or ambient, malformed immersion, missing
                suite prerequisites, unguarded degeneracies, unsampleable domain
        """
        entry = self._resolve_entry(config)
        im = entry.immersion
        if im.codomain_dim != entry.ambient.dim:
            raise ConfigError(
                f"immersion has {im.codomain_dim} components, ambient dimension is {entry.ambient.dim}",
                "/immersion/components",
            )

        unguarded = unguarded_degeneracies(im)
        if unguarded:
            raise ConfigError(
                f"excluded-point predicate required: {', '.join(unguarded)} vanishes inside the domain",
                "/immersion/exclusions",
            )

        names = list(config.suites)
        if not names:
            try:
                names = [SuiteName(s) for s in entry.suites] or [SuiteName.STRUCTURE]
            except ValueError as e:
                raise ConfigError(str(e), "/suites")

        suites = [create_suite_instance(name.value) for name in names]
        for index, suite in enumerate(suites):
            missing = suite.missing_prerequisites(entry)
            if missing:
                raise ConfigError(f"suite '{suite.name.value}' requires {' and '.join(missing)}", f"/suites/{index}")

        try:
            points = sample_points(im, config.samples, config.seed)
        except SamplingError as e:
            raise ConfigError(str(e), "/immersion/domain")

        run = RunContext(
            entry=entry,
            suites=names,
            points=points,
            seed=config.seed,
            tolerances=config.effective_tolerances(),
            config_echo=config.model_dump(mode='json'),
            candidate=WarpedCandidate(im, entry.warp) if entry.warp is not None else None,
        )
        logger.info(f"🔍 Resolved '{entry.name}': {len(points)} points, suites {[n.value for n in names]}")
        return run, suites

    def _resolve_entry(self, config: RunConfig) -> CatalogEntry:
        try:
            if config.catalog is not None:
                entry = catalog(config.catalog)
            else:
                entry = build_entry(config.inline_entry())
        except UnknownCatalogEntryError as e:
            raise ConfigError(str(e), "/catalog")
        except UnknownAmbientError as e:
            raise ConfigError(str(e), "/ambient")
        except (ExpressionSyntaxError, ImmersionSpecError, JetDomainError) as e:
            raise ConfigError(str(e), "/immersion")

        if config.split is not None:
            try:
                entry.split = DeclaredSplit.from_spec(config.split.model_dump(), entry.immersion.k)
            except ImmersionSpecError as e:
                raise ConfigError(str(e), "/split")
        if config.warp is not None:
            try:
                entry.warp = WarpDeclaration.from_spec(config.warp.model_dump(), entry.immersion)
            except ImmersionSpecError as e:
                raise ConfigError(str(e), "/warp")
        return entry

    # ========= Execution =========

    async def run(self, config: RunConfig) -> RunReport:
        """Main orchestration method"""
        start_time = time.perf_counter()
        run, suites = self.resolve(config)
        logger.info(f"🎯 Starting run on '{run.entry.name}' with {len(run.points)} points")

        semaphore = asyncio.Semaphore(self.max_concurrency)

        async def evaluate(index: int, p: np.ndarray) -> PointRow:
            async with semaphore:
                return await asyncio.to_thread(self._evaluate_point, run, suites, index, p)

        rows = await asyncio.gather(
            *(evaluate(index, p) for index, p in enumerate(run.points)),
            return_exceptions=True,
        )

        # Handle any exceptions from parallel execution
        per_point: List[PointRow] = []
        for index, row in enumerate(rows):
            if isinstance(row, Exception):
                logger.error(f"❌ Point {index} failed outside the suites: {row}")
                row = self._create_error_row(suites, index, run.points[index], str(row))
            per_point.append(row)

        report = self._compile_report(run, suites, per_point)
        logger.info(
            f"{'✅' if report.verdict == Verdict.PASS else '❌'} Run finished in "
            f"{time.perf_counter() - start_time:.2f}s: verdict {report.verdict.value}"
        )
        return report

    def _evaluate_point(self, run: RunContext, suites: List[BaseSuite], index: int, p: np.ndarray) -> PointRow:
        ctx = PointContext(run, index, p)
        return {suite.name.value: suite.evaluate(ctx) for suite in suites}

    def _create_error_row(self, suites: List[BaseSuite], index: int, p: np.ndarray, error_message: str) -> PointRow:
        return {
            suite.name.value: SuiteResult(
                suite_name=suite.name.value,
                index=index,
                point=[float(x) for x in p],
                success=False,
                residuals={},
                observables={},
                execution_time=0.0,
                errors=[error_message],
            )
            for suite in suites
        }

    # ========= Report assembly =========

    def _compile_report(self, run: RunContext, suites: List[BaseSuite], per_point: List[PointRow]) -> RunReport:
        suite_reports = [self._compile_suite(run, suite, [row[suite.name.value] for row in per_point]) for suite in suites]

        classification = None
        theta_stats = None
        for report in suite_reports:
            if 'classification' in report.findings:
                classification = Classification(report.findings['classification'])
            if theta_stats is None and 'theta_statistics' in report.findings:
                theta_stats = report.findings['theta_statistics']

        verdict = Verdict.PASS if all(r.verdict == Verdict.PASS for r in suite_reports) else Verdict.FAIL
        failed = [r.suite.value for r in suite_reports if r.verdict == Verdict.FAIL]
        return RunReport(
            success=verdict == Verdict.PASS,
            message="all suites passed" if not failed else f"failed suites: {', '.join(failed)}",
            engine_version=ENGINE_VERSION,
            entry=run.entry.name,
            config={**run.config_echo, 'tolerances': run.tolerances},
            sample_count=len(run.points),
            suites=suite_reports,
            classification=classification,
            theta_statistics=theta_stats,
            verdict=verdict,
            exit_code=0 if verdict == Verdict.PASS else 1,
        )

    def _compile_suite(self, run: RunContext, suite: BaseSuite, results: List[SuiteResult]) -> SuiteReport:
        try:
            summary = suite.summarize(run, results)
        except Exception as e:
            logger.error(f"[{suite.name.value}] summary failed: {e}", exc_info=True)
            summary = SuiteSummary(failures=[f"{type(e).__name__}: {e}"])

        keys: List[str] = []
        for result in results:
            keys.extend(key for key in result.residuals if key not in keys)

        stats: Dict[str, ResidualStats] = {}
        for key in keys:
            values = [r.residuals[key] for r in results if key in r.residuals]
            numeric = [float(v) for v in values if not isinstance(v, str)]
            tolerance = suite.tolerance_for(key, run.tolerances)
            worst = max(numeric, default=0.0)
            stats[key] = ResidualStats(
                max=worst,
                mean=float(np.mean(numeric)) if numeric else 0.0,
                count=len(numeric),
                refused=len(values) - len(numeric),
                tolerance=tolerance,
                passed=worst < tolerance,
            )

        points = [
            PointRecord(
                index=r.index,
                point=r.point,
                residuals=r.residuals,
                observables=r.observables,
                errors=r.errors,
            )
            for r in results
        ]
        passed = (
            all(s.passed for s in stats.values())
            and all(r.success for r in results)
            and not summary.failures
        )
        suite.log_suite_activity(
            f"{'✅' if passed else '❌'} {len(results)} points",
            {"failed_residuals": [k for k, s in stats.items() if not s.passed], "failures": summary.failures},
        )
        return SuiteReport(
            suite=suite.name,
            description=suite.description,
            verdict=Verdict.PASS if passed else Verdict.FAIL,
            stats=stats,
            findings=summary.findings,
            failures=summary.failures,
            points=points,
        )


async def run(config: RunConfig) -> RunReport:
    """Run one configuration with default concurrency"""
    return await RunOrchestrator().run(config)


__all__ = ['RunOrchestrator', 'run', 'ConfigError']
