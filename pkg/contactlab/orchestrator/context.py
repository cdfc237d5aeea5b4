"""
Run- and point-level state shared by the suites.

A PointContext computes frames, the second fundamental form, the split and
the warp data lazily, so each suite pays only for what it reads and
suites sharing a point share the work.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional

import numpy as np

from geometry.ambient import AmbientStructure, ChristoffelData, christoffel
from geometry.immersion import CatalogEntry, DeclaredSplit, FramedPoint, Immersion, WarpDeclaration, frame_at
from geometry.secondform import SecondFormData, second_form
from geometry.semislant import DistributionSplit, SplitVerification, build_split, verify_split
from geometry.tangency import PFSplit, TFSplit, pf_decompose, tf_decompose
from geometry.warped import (
    LemmaInputs,
    SlantGradient,
    WarpedCandidate,
    WarpPointData,
    prepare_lemma_inputs,
    slant_gradient,
    warp_data_at,
)
from models.report_models import SuiteName

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Resolved configuration of one run"""
    entry: CatalogEntry
    suites: List[SuiteName]
    points: np.ndarray
    seed: int
    tolerances: Dict[str, float]
    config_echo: Dict[str, object] = field(default_factory=dict)
    candidate: Optional[WarpedCandidate] = None

    @property
    def ambient(self) -> AmbientStructure:
        return self.entry.ambient

    @property
    def immersion(self) -> Immersion:
        return self.entry.immersion

    @property
    def split(self) -> Optional[DeclaredSplit]:
        return self.entry.split

    @property
    def warp(self) -> Optional[WarpDeclaration]:
        return self.entry.warp

    def tolerance(self, name: str) -> float:
        return self.tolerances[name]


class PointContext:
    """Lazily computed geometry at one sample point"""

    def __init__(self, run: RunContext, index: int, p: np.ndarray):
        self.run = run
        self.index = index
        self.p = np.asarray(p, dtype=float)

    @property
    def amb(self) -> AmbientStructure:
        return self.run.ambient

    @property
    def point_seed(self) -> int:
        return self.run.seed + self.index

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.run.seed, self.index, stream])

    @cached_property
    def fp(self) -> FramedPoint:
        return frame_at(self.run.immersion, self.amb, self.p, rank_tol=self.run.tolerance('rank'))

    @cached_property
    def connection(self) -> ChristoffelData:
        return christoffel(self.amb, self.fp.pos)

    @cached_property
    def sf(self) -> SecondFormData:
        return second_form(self.fp, self.amb, self.connection)

    @cached_property
    def pf(self) -> PFSplit:
        return pf_decompose(self.fp, self.amb)

    @cached_property
    def tf(self) -> TFSplit:
        return tf_decompose(self.fp, self.amb)

    @cached_property
    def split(self) -> DistributionSplit:
        if self.run.split is None:
            raise ValueError("no split declared for this run")
        return build_split(self.fp, self.amb, self.run.split, rank_tol=self.run.tolerance('rank'))

    @cached_property
    def verification(self) -> SplitVerification:
        return verify_split(
            self.fp,
            self.amb,
            self.split,
            self.pf,
            seed=self.point_seed,
            structural_tol=self.run.tolerance('structural'),
            angle_tol=self.run.tolerance('angle'),
            rank_tol=self.run.tolerance('rank'),
        )

    @property
    def theta(self) -> Optional[float]:
        return self.verification.theta

    @cached_property
    def warp_data(self) -> WarpPointData:
        if self.run.candidate is None:
            raise ValueError("no warp declaration for this run")
        return warp_data_at(self.run.candidate, self.amb, self.p)

    @cached_property
    def slant_gradient(self) -> SlantGradient:
        return slant_gradient(self.run.immersion, self.amb, self.run.split, self.p, self.run.tolerance('rank'), self.fp)

    @cached_property
    def lemma_inputs(self) -> LemmaInputs:
        return prepare_lemma_inputs(
            self.run.candidate,
            self.amb,
            self.fp,
            self.sf,
            self.split,
            self.warp_data,
            self.theta,
            self.slant_gradient,
            self.pf,
            tolerances=self.run.tolerances,
        )


__all__ = ['RunContext', 'PointContext']
