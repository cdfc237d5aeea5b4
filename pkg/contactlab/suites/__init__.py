# suites/__init__.py
"""
contactlab verification suites

- StructureSuite: ambient axioms, connection, frames, Gauss/Weingarten
- TangencySuite: P/F, t/f, slant function and slant identities
- SemiSlantSuite: split verification, normal split, classification
- WarpedSuite: warp recovery and mixed totally geodesic findings
- LemmasSuite: warped-product identities with explicit refusals
"""

from .base_suite import SUITE_REGISTRY, BaseSuite, SuiteResult, SuiteSummary, register_suite
from .lemmas_suite import LemmasSuite
from .semislant_suite import SemiSlantSuite
from .structure_suite import StructureSuite
from .tangency_suite import TangencySuite
from .warped_suite import WarpedSuite

__all__ = [
    # Base classes
    'BaseSuite',
    'SuiteResult',
    'SuiteSummary',
    'register_suite',

    # Suite implementations
    'StructureSuite',
    'TangencySuite',
    'SemiSlantSuite',
    'WarpedSuite',
    'LemmasSuite',

    # Suite registry
    'SUITE_REGISTRY',
    'SUITE_METADATA',
    'get_all_suites',
    'get_suite_by_name',
    'create_suite_instance',
]


def get_all_suites():
    """Get all registered suite classes"""
    return SUITE_REGISTRY


def get_suite_by_name(suite_name: str):
    """Get suite class by name"""
    return SUITE_REGISTRY.get(str(getattr(suite_name, 'value', suite_name)).lower())


def create_suite_instance(suite_name: str) -> BaseSuite:
    """Create an instance of a suite by name"""
    suite_class = get_suite_by_name(suite_name)
    if suite_class:
        return suite_class()
    raise ValueError(f"Suite '{suite_name}' not found in registry")


# Suite metadata for easy reference
SUITE_METADATA = {
    name: {
        'class': suite_class,
        'description': suite_class.description,
        'requires': list(suite_class.requires),
    }
    for name, suite_class in SUITE_REGISTRY.items()
}
