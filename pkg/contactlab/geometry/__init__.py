# geometry/__init__.py
"""
contactlab geometry layer

- ambient: almost contact metric structures, Christoffel symbols, Sasakian checks
- immersion: parsed immersions, frames, sampling, catalog entries
- tangency: P/F and t/f decompositions, slant angles and slant functions
- secondform: second fundamental form, shape operators, normal connection
- semislant: D ⊕ D^θ ⊕ ⟨ξ⟩ splits, classification, connection identities
- warped: warp recovery and the warped-product identity suite
"""

from .ambient import AmbientStructure, get_ambient
from .immersion import CatalogEntry, FramedPoint, Immersion, catalog, catalog_list, frame_at, sample_points
from .secondform import SecondFormData, second_form, shape_operator
from .semislant import DistributionSplit, build_split, classify, verify_split
from .tangency import pf_decompose, slant_angle, slant_function, tf_decompose
from .warped import LemmaReport, WarpedCandidate, detect_warp, lemma_suite

__all__ = [
    # Ambient
    'AmbientStructure',
    'get_ambient',

    # Immersions
    'Immersion',
    'FramedPoint',
    'CatalogEntry',
    'catalog',
    'catalog_list',
    'frame_at',
    'sample_points',

    # Tangency and second form
    'pf_decompose',
    'tf_decompose',
    'slant_angle',
    'slant_function',
    'SecondFormData',
    'second_form',
    'shape_operator',

    # Splits and warped products
    'DistributionSplit',
    'build_split',
    'verify_split',
    'classify',
    'WarpedCandidate',
    'detect_warp',
    'lemma_suite',
    'LemmaReport',
]
