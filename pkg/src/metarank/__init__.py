"""Meta-ranks, meta-diagrams and signed barcodes of simplex-wise bifiltrations."""
from __future__ import annotations

from .bifiltration import (BifiltrationError, GradedComplex, GradeMap, ParseError, RawSimplex, disjoint_union,
                           load_bifiltration, parse_bifiltration, refine_to_simplexwise, transpose_axes)
from .metrics import dominates, erosion_mdgm, erosion_mrk, to_real_barcode, truncate
from .mrk import MetaRankTable, compute_metarank
from .reduction import InvariantError
from .signed import (MetaDiagram, RankDecomposition, SignedBarcode, canonicalize, mobius_invert, mrk_from_mdgm,
                     rank_decomposition)

__all__ = [
    "BifiltrationError", "GradedComplex", "GradeMap", "InvariantError", "MetaDiagram", "MetaRankTable",
    "ParseError", "RankDecomposition", "RawSimplex", "SignedBarcode", "canonicalize", "compute_metarank",
    "disjoint_union", "dominates", "erosion_mdgm", "erosion_mrk", "load_bifiltration", "mobius_invert",
    "mrk_from_mdgm", "parse_bifiltration", "rank_decomposition", "refine_to_simplexwise", "to_real_barcode",
    "transpose_axes", "truncate",
]
