"""Exact-arithmetic construction and verification of cellular covers of
torsion-free abelian groups at desk scale."""

__version__ = "0.1.0"

from .rankone import INF, HeightSequence, RationalGroup, baer_equivalent, type_leq
from .valuations import (
    CompletionElement,
    MultiplicativeSet,
    PrimeClass,
    independence_check,
    valuation,
)
from .groups import (
    Basis,
    ElementExpr,
    GroupPresentation,
    member,
    max_divisible_subgroup,
    purify,
    rank,
)
from .homsolver import (
    HomVerdict,
    Homomorphism,
    SearchBounds,
    end_ring,
    is_fully_invariant,
    solve_hom,
)
from .constructions import (
    CellularCandidate,
    SigmaAssignment,
    build_corner,
    build_corrected,
    build_lemma22,
    sigma_assignment,
)
from .verifier import (
    CellularReport,
    ObstructionReport,
    find_section,
    kernel_check,
    normalize_zp,
    obstruct_free_kernel,
    verify_cellular,
)
from .sweep import run_sweep
