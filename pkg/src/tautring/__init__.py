"""Exact arithmetic for tautological classes on moduli spaces of stable curves."""
from .errors import BudgetExceeded, InvalidInput, InvariantViolation, TautringError
from .graphs import (
    CanonicalLabel,
    GraphMorphism,
    StableGraph,
    ValidationReport,
    automorphism_count,
    canonical_label,
    canonicalize,
    contract_edges,
    enumerate_stable_graphs,
    isomorphisms,
    validate,
)
from .intnum import psi_intersection, vertex_integral
from .strata import Decoration, DecoratedStratum, TautClass, make_stratum
from .calculus import (
    FactoredClass,
    GluingMapSpec,
    integrate_top,
    multiply,
    pullback_forgetful,
    pullback_gluing,
    pushforward_forgetful,
    pushforward_gluing,
)

__version__ = "0.1.0"
