"""Exact finite tools around the Elekes-Szabo dichotomy.

Finite s-ary relations, recognition and reconstruction of abelian groups from
Latin hypercubes, incidence-bound arithmetic and grid-count experiments.
"""

__version__ = "0.1.0"

from esgrid.errors import (
    ESGridError,
    NotAbelianError,
    NotLatinError,
    P1Error,
    P2Error,
    RelationFormatError,
    ResourceLimitError,
)
from esgrid.groups import (
    GroupTable,
    abelian_group,
    abelian_groups,
    cyclic,
    direct_product,
    element_orders,
    groups_isomorphic,
    invariant_factors,
    verify_group_axioms,
)
from esgrid.relation import (
    FiniteRelation,
    Grid,
    P2Witness,
    check_p1,
    check_p2,
    check_p2_all,
    count_on_grid,
    fiber_degree,
    is_fiber_algebraic,
    load_relation,
    permute_coordinates,
    relabel,
    restrict,
    star_transform,
)
from esgrid.reconstruct import (
    Correspondence,
    FiberBijection,
    canonical_function,
    perp,
    reconstruct_group,
    reconstruct_ternary,
    verify_correspondence,
)

__all__ = [
    "__version__",
    "ESGridError",
    "NotAbelianError",
    "NotLatinError",
    "P1Error",
    "P2Error",
    "RelationFormatError",
    "ResourceLimitError",
    "GroupTable",
    "abelian_group",
    "abelian_groups",
    "cyclic",
    "direct_product",
    "element_orders",
    "groups_isomorphic",
    "invariant_factors",
    "verify_group_axioms",
    "FiniteRelation",
    "Grid",
    "P2Witness",
    "check_p1",
    "check_p2",
    "check_p2_all",
    "count_on_grid",
    "fiber_degree",
    "is_fiber_algebraic",
    "load_relation",
    "permute_coordinates",
    "relabel",
    "restrict",
    "star_transform",
    "Correspondence",
    "FiberBijection",
    "canonical_function",
    "perp",
    "reconstruct_group",
    "reconstruct_ternary",
    "verify_correspondence",
]
