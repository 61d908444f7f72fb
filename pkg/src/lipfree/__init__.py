"""Exact computations in Lipschitz-free spaces over finite metric spaces.

Norms are Kantorovich-Rubinstein transport values computed by exact
rational linear programming, with a dual norming function and a primal
transport plan certifying every result.
"""

from .free import (
    FreeElement,
    FreeNormResult,
    Molecule,
    all_molecules,
    delta_set_molecules,
    extreme_molecules,
    free_dist,
    free_norm,
    molecule_distance_formula,
    molecules_in_slice,
)
from .functions import (
    LipFunction,
    annulus_case_extension,
    daugavet_recursive_construction,
    delta_hat_family,
    eval_molecule,
    flatten_at_point,
    lip_norm,
    locality_profile,
    mcshane_extend,
    nearest_point_function,
    slice_flatten,
    tail_plateau,
)
from .metric import (
    FiniteMetricSpace,
    build_example1_space,
    build_example2_space,
    build_half_line_space,
    build_hat_space,
    build_recursion_space,
    build_two_anchor_space,
    check_annulus_inequality,
    extract_separated_pairs,
    load_space,
    seg,
    validate,
)
from .reports import CertificateReport, CheckRecord
from .scalars import as_float, rat, rat_str

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "CheckRecord",
    "FiniteMetricSpace",
    "FreeElement",
    "FreeNormResult",
    "LipFunction",
    "Molecule",
    "all_molecules",
    "annulus_case_extension",
    "as_float",
    "build_example1_space",
    "build_example2_space",
    "build_half_line_space",
    "build_hat_space",
    "build_recursion_space",
    "build_two_anchor_space",
    "check_annulus_inequality",
    "daugavet_recursive_construction",
    "delta_hat_family",
    "delta_set_molecules",
    "eval_molecule",
    "extract_separated_pairs",
    "extreme_molecules",
    "flatten_at_point",
    "free_dist",
    "free_norm",
    "lip_norm",
    "load_space",
    "locality_profile",
    "mcshane_extend",
    "molecule_distance_formula",
    "molecules_in_slice",
    "nearest_point_function",
    "rat",
    "rat_str",
    "seg",
    "slice_flatten",
    "tail_plateau",
    "validate",
]
