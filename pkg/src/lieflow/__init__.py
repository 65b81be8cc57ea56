"""Jordan decompositions of derivations and the dynamics of linear vector fields."""
from .algebra import (
    LieAlgebra,
    abelian,
    ad_operator,
    bracket,
    check_jacobi,
    heisenberg,
    is_derivation,
    semidirect_algebra,
    sl,
    sl2,
)
from .cocycle import CocycleSpec, check_cocycle_identity, cocycle_eval, lemma_gamma_harness
from .grading import Grading, hyperbolic_grading, recurrence_probe_linear, recurrent_subspace
from .group_models import (
    EuclideanAbelian,
    GroupElement,
    HeisenbergExp,
    SemidirectRxR2,
    Torus2,
    catmap_discrete_counterexample,
    catmap_generator_check,
    catmap_iterate,
    group_multiply,
    linear_flow,
    recurrent_set_certificate,
    semidirect_flow,
)
from .isometry import automorphic_isometry_algebra, cartan_data_sl, normalizer, skew_on_delta
from .jordan import JordanTriple, derivation_parts, jordan_decompose, verify_jordan
from .linalg import Subspace, to_exact, to_float
from .report import Check, Report

__version__ = "0.1.0"
