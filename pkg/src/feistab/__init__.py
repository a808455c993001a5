"""feistab: a numerical stability lab for the multiplicative-type
information equation.

The package measures how far a function is from solving

    f(x) + M(1-x) f(y/(1-x)) = f(y) + M(1-y) f(x/(1-y))

on grids over the pair domain, fits the nearest closed-form solution
constructively, and checks the guaranteed pointwise stability bounds, both
for single functions and for recursive measure families on probability
simplices. ``feistab._kernels.BACKEND`` reports whether the compiled kernel
core or the numpy fallback is live.
"""

from ._kernels import BACKEND
from .domain import (
    DkPair,
    KVec,
    SimplexTuple,
    cube_grid,
    dk_grid,
    interior_grid,
    safe_div,
    simplex_grid,
)
from .errors import (
    ConfigError,
    DegenerateWitness,
    DomainViolation,
    EvaluationOutsideTable,
    FeistabError,
    NonzeroOverZero,
    NoWitness,
)
from .feim import (
    Exact,
    F_eval,
    Fcn,
    K_bound,
    Perturbed,
    StabilityCertificate,
    Tabulated,
    certify,
    construct_ab,
    feim_residual,
    residual_support,
    sup_F,
    sup_residual,
    uniform_bound,
)
from .harness import (
    NoiseSpec,
    default_config,
    minimax_fit,
    perturb,
    random_certify_cases,
    run_suite,
)
from .measures import (
    ExactJ,
    JFamily,
    MeasureFamily,
    PerturbedLevels,
    Recursive,
    SystemCertificate,
    certify_system,
    derive_f,
    measure_eval,
    recursivity_defect,
    semisymmetry_defect,
    system_bound,
)
from .multiplicative import (
    ONE,
    ZERO,
    Atom,
    Classification,
    Family,
    MultiplicativeSpec,
    additivity_defect,
    classify,
    dk_additivity_defect,
    find_witness,
    power,
    powers,
    upper_bound,
)

__version__ = "0.1.0"
