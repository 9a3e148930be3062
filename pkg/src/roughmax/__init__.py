"""Numerical toolkit for maximal averages along floor-of-smooth-growth
integer sequences: growth functions and their inverses, the generated
integer sets, smoothed kernels and their autocorrelation decomposition,
phase-sum bounds, weak-type diagnostics with a dyadic stopping-time
decomposition, and averages on finite dynamical systems.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateError,
    DomainError,
    EmptyRangeError,
    FloorAmbiguityError,
    InsufficientDataError,
    PreconditionError,
    RangeError,
    RoughMaxError,
    SequenceOverflowError,
    SignalSizeError,
    SingularityError,
    ValidationError,
)
from .growth import (
    AuxFunctionReport,
    GrowthFunction,
    InverseFunction,
    Variant,
    build_aux_report,
    identity_growth,
    make_growth,
)
from .seqset import (
    SequenceSet,
    contains_via_inverse,
    contains_via_inverse_batch,
    count,
    floor_neg_phi,
    generate,
    verify_membership_equivalence,
    weighted_exp_sum,
)
from .signals import Signal, autocorrelation_signal, convolve
from .kernel import (
    DecompositionReport,
    Kernel,
    Normalization,
    autocorrelation,
    build_kernel,
    compute_gn,
    decomposition_report,
    estimate_chi,
    eta,
    gn_profile,
)
from .expsum import (
    ExpSumResult,
    SawtoothTruncation,
    abel_sum,
    coefficient_bound,
    min_norm_sum,
    ratio_sweep,
    resonant_alpha,
    sawtooth,
    sawtooth_truncation,
    single_phase_sum,
    two_phase_sum,
    weighted_sum_bound_check,
)
from .maximal import (
    CZAtom,
    CZDecomposition,
    FamilyHypothesesReport,
    RefinedBadPart,
    ScaleFamily,
    build_scale_family,
    cz_decompose,
    default_lambda_grid,
    maximal_function,
    refine_bad_part,
    verify_family_hypotheses,
    weak_type_profile,
)
from .ergodic import (
    FiniteSystem,
    cyclic_shift,
    ergodic_average,
    identity_system,
    indicator,
    oscillation_diagnostic,
    random_permutation,
    weighted_average,
)
