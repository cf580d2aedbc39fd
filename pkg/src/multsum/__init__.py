"""Partial sums of completely multiplicative functions that stay close to
their mean: sieved evaluation, discrepancy profiles, modified characters
with exact recursions, pretentious distance, window constructions, and
Dirichlet-series checks."""

__version__ = "0.1.0"

from .arith import (
    SpfTable,
    UnitGroup,
    crt_solve,
    euler_phi,
    factorize,
    kronecker,
    mobius_square,
    primes_upto,
    spf_sieve,
    squarefree_block,
    unit_group,
)
from .characters import (
    DirichletCharacter,
    GrowthWitness,
    RecursionState,
    RotationCheckResult,
    character_by_index,
    character_table,
    final_rotation_check,
    find_window_prime,
    first_nonzero_sigma,
    growth_witness,
    iterate_check,
    modified_spec,
    recursion_state,
    s_restricted,
    sigma_many,
    sigma_recursion,
    zero_sum_scan,
)
from .errors import CapacityError, InfeasibleError, SearchError
from .lab import (
    ConcentrationReport,
    GrowthProfile,
    RandomWalkSummary,
    RotationWitness,
    SquarefreePair,
    concentration_experiment,
    decade_checkpoints,
    dyadic_checkpoints,
    factorize_big,
    growth_profile,
    is_squarefree_big,
    random_walk_mc,
    rotation_witness,
    squarefree_pair,
    thread_cap,
)
from .multfun import (
    CharacterTwist,
    CoprimeIndicator,
    Liouville,
    MultFnSpec,
    One,
    PartialSumProfile,
    RandomRademacher,
    SievedRange,
    build_spec,
    eval_at,
    eval_range,
    is_exact_spec,
    is_real_spec,
    iter_blocks,
    make_spec,
    partial_sum_profile,
    prime_unit_value,
    spec_config,
    stream_profile,
)
from .pretentious import (
    DistanceResult,
    MeanValueReport,
    delange_mean,
    distance,
    f_of_q_sum,
    logmean_density,
    perturbation_constant,
)
from .series import (
    SeriesCheck,
    dirichlet_partial,
    finite_product_P,
    l_chi,
    residual_check,
    zeta,
)

__all__ = [name for name in dir() if not name.startswith("_")]
