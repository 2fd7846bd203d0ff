"""Randomized frameproof codes: constructions, collusion attacks, validators,
and Monte Carlo estimates of framing probability."""

from .analysis import (
    concat_design,
    concat_error_bound,
    divergence,
    binary_entropy,
    is_minimal,
    minimal_fraction_estimate,
    minimality_framing_equivalence,
    optimal_rate,
    rate_bound,
)
from .coalition import (
    Coalition,
    EnvelopeMode,
    affine_attack,
    build_envelope,
    detectable_positions,
    enumerate_envelope,
    envelope_contains,
    framing_check_assigned,
    framing_check_concatenated,
    framing_check_linear_full,
    typicality_pairs,
    typicality_t1,
    xor_attack,
)
from .ensembles import (
    Codebook,
    ConcatenatedCodeInstance,
    LinearCodeInstance,
    assign_linear_fingerprints,
    build_concatenated,
    concat_encode,
    sample_bernoulli,
    sample_linear,
)
from .field_linalg import (
    BitMatrix,
    FieldTable,
    field_table,
    gf2_nullspace_basis,
    gf2_rank,
    gf2_solve_constrained,
    gfq_add,
    gfq_inv,
    gfq_mul,
    rs_encode,
    rs_syndrome_check,
)
from .harness import ExperimentSpec, SimulationReport, report_emit, run_attack_experiment, run_framing_experiment
from .keys import BernoulliParams, ConcatParams, Ensemble, Key, LinearParams
from .validation import ValidationVerdict, validate_concatenated, validate_linear, validate_lookup
from .vectors import SymbolVector

__version__ = "0.1.0"
