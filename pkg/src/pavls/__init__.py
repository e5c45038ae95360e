"""Exact local-search Proportional Approval Voting.

A library and CLI for PAV committee search with exact rational
arithmetic: the swap engine with pluggable pivoting rules, adversarial
instance families with certifiable swap sequences, synthetic samplers,
file formats, an experiment harness, and a brute-force oracle.
"""

from .core import (
    BallotClass,
    Election,
    Epsilon,
    InvalidCommitteeError,
    InvalidSwapError,
    PavlsError,
    SequenceCertificate,
    Swap,
    delta,
    harmonic,
    inverse_sequence,
    lcm_range,
    pav_score,
    validate_committee,
    validate_sequence,
)
from .search import (
    BestResponse,
    LexicographicBetterResponse,
    RunTrace,
    Scripted,
    ScriptedRunError,
    run,
)
from .constructions import (
    ConstructionError,
    GammaTooSmallError,
    HardenedParams,
    LabeledElection,
    LayeredParams,
    build_x_sequence,
    build_z_sequence,
    certify_hardened,
    delta_formula,
    e_election,
    e_t_election,
    f_election,
    gain_holds,
    hardened_election,
    layered_election,
    layered_initial_committee,
    warmup_election,
    warmup_initial_committee,
    warmup_sequence,
    x_length,
)
from .samplers import (
    Euclidean,
    ImpartialCulture,
    Resampling,
    SamplerConfig,
    SamplerError,
    sample,
)
from .formats import (
    FormatError,
    parse_native,
    parse_preflib_categorical,
    serialize_native,
    write_csv,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    aggregate,
    run_experiment,
    select_initial_committee,
)
from .oracle import (
    EnumerationCapError,
    OracleReport,
    brute_force_optimum,
    is_locally_optimal,
    min_k_gain_search,
)

__version__ = "0.1.0"
