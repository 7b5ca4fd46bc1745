"""Weighted Goldbach sums in arithmetic progressions, checked against zeros of L-functions.

Set ``GOLDBACH_AP_BACKEND=numpy`` before import to bypass the numba kernels.
"""
from ._backend import BACKEND
from .arith import (
    LambdaTable,
    ProgressionPrefix,
    build_lambda_table,
    crt_combine,
    dump_lambda_table,
    euler_phi,
    load_lambda_table,
    progression_prefix,
)
from .characters import (
    CharacterGroup,
    DirichletCharacter,
    char_value,
    conductor_and_primitive,
    enumerate_characters,
    orthogonality_sum,
)
from .goldbach import (
    DecompositionReport,
    GoldbachConfig,
    assemble_report,
    gallagher_check,
    goldbach_G,
    goldbach_G_all,
    omega_construction,
    omega_scan,
    summatory_S,
)
from .lfunctions import evaluate_L, loggamma, rotated_L
from .moments import (
    MomentResult,
    explicit_psi_chi,
    power_sum_identities,
    psi_chi,
    second_moment_H,
    second_moment_K,
    sum_psi_progression,
    weighted_beta_sum,
)
from .zeros import (
    ExponentConfig,
    SiegelDatum,
    ZeroSet,
    find_zeros,
    load_zeros,
    save_zeros,
    zero_sum_H,
    zeros_for_modulus,
    zterm,
)

__version__ = "0.1.0"
