"""Entropy densities, detailed balance, structure verification and perturbation bounds."""

from .balance import DetailedBalance, solve_detailed_balance_constant, solve_detailed_balance_pressures
from .densities import (
    BoltzmannEntropy,
    EntropyDensity,
    PotentialEntropy,
    QuadraticEntropy,
    SeparableEntropy,
    Species1D,
    VolumeFillingEntropy,
    boltzmann_entropy,
    cubic_entropy,
    keller_segel_entropy,
    log_species,
    monomial_species,
    potential_entropy,
    quadratic_entropy_from_lyapunov,
    separable_entropy_2species,
    volume_filling_entropy,
)
from .perturbation import (
    UNBOUNDED,
    perturbation_bound_constant,
    perturbation_bound_symmetric,
    perturbation_constants,
)
from .select import AUTO_ORDER, ENTROPY_KINDS, Selection, construct_entropy, detailed_balance, select_entropy
from .structure import SampleRecord, StructureReport, shifted_constant_check, verify_entropy_structure
