"""Sequestration networks, their fully open extensions and bistability witnesses."""

from .network import (
    NetworkError,
    NetworkSyntaxError,
    Reaction,
    ReactionNetwork,
    Species,
    build_sequestration,
    format_network,
    fully_open_extension,
    parse_network,
    sequestration_extension,
    stoichiometric_matrix,
)
from .massaction import (
    ModelParams,
    RateError,
    RateVector,
    conservation_substitute,
    jacobian,
    ode_rhs,
    sequestration_jacobian,
    sequestration_rhs,
)
from .region import RegionCheck, RegionError, canonical_rates, check_bistability, check_mss, sample_region
from .steady import SteadyState, newton_refine, three_states
from .stability import StabilityReport, classify, classify_state, gershgorin_discs
from .eigen import eigenvalues
from .witness import WitnessResult, find_witness, sweep, verify_witness
from .sim import Trajectory, basin_probe, integrate

__version__ = "0.1.0"
