"""Equilibrium analysis of threshold participation games with probabilistic eligibility."""

__version__ = "0.1.0"

from .calibration import (
    CalibrationReport,
    ExpenditureComparison,
    InfeasibleTarget,
    expenditure_compare,
    r_min_all_in,
    r_min_mixed,
)
from .equilibrium import (
    EquilibriumCheck,
    EquilibriumRecord,
    GuardExceeded,
    check_lattice_closure,
    enumerate_equilibria,
    is_equilibrium,
    is_strong_equilibrium,
)
from .model import (
    Action,
    Composition,
    GameSpec,
    InvalidGameError,
    Variant,
    expected_utility,
    make_profile,
    parse_profile,
    profile_from_counts,
    profile_str,
    validate_game,
)
from .numeric import EXACT, NumericMode, format_fraction, to_exact
from .prob import (
    binomial_pmf,
    binomial_tail,
    f_term,
    poisson_binomial_pmf,
    poisson_binomial_tail,
    verify_binomial_identity,
)
from .simulation import DynamicsTrace, SimulationReport, best_response_dynamics, simulate_epochs
from .structure import (
    asymmetric_threshold_scan,
    beta_ratio_feasible_range,
    find_equilibrium_classes,
    min_contributors_bound,
    retraction_lambda_scan,
    symmetric_basic_equilibria,
    universal_basic_characterize,
    universal_retraction_scan,
)
