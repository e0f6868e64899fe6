"""Ridge-parameter selection from the root of a random-matrix characteristic function."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CopraError,
    DegenerateModelError,
    DegenerateObservationError,
    DomainError,
    InputError,
    InvalidInputError,
    NonConvergenceError,
    NumericalError,
    SingularityError,
)
from .estimators import (  # noqa: E402
    Estimate,
    Method,
    copra_estimate,
    gcv_select,
    lmmse_estimate,
    ls_estimate,
    quasiopt_select,
    rls_solve,
)
from .solver import SelectionResult, SolverConfig, estimate_epsilon, newton_solve, scan_roots  # noqa: E402
from .spectral import (  # noqa: E402
    DeltaPair,
    SpectralData,
    component_eval,
    copra_derivative,
    copra_eval,
    copra_general_eval,
    decompose,
    delta_square_case,
)
