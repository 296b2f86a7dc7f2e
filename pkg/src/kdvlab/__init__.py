"""Numerical laboratory for the KdV equation on critical-length intervals.

Discretises ``y_t + y_x + y y_x + y_xxx = 0`` with ``y(0) = y(L) = 0`` and
``y_x(L) = 0``.  Provides the spectrum of the linear part by two independent
methods and checks the reduced law ``dp/dt = -p^3/18`` at ``L = 2 pi``
by direct simulation.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    GridMismatchError,
    KdVLabError,
    NoKernelError,
    NumericalError,
    SamplingError,
    SearchFailureError,
    StepFailureError,
    WrongLengthError,
)
from .grid import Grid, GridFunction, h1_norm, h1_seminorm, inner_product, l2_norm, make_grid, sample  # noqa: E402
from .operator import OperatorMatrix, Scheme, apply, assemble_operator, dissipativity_report  # noqa: E402
from .spectrum import (  # noqa: E402
    CriticalLengthTable,
    EigenPair,
    SpectrumResult,
    characteristic_function,
    critical_lengths,
    find_eigenvalues_determinant,
    is_critical,
    kernel_vector,
    matrix_spectrum,
)
from .solver import (  # noqa: E402
    CutoffSpec,
    InitialCondition,
    SimulationConfig,
    SimulationTrace,
    cutoff_value,
    kato_check,
    nonlinear_term,
    simulate,
    step_implicit_midpoint,
)
from .manifold import (  # noqa: E402
    DECAY_COEFFICIENT,
    ManifoldReport,
    a_pde_residual,
    a_profile,
    coefficient_quadrature,
    fit_decay,
    manifold_residual,
    phi_profile,
    project_p,
    reduced_closed_form,
)
