"""Two-mode Gaussian polarization states: EPR-type criteria, optimal modes,
entanglement of formation, Stokes-operator entanglement and homodyne scans."""

from .errors import (
    DomainError,
    NonConvergenceError,
    PreconditionError,
    RegimeError,
    StandardFormError,
    TraceFormatError,
)
from .gaussian import (
    SqueezedModeParams,
    TwoModeGaussianState,
    apply_transform,
    cross_moment,
    from_covariance_matrix,
    load_state,
    make_independent_squeezed_pair,
    make_vacuum,
    quadrature_variance,
    save_state,
    to_covariance_matrix,
)
from .homodyne import HomodyneTrace, ScanEstimate, estimate_scan, emit_trace_csv, parse_trace_csv, simulate_scan
from .metrics import (
    EntanglementReport,
    correct_losses,
    criterion_xy_form,
    duan_minimize_theta,
    duan_value,
    eof_symmetric,
    find_decoupled_basis,
    maximally_correlated_modes,
    standard_form,
)
from .optics import PolarizationTransform, half_wave, pm45, quarter_wave
from .stokes import BrightBeamPair, StokesReport, lock_phase_to_squeezing, stokes_means, stokes_sum_variances

__version__ = "0.1.0"
