"""valleyfit: semi-automated peak tracing and Hamiltonian fitting for
superconducting-circuit spectroscopy maps."""

__version__ = "0.1.0"

from .spectrum import (
    AxisGrid,
    Spectrum2D,
    SyntheticLineSpec,
    generate_synthetic_spectrum,
    load_spectrum,
    normalize_unit_range,
    save_spectrum,
)
from .valley_filter import (
    FilterConfig,
    FilteredImage,
    hessian_at_scale,
    multiscale_valley_response,
    scale_from_fwhm,
)
from .contours import Contour, ContourSet, filter_contours, marching_squares
from .peaks import (
    GroupAssignment,
    LorentzianParams,
    PeakSet,
    RegionMask,
    build_regions,
    extract_peaks,
    lorentzian_fit_1d,
    precision_study,
    xor_resolve,
)
from .hamiltonians import (
    BiasCalibration,
    ChargeOperators,
    CircuitParams,
    CouplingMatrix,
    EigenSolution,
    FluxoniumParams,
    RabiParams,
    TruncationConfig,
    charge_basis_operators,
    circuit_transitions,
    fluxonium_hamiltonian,
    mass_matrix,
    qubit_eigensystem,
    qubit_hamiltonian,
    rabi_hamiltonian,
    resonator_constants,
    total_hamiltonian,
    transition_frequencies,
)
from .convergence import (
    ConvergenceReport,
    charge_convergence,
    fock_convergence,
    qubit_space_convergence,
)
from .fitting import (
    FitProblem,
    FitResult,
    Observation,
    fit_circuit,
    fit_rabi,
    sample_model_curve,
)
