"""Qubit-probe measurement of oscillator characteristic functions under
Markovian decoherence: analytic signal functionals, finite-shot measurement
simulation, decoherence filtering, moment estimation, superposition-state
preparation, and a brute-force master-equation oracle."""

__version__ = "0.1.0"

from .model import (
    ConstantCoupling,
    CouplingProfile,
    DecoherenceParams,
    HarmonicCoupling,
    SampledCoupling,
    derive_rates,
    eval_coupling,
)
from .functionals import (
    FunctionalResult,
    damping_f,
    evaluate_functionals,
    f_harmonic_approx,
    lambda_functional,
    mu,
    run_budget,
    xi,
    xi_harmonic_closed,
)
from .states import (
    CatState,
    CoherentState,
    FockState,
    NumericDensityMatrix,
    ThermalState,
    chi_analytic,
    chi_numeric,
    chi_of,
    parse_state_spec,
    to_density_matrix,
)
from .oracle import (
    JointState,
    OracleConfig,
    evolve_master,
    pauli_expectations,
    plus_initial,
    postselect_qubit,
    predicted_signal,
)
from .reconstruction import (
    MeasurementRecord,
    ProtocolPoint,
    ScanResult,
    ShotPolicy,
    correct_decoherence,
    plan_point,
    scan_grid,
    simulate_runs,
    square_grid,
)
from .moments import (
    MomentFitResult,
    fit_moments,
    geometric_radii,
    quadrature_moment_analytic,
)
from .catprep import (
    MatricialChi,
    chi_prepared_cat,
    evolve_chi_e,
    evolve_chi_g,
    evolve_chi_pm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
