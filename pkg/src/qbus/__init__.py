"""Two-bus transmon coupling architecture: synthesis, effective couplings,
gate simulation, and tolerance analysis."""

__version__ = "0.1.0"

from .capalgebra import (
    CancellationCheck,
    DropoffFit,
    InverseCapacitance,
    distance_profile,
    effective_capacitance,
    fit_dropoff,
    invert_spd,
    verify_direct_cancellation,
)
from .dynamics import (
    GateResult,
    GateSchedule,
    build_schedule,
    decoherence_error,
    hold_scan,
    optimize_hold_time,
    propagate,
    swap_error,
)
from .effective import (
    BandEdgeError,
    EffectiveHamiltonian,
    EffectiveParams,
    HybridizationError,
    analytic_effective_hamiltonian,
    analytic_jeff,
    aux_band,
    band_edges,
    effective_params,
    numeric_effective_hamiltonian,
    sweep_jeff,
)
from .montecarlo import QuantileTable, VarianceConfig, sample_realization, variance_study
from .params import (
    BusDesign,
    PhysicalConstants,
    ValidationReport,
    angular_to_ghz,
    angular_to_mhz,
    ghz_to_angular,
    kappa_max,
    validate_design,
)
from .spinmodel import (
    SectorBasis,
    SpinModel,
    hamiltonian_from_circuit,
    hamiltonian_from_design,
    sector_basis,
    sector_matrix,
)
from .synthesis import (
    CapacitanceNetwork,
    CircuitRealization,
    SynthesisError,
    assemble_capacitance_matrix,
    ground_to_coupling_ratio,
    synthesize_capacitances,
)
