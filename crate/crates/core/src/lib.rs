//! Gravity-gradient compensation for dual-species atom-interferometric tests
//! of the universality of free fall on a satellite.
//!
//! * [`orbit`]: orbit geometry and the gravity-gradient tensor
//! * [`dynamics`]: trajectories in the satellite frame and the Mach-Zehnder phase
//! * [`compensation`]: wave-vector shifts nulling the initial-condition terms
//! * [`demod`]: demodulation and shot-noise statistics
//! * [`budget`]: uncertainty ledger, integration curves, verification shots

pub mod budget;
pub mod compensation;
pub mod demod;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod orbit;
pub mod report;

pub use budget::{
    coefficient_sensitivities, differential_coefficients, ggc_residual_budget, integration_curve,
    verification_shots, BudgetLedger, Curve, CurveRow, IntegrationCurve, LedgerTerm, Mission, Parameter,
    SpeciesParams, UncertaintyInputs,
};
pub use compensation::{
    first_order_shifts, laser_to_shifts, shifts_sweep, shifts_to_laser, solve_shifts, CompensationShifts,
    LaserSettings,
};
pub use demod::{
    demodulate_continuous, demodulate_discrete, demodulation_bound, shot_noise_sigma, sigma_eta, NoiseModel,
    SignalModel, SigmaMode,
};
pub use dynamics::{
    mz_phase, phase_decomposition, propagate, FrameModel, GradientField, KinematicState, LinearAcceleration,
    PhaseDecomposition, PulseSequence, Shifts,
};
pub use error::{Error, Result};
pub use orbit::{
    gradient_tensor_at_time, gradient_tensor_circular, gradient_tensor_elliptic, rotate_tensor, tensor_spectrum,
    GradientTensor, OrbitModel, OrbitalPhase, TensorComponent, TensorMode,
};
