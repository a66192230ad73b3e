//! Systematic differential-acceleration ledger, its demodulated integration
//! over a mission, and the verification-shot calculator.
//!
//! Coefficients are normalized by the scale factor of each species:
//! `c = α / (k_eff T²)` (s⁻²) multiplies the initial position and
//! `d = β / (k_eff T²)` (s⁻¹) the initial velocity. For two species starting
//! at `r_A = r̄ + Δr/2`, `r_B = r̄ - Δr/2`,
//!
//! ```text
//! Δa = ½(c_A + c_B)·Δr + (c_A - c_B)·r̄ + (same for velocity)
//! ```
//!
//! The ledger propagates uncertainties through the common-mode part
//! `c̄ = ½(c_A + c_B)`, which is what couples the co-location error `Δr` into
//! the differential signal. The differential part `α' = c_A - c_B` is exposed
//! by [`differential_coefficients`]; it vanishes identically for equal `T`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::compensation::{laser_frequency, solve_shifts_with_flow, first_order_shifts, uniform_chi_grid};
use crate::demod::{sigma_eta, InterferometerNoise, NoiseModel, SigmaMode};
use crate::dynamics::{coefficients, FlowMap, FrameModel, GradientField, PulseSequence, Shifts};
use crate::error::{Error, Result};
use crate::orbit::{OrbitModel, OrbitalPhase, TensorMode};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesParams {
    pub name: String,
    /// Laser wavelength, m.
    pub lambda: f64,
    /// Pulse separation, s.
    pub t: f64,
    /// Atomic mass, u.
    pub mass_u: f64,
    pub atoms: f64,
    pub contrast: f64,
}

impl SpeciesParams {
    pub fn rb87() -> Self {
        SpeciesParams { name: "87Rb".into(), lambda: 780e-9, t: 20.0, mass_u: 86.909, atoms: 1e6, contrast: 1.0 }
    }

    pub fn k41() -> Self {
        SpeciesParams { name: "41K".into(), lambda: 767e-9, t: 20.0, mass_u: 40.962, atoms: 1e6, contrast: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.t > 0.0 && self.mass_u > 0.0) {
            return Err(Error::invalid(format!("species {}: wavelength, T and mass must be positive", self.name)));
        }
        self.noise().single_shot().map(|_| ())
    }

    /// `8π/λ`: second-order double diffraction.
    pub fn k_eff(&self) -> f64 {
        8.0 * PI / self.lambda
    }

    pub fn laser_frequency(&self) -> f64 {
        laser_frequency(self.k_eff())
    }

    pub fn recoil_velocity(&self) -> f64 {
        HBAR * self.k_eff() / (self.mass_u * ATOMIC_MASS_UNIT)
    }

    pub fn pulses(&self) -> PulseSequence {
        PulseSequence::new(self.k_eff(), self.t).with_recoil(self.recoil_velocity())
    }

    pub fn noise(&self) -> InterferometerNoise {
        InterferometerNoise { contrast: self.contrast, atoms: self.atoms, k_eff: self.k_eff(), t: self.t }
    }
}

/// Control and co-location uncertainties. Orbit ellipticity is taken from
/// the orbit model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyInputs {
    /// Co-location uncertainty δΔr per axis, m.
    pub delta_r0: Vector3<f64>,
    pub delta_v0: Vector3<f64>,
    /// Known mean displacement Δr per axis, m.
    pub offset_r0: Vector3<f64>,
    pub offset_v0: Vector3<f64>,
    /// Residual rotation rate, rad/s, on each axis.
    pub delta_omega: f64,
    pub delta_gamma: f64,
    pub delta_theta: f64,
    /// Laser frequency uncertainty, Hz.
    pub delta_f: f64,
    pub delta_t: f64,
    /// Initial-condition independent term, m/s². Out of model; default 0.
    pub delta_a_indep: f64,
}

impl UncertaintyInputs {
    pub fn table1() -> Self {
        UncertaintyInputs {
            delta_r0: Vector3::repeat(1e-6),
            delta_v0: Vector3::repeat(1e-6),
            offset_r0: Vector3::zeros(),
            offset_v0: Vector3::zeros(),
            delta_omega: 1e-7,
            delta_gamma: 1e-10,
            delta_theta: 1e-6,
            delta_f: 400e3,
            delta_t: 0.0,
            delta_a_indep: 0.0,
        }
    }

    pub fn zero() -> Self {
        UncertaintyInputs {
            delta_r0: Vector3::zeros(),
            delta_v0: Vector3::zeros(),
            offset_r0: Vector3::zeros(),
            offset_v0: Vector3::zeros(),
            delta_omega: 0.0,
            delta_gamma: 0.0,
            delta_theta: 0.0,
            delta_f: 0.0,
            delta_t: 0.0,
            delta_a_indep: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [self.delta_omega, self.delta_gamma, self.delta_theta, self.delta_f, self.delta_t];
        let ok = self.delta_r0.iter().chain(self.delta_v0.iter()).chain(scalars.iter()).all(|x| *x >= 0.0 && x.is_finite())
            && self.offset_r0.iter().chain(self.offset_v0.iter()).all(|x| x.is_finite())
            && self.delta_a_indep.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("uncertainties must be finite and nonnegative"))
        }
    }
}

/// Everything needed to evaluate the ledger and integration curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub orbit: OrbitModel,
    pub species: [SpeciesParams; 2],
    pub uncertainties: UncertaintyInputs,
    pub cycle_time: f64,
    /// Orbital phase at mission start.
    pub chi0: OrbitalPhase,
    /// Orbital phases per orbit on which the ledger is tabulated.
    pub chi_steps: usize,
    pub tensor_mode: TensorMode,
}

impl Mission {
    pub fn table1() -> Self {
        Mission {
            orbit: OrbitModel::table1(),
            species: [SpeciesParams::rb87(), SpeciesParams::k41()],
            uncertainties: UncertaintyInputs::table1(),
            cycle_time: 10.0,
            chi0: OrbitalPhase::default(),
            chi_steps: 720,
            tensor_mode: TensorMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.species {
            s.validate()?;
        }
        self.uncertainties.validate()?;
        if !(self.cycle_time > 0.0 && self.cycle_time.is_finite()) {
            return Err(Error::invalid("cycle time must be positive"));
        }
        if self.chi_steps < 4 {
            return Err(Error::invalid("need at least 4 orbital phases per orbit"));
        }
        if !(self.orbit.omega() > 0.0) {
            return Err(Error::invalid("orbital frequency must be positive"));
        }
        Ok(())
    }

    pub fn frame(&self, chi: OrbitalPhase) -> FrameModel {
        FrameModel::inertial(self.orbit, chi).with_tensor_mode(self.tensor_mode)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.species.iter().map(|s| s.noise()).collect(), self.cycle_time, self.orbit.omega())
    }
}

/// Normalized coefficients `(c, d)` of one species.
pub fn normalized_coefficients(
    frame: &FrameModel,
    species: &SpeciesParams,
    shifts: &Shifts,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let pulses = species.pulses().with_shifts(*shifts);
    let flow = FlowMap::compute(frame, pulses.t)?;
    Ok(normalize(&flow, &pulses))
}

fn normalize(flow: &FlowMap, pulses: &PulseSequence) -> (Vector3<f64>, Vector3<f64>) {
    let (a, b) = coefficients(flow, pulses);
    let s = pulses.scale_factor();
    (a / s, b / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialCoefficients {
    /// `c_A - c_B`, s⁻²
    pub alpha: Vector3<f64>,
    /// `d_A - d_B`, s⁻¹
    pub beta: Vector3<f64>,
    /// `(c_A + c_B)/2`
    pub alpha_common: Vector3<f64>,
    pub beta_common: Vector3<f64>,
}

pub fn differential_coefficients(
    frames: [&FrameModel; 2],
    species: [&SpeciesParams; 2],
    shifts: [&Shifts; 2],
) -> Result<DifferentialCoefficients> {
    let (ca, da) = normalized_coefficients(frames[0], species[0], shifts[0])?;
    let (cb, db) = normalized_coefficients(frames[1], species[1], shifts[1])?;
    Ok(DifferentialCoefficients {
        alpha: ca - cb,
        beta: da - db,
        alpha_common: 0.5 * (ca + cb),
        beta_common: 0.5 * (da + db),
    })
}

/// Quantities whose uncertainty propagates into the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Gamma,
    PulseSeparation,
    OmegaX,
    OmegaY,
    OmegaZ,
    Dx2,
    Dz2,
    Dx3,
    Dz3,
}

impl Parameter {
    pub const ALL: [Parameter; 9] = [
        Parameter::Gamma,
        Parameter::PulseSeparation,
        Parameter::OmegaX,
        Parameter::OmegaY,
        Parameter::OmegaZ,
        Parameter::Dx2,
        Parameter::Dz2,
        Parameter::Dx3,
        Parameter::Dz3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Parameter::Gamma => "gamma",
            Parameter::PulseSeparation => "T",
            Parameter::OmegaX => "Omega_x",
            Parameter::OmegaY => "Omega_y",
            Parameter::OmegaZ => "Omega_z",
            Parameter::Dx2 => "dx2",
            Parameter::Dz2 => "dz2",
            Parameter::Dx3 => "dx3",
            Parameter::Dz3 => "dz3",
        }
    }

    fn needs_flow(self) -> bool {
        matches!(
            self,
            Parameter::Gamma | Parameter::PulseSeparation | Parameter::OmegaX | Parameter::OmegaY | Parameter::OmegaZ
        )
    }

    /// Uncertainty of this parameter for one species.
    pub fn uncertainty(self, inputs: &UncertaintyInputs, species: &SpeciesParams) -> f64 {
        match self {
            Parameter::Gamma => inputs.delta_gamma,
            Parameter::PulseSeparation => inputs.delta_t,
            Parameter::OmegaX | Parameter::OmegaY | Parameter::OmegaZ => inputs.delta_omega,
            Parameter::Dx2 | Parameter::Dx3 => inputs.delta_theta,
            Parameter::Dz2 | Parameter::Dz3 => inputs.delta_f / species.laser_frequency(),
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

const REL_STEP: f64 = 1e-6;

/// Nominal and perturbed flows of one species at one orbital phase. Shifts
/// do not change the flow, so one set serves any number of shift settings.
struct SpeciesFlows {
    pulses: PulseSequence,
    nominal: FlowMap,
    /// For the flow-dependent parameters: step, flow at -step, flow at +step.
    perturbed: Vec<(Parameter, f64, FlowMap, FlowMap)>,
}

fn perturbed_frame(frame: &FrameModel, p: Parameter, delta: f64) -> FrameModel {
    let mut f = frame.clone();
    match p {
        Parameter::Gamma => match &mut f.gradient {
            GradientField::Orbit { orbit, .. } => *orbit = orbit.with_gamma(orbit.gamma() + delta),
            // a static tensor has no separate scale; perturb it proportionally
            GradientField::Static(t) => {
                let scale = t.zz.abs().max(t.max_abs());
                if scale > 0.0 {
                    *t = t.scaled(1.0 + delta / scale);
                }
            }
            GradientField::None => {}
        },
        Parameter::OmegaX => f.residual_rotation.x += delta,
        Parameter::OmegaY => f.residual_rotation.y += delta,
        Parameter::OmegaZ => f.residual_rotation.z += delta,
        _ => {}
    }
    f
}

fn natural_scale(frame: &FrameModel, p: Parameter, t: f64) -> f64 {
    match p {
        Parameter::Gamma => match &frame.gradient {
            GradientField::Orbit { orbit, .. } => orbit.gamma().abs(),
            GradientField::Static(g) => g.zz.abs().max(g.max_abs()),
            GradientField::None => 1.0,
        },
        Parameter::PulseSeparation => t,
        Parameter::OmegaX | Parameter::OmegaY | Parameter::OmegaZ => {
            let w = frame.modulation_frequency().abs().max(frame.total_rotation().amax());
            if w > 0.0 {
                w
            } else {
                1e-3
            }
        }
        _ => 1.0,
    }
}

impl SpeciesFlows {
    fn compute(frame: &FrameModel, species: &SpeciesParams) -> Result<Self> {
        let pulses = species.pulses();
        let nominal = FlowMap::compute(frame, pulses.t)?;
        let mut perturbed = Vec::with_capacity(5);
        for p in Parameter::ALL.into_iter().filter(|p| p.needs_flow()) {
            let h = REL_STEP * natural_scale(frame, p, pulses.t);
            let (lo, hi) = if p == Parameter::PulseSeparation {
                (FlowMap::compute(frame, pulses.t - h)?, FlowMap::compute(frame, pulses.t + h)?)
            } else {
                (
                    FlowMap::compute(&perturbed_frame(frame, p, -h), pulses.t)?,
                    FlowMap::compute(&perturbed_frame(frame, p, h), pulses.t)?,
                )
            };
            perturbed.push((p, h, lo, hi));
        }
        Ok(SpeciesFlows { pulses, nominal, perturbed })
    }

    fn coefficients(&self, shifts: &Shifts) -> (Vector3<f64>, Vector3<f64>) {
        normalize(&self.nominal, &self.pulses.with_shifts(*shifts))
    }

    /// `∂(c, d)/∂Q` per unit of Q.
    fn partial(&self, p: Parameter, shifts: &Shifts) -> (Vector3<f64>, Vector3<f64>) {
        let pulses = self.pulses.with_shifts(*shifts);
        if let Some((_, h, lo, hi)) = self.perturbed.iter().find(|e| e.0 == p) {
            let (plo, phi) = if p == Parameter::PulseSeparation {
                (PulseSequence { t: pulses.t - h, ..pulses }, PulseSequence { t: pulses.t + h, ..pulses })
            } else {
                (pulses, pulses)
            };
            let (c0, d0) = normalize(lo, &plo);
            let (c1, d1) = normalize(hi, &phi);
            return ((c1 - c0) / (2.0 * h), (d1 - d0) / (2.0 * h));
        }
        let h = REL_STEP;
        let mut lo = shifts.to_array();
        let mut hi = lo;
        let idx = match p {
            Parameter::Dx2 => 0,
            Parameter::Dz2 => 1,
            Parameter::Dx3 => 2,
            _ => 3,
        };
        lo[idx] -= h;
        hi[idx] += h;
        let (c0, d0) = normalize(&self.nominal, &pulses.with_shifts(Shifts::from_array(lo)));
        let (c1, d1) = normalize(&self.nominal, &pulses.with_shifts(Shifts::from_array(hi)));
        ((c1 - c0) / (2.0 * h), (d1 - d0) / (2.0 * h))
    }
}

/// Uncertainty of the common-mode coefficients due to one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub parameter: Parameter,
    /// `|½ Σ_s ∂c_s/∂Q δQ_s|` per axis, s⁻²
    pub position: Vector3<f64>,
    /// same for the velocity coefficient, s⁻¹
    pub velocity: Vector3<f64>,
}

fn sensitivities_from_flows(
    flows: &[SpeciesFlows; 2],
    species: &[SpeciesParams; 2],
    shifts: &[Shifts; 2],
    inputs: &UncertaintyInputs,
) -> Vec<Sensitivity> {
    Parameter::ALL
        .iter()
        .map(|&p| {
            let mut c = Vector3::zeros();
            let mut d = Vector3::zeros();
            for s in 0..2 {
                let dq = p.uncertainty(inputs, &species[s]);
                if dq == 0.0 {
                    continue;
                }
                let (pc, pd) = flows[s].partial(p, &shifts[s]);
                c += 0.5 * pc * dq;
                d += 0.5 * pd * dq;
            }
            Sensitivity { parameter: p, position: c.abs(), velocity: d.abs() }
        })
        .collect()
}

/// Central finite-difference sensitivities of the common-mode coefficients,
/// one row per parameter, for the given frame and per-species shifts.
pub fn coefficient_sensitivities(
    frame: &FrameModel,
    species: &[SpeciesParams; 2],
    shifts: &[Shifts; 2],
    inputs: &UncertaintyInputs,
) -> Result<Vec<Sensitivity>> {
    inputs.validate()?;
    let flows = [SpeciesFlows::compute(frame, &species[0])?, SpeciesFlows::compute(frame, &species[1])?];
    Ok(sensitivities_from_flows(&flows, species, shifts, inputs))
}

/// Which coefficient a ledger term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermSource {
    /// position coefficient on axis 0..3
    Position(usize),
    Velocity(usize),
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerTerm {
    pub label: String,
    pub source: TermSource,
    /// m/s²
    pub magnitude: f64,
    /// Harmonics of the orbital frequency carried by this term.
    pub harmonics: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BudgetLedger {
    pub terms: Vec<LedgerTerm>,
}

impl BudgetLedger {
    /// Conservative absolute sum of all terms.
    pub fn total_linear(&self) -> f64 {
        self.terms.iter().map(|t| t.magnitude).sum()
    }

    pub fn total_quadrature(&self) -> f64 {
        self.terms.iter().map(|t| t.magnitude * t.magnitude).sum::<f64>().sqrt()
    }

    pub fn term(&self, label: &str) -> Option<&LedgerTerm> {
        self.terms.iter().find(|t| t.label == label)
    }

    pub fn largest(&self) -> Option<&LedgerTerm> {
        self.terms.iter().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}

fn assemble_ledger(
    flows: &[SpeciesFlows; 2],
    species: &[SpeciesParams; 2],
    shifts: &[Shifts; 2],
    inputs: &UncertaintyInputs,
    ellipticity: f64,
) -> BudgetLedger {
    let (ca, da) = flows[0].coefficients(&shifts[0]);
    let (cb, db) = flows[1].coefficients(&shifts[1]);
    let c_bar = 0.5 * (ca + cb);
    let d_bar = 0.5 * (da + db);
    let sens = sensitivities_from_flows(flows, species, shifts, inputs);

    let gradient_tags = if ellipticity > 0.0 { vec![0, 1, 2] } else { vec![0, 2] };
    let tags = |p: Option<Parameter>| match p {
        None | Some(Parameter::Gamma) | Some(Parameter::PulseSeparation) => gradient_tags.clone(),
        _ => vec![0],
    };

    let mut terms = Vec::with_capacity(61);
    for i in 0..3 {
        let axis = AXES[i];
        let r_err = inputs.delta_r0[i];
        let v_err = inputs.delta_v0[i];
        let r_span = inputs.offset_r0[i].abs() + r_err;
        let v_span = inputs.offset_v0[i].abs() + v_err;
        terms.push(LedgerTerm {
            label: format!("nominal*r_{axis}"),
            source: TermSource::Position(i),
            magnitude: c_bar[i].abs() * r_err,
            harmonics: tags(None),
        });
        for s in &sens {
            terms.push(LedgerTerm {
                label: format!("{}*r_{axis}", s.parameter),
                source: TermSource::Position(i),
                magnitude: s.position[i] * r_span,
                harmonics: tags(Some(s.parameter)),
            });
        }
        terms.push(LedgerTerm {
            label: format!("nominal*v_{axis}"),
            source: TermSource::Velocity(i),
            magnitude: d_bar[i].abs() * v_err,
            harmonics: tags(None),
        });
        for s in &sens {
            terms.push(LedgerTerm {
                label: format!("{}*v_{axis}", s.parameter),
                source: TermSource::Velocity(i),
                magnitude: s.velocity[i] * v_span,
                harmonics: tags(Some(s.parameter)),
            });
        }
    }
    terms.push(LedgerTerm {
        label: "a_indep".into(),
        source: TermSource::Independent,
        magnitude: inputs.delta_a_indep.abs(),
        harmonics: vec![0],
    });
    BudgetLedger { terms }
}

/// Flows plus solved shifts for both species at one orbital phase.
struct PhaseEvaluation {
    flows: [SpeciesFlows; 2],
    shifts: [Shifts; 2],
}

impl PhaseEvaluation {
    fn compute(mission: &Mission, chi: OrbitalPhase) -> Result<Self> {
        let frame = mission.frame(chi);
        let flows = [
            SpeciesFlows::compute(&frame, &mission.species[0])?,
            SpeciesFlows::compute(&frame, &mission.species[1])?,
        ];
        let mut shifts = [Shifts::default(); 2];
        for s in 0..2 {
            let f = &flows[s];
            let seed = first_order_shifts(mission.orbit.gamma(), mission.orbit.omega(), f.pulses.t, chi);
            shifts[s] = solve_shifts_with_flow(&f.nominal, &f.pulses, seed, chi)?.shifts;
        }
        Ok(PhaseEvaluation { flows, shifts })
    }

    fn ledger(&self, mission: &Mission, compensated: bool) -> BudgetLedger {
        let mut inputs = mission.uncertainties;
        let shifts = if compensated {
            self.shifts
        } else {
            // no shifts applied, so no tilt or frequency error either
            inputs.delta_theta = 0.0;
            inputs.delta_f = 0.0;
            [Shifts::default(); 2]
        };
        assemble_ledger(&self.flows, &mission.species, &shifts, &inputs, mission.orbit.ellipticity())
    }
}

/// Residual differential-acceleration ledger at orbital phase `chi`, with
/// the compensation shifts solved there (`compensated`) or without shifts.
pub fn ggc_residual_budget(mission: &Mission, chi: OrbitalPhase, compensated: bool) -> Result<BudgetLedger> {
    mission.validate()?;
    Ok(PhaseEvaluation::compute(mission, chi)?.ledger(mission, compensated))
}

/// Ledger totals (compensated, uncompensated) on a uniform grid of `n`
/// orbital phases.
pub fn ledger_totals_on_grid(mission: &Mission, n: usize) -> Result<Vec<(f64, f64)>> {
    mission.validate()?;
    uniform_chi_grid(n)
        .par_iter()
        .map(|chi| {
            let eval = PhaseEvaluation::compute(mission, *chi)
                .map_err(|e| Error::SweepPoint { chi: chi.radians(), source: Box::new(e) })?;
            Ok((eval.ledger(mission, true).total_linear(), eval.ledger(mission, false).total_linear()))
        })
        .collect()
}

/// Periodic linear interpolation of samples tabulated at `2π i / n`.
pub fn interpolate_periodic(table: &[f64], chi: f64) -> f64 {
    let n = table.len();
    let u = chi.rem_euclid(TAU) / TAU * n as f64;
    let i = (u.floor() as usize).min(n - 1);
    let frac = u - i as f64;
    table[i] * (1.0 - frac) + table[(i + 1) % n] * frac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub tau: f64,
    pub delta_eta_sys: f64,
    pub sigma_eta_stat: f64,
    pub delta_eta_sys_uncompensated: f64,
}

/// Demodulated systematic uncertainty of η versus integration time, sampled
/// once per cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationCurve {
    cycle_time: f64,
    compensated: Vec<f64>,
    uncompensated: Vec<f64>,
    noise: NoiseModel,
    g0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Compensated,
    Uncompensated,
    Statistical,
}

impl IntegrationCurve {
    pub fn len(&self) -> usize {
        self.compensated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compensated.is_empty()
    }

    pub fn cycle_time(&self) -> f64 {
        self.cycle_time
    }

    /// Integration time after `m` cycles (1-based).
    pub fn tau(&self, m: usize) -> f64 {
        m as f64 * self.cycle_time
    }

    /// Curve value after `m` cycles (1-based).
    pub fn value(&self, curve: Curve, m: usize) -> f64 {
        match curve {
            Curve::Compensated => self.compensated[m - 1],
            Curve::Uncompensated => self.uncompensated[m - 1],
            Curve::Statistical => {
                sigma_eta(&self.noise, self.g0, m as u64, SigmaMode::Exact).unwrap_or(f64::INFINITY)
            }
        }
    }

    pub fn row(&self, m: usize) -> CurveRow {
        CurveRow {
            tau: self.tau(m),
            delta_eta_sys: self.value(Curve::Compensated, m),
            sigma_eta_stat: self.value(Curve::Statistical, m),
            delta_eta_sys_uncompensated: self.value(Curve::Uncompensated, m),
        }
    }

    /// Integration time from which on the curve stays at or below
    /// `threshold`. `None` if the last sample is still above it.
    pub fn settling_time(&self, curve: Curve, threshold: f64) -> Option<f64> {
        let n = self.len();
        let last_above = match curve {
            Curve::Compensated => self.compensated.iter().rposition(|v| *v > threshold),
            Curve::Uncompensated => self.uncompensated.iter().rposition(|v| *v > threshold),
            // monotone
            Curve::Statistical => {
                let (mut lo, mut hi) = (0usize, n);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.value(Curve::Statistical, mid + 1) > threshold {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                lo.checked_sub(1)
            }
        };
        match last_above {
            None => Some(self.tau(1)),
            Some(i) if i + 1 < n => Some(self.tau(i + 2)),
            Some(_) => None,
        }
    }

    /// At most `max_rows` rows on a logarithmic grid in `m`, always including
    /// the first and last cycle.
    pub fn rows(&self, max_rows: usize) -> Vec<CurveRow> {
        let n = self.len();
        if n == 0 || max_rows == 0 {
            return Vec::new();
        }
        if n <= max_rows || max_rows == 1 {
            let step = if max_rows == 1 { n } else { 1 };
            return (1..=n).filter(|m| m % step == 0 || *m == 1).take(max_rows).map(|m| self.row(m)).collect();
        }
        let mut idx: Vec<usize> = (0..max_rows)
            .map(|i| {
                let f = i as f64 / (max_rows - 1) as f64;
                ((n as f64).powf(f).round() as usize).clamp(1, n)
            })
            .collect();
        idx.dedup();
        idx.into_iter().map(|m| self.row(m)).collect()
    }
}

/// Demodulated integration of the ledger totals over `duration` seconds of
/// mission time, for the compensated and uncompensated cases.
pub fn integration_curve(mission: &Mission, duration: f64) -> Result<IntegrationCurve> {
    mission.validate()?;
    if !(duration >= mission.cycle_time) {
        return Err(Error::invalid(format!(
            "duration {duration} s is shorter than one cycle ({} s)",
            mission.cycle_time
        )));
    }
    let totals = ledger_totals_on_grid(mission, mission.chi_steps)?;
    let comp: Vec<f64> = totals.iter().map(|t| t.0).collect();
    let uncomp: Vec<f64> = totals.iter().map(|t| t.1).collect();
    integrate_tabulated(mission, &comp, &uncomp, duration)
}

/// Same as [`integration_curve`] for ledger totals that are already
/// tabulated on a uniform orbital-phase grid.
pub fn integrate_tabulated(mission: &Mission, comp: &[f64], uncomp: &[f64], duration: f64) -> Result<IntegrationCurve> {
    if comp.is_empty() || comp.len() != uncomp.len() {
        return Err(Error::invalid("ledger tables must be nonempty and of equal length"));
    }
    let n = (duration / mission.cycle_time).floor() as usize;
    if n == 0 {
        return Err(Error::invalid("duration shorter than one cycle"));
    }
    let omega = mission.orbit.omega();
    let g0 = mission.orbit.g0();
    let chi0 = mission.chi0.radians();
    let mut compensated = Vec::with_capacity(n);
    let mut uncompensated = Vec::with_capacity(n);
    let (mut sc, mut su) = (0.0, 0.0);
    for m in 1..=n {
        let t = m as f64 * mission.cycle_time;
        let chi = chi0 + omega * t;
        let w = (omega * t).cos();
        sc += interpolate_periodic(comp, chi) * w;
        su += interpolate_periodic(uncomp, chi) * w;
        compensated.push((2.0 * sc / m as f64).abs() / g0);
        uncompensated.push((2.0 * su / m as f64).abs() / g0);
    }
    Ok(IntegrationCurve { cycle_time: mission.cycle_time, compensated, uncompensated, noise: mission.noise()?, g0 })
}

/// Gain of the compensation combined with demodulation at chi: the
/// uncompensated coefficient terms over the compensated ledger total, times
/// the demodulation suppression `Ω τ / 2` of a constant term.
pub fn suppression_ratio(mission: &Mission, chi: OrbitalPhase, tau: f64) -> Result<f64> {
    mission.validate()?;
    let eval = PhaseEvaluation::compute(mission, chi)?;
    let bare: f64 = eval
        .ledger(mission, false)
        .terms
        .iter()
        .filter(|t| t.label.starts_with("nominal"))
        .map(|t| t.magnitude)
        .sum();
    let residual = eval.ledger(mission, true).total_linear();
    Ok(bare / residual * mission.orbit.omega() * tau / 2.0)
}

/// Verification shots needed to pin the mean co-location to the targets,
/// `ν = ceil(2σ² / (N target²))`, at least 1.
pub fn verification_shots(sigma_r: f64, sigma_v: f64, atoms: f64, target_r: f64, target_v: f64) -> Result<u64> {
    for (name, x) in [("sigma_r", sigma_r), ("sigma_v", sigma_v), ("atoms", atoms), ("target_r", target_r), ("target_v", target_v)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {x}")));
        }
    }
    let need = |sigma: f64, target: f64| {
        // absorb rounding when the target is an exact inversion
        let nu = 2.0 * sigma * sigma / (atoms * target * target) * (1.0 - 1e-12);
        nu.ceil().max(1.0)
    };
    let nu = need(sigma_r, target_r).max(need(sigma_v, target_v));
    if nu > u64::MAX as f64 {
        return Err(Error::invalid("verification shot count overflows"));
    }
    Ok(nu as u64)
}
