//! Classical atom trajectories in the satellite frame and the Mach-Zehnder
//! phase built from them.
//!
//! Equation of motion in the (possibly rotating) satellite frame:
//!
//! ```text
//! r'' = Γ(t) r - 2 Ω × r' - Ω × (Ω × r) + a(t)
//! ```
//!
//! with `Ω = spin + residual_rotation` held constant. The system is linear, so
//! every quantity the interferometer phase depends on follows from the 6x6
//! state-transition matrix plus one particular solution.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::integrate::{integrate, Tolerance};
use crate::orbit::{
    gradient_tensor_circular, gradient_tensor_elliptic, rotation_x, rotation_y, rotation_z, GradientTensor,
    OrbitModel, OrbitalPhase, TensorMode,
};

/// Source of the gravity-gradient tensor seen by the atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientField {
    None,
    Static(GradientTensor),
    /// Tensor of the orbit evaluated at `chi0 + (Ω_orbit - spin_y) t`.
    Orbit { orbit: OrbitModel, chi0: OrbitalPhase, mode: TensorMode },
}

/// The linear acceleration `a(t)`; carries a violation signal or any bias.
#[derive(Clone, Default)]
pub enum LinearAcceleration {
    #[default]
    Zero,
    Constant(Vector3<f64>),
    /// `amplitude * cos(omega t + phase)`
    Harmonic { amplitude: Vector3<f64>, omega: f64, phase: f64 },
    Custom(Arc<dyn Fn(f64) -> Vector3<f64> + Send + Sync>),
}

impl LinearAcceleration {
    pub fn at(&self, t: f64) -> Vector3<f64> {
        match self {
            LinearAcceleration::Zero => Vector3::zeros(),
            LinearAcceleration::Constant(a) => *a,
            LinearAcceleration::Harmonic { amplitude, omega, phase } => amplitude * (omega * t + phase).cos(),
            LinearAcceleration::Custom(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LinearAcceleration::Zero)
    }
}

impl fmt::Debug for LinearAcceleration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearAcceleration::Zero => write!(f, "Zero"),
            LinearAcceleration::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            LinearAcceleration::Harmonic { amplitude, omega, phase } => f
                .debug_struct("Harmonic")
                .field("amplitude", amplitude)
                .field("omega", omega)
                .field("phase", phase)
                .finish(),
            LinearAcceleration::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Everything the trajectories depend on apart from the pulses.
#[derive(Debug, Clone, Default)]
pub struct FrameModel {
    pub gradient: GradientField,
    /// Satellite spin, rad/s. Zero for an inertially pointing satellite.
    pub spin: Vector3<f64>,
    /// Residual attitude rate, rad/s. Enters the inertial forces only; its
    /// effect on the tensor orientation is neglected (see
    /// [`residual_rotation_deviation`]).
    pub residual_rotation: Vector3<f64>,
    pub acceleration: LinearAcceleration,
}

impl Default for GradientField {
    fn default() -> Self {
        GradientField::None
    }
}

impl FrameModel {
    pub fn free() -> Self {
        FrameModel::default()
    }

    /// Inertially pointing satellite on `orbit`, sequence starting at `chi0`.
    pub fn inertial(orbit: OrbitModel, chi0: OrbitalPhase) -> Self {
        FrameModel {
            gradient: GradientField::Orbit { orbit, chi0, mode: TensorMode::Exact },
            ..FrameModel::default()
        }
    }

    pub fn static_gradient(t: GradientTensor) -> Self {
        FrameModel { gradient: GradientField::Static(t), ..FrameModel::default() }
    }

    pub fn with_spin(mut self, spin: Vector3<f64>) -> Self {
        self.spin = spin;
        self
    }

    pub fn with_residual_rotation(mut self, rate: Vector3<f64>) -> Self {
        self.residual_rotation = rate;
        self
    }

    pub fn with_acceleration(mut self, a: LinearAcceleration) -> Self {
        self.acceleration = a;
        self
    }

    pub fn with_tensor_mode(mut self, new_mode: TensorMode) -> Self {
        if let GradientField::Orbit { mode, .. } = &mut self.gradient {
            *mode = new_mode;
        }
        self
    }

    pub fn with_chi0(mut self, chi: OrbitalPhase) -> Self {
        if let GradientField::Orbit { chi0, .. } = &mut self.gradient {
            *chi0 = chi;
        }
        self
    }

    pub fn total_rotation(&self) -> Vector3<f64> {
        self.spin + self.residual_rotation
    }

    /// Modulation frequency of the gradient in this frame, rad/s.
    pub fn modulation_frequency(&self) -> f64 {
        match &self.gradient {
            GradientField::Orbit { orbit, .. } => orbit.omega() - self.spin.y,
            _ => 0.0,
        }
    }

    pub fn gradient_at(&self, t: f64) -> GradientTensor {
        match &self.gradient {
            GradientField::None => GradientTensor::zero(),
            GradientField::Static(g) => *g,
            GradientField::Orbit { orbit, chi0, mode } => {
                let chi = chi0.advance((orbit.omega() - self.spin.y) * t);
                match mode {
                    TensorMode::Circular => gradient_tensor_circular(orbit, chi),
                    _ => gradient_tensor_elliptic(orbit, chi, *mode),
                }
            }
        }
    }

    /// Position block of the homogeneous system matrix, `Γ(t) - [Ω×]²`.
    fn stiffness(&self, t: f64, wx2: &Matrix3<f64>) -> Matrix3<f64> {
        self.gradient_at(t).to_matrix() - wx2
    }
}

fn cross_matrix(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Position, velocity and the time they refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub epoch: f64,
}

impl KinematicState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>, epoch: f64) -> Self {
        KinematicState { position, velocity, epoch }
    }

    pub fn at_rest() -> Self {
        KinematicState::new(Vector3::zeros(), Vector3::zeros(), 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|x| x.is_finite()) && self.epoch.is_finite()
    }

    fn to_vector(self) -> Vector6<f64> {
        Vector6::new(
            self.position.x,
            self.position.y,
            self.position.z,
            self.velocity.x,
            self.velocity.y,
            self.velocity.z,
        )
    }
}

/// Fractional wave-vector shifts at the second and third pulse.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shifts {
    pub dx2: f64,
    pub dz2: f64,
    pub dx3: f64,
    pub dz3: f64,
}

impl Shifts {
    pub fn new(dx2: f64, dz2: f64, dx3: f64, dz3: f64) -> Self {
        Shifts { dx2, dz2, dx3, dz3 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.dx2, self.dz2, self.dx3, self.dz3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Shifts::new(a[0], a[1], a[2], a[3])
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Shifts) -> f64 {
        let (a, b) = (self.to_array(), other.to_array());
        (0..4).fold(0.0, |m, i| m.max((a[i] - b[i]).abs()))
    }
}

/// Three-pulse Mach-Zehnder sequence with pulses at 0, T and 2T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSequence {
    /// Baseline effective wave number, rad/m.
    pub k_eff: f64,
    /// Pulse separation, s.
    pub t: f64,
    /// Recoil velocity `ħ k_eff / m` of the diffracted branch, m/s.
    pub recoil_velocity: f64,
    pub shifts: Shifts,
}

impl PulseSequence {
    pub fn new(k_eff: f64, t: f64) -> Self {
        PulseSequence { k_eff, t, recoil_velocity: 0.0, shifts: Shifts::default() }
    }

    pub fn with_recoil(mut self, v: f64) -> Self {
        self.recoil_velocity = v;
        self
    }

    pub fn with_shifts(mut self, s: Shifts) -> Self {
        self.shifts = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_eff.is_finite() && self.k_eff > 0.0) {
            return Err(Error::invalid(format!("k_eff must be positive, got {}", self.k_eff)));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::invalid(format!("pulse separation must be positive, got {}", self.t)));
        }
        if !self.recoil_velocity.is_finite() || self.shifts.to_array().iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite pulse parameters"));
        }
        Ok(())
    }

    /// Shifts above 1e-2 leave the regime the compensation scheme is meant for.
    pub fn is_perturbative(&self) -> bool {
        self.shifts.max_abs() <= 1e-2
    }

    /// Wave vector of pulse `j` (1, 2 or 3), rad/m.
    pub fn wave_vector(&self, j: usize) -> Vector3<f64> {
        let s = &self.shifts;
        let k = self.k_eff;
        match j {
            1 => Vector3::new(0.0, 0.0, k),
            2 => Vector3::new(k * s.dx2, 0.0, k * (1.0 + s.dz2)),
            3 => Vector3::new(k * s.dx3, 0.0, k * (1.0 + s.dz3)),
            _ => panic!("pulse index {j} out of range 1..=3"),
        }
    }

    /// Interferometer scale factor `k_eff T²`.
    pub fn scale_factor(&self) -> f64 {
        self.k_eff * self.t * self.t
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("non-finite time"))
    }
}

/// Propagates a single trajectory, including `a(t)`, to `t_end`. Backward
/// propagation (`t_end < epoch`) is allowed.
pub fn propagate(frame: &FrameModel, state: &KinematicState, t_end: f64) -> Result<KinematicState> {
    check_time(t_end)?;
    if !state.is_finite() {
        return Err(Error::invalid("non-finite initial state"));
    }
    let w = frame.total_rotation();
    let wx = cross_matrix(&w);
    let wx2 = wx * wx;
    let mut y = [0.0; 6];
    y.copy_from_slice(state.to_vector().as_slice());
    integrate(
        |t, y, dy| {
            let r = Vector3::new(y[0], y[1], y[2]);
            let v = Vector3::new(y[3], y[4], y[5]);
            let acc = frame.stiffness(t, &wx2) * r - 2.0 * wx * v + frame.acceleration.at(t);
            dy[..3].copy_from_slice(&y[3..]);
            dy[3..].copy_from_slice(acc.as_slice());
        },
        state.epoch,
        &mut y,
        t_end,
        &Tolerance::default(),
    )?;
    Ok(KinematicState::new(Vector3::new(y[0], y[1], y[2]), Vector3::new(y[3], y[4], y[5]), t_end))
}

/// Homogeneous flow of the equations of motion from 0 to T and 2T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMap {
    pub t: f64,
    pub at_t: Matrix6<f64>,
    pub at_2t: Matrix6<f64>,
}

impl FlowMap {
    pub fn compute(frame: &FrameModel, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("pulse separation must be positive, got {t}")));
        }
        let w = frame.total_rotation();
        let wx = cross_matrix(&w);
        let wx2 = wx * wx;
        let coriolis = -2.0 * wx;
        // column-major 6x6, one column per unit initial condition
        let mut y = [0.0; 36];
        for i in 0..6 {
            y[i * 6 + i] = 1.0;
        }
        let mut rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
            let k = frame.stiffness(s, &wx2);
            for c in 0..6 {
                let col = &y[c * 6..c * 6 + 6];
                let r = Vector3::new(col[0], col[1], col[2]);
                let v = Vector3::new(col[3], col[4], col[5]);
                let acc = k * r + coriolis * v;
                let out = &mut dy[c * 6..c * 6 + 6];
                out[..3].copy_from_slice(&col[3..]);
                out[3..].copy_from_slice(acc.as_slice());
            }
        };
        let tol = Tolerance::default();
        integrate(&mut rhs, 0.0, &mut y, t, &tol)?;
        let at_t = Matrix6::from_column_slice(&y);
        integrate(&mut rhs, t, &mut y, 2.0 * t, &tol)?;
        let at_2t = Matrix6::from_column_slice(&y);
        Ok(FlowMap { t, at_t, at_2t })
    }

    pub fn position_from_position(&self, twice: bool) -> Matrix3<f64> {
        let m = if twice { &self.at_2t } else { &self.at_t };
        m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn position_from_velocity(&self, twice: bool) -> Matrix3<f64> {
        let m = if twice { &self.at_2t } else { &self.at_t };
        m.fixed_view::<3, 3>(0, 3).into_owned()
    }
}

/// Initial-condition coefficients `(α, β)` of the phase for the given flow.
/// Exactly affine in the shifts.
pub fn coefficients(flow: &FlowMap, pulses: &PulseSequence) -> (Vector3<f64>, Vector3<f64>) {
    let k1 = pulses.wave_vector(1);
    let k2 = pulses.wave_vector(2);
    let k3 = pulses.wave_vector(3);
    let alpha = k1 - 2.0 * flow.position_from_position(false).transpose() * k2
        + flow.position_from_position(true).transpose() * k3;
    let beta = -2.0 * flow.position_from_velocity(false).transpose() * k2
        + flow.position_from_velocity(true).transpose() * k3;
    (alpha, beta)
}

/// Phase and the sum of absolute values of its terms (for relative checks).
fn mz_phase_with_scale(frame: &FrameModel, pulses: &PulseSequence, initial: &KinematicState) -> Result<(f64, f64)> {
    pulses.validate()?;
    let t = pulses.t;
    let t0 = initial.epoch;
    let k1 = pulses.wave_vector(1);
    let k2 = pulses.wave_vector(2);
    let k3 = pulses.wave_vector(3);
    let kick1 = k1 * (pulses.recoil_velocity / pulses.k_eff);
    let kick2 = k2 * (pulses.recoil_velocity / pulses.k_eff);

    let mut upper = *initial;
    upper.velocity += kick1;
    let mut upper = propagate(frame, &upper, t0 + t)?;
    let mut lower = propagate(frame, initial, t0 + t)?;
    let sum_t = upper.position + lower.position;
    upper.velocity -= kick2;
    lower.velocity += kick2;
    let upper = propagate(frame, &upper, t0 + 2.0 * t)?;
    let lower = propagate(frame, &lower, t0 + 2.0 * t)?;
    let sum_2t = upper.position + lower.position;

    let terms = [k1.dot(&initial.position), -sum_t.dot(&k2), 0.5 * sum_2t.dot(&k3)];
    Ok((terms.iter().sum(), terms.iter().map(|x| x.abs()).sum()))
}

/// Mach-Zehnder phase from the classical branch trajectories:
/// `φ = k1·r(0) - 2 r̄(T)·k2 + r̄(2T)·k3`, with `r̄` the branch midpoint.
/// Pulses fire at `initial.epoch`, `+T` and `+2T`.
pub fn mz_phase(frame: &FrameModel, pulses: &PulseSequence, initial: &KinematicState) -> Result<f64> {
    mz_phase_with_scale(frame, pulses, initial).map(|(phi, _)| phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    pub phi_indep: f64,
    /// rad/m
    pub alpha: Vector3<f64>,
    /// rad/(m/s)
    pub beta: Vector3<f64>,
}

impl PhaseDecomposition {
    pub fn phase(&self, r0: &Vector3<f64>, v0: &Vector3<f64>) -> f64 {
        self.phi_indep + self.alpha.dot(r0) + self.beta.dot(v0)
    }
}

/// Splits the phase into `φ_indep + α·r0 + β·v0`. The coefficients come from
/// the homogeneous flow; the split is then checked against a direct
/// trajectory evaluation at an off-origin initial state.
pub fn phase_decomposition(frame: &FrameModel, pulses: &PulseSequence) -> Result<PhaseDecomposition> {
    pulses.validate()?;
    let flow = FlowMap::compute(frame, pulses.t)?;
    let (alpha, beta) = coefficients(&flow, pulses);
    let phi_indep = mz_phase(frame, pulses, &KinematicState::at_rest())?;
    let dec = PhaseDecomposition { phi_indep, alpha, beta };

    let r0 = Vector3::new(3.1e-3, -1.7e-3, 2.3e-3);
    let v0 = Vector3::new(-1.3e-3, 0.9e-3, 2.9e-3);
    let (direct, scale) = mz_phase_with_scale(frame, pulses, &KinematicState::new(r0, v0, 0.0))?;
    let predicted = dec.phase(&r0, &v0);
    let scale = scale.max(dec.phi_indep.abs()).max(f64::MIN_POSITIVE);
    if (direct - predicted).abs() > 1e-10 * scale {
        return Err(Error::ModelViolation(format!(
            "phase is not affine in the initial conditions: direct {direct}, decomposed {predicted}"
        )));
    }
    Ok(dec)
}

/// Worst deviation between the tensor rotated by the full attitude
/// (orbital rotation combined with residual rotations about x, y, z in any
/// order) and the orbital-only rotation, over `t` in `(0, t_max]`.
/// Returns `(relative Frobenius deviation, absolute component deviation)`.
pub fn residual_rotation_deviation(
    orbit: &OrbitModel,
    chi: OrbitalPhase,
    residual: Vector3<f64>,
    t_max: f64,
) -> (f64, f64) {
    let g = gradient_tensor_circular(orbit, chi).to_matrix();
    let mut rel: f64 = 0.0;
    let mut abs: f64 = 0.0;
    let samples = 16;
    for s in 1..=samples {
        let t = t_max * s as f64 / samples as f64;
        let orbital = rotation_y(orbit.omega() * t);
        let reference = orbital * g * orbital.transpose();
        let parts = [
            rotation_x(residual.x * t),
            rotation_y(residual.y * t),
            rotation_z(residual.z * t),
            orbital,
        ];
        for perm in permutations4() {
            let d = parts[perm[0]] * parts[perm[1]] * parts[perm[2]] * parts[perm[3]];
            let m = d * g * d.transpose();
            let diff = m - reference;
            rel = rel.max(diff.norm() / reference.norm());
            abs = abs.max(diff.amax());
        }
    }
    (rel, abs)
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Orbital period of an inertial frame's orbit, if any.
pub fn frame_period(frame: &FrameModel) -> Option<f64> {
    match frame.gradient {
        GradientField::Orbit { .. } => {
            let w = frame.modulation_frequency();
            (w != 0.0).then(|| TAU / w.abs())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 20.0;
    const K: f64 = 8.0 * std::f64::consts::PI / 780e-9;

    fn ground(gamma: f64) -> GradientTensor {
        GradientTensor::diagonal(-0.5 * gamma, -0.5 * gamma, gamma)
    }

    #[test]
    fn free_flight_is_linear() {
        let s = KinematicState::new(Vector3::new(1.0, -2.0, 0.5), Vector3::new(0.1, 0.2, -0.3), 0.0);
        let out = propagate(&FrameModel::free(), &s, 40.0).unwrap();
        let expect = s.position + s.velocity * 40.0;
        assert!((out.position - expect).amax() < 1e-12);
        assert_eq!(out.velocity, s.velocity);
        assert_eq!(out.epoch, 40.0);
    }

    #[test]
    fn static_gradient_cosh() {
        let g = 2.25e-6;
        let frame = FrameModel::static_gradient(ground(g));
        let z0 = 0.01;
        let s = KinematicState::new(Vector3::new(0.0, 0.0, z0), Vector3::zeros(), 0.0);
        let out = propagate(&frame, &s, 40.0).unwrap();
        let expect = z0 * (g.sqrt() * 40.0).cosh();
        assert!((out.position.z - expect).abs() < 1e-11 * expect, "{}", (out.position.z - expect) / expect);
        assert_eq!(out.position.x, 0.0);
    }

    #[test]
    fn pure_rotation_matches_rotated_free_flight() {
        let w = 1e-3;
        let frame = FrameModel::free().with_spin(Vector3::new(0.0, w, 0.0));
        let r0 = Vector3::new(0.3, 0.1, -0.2);
        let v0 = Vector3::new(0.01, -0.02, 0.03);
        let s = KinematicState::new(r0, v0, 0.0);
        let t = 40.0;
        let out = propagate(&frame, &s, t).unwrap();
        // inertial velocity at t = 0 is v0 + Ω × r0; body coords rotate by -Ω t
        let omega = Vector3::new(0.0, w, 0.0);
        let inertial = r0 + (v0 + omega.cross(&r0)) * t;
        let expect = rotation_y(-w * t) * inertial;
        assert!((out.position - expect).amax() < 1e-10 * expect.amax());
    }

    #[test]
    fn time_reversal() {
        let orbit = OrbitModel::table1();
        let frame = FrameModel::inertial(orbit, 0.4.into()).with_spin(Vector3::new(0.0, 2e-4, 0.0));
        let s = KinematicState::new(Vector3::new(1e-3, 0.0, -2e-3), Vector3::new(1e-4, 0.0, 5e-4), 0.0);
        let fwd = propagate(&frame, &s, 40.0).unwrap();
        let back = propagate(&frame, &fwd, 0.0).unwrap();
        assert!((back.position - s.position).amax() < 1e-10 * s.position.amax());
        assert!((back.velocity - s.velocity).amax() < 1e-10 * s.velocity.amax());
    }

    #[test]
    fn uniform_acceleration_phase() {
        let a = 1e-9;
        let frame = FrameModel::free().with_acceleration(LinearAcceleration::Constant(Vector3::new(0.0, 0.0, a)));
        let p = PulseSequence::new(K, T).with_recoil(0.012);
        let phi = mz_phase(&frame, &p, &KinematicState::at_rest()).unwrap();
        let expect = K * a * T * T;
        assert!((phi - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn free_space_phase_vanishes() {
        let p = PulseSequence::new(K, T).with_recoil(0.012);
        let s = KinematicState::new(Vector3::new(0.1, 0.2, 0.3), Vector3::new(1e-3, 2e-3, -1e-3), 0.0);
        let phi = mz_phase(&FrameModel::free(), &p, &s).unwrap();
        assert!(phi.abs() < 1e-12 * K);
        let dec = phase_decomposition(&FrameModel::free(), &p).unwrap();
        assert_eq!(dec.alpha, Vector3::zeros());
        assert_eq!(dec.beta, Vector3::zeros());
    }

    #[test]
    fn ground_coefficients_series() {
        // z'' = γ z: α_z = k(1 - 2cosh x + cosh 2x), β_z = k(-2 sinh x + sinh 2x)/√γ
        let g = 2.25e-6;
        let frame = FrameModel::static_gradient(ground(g));
        let dec = phase_decomposition(&frame, &PulseSequence::new(K, T)).unwrap();
        let x = g.sqrt() * T;
        let az = K * (1.0 - 2.0 * x.cosh() + (2.0 * x).cosh());
        let bz = K * (-2.0 * x.sinh() + (2.0 * x).sinh()) / g.sqrt();
        assert!((dec.alpha.z - az).abs() < 1e-9 * az.abs());
        assert!((dec.beta.z - bz).abs() < 1e-9 * bz.abs());
        // leading order k γ T² and k γ T³
        assert!((dec.alpha.z / (K * g * T * T) - 1.0).abs() < 2.0 * g * T * T);
        assert!((dec.beta.z / (K * g * T.powi(3)) - 1.0).abs() < 2.0 * g * T * T);
    }

    #[test]
    fn coefficients_affine_in_shifts() {
        let frame = FrameModel::inertial(OrbitModel::table1(), 0.9.into());
        let flow = FlowMap::compute(&frame, T).unwrap();
        let base = PulseSequence::new(K, T);
        let s1 = Shifts::new(1e-4, -2e-4, 3e-5, 4e-5);
        let s2 = Shifts::new(-3e-4, 1e-4, -2e-5, 1e-5);
        let mid = Shifts::from_array([0, 1, 2, 3].map(|i| 0.5 * (s1.to_array()[i] + s2.to_array()[i])));
        let (a1, b1) = coefficients(&flow, &base.with_shifts(s1));
        let (a2, b2) = coefficients(&flow, &base.with_shifts(s2));
        let (am, bm) = coefficients(&flow, &base.with_shifts(mid));
        assert!((am - 0.5 * (a1 + a2)).amax() < 1e-6);
        assert!((bm - 0.5 * (b1 + b2)).amax() < 1e-4);
    }

    #[test]
    fn residual_rotation_is_small() {
        let o = OrbitModel::table1();
        let (rel, abs) = residual_rotation_deviation(&o, 0.3.into(), Vector3::new(1e-7, 1e-7, 1e-7), 2.0 * T);
        assert!(rel < 2e-5, "{rel}");
        assert!(rel <= 2.0 * 3f64.sqrt() * 1e-7 * 2.0 * T);
        assert!(abs < 1e-10);
        let (zero, _) = residual_rotation_deviation(&o, 0.3.into(), Vector3::zeros(), 2.0 * T);
        assert!(zero < 1e-15);
    }

    #[test]
    fn invalid_pulses_rejected() {
        let r = mz_phase(&FrameModel::free(), &PulseSequence::new(K, -1.0), &KinematicState::at_rest());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        assert!(PulseSequence::new(K, T).with_shifts(Shifts::new(0.1, 0.0, 0.0, 0.0)).validate().is_ok());
        assert!(!PulseSequence::new(K, T).with_shifts(Shifts::new(0.1, 0.0, 0.0, 0.0)).is_perturbative());
    }

    #[test]
    fn spin_changes_modulation_frequency() {
        let o = OrbitModel::table1();
        let f = FrameModel::inertial(o, 0.0.into()).with_spin(Vector3::new(0.0, o.omega(), 0.0));
        assert_eq!(f.modulation_frequency(), 0.0);
        assert_eq!(frame_period(&f), None);
        // nadir pointing: the tensor is frozen
        assert_eq!(f.gradient_at(0.0), f.gradient_at(1000.0));
    }
}
