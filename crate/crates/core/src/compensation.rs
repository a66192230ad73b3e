//! Wave-vector shifts that remove the dependence of the phase on the initial
//! position and velocity, and their realization as laser tilt and frequency.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector3, Vector4};
use rayon::prelude::*;

use crate::dynamics::{coefficients, FlowMap, FrameModel, GradientField, PulseSequence, Shifts};
use crate::error::{Error, Result};
use crate::orbit::OrbitalPhase;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convergence threshold on `‖(α_x, α_z, β_x/1s, β_z/1s)‖∞ / k_eff`.
pub const SHIFT_TOLERANCE: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
const JACOBIAN_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationShifts {
    pub shifts: Shifts,
    pub chi0: OrbitalPhase,
    pub converged: bool,
    pub iterations: usize,
    /// rad/m
    pub residual_alpha: Vector3<f64>,
    /// rad/(m/s)
    pub residual_beta: Vector3<f64>,
}

/// Leading-order shifts for an inertial satellite on a circular orbit,
/// valid to first order in `γT²` and `TΩ`.
pub fn first_order_shifts(gamma: f64, omega: f64, t: f64, chi: OrbitalPhase) -> Shifts {
    let (s2, c2) = (2.0 * chi.radians()).sin_cos();
    let g2 = gamma * t * t;
    let g3 = g2 * t * omega;
    Shifts {
        dx2: 0.375 * g2 * s2 + 0.625 * g3 * c2,
        dz2: 0.125 * g2 * (1.0 + 3.0 * c2) - 0.625 * g3 * s2,
        dx3: -0.25 * g3 * c2,
        dz3: 0.25 * g3 * s2,
    }
}

/// Exact shifts that counter-rotate the wave vector for a frame spinning
/// at `omega_y` about y, with no gradient.
pub fn rotation_shifts(omega_y: f64, t: f64) -> Shifts {
    let (s1, c1) = (omega_y * t).sin_cos();
    let (s2, c2) = (2.0 * omega_y * t).sin_cos();
    Shifts { dx2: -s1, dz2: c1 - 1.0, dx3: -s2, dz3: c2 - 1.0 }
}

fn seed_shifts(frame: &FrameModel, t: f64) -> Shifts {
    let grad = match &frame.gradient {
        GradientField::None => Shifts::default(),
        GradientField::Static(g) => Shifts::new(0.5 * g.xz * t * t, 0.5 * g.zz * t * t, 0.0, 0.0),
        GradientField::Orbit { orbit, chi0, .. } => {
            first_order_shifts(orbit.gamma(), frame.modulation_frequency(), t, *chi0)
        }
    };
    let rot = rotation_shifts(frame.total_rotation().y, t);
    Shifts::from_array([0, 1, 2, 3].map(|i| grad.to_array()[i] + rot.to_array()[i]))
}

fn residual(flow: &FlowMap, pulses: &PulseSequence, d: &Vector4<f64>) -> (Vector4<f64>, Vector3<f64>, Vector3<f64>) {
    let p = pulses.with_shifts(Shifts::new(d[0], d[1], d[2], d[3]));
    let (a, b) = coefficients(flow, &p);
    let k = pulses.k_eff;
    // β scaled by 1 s
    (Vector4::new(a.x / k, a.z / k, b.x / k, b.z / k), a, b)
}

/// Newton solve of `α_x = α_z = β_x = β_z = 0` for the four shifts, using an
/// already computed flow. The shifts of `pulses` are ignored.
pub fn solve_shifts_with_flow(
    flow: &FlowMap,
    pulses: &PulseSequence,
    seed: Shifts,
    chi0: OrbitalPhase,
) -> Result<CompensationShifts> {
    pulses.validate()?;
    let s = seed.to_array();
    let mut d = Vector4::new(s[0], s[1], s[2], s[3]);
    let (mut f, mut a, mut b) = residual(flow, pulses, &d);
    let mut iterations = 0;
    while f.amax() > SHIFT_TOLERANCE {
        if iterations == MAX_NEWTON_ITERATIONS || !f.iter().all(|x| x.is_finite()) {
            return Err(Error::NoConvergence { iterations, residual: [f[0], f[1], f[2], f[3]] });
        }
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let mut up = d;
            let mut dn = d;
            up[j] += JACOBIAN_STEP;
            dn[j] -= JACOBIAN_STEP;
            let col = (residual(flow, pulses, &up).0 - residual(flow, pulses, &dn).0) / (2.0 * JACOBIAN_STEP);
            jac.set_column(j, &col);
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::NoConvergence { iterations, residual: [f[0], f[1], f[2], f[3]] })?;
        d -= step;
        iterations += 1;
        (f, a, b) = residual(flow, pulses, &d);
    }
    let k = pulses.k_eff;
    if a.y.abs() / k > SHIFT_TOLERANCE || b.y.abs() / k > SHIFT_TOLERANCE {
        return Err(Error::ModelViolation(format!(
            "out-of-plane coefficients alpha_y = {:e} rad/m, beta_y = {:e} rad s/m cannot be nulled by in-plane \
             shifts; the frame rotates or accelerates out of the orbital plane",
            a.y, b.y
        )));
    }
    Ok(CompensationShifts {
        shifts: Shifts::new(d[0], d[1], d[2], d[3]),
        chi0,
        converged: true,
        iterations,
        residual_alpha: a,
        residual_beta: b,
    })
}

/// Shifts nulling the in-plane initial-condition coefficients of `frame`.
pub fn solve_shifts(frame: &FrameModel, pulses: &PulseSequence) -> Result<CompensationShifts> {
    pulses.validate()?;
    let flow = FlowMap::compute(frame, pulses.t)?;
    let chi0 = match &frame.gradient {
        GradientField::Orbit { chi0, .. } => *chi0,
        _ => OrbitalPhase::default(),
    };
    solve_shifts_with_flow(&flow, pulses, seed_shifts(frame, pulses.t), chi0)
}

/// `n` equally spaced phases starting at 0.
pub fn uniform_chi_grid(n: usize) -> Vec<OrbitalPhase> {
    (0..n).map(|i| OrbitalPhase::new(TAU * i as f64 / n as f64)).collect()
}

/// Solves the shifts at each orbital phase of `grid`, in parallel. Output
/// order follows `grid`.
pub fn shifts_sweep(template: &FrameModel, pulses: &PulseSequence, grid: &[OrbitalPhase]) -> Result<Vec<CompensationShifts>> {
    if !matches!(template.gradient, GradientField::Orbit { .. }) {
        return Err(Error::invalid("a shifts sweep needs an orbit gradient field"));
    }
    grid.par_iter()
        .map(|chi| {
            let frame = template.clone().with_chi0(*chi);
            solve_shifts(&frame, pulses)
                .map_err(|e| Error::SweepPoint { chi: chi.radians(), source: Box::new(e) })
        })
        .collect()
}

/// Tilt of pulses 2 and 3 relative to pulse 1, and their laser frequency
/// offsets.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaserSettings {
    pub theta2: f64,
    pub theta3: f64,
    /// Hz
    pub delta_f2: f64,
    pub delta_f3: f64,
}

/// Laser frequency for an effective wave number of four photon momenta per
/// beam pair (second-order double diffraction), Hz.
pub fn laser_frequency(k_eff: f64) -> f64 {
    SPEED_OF_LIGHT * k_eff / (8.0 * PI)
}

fn tilt_and_detuning(dx: f64, dz: f64, f0: f64) -> Result<(f64, f64)> {
    let denom = 1.0 + dz;
    if !(denom > 0.0) {
        return Err(Error::DegenerateWaveVector(denom));
    }
    Ok((dx.atan2(denom), f0 * (dx.hypot(denom) - 1.0)))
}

pub fn shifts_to_laser(shifts: &Shifts, k_eff: f64) -> Result<LaserSettings> {
    let f0 = laser_frequency(k_eff);
    let (theta2, delta_f2) = tilt_and_detuning(shifts.dx2, shifts.dz2, f0)?;
    let (theta3, delta_f3) = tilt_and_detuning(shifts.dx3, shifts.dz3, f0)?;
    Ok(LaserSettings { theta2, theta3, delta_f2, delta_f3 })
}

pub fn laser_to_shifts(settings: &LaserSettings, k_eff: f64) -> Shifts {
    let f0 = laser_frequency(k_eff);
    let one = |theta: f64, df: f64| {
        let rho = 1.0 + df / f0;
        let (s, c) = theta.sin_cos();
        (rho * s, rho * c - 1.0)
    };
    let (dx2, dz2) = one(settings.theta2, settings.delta_f2);
    let (dx3, dz3) = one(settings.theta3, settings.delta_f3);
    Shifts { dx2, dz2, dx3, dz3 }
}
