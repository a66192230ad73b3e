//! Orbit geometry and the local gravity-gradient tensor in the satellite frame.
//!
//! The orbit lies in the x-z plane. The orbital position is parametrized by
//! the angle `chi`, with `chi = 0` at perigee on the +z axis, where the tensor
//! is `diag(-gamma/2, -gamma/2, gamma)`. Only the in-plane components
//! `T_xx, T_yy, T_zz, T_xz` are nonzero.
//!
//! Sign convention: the tensor is linear in `gamma`. [`OrbitModel::new`]
//! derives the positive magnitude `gamma = 2 GM / R0^3`; the
//! [`OrbitModel::table1`] preset carries the signed mission value
//! `gamma = -2e-6 s^-2`. Flipping the sign flips every gradient-induced
//! coefficient and every compensation shift.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// Geocentric gravitational constant, m^3/s^2.
pub const EARTH_GM: f64 = 3.986_004_418e14;
/// Mean Earth radius, m.
pub const EARTH_RADIUS: f64 = 6.371e6;

/// Orbital position angle, wrapped to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct OrbitalPhase(f64);

impl OrbitalPhase {
    pub fn new(radians: f64) -> Self {
        let mut chi = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if chi >= TAU {
            chi -= TAU;
        }
        OrbitalPhase(chi)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn advance(self, delta: f64) -> Self {
        OrbitalPhase::new(self.0 + delta)
    }
}

impl From<f64> for OrbitalPhase {
    fn from(radians: f64) -> Self {
        OrbitalPhase::new(radians)
    }
}

impl fmt::Display for OrbitalPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// Circular or elliptic orbit around a spherical Earth, with the derived
/// scalars used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitModel {
    altitude: f64,
    ellipticity: f64,
    earth_gm: f64,
    earth_radius: f64,
    gamma: f64,
    g0: f64,
    omega: f64,
}

impl OrbitModel {
    /// Orbit with perigee altitude `altitude` (m) and ellipticity `e`.
    pub fn new(altitude: f64, ellipticity: f64) -> Result<Self> {
        Self::with_earth(altitude, ellipticity, EARTH_GM, EARTH_RADIUS)
    }

    pub fn with_earth(altitude: f64, ellipticity: f64, earth_gm: f64, earth_radius: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ellipticity) {
            return Err(Error::InvalidEllipticity(ellipticity));
        }
        if !(earth_gm > 0.0 && earth_radius > 0.0 && earth_radius + altitude > 0.0) {
            return Err(Error::invalid("orbit radius and GM must be positive"));
        }
        let r0 = earth_radius + altitude;
        let gm_r3 = earth_gm / (r0 * r0 * r0);
        Ok(OrbitModel {
            altitude,
            ellipticity,
            earth_gm,
            earth_radius,
            gamma: 2.0 * gm_r3,
            g0: earth_gm / (r0 * r0),
            omega: gm_r3.sqrt(),
        })
    }

    /// The mission orbit: 700 km, e = 1e-3, with the quoted rounded values
    /// `gamma = -2e-6 s^-2`, `g0 = 7.9 m/s^2`, `Omega = 2pi * 0.17 mHz`.
    pub fn table1() -> Self {
        OrbitModel::new(700e3, 1e-3)
            .expect("valid preset")
            .with_gamma(-2e-6)
            .with_g0(7.9)
            .with_omega(TAU * 0.17e-3)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_g0(mut self, g0: f64) -> Self {
        self.g0 = g0;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_ellipticity(mut self, ellipticity: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ellipticity) {
            return Err(Error::InvalidEllipticity(ellipticity));
        }
        self.ellipticity = ellipticity;
        Ok(self)
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    pub fn earth_gm(&self) -> f64 {
        self.earth_gm
    }

    pub fn earth_radius(&self) -> f64 {
        self.earth_radius
    }

    /// Perigee radius R0, m.
    pub fn perigee_radius(&self) -> f64 {
        self.earth_radius + self.altitude
    }

    /// Gradient scale, s^-2 (signed).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Local gravitational acceleration at R0, m/s^2.
    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// Orbital angular frequency, rad/s.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }
}

/// Symmetric in-plane gravity-gradient tensor, s^-2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradientTensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xz: f64,
}

impl GradientTensor {
    pub fn new(xx: f64, yy: f64, zz: f64, xz: f64) -> Self {
        GradientTensor { xx, yy, zz, xz }
    }

    pub fn diagonal(xx: f64, yy: f64, zz: f64) -> Self {
        GradientTensor { xx, yy, zz, xz: 0.0 }
    }

    pub fn zero() -> Self {
        GradientTensor::default()
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GradientTensor::new(self.xx * factor, self.yy * factor, self.zz * factor, self.xz * factor)
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.xx, 0.0, self.xz, 0.0, self.yy, 0.0, self.xz, 0.0, self.zz)
    }

    /// Projects a symmetric matrix onto the in-plane components.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        GradientTensor::new(m[(0, 0)], m[(1, 1)], m[(2, 2)], 0.5 * (m[(0, 2)] + m[(2, 0)]))
    }

    pub fn component(&self, c: TensorComponent) -> f64 {
        match c {
            TensorComponent::Xx => self.xx,
            TensorComponent::Yy => self.yy,
            TensorComponent::Zz => self.zz,
            TensorComponent::Xz => self.xz,
        }
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.yy.abs()).max(self.zz.abs()).max(self.xz.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorComponent {
    Xx,
    Yy,
    Zz,
    Xz,
}

/// How the elliptic tensor is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TensorMode {
    /// Ignore ellipticity.
    Circular,
    /// Closed form for the Kepler ellipse.
    #[default]
    Exact,
    /// Circular value plus the O(e) correction.
    FirstOrder,
}

pub fn gradient_tensor_circular(orbit: &OrbitModel, chi: OrbitalPhase) -> GradientTensor {
    let g = orbit.gamma();
    let (s2, c2) = (2.0 * chi.radians()).sin_cos();
    GradientTensor::new(
        0.25 * g * (1.0 - 3.0 * c2),
        -0.5 * g,
        0.25 * g * (1.0 + 3.0 * c2),
        0.75 * g * s2,
    )
}

/// Tensor on the elliptic orbit. `chi` is the parameter of the position
/// `R = a (sqrt(1-e^2) sin chi, 0, cos chi - e)` (eccentric anomaly), so that
/// `chi = 0` is perigee. `T_yy` closes the trace.
pub fn gradient_tensor_elliptic(orbit: &OrbitModel, chi: OrbitalPhase, mode: TensorMode) -> GradientTensor {
    let e = orbit.ellipticity();
    match mode {
        TensorMode::Circular => gradient_tensor_circular(orbit, chi),
        TensorMode::Exact => {
            let g = orbit.gamma();
            let (s, c) = chi.radians().sin_cos();
            let c2 = (2.0 * chi.radians()).cos();
            let d = 1.0 - e * c;
            // (1-e)^3 / (1 - e cos chi)^5
            let p = (1.0 - e).powi(3) / d.powi(5);
            let xx = 0.25 * g * p * (1.0 - 4.0 * e * e + 4.0 * e * c + (2.0 * e * e - 3.0) * c2);
            let zz = -0.5 * g * p * (1.0 - 3.0 * e * e + 4.0 * e * c + (e * e - 3.0) * c * c);
            let xz = 1.5 * g * p * (1.0 - e * e).sqrt() * s * (c - e);
            GradientTensor::new(xx, -(xx + zz), zz, xz)
        }
        TensorMode::FirstOrder => {
            let circ = gradient_tensor_circular(orbit, chi);
            let k = 0.375 * orbit.gamma() * e;
            let x = chi.radians();
            let (c1, c2, c3) = (x.cos(), (2.0 * x).cos(), (3.0 * x).cos());
            let (s1, s2, s3) = (x.sin(), (2.0 * x).sin(), (3.0 * x).sin());
            let xx = circ.xx + k * (-2.0 + c1 + 6.0 * c2 - 5.0 * c3);
            let zz = circ.zz + k * (-2.0 + 3.0 * c1 - 6.0 * c2 + 5.0 * c3);
            let xz = circ.xz + k * (s1 - 6.0 * s2 + 5.0 * s3);
            GradientTensor::new(xx, -(xx + zz), zz, xz)
        }
    }
}

/// Rotation about +y by `angle`; maps +z towards +x.
pub fn rotation_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotation_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rotation_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Similarity transform `D(angle) T D(angle)^T` about the y axis.
pub fn rotate_tensor(t: &GradientTensor, angle: f64) -> GradientTensor {
    let d = rotation_y(angle);
    GradientTensor::from_matrix(&(d * t.to_matrix() * d.transpose()))
}

/// Circular-orbit tensor a time `t` after the sequence started at `chi0`.
pub fn gradient_tensor_at_time(orbit: &OrbitModel, chi0: OrbitalPhase, t: f64) -> GradientTensor {
    rotate_tensor(&gradient_tensor_circular(orbit, chi0), orbit.omega() * t)
}

/// Fourier coefficient of a tensor component at harmonic `k` of the orbital
/// frequency: `component(chi) = sum_k cos_amp cos(k chi) + sin_amp sin(k chi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: u32,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

impl Harmonic {
    pub fn amplitude(&self) -> f64 {
        self.cos_amp.hypot(self.sin_amp)
    }
}

/// Harmonics k = 0..=3 of the first-order-in-`e` tensor over one orbit.
pub fn tensor_spectrum(orbit: &OrbitModel, component: TensorComponent, e: f64) -> Vec<Harmonic> {
    let g = orbit.gamma();
    let k = 0.375 * g * e;
    let cos_series = |a: [f64; 4]| -> Vec<Harmonic> {
        a.iter()
            .enumerate()
            .map(|(i, &c)| Harmonic { k: i as u32, cos_amp: c, sin_amp: 0.0 })
            .collect()
    };
    match component {
        TensorComponent::Xx => cos_series([0.25 * g - 2.0 * k, k, -0.75 * g + 6.0 * k, -5.0 * k]),
        TensorComponent::Zz => cos_series([0.25 * g - 2.0 * k, 3.0 * k, 0.75 * g - 6.0 * k, 5.0 * k]),
        TensorComponent::Yy => cos_series([-0.5 * g + 4.0 * k, -4.0 * k, 0.0, 0.0]),
        TensorComponent::Xz => [0.0, k, 0.75 * g - 6.0 * k, 5.0 * k]
            .iter()
            .enumerate()
            .map(|(i, &s)| Harmonic { k: i as u32, cos_amp: 0.0, sin_amp: s })
            .collect(),
    }
}
