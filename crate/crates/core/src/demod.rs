//! Demodulation of the differential-acceleration signal at the modulation
//! frequency, and the shot-noise statistics of the Eötvös estimate.

use crate::error::{Error, Result};

/// `Δa(t) = η g0 cos(Ω t) + Δa_const + Σ_k Δa_k cos(k Ω t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalModel {
    /// η g0, m/s²
    pub violation_amp: f64,
    pub const_term: f64,
    /// `(k, amplitude)` with distinct `k ≥ 1`.
    pub harmonics: Vec<(u32, f64)>,
    /// rad/s
    pub omega_m: f64,
}

impl SignalModel {
    pub fn new(omega_m: f64) -> Self {
        SignalModel { omega_m, ..SignalModel::default() }
    }

    pub fn with_violation(mut self, amp: f64) -> Self {
        self.violation_amp = amp;
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.const_term = c;
        self
    }

    pub fn with_harmonic(mut self, k: u32, amp: f64) -> Self {
        self.harmonics.push((k, amp));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m.is_finite() && self.omega_m != 0.0) {
            return Err(Error::invalid("modulation frequency must be finite and nonzero"));
        }
        let mut seen: Vec<u32> = Vec::with_capacity(self.harmonics.len());
        for &(k, _) in &self.harmonics {
            if k == 0 {
                return Err(Error::invalid("harmonic index 0 belongs in const_term"));
            }
            if seen.contains(&k) {
                return Err(Error::invalid(format!("harmonic k = {k} listed twice")));
            }
            seen.push(k);
        }
        Ok(())
    }

    /// Amplitude of the component at the modulation frequency itself.
    pub fn in_phase_amplitude(&self) -> f64 {
        self.violation_amp + self.harmonics.iter().filter(|h| h.0 == 1).map(|h| h.1).sum::<f64>()
    }

    pub fn at(&self, t: f64) -> f64 {
        let w = self.omega_m;
        self.violation_amp * (w * t).cos()
            + self.const_term
            + self.harmonics.iter().map(|&(k, a)| a * (k as f64 * w * t).cos()).sum::<f64>()
    }
}

/// `(2/τ) ∫₀^τ Δa(t) cos(Ω t) dt`, evaluated in closed form.
pub fn demodulate_continuous(signal: &SignalModel, tau: f64) -> Result<f64> {
    signal.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("integration time must be positive, got {tau}")));
    }
    let w = signal.omega_m;
    let x = w * tau;
    let mut out = signal.in_phase_amplitude() * (1.0 + (2.0 * x).sin() / (2.0 * x));
    out += 2.0 * signal.const_term * x.sin() / x;
    for &(k, b) in signal.harmonics.iter().filter(|h| h.0 >= 2) {
        let (lo, hi) = ((k - 1) as f64, (k + 1) as f64);
        out += b / tau * ((lo * x).sin() / (lo * w) + (hi * x).sin() / (hi * w));
    }
    Ok(out)
}

/// Worst-case magnitude of the continuous demodulation over the phases of
/// the individual terms.
pub fn demodulation_bound(signal: &SignalModel, tau: f64) -> Result<f64> {
    signal.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("integration time must be positive, got {tau}")));
    }
    let a = signal.in_phase_amplitude().abs();
    let sys: f64 = signal.harmonics.iter().filter(|h| h.0 >= 2).map(|h| h.1.abs()).sum();
    let gain = 2.0 / (tau * signal.omega_m.abs());
    Ok(a + gain * (0.5 * a + signal.const_term.abs() + 4.0 / 3.0 * sys))
}

/// `(2/n) Σ a_m cos(Ω t_m)` over uniformly spaced samples `(t_m, a_m)`.
pub fn demodulate_discrete(samples: &[(f64, f64)], omega_m: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples to demodulate"));
    }
    if samples.len() >= 2 {
        let dt = samples[1].0 - samples[0].0;
        if !(dt > 0.0) {
            return Err(Error::invalid("sample times must increase"));
        }
        for w in samples.windows(2) {
            if ((w[1].0 - w[0].0) - dt).abs() > 1e-6 * dt {
                return Err(Error::invalid("samples are not uniformly spaced"));
            }
        }
    }
    let sum: f64 = samples.iter().map(|&(t, a)| a * (omega_m * t).cos()).sum();
    Ok(2.0 * sum / samples.len() as f64)
}

/// `Σ_{m=1}^{n} cos²(m x)`.
pub fn cos_squared_sum(n: u64, x: f64) -> f64 {
    let nf = n as f64;
    let s = x.sin();
    if s.abs() < 1e-9 {
        // x near a multiple of pi: every term is ~1
        return (1..=n).map(|m| (m as f64 * x).cos().powi(2)).sum();
    }
    0.5 * nf + 0.5 * (nf * x).sin() * ((nf + 1.0) * x).cos() / s
}

/// Per-species interferometer parameters entering the shot noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerNoise {
    pub contrast: f64,
    pub atoms: f64,
    /// rad/m
    pub k_eff: f64,
    /// s
    pub t: f64,
}

impl InterferometerNoise {
    pub fn single_shot(&self) -> Result<f64> {
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::invalid(format!("contrast must be in (0, 1], got {}", self.contrast)));
        }
        if !(self.atoms >= 1.0) {
            return Err(Error::invalid(format!("atom number must be at least 1, got {}", self.atoms)));
        }
        if !(self.k_eff > 0.0 && self.t > 0.0) {
            return Err(Error::invalid("k_eff and T must be positive"));
        }
        Ok(1.0 / (self.contrast * self.k_eff * self.t * self.t * self.atoms.sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    species: Vec<InterferometerNoise>,
    cycle_time: f64,
    omega_m: f64,
    sigma: f64,
}

impl NoiseModel {
    pub fn new(species: Vec<InterferometerNoise>, cycle_time: f64, omega_m: f64) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::invalid("noise model needs at least one species"));
        }
        if !(cycle_time > 0.0 && cycle_time.is_finite()) {
            return Err(Error::invalid(format!("cycle time must be positive, got {cycle_time}")));
        }
        let sigma = quadrature_sigma(&species)?;
        Ok(NoiseModel { species, cycle_time, omega_m, sigma })
    }

    pub fn species(&self) -> &[InterferometerNoise] {
        &self.species
    }

    pub fn cycle_time(&self) -> f64 {
        self.cycle_time
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    /// Single-shot differential acceleration noise, m/s².
    pub fn sigma_single_shot(&self) -> f64 {
        self.sigma
    }
}

fn quadrature_sigma(species: &[InterferometerNoise]) -> Result<f64> {
    let mut acc = 0.0;
    for s in species {
        acc += s.single_shot()?.powi(2);
    }
    Ok(acc.sqrt())
}

/// Shot-noise limited single-shot differential acceleration, m/s².
pub fn shot_noise_sigma(noise: &NoiseModel) -> Result<f64> {
    quadrature_sigma(noise.species())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    /// From the least-squares covariance of the cosine regressor.
    Exact,
    /// `σ √2 / (g0 √n)`.
    Asymptotic,
}

/// Statistical uncertainty of η after `n` cycles.
pub fn sigma_eta(noise: &NoiseModel, g0: f64, n: u64, mode: SigmaMode) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("need at least one measurement"));
    }
    if !(g0 > 0.0) {
        return Err(Error::invalid("g0 must be positive"));
    }
    let sigma = noise.sigma_single_shot();
    Ok(match mode {
        SigmaMode::Asymptotic => sigma * 2f64.sqrt() / (g0 * (n as f64).sqrt()),
        SigmaMode::Exact => sigma / g0 / cos_squared_sum(n, noise.omega_m() * noise.cycle_time()).sqrt(),
    })
}
