//! Adaptive Dormand-Prince 5(4) stepper for small dense ODE systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-12, abs: 1e-15, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` in place. `t1 < t0` is
/// allowed and integrates backwards.
pub fn integrate<F>(mut f: F, t0: f64, y: &mut [f64], t1: f64, tol: &Tolerance) -> Result<Stats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut stats = Stats::default();
    if t1 == t0 || n == 0 {
        return Ok(stats);
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let mut t = t0;
    f(t, y, &mut k[0]);
    stats.evaluations += 1;

    let mut h = initial_step(&mut f, t, y, &k[0], dir, span, tol, &mut tmp, &mut ynew);
    stats.evaluations += 1;

    loop {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::Propagation { t, reason: "maximum number of steps exceeded" });
        }
        let remaining = t1 - t;
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        if h.abs() < 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::Propagation { t, reason: "step size underflow" });
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k[0][i];
        }
        f(t + C2 * h, &tmp, &mut k[1]);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        f(t + C3 * h, &tmp, &mut k[2]);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        f(t + C4 * h, &tmp, &mut k[3]);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        f(t + C5 * h, &tmp, &mut k[4]);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        f(t + h, &tmp, &mut k[5]);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        let t_new = if last { t1 } else { t + h };
        f(t_new, &ynew, &mut k[6]);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Propagation { t, reason: "non-finite state" });
        }

        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            stats.accepted += 1;
            t = t_new;
            y.copy_from_slice(&ynew);
            if last {
                return Ok(stats);
            }
            k.swap(0, 6);
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= factor.min(1.0);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    span: f64,
    tol: &Tolerance,
    y1: &mut [f64],
    f1: &mut [f64],
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    // Hairer, Norsett & Wanner, II.4
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..y.len() {
        let sc = tol.abs + tol.rel * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    for i in 0..y.len() {
        y1[i] = y[i] + dir * h0 * f0[i];
    }
    f(t + dir * h0, y1, f1);
    let mut d2 = 0.0;
    for i in 0..y.len() {
        let sc = tol.abs + tol.rel * y[i].abs();
        d2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    dir * (100.0 * h0).min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = [1.0];
        let stats = integrate(|_, y, dy| dy[0] = -y[0], 0.0, &mut y, 5.0, &Tolerance::default()).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-13);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let tol = Tolerance::default();
        let mut y = [1.0, 0.0];
        integrate(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 0.0, &mut y, 10.0, &tol).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-11);
        assert!((y[1] + 10f64.sin()).abs() < 1e-11);
        integrate(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 10.0, &mut y, 0.0, &tol).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11);
        assert!(y[1].abs() < 1e-11);
    }

    #[test]
    fn time_dependent_rhs() {
        let mut y = [0.0];
        integrate(|t, _, dy| dy[0] = t.cos(), 0.0, &mut y, 3.0, &Tolerance::default()).unwrap();
        assert!((y[0] - 3f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn zero_span_is_noop() {
        let mut y = [2.0];
        let s = integrate(|_, _, dy| dy[0] = 1.0, 1.0, &mut y, 1.0, &Tolerance::default()).unwrap();
        assert_eq!(y[0], 2.0);
        assert_eq!(s.accepted, 0);
    }

    #[test]
    fn blowup_reports_failure() {
        let mut y = [1.0];
        let tol = Tolerance { max_steps: 10_000, ..Tolerance::default() };
        let err = integrate(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &mut y, 2.0, &tol).unwrap_err();
        assert!(matches!(err, Error::Propagation { .. }));
    }

    #[test]
    fn step_budget_enforced() {
        let mut y = [1.0, 0.0];
        let tol = Tolerance { max_steps: 5, ..Tolerance::default() };
        let r = integrate(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 0.0, &mut y, 100.0, &tol);
        assert!(matches!(r, Err(Error::Propagation { reason: "maximum number of steps exceeded", .. })));
    }
}
