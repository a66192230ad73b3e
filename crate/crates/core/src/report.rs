//! CSV emission. Floats are written with 17 significant digits so files
//! round-trip exactly and diff cleanly.

use std::io::{self, Write};

use crate::budget::{BudgetLedger, CurveRow};
use crate::compensation::{shifts_to_laser, CompensationShifts};
use crate::error::Result;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct SweepRow {
    pub solution: CompensationShifts,
    pub theta2: f64,
    pub theta3: f64,
    pub df2: f64,
    pub df3: f64,
}

/// Attaches laser settings to solved shifts.
pub fn sweep_rows(solutions: &[CompensationShifts], k_eff: f64) -> Result<Vec<SweepRow>> {
    solutions
        .iter()
        .map(|s| {
            let l = shifts_to_laser(&s.shifts, k_eff)?;
            Ok(SweepRow { solution: *s, theta2: l.theta2, theta3: l.theta3, df2: l.delta_f2, df3: l.delta_f3 })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "chi,dx2,dz2,dx3,dz3,theta2,theta3,df2,df3")?;
    for r in rows {
        let s = r.solution.shifts;
        let fields = [r.solution.chi0.radians(), s.dx2, s.dz2, s.dx3, s.dz3, r.theta2, r.theta3, r.df2, r.df3];
        writeln!(w, "{}", fields.map(num).join(","))?;
    }
    Ok(())
}

/// One row per term, then `total_linear` and `total_quadrature`. Harmonics
/// are `;`-separated.
pub fn write_ledger_csv<W: Write>(mut w: W, ledger: &BudgetLedger) -> io::Result<()> {
    writeln!(w, "term,magnitude,harmonic")?;
    for t in &ledger.terms {
        let h: Vec<String> = t.harmonics.iter().map(|k| k.to_string()).collect();
        writeln!(w, "{},{},{}", t.label, num(t.magnitude), h.join(";"))?;
    }
    writeln!(w, "total_linear,{},", num(ledger.total_linear()))?;
    writeln!(w, "total_quadrature,{},", num(ledger.total_quadrature()))?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(mut w: W, rows: &[CurveRow]) -> io::Result<()> {
    writeln!(w, "tau_s,delta_eta_sys,sigma_eta_stat,delta_eta_sys_uncompensated")?;
    for r in rows {
        let fields = [r.tau, r.delta_eta_sys, r.sigma_eta_stat, r.delta_eta_sys_uncompensated];
        writeln!(w, "{}", fields.map(num).join(","))?;
    }
    Ok(())
}
