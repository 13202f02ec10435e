//! The `sir` subcommand.

use std::fmt::Write as _;
use std::io::Write;

use netcascade_core::sir::{
    basic_reproduction_number, final_size_fraction, final_size_residual, initial_growth_rate, integrate_sir,
    threshold_report, SirParams, SirTrajectory, ThresholdReport,
};

use crate::error::{CliError, CliResult};
use crate::fmt::{fmt_real, fmt_sig6};

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "s", "i", "r"];

#[derive(Debug, Clone, PartialEq)]
pub struct SirRun {
    pub params: SirParams,
    pub trajectory: SirTrajectory,
    pub r0: f64,
    pub growth_rate: f64,
    /// Predicted susceptible fraction once the epidemic has burnt out.
    pub final_fraction: f64,
    /// Final-size residual at the last simulated `S`.
    pub residual: f64,
    pub threshold: Option<ThresholdReport>,
}

pub fn sir_command(
    params: SirParams,
    t_max: f64,
    step: f64,
    behavioral_r: Option<f64>,
    tol: f64,
) -> CliResult<SirRun> {
    let trajectory = integrate_sir(&params, t_max, step)?;
    let threshold = behavioral_r.map(|r| threshold_report(&params, r, tol)).transpose()?;
    let [s_end, _, _] = trajectory.last();
    Ok(SirRun {
        r0: basic_reproduction_number(&params),
        growth_rate: initial_growth_rate(&params),
        final_fraction: final_size_fraction(&params),
        residual: final_size_residual(&params, s_end),
        trajectory,
        params,
        threshold,
    })
}

impl SirRun {
    pub fn render(&self) -> String {
        let n = self.params.population();
        let (t_peak, i_peak) = self.trajectory.peak();
        let [s, i, r] = self.trajectory.last();
        let t_end = *self.trajectory.times.last().expect("nonempty trajectory");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "R0          {}  ({})",
            fmt_sig6(self.r0),
            if self.r0 * self.params.s0() / n > 1.0 { "outbreak grows" } else { "outbreak dies out" }
        );
        let _ = writeln!(out, "growth      {} per unit time at t = 0", fmt_sig6(self.growth_rate));
        if i_peak > self.params.i0() {
            let _ = writeln!(out, "peak        I = {} at t = {}", fmt_sig6(i_peak), fmt_sig6(t_peak));
        } else {
            let _ = writeln!(out, "peak        none: I never rises above its initial value");
        }
        let _ = writeln!(
            out,
            "t = {:<7} S = {}  I = {}  R = {}",
            fmt_sig6(t_end),
            fmt_sig6(s),
            fmt_sig6(i),
            fmt_sig6(r)
        );
        let _ = writeln!(
            out,
            "final size  s_inf = {} predicted, {} simulated (residual {})",
            fmt_sig6(self.final_fraction),
            fmt_sig6(s / n),
            fmt_sig6(self.residual)
        );
        if let Some(th) = &self.threshold {
            let _ = writeln!(
                out,
                "behavioural regime {}: {}",
                th.behavioral_regime.regime,
                if th.aligned { "same side of 1 as R0" } else { "opposite side of 1 from R0" }
            );
        }
        out
    }

    pub fn write_trajectory<W: Write>(&self, out: W) -> CliResult<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(TRAJECTORY_HEADER)?;
        let tr = &self.trajectory;
        for k in 0..tr.len() {
            wtr.write_record([fmt_real(tr.times[k]), fmt_real(tr.s[k]), fmt_real(tr.i[k]), fmt_real(tr.r[k])])?;
        }
        wtr.flush().map_err(|e| CliError::io("<csv>", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outbreak_and_fizzle() {
        let p = SirParams::outbreak(0.3, 0.1, 1000.0, 1.0).unwrap();
        let run = sir_command(p, 300.0, 0.1, Some(3.36), 1e-9).unwrap();
        assert!(run.render().contains("peak        I ="));
        assert!(run.residual.abs() < 1e-3);
        assert!(run.threshold.unwrap().aligned);

        let p = SirParams::outbreak(0.05, 0.1, 1000.0, 10.0).unwrap();
        let run = sir_command(p, 50.0, 0.1, Some(3.36), 1e-9).unwrap();
        assert!(run.render().contains("peak        none"));
        assert!(!run.threshold.unwrap().aligned);
    }

    #[test]
    fn trajectory_csv() {
        let p = SirParams::outbreak(0.3, 0.1, 100.0, 1.0).unwrap();
        let run = sir_command(p, 1.0, 0.5, None, 1e-9).unwrap();
        let mut buf = Vec::new();
        run.write_trajectory(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,s,i,r");
        assert_eq!(lines[1], "0,99,1,0");
    }
}
