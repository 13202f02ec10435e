//! Parameter grids over `w, b, alpha, q, d`.

use std::io::Write;
use std::str::FromStr;

use netcascade_core::analytic::{network_multiplier, total_responsibility};
use netcascade_core::params::classify_regime;
use netcascade_core::{Error as CoreError, ModelParams};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::fmt::fmt_real;
use crate::report::param_cells;
use crate::scenario::ScenarioSpec;

pub const DEFAULT_ROW_CAP: u64 = 1_000_000;
pub const SWEEP_HEADER: [&str; 11] = ["label", "w", "b", "alpha", "q", "d", "r", "regime", "T", "M", "overflow"];

/// Rows evaluated in parallel per batch before being written in order.
const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    W,
    B,
    Alpha,
    Q,
    D,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::W => "w",
            SweepParam::B => "b",
            SweepParam::Alpha => "alpha",
            SweepParam::Q => "q",
            SweepParam::D => "d",
        }
    }

    fn apply(self, p: ModelParams, v: f64) -> netcascade_core::Result<ModelParams> {
        match self {
            SweepParam::W => p.with_w(v),
            SweepParam::B => p.with_b(v),
            SweepParam::Alpha => p.with_alpha(v),
            SweepParam::Q => p.with_q(v),
            // values of d are checked to be whole and in range when the axis is built
            SweepParam::D => p.with_d(v as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for Axis {
    type Err = CliError;

    /// `name=start:stop:count` (inclusive linear grid) or `name=v1,v2,...`.
    fn from_str(s: &str) -> CliResult<Self> {
        let usage = |m: String| CliError::Usage(format!("axis `{s}`: {m}"));
        let (name, spec) = s.split_once('=').ok_or_else(|| usage("expected name=values".into()))?;
        let param = match name.trim() {
            "w" => SweepParam::W,
            "b" => SweepParam::B,
            "alpha" => SweepParam::Alpha,
            "q" => SweepParam::Q,
            "d" => SweepParam::D,
            other => return Err(usage(format!("unknown parameter `{other}` (w, b, alpha, q, d)"))),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("`{}` is not a number", t.trim())));
        let values = if spec.contains(':') {
            let parts: Vec<&str> = spec.split(':').collect();
            if parts.len() != 3 {
                return Err(usage("grid form is start:stop:count".into()));
            }
            let (start, stop) = (num(parts[0])?, num(parts[1])?);
            let count: usize =
                parts[2].trim().parse().map_err(|_| usage(format!("`{}` is not a count", parts[2].trim())))?;
            linspace(start, stop, count).ok_or_else(|| usage("count must be >= 1, and >= 2 unless start == stop".into()))?
        } else {
            spec.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
        };
        if values.is_empty() {
            return Err(usage("no values".into()));
        }
        if param == SweepParam::D {
            for &v in &values {
                if !(v.fract() == 0.0 && v >= 1.0 && v <= f64::from(u32::MAX)) {
                    return Err(CliError::domain("d", None, format!("sweep value {v} is not an integer >= 1")));
                }
            }
        }
        Ok(Axis { param, values })
    }
}

/// `count` points from `start` to `stop` inclusive, `start + (stop − start)·i/(count − 1)`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Option<Vec<f64>> {
    match count {
        0 => None,
        1 if start == stop => Some(vec![start]),
        1 => None,
        _ => {
            let span = stop - start;
            let last = (count - 1) as f64;
            Some((0..count).map(|i| if i == count - 1 { stop } else { start + span * (i as f64) / last }).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioSpec,
    pub axes: Vec<Axis>,
    pub row_cap: u64,
}

impl SweepSpec {
    pub fn new(base: ScenarioSpec, axes: Vec<Axis>) -> Self {
        Self { base, axes, row_cap: DEFAULT_ROW_CAP }
    }

    pub fn rows(&self) -> Option<u64> {
        self.axes.iter().try_fold(1u64, |acc, a| acc.checked_mul(a.values.len() as u64))
    }

    /// Checks the grid size and that every axis value lies in its parameter's domain.
    pub fn validate(&self) -> CliResult<u64> {
        let rows = self.rows().filter(|&r| r <= self.row_cap).ok_or_else(|| {
            CliError::Usage(format!("grid exceeds the cap of {} rows", self.row_cap))
        })?;
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(CliError::Usage(format!("parameter `{}` swept twice", a.param.name())));
            }
            for &v in &a.values {
                a.param.apply(self.base.params, v).map_err(|e| CliError::domain(a.param.name(), None, e.to_string()))?;
            }
        }
        Ok(rows)
    }

    /// Parameters of row `index`; the first axis varies slowest.
    pub fn point(&self, mut index: u64) -> netcascade_core::Result<ModelParams> {
        let mut p = self.base.params;
        let mut picks = vec![0usize; self.axes.len()];
        for (slot, a) in picks.iter_mut().zip(&self.axes).rev() {
            let n = a.values.len() as u64;
            *slot = (index % n) as usize;
            index /= n;
        }
        for (a, &i) in self.axes.iter().zip(&picks) {
            p = a.param.apply(p, a.values[i])?;
        }
        Ok(p)
    }
}

pub fn sweep_record(label: &str, p: &ModelParams, tol: f64) -> CliResult<Vec<String>> {
    let mut row = param_cells(label, p);
    let r = p.ratio();
    row.push(fmt_real(r.value()));
    row.push(classify_regime(r, tol)?.regime.as_str().to_string());
    let cell = |v: netcascade_core::Result<f64>| -> CliResult<(String, Option<String>)> {
        match v {
            Ok(x) => Ok((fmt_real(x), None)),
            Err(CoreError::Overflow(o)) => Ok((String::new(), Some(fmt_real(o.d_log_r.unwrap_or(o.log_abs_total))))),
            Err(e) => Err(e.into()),
        }
    };
    let (t, t_ovf) = cell(total_responsibility(p))?;
    let (m, m_ovf) = cell(network_multiplier(p))?;
    row.extend([t, m, t_ovf.or(m_ovf).unwrap_or_default()]);
    Ok(row)
}

/// Streams the grid as CSV in row-major order. Batches are evaluated in
/// parallel and written sequentially, so output is independent of the
/// thread count.
pub fn sweep_grid<W: Write>(spec: &SweepSpec, tol: f64, out: W) -> CliResult<u64> {
    let rows = spec.validate()?;
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SWEEP_HEADER)?;
    let label = spec.base.label.as_str();
    let mut start = 0u64;
    while start < rows {
        let end = (start + BATCH as u64).min(rows);
        let batch: Vec<Vec<String>> = (start..end)
            .into_par_iter()
            .map(|i| sweep_record(label, &spec.point(i)?, tol))
            .collect::<CliResult<_>>()?;
        for rec in &batch {
            wtr.write_record(rec)?;
        }
        start = end;
    }
    wtr.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(rows)
}
