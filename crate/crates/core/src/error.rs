use thiserror::Error;

/// Magnitude of a total that does not fit in an `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowReport {
    /// `d · ln r` for the homogeneous model; `None` when no single ratio applies.
    pub d_log_r: Option<f64>,
    /// Natural log of the absolute value of the unrepresentable total.
    pub log_abs_total: f64,
    /// Sign of the total (valence may be negative).
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("value overflows the floating range (ln|total| = {})", .0.log_abs_total)]
    Overflow(OverflowReport),
    #[error("infinite horizon diverges for r = {r} (requires r < 1)")]
    DivergentHorizon { r: f64 },
    #[error("{0}")]
    Domain(&'static str),
    #[error("solved {lever} = {value} lies outside its admissible range {range}")]
    InfeasibleLever {
        lever: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{which} schedule has {len} entries but depth {d} needs {needed}")]
    ScheduleLength {
        which: &'static str,
        len: usize,
        d: u32,
        needed: usize,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("power iteration did not converge after {iterations} iterations (best estimate {estimate})")]
    NotConverged { estimate: f64, iterations: usize },
    #[error("step too large: {0}")]
    StepTooLarge(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check(cond: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, expected })
    }
}
