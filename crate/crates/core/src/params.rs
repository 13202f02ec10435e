use core::fmt;

use crate::error::{check, Error, Result};

/// Half-width of the band around `r = 1` treated as critical unless the
/// caller asks for something else.
pub const DEFAULT_CRITICAL_TOLERANCE: f64 = 1e-9;

/// The model tuple `(w, b, α, q, d)`.
///
/// * `w` baseline valence of the act (any finite sign, zero allowed);
/// * `b ≥ 1` branching factor, real-valued (an average neighbour count);
/// * `α ∈ (0, 1]` per-hop attenuation of impact;
/// * `q ∈ [0, 1]` probability an affected agent adopts and passes it on;
/// * `d ≥ 1` depth horizon in hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    w: f64,
    b: f64,
    alpha: f64,
    q: f64,
    d: u32,
}

impl ModelParams {
    pub fn new(w: f64, b: f64, alpha: f64, q: f64, d: u32) -> Result<Self> {
        check(w.is_finite(), "w", w, "a finite real")?;
        check(b.is_finite() && b >= 1.0, "b", b, "a finite real >= 1")?;
        check(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "a real in (0, 1]")?;
        check((0.0..=1.0).contains(&q), "q", q, "a real in [0, 1]")?;
        check(d >= 1, "d", f64::from(d), "an integer >= 1")?;
        Ok(Self { w, b, alpha, q, d })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn with_w(self, w: f64) -> Result<Self> {
        Self::new(w, self.b, self.alpha, self.q, self.d)
    }

    pub fn with_b(self, b: f64) -> Result<Self> {
        Self::new(self.w, b, self.alpha, self.q, self.d)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.w, self.b, alpha, self.q, self.d)
    }

    pub fn with_q(self, q: f64) -> Result<Self> {
        Self::new(self.w, self.b, self.alpha, q, self.d)
    }

    pub fn with_d(self, d: u32) -> Result<Self> {
        Self::new(self.w, self.b, self.alpha, self.q, d)
    }

    /// `r = b·α·q`, grouped as `b·(αq)`: branching times per-hop retention.
    pub fn ratio(&self) -> EffectiveRatio {
        EffectiveRatio(self.b * (self.alpha * self.q))
    }
}

/// Effective diffusion ratio `r ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EffectiveRatio(f64);

impl EffectiveRatio {
    pub fn new(r: f64) -> Result<Self> {
        check(r.is_finite() && r >= 0.0, "r", r, "a finite real >= 0")?;
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EffectiveRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClass {
    pub regime: Regime,
    pub tolerance_used: f64,
}

/// Subcritical iff `r < 1 − tol`, critical iff `|r − 1| ≤ tol`,
/// supercritical iff `r > 1 + tol`.
pub fn classify_regime(r: EffectiveRatio, tol: f64) -> Result<RegimeClass> {
    check(tol.is_finite() && tol >= 0.0, "tol", tol, "a finite real >= 0")?;
    let r = r.value();
    let regime = if r < 1.0 - tol {
        Regime::Subcritical
    } else if r > 1.0 + tol {
        Regime::Supercritical
    } else {
        Regime::Critical
    };
    Ok(RegimeClass { regime, tolerance_used: tol })
}

/// Depth horizon for share computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(u32),
    Infinite,
}

impl From<u32> for Horizon {
    fn from(d: u32) -> Self {
        Horizon::Finite(d)
    }
}

pub(crate) fn invalid_depth() -> Error {
    Error::InvalidParameter { name: "d", value: 0.0, expected: "an integer >= 1" }
}
