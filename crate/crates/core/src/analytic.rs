//! Closed-form evaluation of the branching diffusion model.
//!
//! An initiating act of valence `w` reaches `C_k = b^k q^{k-1}` agents at
//! depth `k` (no compliance gate on the first hop), each carrying impact
//! `w α^{k-1}`. Summing the layers gives the geometric series
//!
//! ```text
//! T = w b Σ_{j<d} r^j,   r = b α q
//! ```
//!
//! whose ratio to the dyadic baseline `w b` is the network multiplier `M`.

use alloc::vec::Vec;

use libm::{expm1, fabs, log, log1p, pow};

use crate::error::{check, Error, OverflowReport, Result};
use crate::params::{
    classify_regime, invalid_depth, EffectiveRatio, Horizon, ModelParams, Regime,
    DEFAULT_CRITICAL_TOLERANCE,
};
use crate::sum::KahanSum;

/// Below this distance from 1 the multiplier is summed term by term.
const NEAR_CRITICAL: f64 = 1e-9;
/// Past this many terms the near-critical band falls back to the log1p form.
const DIRECT_SUM_LIMIT: u32 = 1 << 20;

/// `Σ_{j<n} r^j` for `r ≥ 0`.
pub fn geometric_sum(r: f64, n: u32) -> core::result::Result<f64, OverflowReport> {
    if n == 0 {
        return Ok(0.0);
    }
    if r == 1.0 {
        return Ok(f64::from(n));
    }
    let x = r - 1.0;
    let value = if n <= 2 {
        // one rounding at most; the closed forms below can be an ulp off
        if n == 1 { 1.0 } else { 1.0 + r }
    } else if fabs(x) < NEAR_CRITICAL && n <= DIRECT_SUM_LIMIT {
        let mut acc = KahanSum::default();
        let mut term = 1.0;
        for _ in 0..n {
            acc.add(term);
            term *= r;
        }
        acc.value()
    } else if fabs(x) < 0.5 {
        // x = r - 1 is exact here, so the log1p/expm1 pair avoids the
        // cancellation in 1 - r^n.
        expm1(f64::from(n) * log1p(x)) / x
    } else {
        (1.0 - pow(r, f64::from(n))) / (1.0 - r)
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(geometric_overflow(r, n))
    }
}

fn geometric_overflow(r: f64, n: u32) -> OverflowReport {
    let n = f64::from(n);
    let ln_r = log(r);
    let log_abs_total = n * ln_r + log(-expm1(-n * ln_r)) - log(r - 1.0);
    OverflowReport { d_log_r: Some(n * ln_r), log_abs_total, negative: false }
}

/// `r = b·α·q` for a validated parameter tuple.
pub fn effective_ratio(p: &ModelParams) -> EffectiveRatio {
    p.ratio()
}

/// Expected total impact `T(w; b, α, q, d)`.
pub fn total_responsibility(p: &ModelParams) -> Result<f64> {
    let m = network_multiplier(p);
    scale_by_baseline(p.w(), p.b(), m)
}

fn scale_by_baseline(w: f64, b: f64, m: Result<f64>) -> Result<f64> {
    if w == 0.0 {
        return Ok(0.0);
    }
    match m {
        Ok(m) => {
            let t = w * b * m;
            if t.is_finite() {
                Ok(t)
            } else {
                Err(Error::Overflow(OverflowReport {
                    d_log_r: None,
                    log_abs_total: log(fabs(w)) + log(b) + log(m),
                    negative: w < 0.0,
                }))
            }
        }
        Err(Error::Overflow(rep)) => Err(Error::Overflow(OverflowReport {
            d_log_r: rep.d_log_r,
            log_abs_total: log(fabs(w)) + log(b) + rep.log_abs_total,
            negative: w < 0.0,
        })),
        Err(e) => Err(e),
    }
}

/// `M = T / (w b)`, independent of `w`.
pub fn network_multiplier(p: &ModelParams) -> Result<f64> {
    geometric_sum(p.ratio().value(), p.d()).map_err(Error::Overflow)
}

/// Impact counted on the first hop only, `w·b`.
pub fn dyadic_baseline(p: &ModelParams) -> f64 {
    p.w() * p.b()
}

/// `M∞ = 1 / (1 − r)`, defined only strictly below the critical band.
pub fn infinite_horizon_multiplier(r: EffectiveRatio) -> Result<f64> {
    if r.value() < 1.0 - DEFAULT_CRITICAL_TOLERANCE {
        Ok(1.0 / (1.0 - r.value()))
    } else {
        Err(Error::DivergentHorizon { r: r.value() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRecord {
    pub k: u32,
    /// `C_k = b^k q^{k-1}`.
    pub expected_count: f64,
    /// `w α^{k-1}`.
    pub per_agent_impact: f64,
    /// `w b^k (αq)^{k-1}`.
    pub layer_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopBreakdown {
    pub per_depth: Vec<HopRecord>,
    /// Closed-form total for the same parameters.
    pub total: f64,
}

pub fn hop_breakdown(p: &ModelParams) -> Result<HopBreakdown> {
    let total = total_responsibility(p)?;
    let (w, b, alpha, q) = (p.w(), p.b(), p.alpha(), p.q());
    let mut per_depth = Vec::with_capacity(p.d() as usize);
    let mut count = b;
    let mut impact = w;
    for k in 1..=p.d() {
        if k > 1 {
            count *= b * q;
            impact *= alpha;
        }
        let layer_total = count * impact;
        if !count.is_finite() || !layer_total.is_finite() {
            return Err(Error::Overflow(OverflowReport {
                d_log_r: Some(f64::from(p.d()) * log(p.ratio().value())),
                log_abs_total: f64::INFINITY,
                negative: w < 0.0,
            }));
        }
        per_depth.push(HopRecord { k, expected_count: count, per_agent_impact: impact, layer_total });
    }
    Ok(HopBreakdown { per_depth, total })
}

/// Share of the total carried by the first `k` layers.
///
/// For a finite horizon this is `M_k / M_d`; for the infinite horizon it is
/// `1 − r^k` and requires `r < 1`.
pub fn capture_share_first_k(r: EffectiveRatio, horizon: Horizon, k: u32) -> Result<f64> {
    check(k >= 1, "K", f64::from(k), "an integer >= 1")?;
    let r = r.value();
    match horizon {
        Horizon::Infinite => {
            if r < 1.0 - DEFAULT_CRITICAL_TOLERANCE {
                Ok(1.0 - pow(r, f64::from(k)))
            } else {
                Err(Error::DivergentHorizon { r })
            }
        }
        Horizon::Finite(d) => {
            if k > d {
                return Err(Error::Domain("K must not exceed the depth d"));
            }
            if r > 1.0 {
                // (r^K - 1)/(r^d - 1) rewritten in negative powers so it
                // cannot overflow.
                let ln_r = log(r);
                let lead = libm::exp(-f64::from(d - k) * ln_r);
                Ok(lead * (expm1(-f64::from(k) * ln_r) / expm1(-f64::from(d) * ln_r)))
            } else {
                let head = geometric_sum(r, k).map_err(Error::Overflow)?;
                let all = geometric_sum(r, d).map_err(Error::Overflow)?;
                Ok(head / all)
            }
        }
    }
}

/// Share of the total carried by layers `k+1 ..= d`, for any `r`.
pub fn share_after_first_k(r: EffectiveRatio, d: u32, k: u32) -> Result<f64> {
    if d == 0 {
        return Err(invalid_depth());
    }
    if k > d {
        return Err(Error::Domain("K must not exceed the depth d"));
    }
    if k == d {
        return Ok(0.0);
    }
    let rv = r.value();
    if rv > 1.0 {
        tail_share_last_k(r, d, d - k)
    } else {
        let tail = geometric_sum(rv, d - k).map_err(Error::Overflow)?;
        let all = geometric_sum(rv, d).map_err(Error::Overflow)?;
        Ok(pow(rv, f64::from(k)) * tail / all)
    }
}

/// `(r^d − r^{d−K}) / (r^d − 1)`: share of the last `K` layers, supercritical only.
pub fn tail_share_last_k(r: EffectiveRatio, d: u32, k: u32) -> Result<f64> {
    let rv = r.value();
    if rv <= 1.0 {
        return Err(Error::Domain("tail share is defined for r > 1"));
    }
    check(k >= 1, "K", f64::from(k), "an integer >= 1")?;
    if k > d {
        return Err(Error::Domain("K must not exceed the depth d"));
    }
    let ln_r = log(rv);
    Ok(expm1(-f64::from(k) * ln_r) / expm1(-f64::from(d) * ln_r))
}

/// `lim_{d→∞}` of [`tail_share_last_k`]: `1 − r^{−K}`.
pub fn tail_share_limit(r: EffectiveRatio, k: u32) -> Result<f64> {
    if r.value() <= 1.0 {
        return Err(Error::Domain("tail share is defined for r > 1"));
    }
    Ok(1.0 - pow(r.value(), -f64::from(k)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationEstimate {
    /// `((1+ε)^d − 1)/ε`, or `d` at `ε = 0`.
    pub exact: f64,
    /// `d + d(d−1)ε/2`.
    pub approx: f64,
}

/// Multiplier at `r = 1 + ε` next to its first-order expansion.
///
/// The expansion is only meaningful for `|ε|·d` well below one (say < 0.5).
pub fn critical_perturbation_estimate(d: u32, eps: f64) -> PerturbationEstimate {
    let df = f64::from(d);
    let exact = if eps == 0.0 {
        df
    } else if eps > -1.0 {
        expm1(df * log1p(eps)) / eps
    } else {
        (pow(1.0 + eps, df) - 1.0) / eps
    };
    PerturbationEstimate { exact, approx: df + df * (df - 1.0) * eps / 2.0 }
}

/// Number of agents reached up to depth `d` ignoring attenuation:
/// `b Σ_{j<d} (bq)^j`.
pub fn reach_count(b: f64, q: f64, d: u32) -> Result<f64> {
    check(b.is_finite() && b >= 1.0, "b", b, "a finite real >= 1")?;
    check((0.0..=1.0).contains(&q), "q", q, "a real in [0, 1]")?;
    if d == 0 {
        return Err(invalid_depth());
    }
    scale_by_baseline(1.0, b, geometric_sum(b * q, d).map_err(Error::Overflow))
}

/// Depth-dependent attenuation and compliance, with an optional response
/// table replacing the cumulative attenuation.
///
/// `alpha_k[i]` and `q_k[i]` apply on the hop from depth `i+1` to `i+2`;
/// `response[k-1]` is the per-agent factor at depth `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthSchedule {
    alpha_k: Vec<f64>,
    q_k: Vec<f64>,
    response: Option<Vec<f64>>,
}

impl DepthSchedule {
    pub fn new(alpha_k: Vec<f64>, q_k: Vec<f64>, response: Option<Vec<f64>>) -> Result<Self> {
        for &a in &alpha_k {
            check(a > 0.0 && a <= 1.0, "alpha_schedule", a, "reals in (0, 1]")?;
        }
        for &q in &q_k {
            check((0.0..=1.0).contains(&q), "q_schedule", q, "reals in [0, 1]")?;
        }
        if let Some(f) = &response {
            for &v in f {
                check(v.is_finite() && v > 0.0, "response", v, "finite positive reals")?;
            }
            // Only monotone non-increase is enforced; concavity of a
            // tabulated response is left to the caller.
            if let Some(bad) = f.windows(2).find(|w| w[1] > w[0]) {
                return Err(Error::InvalidParameter {
                    name: "response",
                    value: bad[1],
                    expected: "a non-increasing sequence",
                });
            }
        }
        Ok(Self { alpha_k, q_k, response })
    }

    /// Constant schedule reproducing the homogeneous model at depth `d`.
    pub fn constant(alpha: f64, q: f64, d: u32) -> Result<Self> {
        let len = d.saturating_sub(1) as usize;
        Self::new(filled(alpha, len), filled(q, len), None)
    }

    pub fn alpha_k(&self) -> &[f64] {
        &self.alpha_k
    }

    pub fn q_k(&self) -> &[f64] {
        &self.q_k
    }

    pub fn response(&self) -> Option<&[f64]> {
        self.response.as_deref()
    }
}

fn filled(v: f64, len: usize) -> Vec<f64> {
    alloc::vec![v; len]
}

/// `w Σ_{k=1}^{d} R(k) b^k Π_{i<k} q_i`, with `R(k) = Π_{i<k} α_i` or the
/// response table when one is supplied.
pub fn total_with_schedules(w: f64, b: f64, d: u32, sched: &DepthSchedule) -> Result<f64> {
    check(w.is_finite(), "w", w, "a finite real")?;
    check(b.is_finite() && b >= 1.0, "b", b, "a finite real >= 1")?;
    if d == 0 {
        return Err(invalid_depth());
    }
    let needed = (d - 1) as usize;
    if sched.alpha_k.len() < needed {
        return Err(Error::ScheduleLength { which: "alpha", len: sched.alpha_k.len(), d, needed });
    }
    if sched.q_k.len() < needed {
        return Err(Error::ScheduleLength { which: "q", len: sched.q_k.len(), d, needed });
    }
    if let Some(f) = &sched.response {
        if f.len() < d as usize {
            return Err(Error::ScheduleLength { which: "response", len: f.len(), d, needed: d as usize });
        }
    }
    if w == 0.0 {
        return Ok(0.0);
    }

    let mut acc = KahanSum::default();
    let mut b_pow = 1.0;
    let mut q_prod = 1.0;
    let mut a_prod = 1.0;
    // log-domain shadow of each term, used only if the linear sum overflows
    let mut log_terms = Vec::new();
    let (mut ln_b_pow, mut ln_q, mut ln_a) = (0.0, 0.0, 0.0);
    for k in 1..=d as usize {
        if k > 1 {
            q_prod *= sched.q_k[k - 2];
            a_prod *= sched.alpha_k[k - 2];
            ln_q += log(sched.q_k[k - 2]);
            ln_a += log(sched.alpha_k[k - 2]);
        }
        b_pow *= b;
        ln_b_pow += log(b);
        let (resp, ln_resp) = match &sched.response {
            Some(f) => (f[k - 1], log(f[k - 1])),
            None => (a_prod, ln_a),
        };
        if q_prod == 0.0 {
            break;
        }
        acc.add(resp * b_pow * q_prod);
        log_terms.push(ln_resp + ln_b_pow + ln_q);
    }
    let total = w * acc.value();
    if total.is_finite() {
        Ok(total)
    } else {
        let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = KahanSum::default();
        for t in &log_terms {
            s.add(libm::exp(t - max));
        }
        Err(Error::Overflow(OverflowReport {
            d_log_r: None,
            log_abs_total: log(fabs(w)) + max + log(s.value()),
            negative: w < 0.0,
        }))
    }
}

/// Which of `b`, `α`, `q` to solve for, carrying the two known values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLever {
    Branching { alpha: f64, q: f64 },
    Attenuation { b: f64, q: f64 },
    Compliance { b: f64, alpha: f64 },
}

impl CriticalLever {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalLever::Branching { .. } => "b",
            CriticalLever::Attenuation { .. } => "alpha",
            CriticalLever::Compliance { .. } => "q",
        }
    }
}

/// Value of the unknown lever that puts `b·α·q` exactly at 1.
///
/// Out-of-range solutions are reported as [`Error::InfeasibleLever`], never
/// clamped.
pub fn solve_critical_lever(known: CriticalLever) -> Result<f64> {
    let (x, y, names) = match known {
        CriticalLever::Branching { alpha, q } => (alpha, q, ("alpha", "q")),
        CriticalLever::Attenuation { b, q } => (b, q, ("b", "q")),
        CriticalLever::Compliance { b, alpha } => (b, alpha, ("b", "alpha")),
    };
    check(x.is_finite() && x > 0.0, names.0, x, "a finite positive real")?;
    check(y.is_finite() && y > 0.0, names.1, y, "a finite positive real")?;
    let value = 1.0 / (x * y);
    let (ok, range) = match known {
        CriticalLever::Branching { .. } => (value >= 1.0, "[1, inf)"),
        CriticalLever::Attenuation { .. } => (value > 0.0 && value <= 1.0, "(0, 1]"),
        CriticalLever::Compliance { .. } => (value <= 1.0, "[0, 1]"),
    };
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InfeasibleLever { lever: known.name(), value, range })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthCap {
    /// Largest depth whose multiplier stays within budget.
    Cap(u32),
    /// Subcritical and `M∞` already within budget: no cap needed.
    Unbounded,
    /// Even the dyadic layer (`M_1 = 1`) exceeds the budget.
    Infeasible,
}

/// Largest `d` with `Σ_{j<d} r^j ≤ budget`.
pub fn depth_cap_for_budget(r: EffectiveRatio, budget: f64) -> Result<DepthCap> {
    check(!budget.is_nan(), "budget", budget, "a real")?;
    let rv = r.value();
    if budget < 1.0 {
        return Ok(DepthCap::Infeasible);
    }
    if rv < 1.0 && (budget >= 1.0 / (1.0 - rv) || budget.is_infinite()) {
        return Ok(DepthCap::Unbounded);
    }
    if budget.is_infinite() {
        return Ok(DepthCap::Unbounded);
    }
    // initial guess from the closed form, then settle on the exact boundary
    let guess = if rv == 1.0 || fabs(rv - 1.0) < NEAR_CRITICAL {
        budget
    } else if rv > 1.0 {
        log1p(budget * (rv - 1.0)) / log(rv)
    } else if rv == 0.0 {
        1.0
    } else {
        log1p(-budget * (1.0 - rv)) / log(rv)
    };
    let mut d = if guess.is_finite() { libm::floor(guess).clamp(1.0, f64::from(u32::MAX - 1)) as u32 } else { 1 };
    let within = |d: u32| geometric_sum(rv, d).map(|m| m <= budget).unwrap_or(false);
    while d > 1 && !within(d) {
        d -= 1;
    }
    while d < u32::MAX - 1 && within(d + 1) {
        d += 1;
    }
    Ok(DepthCap::Cap(d))
}

/// Regime of a parameter tuple with the default tolerance.
pub fn regime_of(p: &ModelParams) -> Regime {
    classify_regime(p.ratio(), DEFAULT_CRITICAL_TOLERANCE)
        .map(|c| c.regime)
        .unwrap_or(Regime::Critical)
}
