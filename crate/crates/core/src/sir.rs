//! Classical well-mixed SIR dynamics
//!
//! ```text
//! dS/dt = −β S I / N
//! dI/dt =  β S I / N − γ I
//! dR/dt =  γ I
//! ```
//!
//! integrated with fixed-step classical Runge–Kutta, and compared with the
//! behavioural ratio only by which side of 1 each quantity falls.

use alloc::vec::Vec;

use libm::{exp, fabs, round};

use crate::error::{check, Error, Result};
use crate::params::{classify_regime, EffectiveRatio, Regime, RegimeClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    beta: f64,
    gamma: f64,
    population: f64,
    s0: f64,
    i0: f64,
    r0_init: f64,
}

impl SirParams {
    pub fn new(beta: f64, gamma: f64, population: f64, s0: f64, i0: f64, r0_init: f64) -> Result<Self> {
        check(beta.is_finite() && beta > 0.0, "beta", beta, "a finite positive rate")?;
        check(gamma.is_finite() && gamma > 0.0, "gamma", gamma, "a finite positive rate")?;
        check(population.is_finite() && population > 0.0, "population", population, "a finite positive size")?;
        check(s0.is_finite() && s0 >= 0.0, "s0", s0, "a finite real >= 0")?;
        check(i0.is_finite() && i0 >= 0.0, "i0", i0, "a finite real >= 0")?;
        check(r0_init.is_finite() && r0_init >= 0.0, "r0_init", r0_init, "a finite real >= 0")?;
        let sum = s0 + i0 + r0_init;
        check(fabs(sum - population) <= 1e-9 * population, "s0 + i0 + r0_init", sum, "the population N")?;
        Ok(Self { beta, gamma, population, s0, i0, r0_init })
    }

    /// Everyone but the `i0` initial infectious is susceptible.
    pub fn outbreak(beta: f64, gamma: f64, population: f64, i0: f64) -> Result<Self> {
        Self::new(beta, gamma, population, population - i0, i0, 0.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    pub fn r0_init(&self) -> f64 {
        self.r0_init
    }

    fn derivative(&self, [s, i, _]: [f64; 3]) -> [f64; 3] {
        let infection = self.beta * s * i / self.population;
        let recovery = self.gamma * i;
        [-infection, infection - recovery, recovery]
    }
}

/// `R₀ = β / γ`.
pub fn basic_reproduction_number(p: &SirParams) -> f64 {
    p.beta / p.gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct SirTrajectory {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

impl SirTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(time, I)` at the largest sampled infectious count.
    pub fn peak(&self) -> (f64, f64) {
        let (idx, _) = self
            .i
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
        (self.times[idx], self.i[idx])
    }

    pub fn last(&self) -> [f64; 3] {
        let k = self.len() - 1;
        [self.s[k], self.i[k], self.r[k]]
    }
}

/// Fixed-step RK4, sampled at every step from `t = 0` to `t_max`.
///
/// The step count is `round(t_max / step)`. Fails with
/// [`Error::StepTooLarge`] when the trajectory drifts from `S + I + R = N`
/// by more than `1e−6` relative, goes negative beyond `−1e−9·N`, or breaks
/// the monotonicity of `S` or `R`.
pub fn integrate_sir(p: &SirParams, t_max: f64, step: f64) -> Result<SirTrajectory> {
    check(step.is_finite() && step > 0.0, "step", step, "a finite positive step")?;
    check(t_max.is_finite() && t_max >= step, "t_max", t_max, "a finite time >= step")?;
    let steps = round(t_max / step) as usize;
    let n = p.population;
    let mut traj = SirTrajectory {
        times: Vec::with_capacity(steps + 1),
        s: Vec::with_capacity(steps + 1),
        i: Vec::with_capacity(steps + 1),
        r: Vec::with_capacity(steps + 1),
    };
    let mut y = [p.s0, p.i0, p.r0_init];
    let push = |traj: &mut SirTrajectory, t: f64, y: [f64; 3]| {
        traj.times.push(t);
        traj.s.push(y[0]);
        traj.i.push(y[1]);
        traj.r.push(y[2]);
    };
    push(&mut traj, 0.0, y);
    let slack = 1e-12 * n;
    for k in 1..=steps {
        let next = rk4_step(p, y, step);
        if fabs(next[0] + next[1] + next[2] - n) > 1e-6 * n {
            return Err(Error::StepTooLarge("conservation drift exceeds 1e-6 of N"));
        }
        if next.iter().any(|&v| v < -1e-9 * n) {
            return Err(Error::StepTooLarge("a compartment went negative"));
        }
        if next[0] > y[0] + slack || next[2] < y[2] - slack {
            return Err(Error::StepTooLarge("S must not increase and R must not decrease"));
        }
        y = next;
        push(&mut traj, k as f64 * step, y);
    }
    Ok(traj)
}

fn rk4_step(p: &SirParams, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = p.derivative(y);
    let k2 = p.derivative(add(y, k1, h / 2.0));
    let k3 = p.derivative(add(y, k2, h / 2.0));
    let k4 = p.derivative(add(y, k3, h));
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    out
}

/// Residual of the final-size relation
/// `s∞ = s₀ · exp(−R₀ (1 − r₀ − s∞))` in population fractions, where
/// `r₀` is the initially removed fraction.
pub fn final_size_residual(p: &SirParams, s_end: f64) -> f64 {
    let n = p.population;
    let s_inf = s_end / n;
    let predicted = (p.s0 / n) * exp(-basic_reproduction_number(p) * (1.0 - p.r0_init / n - s_inf));
    s_inf - predicted
}

/// Root of the final-size relation in `(0, s₀/N)`, by bisection.
///
/// With `i₀ > 0` the residual is concave, negative at 0 and positive at
/// `s₀/N`, so the root is unique. Without infectious seed nothing changes.
pub fn final_size_fraction(p: &SirParams) -> f64 {
    let s0 = p.s0 / p.population;
    if p.i0 == 0.0 || s0 == 0.0 {
        return s0;
    }
    let f = |x: f64| final_size_residual(p, x * p.population);
    let (mut lo, mut hi) = (0.0, s0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub r0: f64,
    /// `R₀ · s₀ / N > 1`.
    pub outbreak_grows: bool,
    pub behavioral_regime: RegimeClass,
    /// Both quantities are on the same side of 1.
    pub aligned: bool,
}

pub fn threshold_report(p: &SirParams, behavioral_r: f64, tol: f64) -> Result<ThresholdReport> {
    let r0 = basic_reproduction_number(p);
    let outbreak_grows = r0 * p.s0 / p.population > 1.0;
    let behavioral_regime = classify_regime(EffectiveRatio::new(behavioral_r)?, tol)?;
    let cascades = behavioral_regime.regime == Regime::Supercritical;
    Ok(ThresholdReport { r0, outbreak_grows, behavioral_regime, aligned: outbreak_grows == cascades })
}

/// Exponential growth rate of `I` at `t = 0`, `β s₀/N − γ`.
pub fn initial_growth_rate(p: &SirParams) -> f64 {
    p.beta * p.s0 / p.population - p.gamma
}
