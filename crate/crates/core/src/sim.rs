//! Seeded Monte Carlo realisation of the cascade.
//!
//! Two generative models are provided:
//!
//! * [`simulate_branching`] draws the tree process itself: the initiator
//!   reaches `F = ⌊b⌋ + Bernoulli(b − ⌊b⌋)` agents, each affected agent
//!   adopts with probability `q`, and every adopter reaches a fresh `F`-sized
//!   set one hop further. Its expectation is the closed-form total.
//! * [`simulate_graph_cascade`] runs an independent cascade on a concrete
//!   graph where each node activates at most once, so reconvergent paths
//!   are not double counted.
//!
//! In both, the first hop is reached unconditionally. Trial `i` draws from
//! stream `i` of the master seed and outcomes are folded in trial order, so
//! results do not depend on how trials are scheduled.

use alloc::vec::Vec;

use libm::{floor, sqrt};

use crate::error::{check, Error, Result};
use crate::graph::{SeedSpec, WeightedDigraph};
use crate::params::{invalid_depth, ModelParams};
use crate::rng::{bernoulli, trial_stream, ChaCha8Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// A trial stops once this many agents have been affected.
    pub max_nodes_per_trial: u64,
    pub confidence_z: f64,
}

impl SimConfig {
    pub const DEFAULT_CAP: u64 = 1_000_000;

    pub fn new(trials: u64, master_seed: u64) -> Self {
        Self { trials, master_seed, max_nodes_per_trial: Self::DEFAULT_CAP, confidence_z: 1.96 }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.max_nodes_per_trial = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check(self.trials >= 1, "trials", self.trials as f64, "at least one trial")?;
        check(self.max_nodes_per_trial >= 1, "cap", self.max_nodes_per_trial as f64, "at least 1")?;
        check(
            self.confidence_z.is_finite() && self.confidence_z >= 0.0,
            "confidence_z",
            self.confidence_z,
            "a finite real >= 0",
        )
    }
}

/// One realised cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub total: f64,
    /// Agents affected at depth `k + 1`.
    pub per_depth: Vec<u64>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub mean: f64,
    /// Sample variance of the trial totals (0 for a single trial).
    pub variance: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials_truncated: u64,
    pub per_depth_mean_counts: Vec<f64>,
    pub per_depth_std_error: Vec<f64>,
}

/// Welford accumulator; outcomes must be pushed in trial order.
#[derive(Debug, Clone)]
pub struct SimAccumulator {
    d: usize,
    n: u64,
    mean: f64,
    m2: f64,
    depth_mean: Vec<f64>,
    depth_m2: Vec<f64>,
    truncated: u64,
}

impl SimAccumulator {
    pub fn new(d: u32) -> Self {
        let d = d as usize;
        Self {
            d,
            n: 0,
            mean: 0.0,
            m2: 0.0,
            depth_mean: alloc::vec![0.0; d],
            depth_m2: alloc::vec![0.0; d],
            truncated: 0,
        }
    }

    pub fn push(&mut self, outcome: &TrialOutcome) {
        self.n += 1;
        let n = self.n as f64;
        let delta = outcome.total - self.mean;
        self.mean += delta / n;
        self.m2 += delta * (outcome.total - self.mean);
        for k in 0..self.d {
            let x = outcome.per_depth.get(k).copied().unwrap_or(0) as f64;
            let delta = x - self.depth_mean[k];
            self.depth_mean[k] += delta / n;
            self.depth_m2[k] += delta * (x - self.depth_mean[k]);
        }
        self.truncated += u64::from(outcome.truncated);
    }

    pub fn finish(self, confidence_z: f64) -> SimResult {
        let n = self.n as f64;
        let var = |m2: f64| if self.n > 1 { m2 / (n - 1.0) } else { 0.0 };
        let variance = var(self.m2);
        let std_error = sqrt(variance / n);
        let per_depth_std_error = self.depth_m2.iter().map(|&m2| sqrt(var(m2) / n)).collect();
        SimResult {
            trials: self.n,
            mean: self.mean,
            variance,
            std_error,
            ci_low: self.mean - confidence_z * std_error,
            ci_high: self.mean + confidence_z * std_error,
            trials_truncated: self.truncated,
            per_depth_mean_counts: self.depth_mean,
            per_depth_std_error,
        }
    }
}

/// Number of agents one source reaches: `⌊b⌋` plus one more with
/// probability `b − ⌊b⌋`.
fn fan_out(rng: &mut ChaCha8Rng, whole: u64, frac: f64) -> u64 {
    whole + u64::from(frac > 0.0 && bernoulli(rng, frac))
}

/// Realises trial `trial` of the branching process.
pub fn branching_trial(p: &ModelParams, cfg: &SimConfig, trial: u64) -> TrialOutcome {
    let mut rng = trial_stream(cfg.master_seed, trial);
    let whole_b = floor(p.b());
    let frac = p.b() - whole_b;
    let whole = whole_b as u64;
    let cap = cfg.max_nodes_per_trial;

    let mut per_depth = alloc::vec![0u64; p.d() as usize];
    let mut total = 0.0;
    let mut impact = p.w();
    let mut reached: u64 = 0;
    let mut truncated = false;
    let mut affected = fan_out(&mut rng, whole, frac);
    for (k, slot) in per_depth.iter_mut().enumerate() {
        if k > 0 {
            impact *= p.alpha();
        }
        let mut layer = affected;
        if reached + layer > cap {
            layer = cap - reached;
            truncated = true;
        }
        reached += layer;
        *slot = layer;
        total += layer as f64 * impact;
        if truncated || k + 1 == p.d() as usize {
            break;
        }
        let adopters = if p.q() >= 1.0 {
            layer
        } else if p.q() <= 0.0 {
            0
        } else {
            (0..layer).filter(|_| bernoulli(&mut rng, p.q())).count() as u64
        };
        affected = if frac == 0.0 {
            adopters.saturating_mul(whole)
        } else {
            (0..adopters).map(|_| fan_out(&mut rng, whole, frac)).sum()
        };
        if affected == 0 {
            break;
        }
    }
    TrialOutcome { total, per_depth, truncated }
}

/// Monte Carlo estimate of the closed-form total.
pub fn simulate_branching(p: &ModelParams, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut acc = SimAccumulator::new(p.d());
    for trial in 0..cfg.trials {
        acc.push(&branching_trial(p, cfg, trial));
    }
    Ok(acc.finish(cfg.confidence_z))
}

/// Inputs of an independent-cascade run, validated once.
#[derive(Debug, Clone, Copy)]
pub struct GraphCascade<'g> {
    graph: &'g WeightedDigraph,
    w: f64,
    alpha: f64,
    q: f64,
    seed: SeedSpec,
    d: u32,
}

impl<'g> GraphCascade<'g> {
    pub fn new(graph: &'g WeightedDigraph, w: f64, alpha: f64, q: f64, seed: SeedSpec, d: u32) -> Result<Self> {
        check(w.is_finite(), "w", w, "a finite real")?;
        check(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "a real in (0, 1]")?;
        check((0.0..=1.0).contains(&q), "q", q, "a real in [0, 1]")?;
        if d == 0 {
            return Err(invalid_depth());
        }
        SeedSpec::new(seed.seed_node, graph)?;
        if !graph.is_unit_weight() {
            return Err(Error::InvalidGraph("cascade simulation needs unit arc weights"));
        }
        Ok(Self { graph, w, alpha, q, seed, d })
    }

    pub fn depth(&self) -> u32 {
        self.d
    }

    pub fn scratch(&self) -> CascadeScratch {
        CascadeScratch {
            stamp: alloc::vec![0; self.graph.node_count()],
            generation: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Realises trial `trial`. A node activates at most once, at the first
    /// hop it is reached; an activation at hop `k < d` attempts each of its
    /// outgoing arcs once with probability `q`.
    pub fn trial(&self, cfg: &SimConfig, trial: u64, scratch: &mut CascadeScratch) -> TrialOutcome {
        let mut rng = trial_stream(cfg.master_seed, trial);
        scratch.generation = scratch.generation.wrapping_add(1);
        if scratch.generation == 0 {
            scratch.stamp.iter_mut().for_each(|s| *s = 0);
            scratch.generation = 1;
        }
        let gen = scratch.generation;
        let cap = cfg.max_nodes_per_trial;
        scratch.frontier.clear();
        scratch.frontier.push(self.seed.seed_node);
        scratch.stamp[self.seed.seed_node] = gen;

        let mut per_depth = alloc::vec![0u64; self.d as usize];
        let mut total = 0.0;
        let mut impact = self.w;
        let mut reached: u64 = 0;
        let mut truncated = false;
        for (k, slot) in per_depth.iter_mut().enumerate() {
            if k > 0 {
                impact *= self.alpha;
            }
            scratch.next.clear();
            'frontier: for &v in &scratch.frontier {
                for (dst, _) in self.graph.successors(v) {
                    if scratch.stamp[dst] == gen {
                        continue;
                    }
                    if k == 0 || bernoulli(&mut rng, self.q) {
                        if reached + scratch.next.len() as u64 >= cap {
                            truncated = true;
                            break 'frontier;
                        }
                        scratch.stamp[dst] = gen;
                        scratch.next.push(dst);
                    }
                }
            }
            let layer = scratch.next.len() as u64;
            reached += layer;
            *slot = layer;
            total += layer as f64 * impact;
            if truncated || layer == 0 {
                break;
            }
            core::mem::swap(&mut scratch.frontier, &mut scratch.next);
        }
        TrialOutcome { total, per_depth, truncated }
    }
}

/// Reusable per-worker buffers for [`GraphCascade::trial`].
#[derive(Debug, Clone)]
pub struct CascadeScratch {
    stamp: Vec<u32>,
    generation: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

/// Independent-cascade estimate on a unit-weight graph.
pub fn simulate_graph_cascade(
    g: &WeightedDigraph,
    w: f64,
    alpha: f64,
    q: f64,
    seed: SeedSpec,
    d: u32,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    let cascade = GraphCascade::new(g, w, alpha, q, seed, d)?;
    let mut scratch = cascade.scratch();
    let mut acc = SimAccumulator::new(d);
    for trial in 0..cfg.trials {
        acc.push(&cascade.trial(cfg, trial, &mut scratch));
    }
    Ok(acc.finish(cfg.confidence_z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub z_score: f64,
    pub consistent: bool,
    /// Zero spread: the check was equality rather than a z-test.
    pub deterministic: bool,
}

/// Relative slack for the zero-variance comparison (floating rounding only).
const DETERMINISTIC_REL_TOL: f64 = 1e-12;

/// `z = (mean − analytic) / std_error`, consistent iff `|z| ≤ 4`. With zero
/// spread the means must agree up to rounding.
pub fn compare_to_analytic(sim: &SimResult, analytic: f64) -> Comparison {
    let diff = sim.mean - analytic;
    if sim.std_error == 0.0 {
        let equal = diff == 0.0 || diff.abs() <= DETERMINISTIC_REL_TOL * analytic.abs().max(1.0);
        let z_score = if equal { 0.0 } else { diff.signum() * f64::INFINITY };
        return Comparison { z_score, consistent: equal, deterministic: true };
    }
    let z_score = diff / sim.std_error;
    Comparison { z_score, consistent: z_score.abs() <= 4.0, deterministic: false }
}
