//! Independent Monte Carlo verifier: simulates the canonical sequential
//! Z-process from independent Gaussian increments and applies the stopping
//! rule path by path. Used as the brute-force reference for the analytic
//! recursion.

use alloc::vec;
use alloc::vec::Vec;

use crate::boundaries::BoundarySet;
use crate::error::{Error, Result};
use crate::gauss::{normal_quantile, StageDistribution, StageProbabilities};

/// Deterministic counter-based generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngKind {
    /// SplitMix64 applied to `seed + counter`; stateless per draw, so the
    /// stream is independent of batching and scheduling.
    SplitMix64,
}

/// Simulation configuration. Identical configurations produce bit-identical
/// results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub paths: u64,
    pub seed: u64,
    pub rng: RngKind,
}

impl SimConfig {
    pub fn new(paths: u64, seed: u64) -> Result<Self> {
        if paths == 0 {
            return Err(Error::InvalidSpec("paths must be at least 1".into()));
        }
        Ok(Self {
            paths,
            seed,
            rng: RngKind::SplitMix64,
        })
    }
}

/// SplitMix64 output function on a counter; a full-period 64-bit mixer.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Standard normal draw for the given counter: uniform in (0, 1) via the
/// 53-bit mantissa, then the inverse CDF.
fn normal_draw(seed: u64, counter: u64) -> f64 {
    let bits = splitmix64(seed.wrapping_add(counter));
    let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    // u lies strictly inside (0, 1), so the quantile cannot fail.
    normal_quantile(u).unwrap()
}

/// Monte Carlo estimates of stagewise first-exit probabilities with binomial
/// standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McExitProbabilities {
    pub probabilities: StageProbabilities,
    pub efficacy_se: Vec<f64>,
    pub futility_se: Vec<f64>,
    /// Raw counts `(efficacy, futility)` per stage plus final acceptances.
    pub efficacy_counts: Vec<u64>,
    pub futility_counts: Vec<u64>,
    pub final_accept_count: u64,
}

/// Simulates the stopping rule over `cfg.paths` trajectories of the sequential
/// Z-process with the distribution's drift and schedule. `two_sided` mirrors
/// the efficacy bound to `-u_k`; lower bounds in `bounds` are futility stops
/// at interim stages.
pub fn mc_exit_probabilities(
    dist: &StageDistribution,
    bounds: &BoundarySet,
    two_sided: bool,
    cfg: &SimConfig,
) -> Result<McExitProbabilities> {
    let stages = bounds.stages();
    if stages != dist.rates().stages() {
        return Err(Error::InvalidSpec(
            "boundary set and rate schedule have different stage counts".into(),
        ));
    }
    if two_sided && bounds.lower.is_some() {
        return Err(Error::Infeasible(
            "futility bounds with two-sided symmetric efficacy are not supported",
        ));
    }
    let t = dist.rates().as_slice();
    let theta = dist.drift();

    // Increment scale relative to the first analysis: Z_k sqrt(t_k/t_1) is a
    // random walk with steps of variance (t_k - t_{k-1})/t_1 and mean
    // theta (t_k - t_{k-1})/t_1.
    let mut step_sd = Vec::with_capacity(stages);
    let mut step_mean = Vec::with_capacity(stages);
    let mut scale = Vec::with_capacity(stages);
    for k in 0..stages {
        let prev = if k == 0 { 0.0 } else { t[k - 1] };
        let dw = (t[k] - prev) / t[0];
        step_sd.push(libm::sqrt(dw));
        step_mean.push(theta * dw);
        scale.push(libm::sqrt(t[k] / t[0]));
    }

    let mut efficacy_counts = vec![0u64; stages];
    let mut futility_counts = vec![0u64; stages];
    let mut final_accept_count = 0u64;

    for path in 0..cfg.paths {
        let mut s = 0.0;
        let mut stopped = false;
        for k in 0..stages {
            let g = normal_draw(cfg.seed, path * stages as u64 + k as u64);
            s += step_mean[k] + step_sd[k] * g;
            let z = s / scale[k];
            let u = bounds.upper[k];
            if z > u || (two_sided && z < -u) {
                efficacy_counts[k] += 1;
                stopped = true;
                break;
            }
            if k < stages - 1 {
                if let Some(lower) = &bounds.lower {
                    if z < lower[k] {
                        futility_counts[k] += 1;
                        stopped = true;
                        break;
                    }
                }
            }
        }
        if !stopped {
            final_accept_count += 1;
        }
    }

    let n = cfg.paths as f64;
    let freq = |c: u64| c as f64 / n;
    let se = |c: u64| {
        let p = freq(c);
        libm::sqrt(p * (1.0 - p) / n)
    };
    Ok(McExitProbabilities {
        probabilities: StageProbabilities {
            efficacy: efficacy_counts.iter().map(|&c| freq(c)).collect(),
            futility: futility_counts.iter().map(|&c| freq(c)).collect(),
            final_accept: freq(final_accept_count),
        },
        efficacy_se: efficacy_counts.iter().map(|&c| se(c)).collect(),
        futility_se: futility_counts.iter().map(|&c| se(c)).collect(),
        efficacy_counts,
        futility_counts,
        final_accept_count,
    })
}

/// Monte Carlo expected sample size: the mean of `n_per_stage` at the
/// stopping stage, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McExpectedSampleSize {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Estimates `E[N]` from the exit-probability counts of a simulation run.
/// Exact count accumulation keeps the reduction independent of path order.
pub fn mc_expected_sample_size(
    exits: &McExitProbabilities,
    n_per_stage: &[f64],
    cfg: &SimConfig,
) -> Result<McExpectedSampleSize> {
    let stages = exits.probabilities.stages();
    if n_per_stage.len() != stages {
        return Err(Error::InvalidSpec(
            "sample-size vector and exit table have different stage counts".into(),
        ));
    }
    let n = cfg.paths as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut add = |count: u64, size: f64| {
        sum += count as f64 * size;
        sum_sq += count as f64 * size * size;
    };
    for k in 0..stages {
        add(exits.efficacy_counts[k], n_per_stage[k]);
        add(exits.futility_counts[k], n_per_stage[k]);
    }
    add(exits.final_accept_count, n_per_stage[stages - 1]);

    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(McExpectedSampleSize {
        estimate: mean,
        standard_error: libm::sqrt(var / n),
    })
}
