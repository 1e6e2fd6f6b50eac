//! Minimization of the expected sample size under the alternative over
//! interim-analysis timings: a deterministic multi-start Nelder-Mead search
//! on a stick-breaking reparameterization of the ordered schedule.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::boundaries::{solve_efficacy_boundaries, solve_futility_boundaries};
use crate::design::{drift_for_power_hinted, TrialRules};
use crate::error::{Error, Result};
use crate::gauss::{propagate, StageDistribution};
use crate::rates::InformationRates;

/// Floor added to every stick-breaking increment so decoded schedules stay
/// strictly ordered and bounded away from 0 and 1 for any finite input.
const INCREMENT_FLOOR: f64 = 1e-3;

/// Reserved final increment: `softplus(0) + floor`, so the zero vector decodes
/// to equal spacing.
fn reserved_increment() -> f64 {
    core::f64::consts::LN_2 + INCREMENT_FLOOR
}

fn softplus(x: f64) -> f64 {
    // Stable in both tails: ln(1 + e^x) = max(x, 0) + ln(1 + e^{-|x|}).
    x.max(0.0) + libm::log1p(libm::exp(-libm::fabs(x)))
}

fn softplus_inv(y: f64) -> f64 {
    // Inverse of softplus for y > 0: ln(e^y - 1) = y + ln(1 - e^{-y}).
    y + libm::log(-libm::expm1(-y))
}

/// Decodes an unconstrained vector of length `K - 1` into strictly increasing
/// interim fractions `t_1 < … < t_{K-1}` in (0, 1). The zero vector maps to
/// equal spacing.
pub fn decode(v: &[f64]) -> Vec<f64> {
    let c = reserved_increment();
    let mut increments: Vec<f64> = v.iter().map(|&x| softplus(x) + INCREMENT_FLOOR).collect();
    increments.push(c);
    let total: f64 = increments.iter().sum();
    let mut t = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for w in &increments[..v.len()] {
        acc += w / total;
        t.push(acc);
    }
    t
}

/// Inverse of [`decode`]: rejects schedules that are not strictly increasing
/// in (0, 1) or whose increments are too extreme to represent above the floor.
pub fn encode(interims: &[f64]) -> Result<Vec<f64>> {
    let mut prev = 0.0;
    for &t in interims {
        if !(t > prev && t < 1.0) {
            return Err(Error::InvalidSpec(
                "schedule to encode must be strictly increasing in (0, 1)".into(),
            ));
        }
        prev = t;
    }
    let c = reserved_increment();
    let last = 1.0 - prev;
    let mut v = Vec::with_capacity(interims.len());
    prev = 0.0;
    for &t in interims {
        let w = (t - prev) * c / last;
        if w <= INCREMENT_FLOOR {
            return Err(Error::InvalidSpec(
                "schedule increment too small to encode".into(),
            ));
        }
        v.push(softplus_inv(w - INCREMENT_FLOOR));
        prev = t;
    }
    Ok(v)
}

/// Sentinel returned by the objective when a candidate schedule is infeasible
/// or a solver fails, so the simplex retreats.
pub const OBJECTIVE_FAIL: f64 = f64::INFINITY;

/// Scale-free expected-sample-size objective under the alternative:
/// `theta^2 * (1 + sum_{k>=2} (t_k - t_{k-1})/t_1 * Pr(continue past k-1 | H1))`.
///
/// Multiplying by `n_fixed / (z_alpha + z_beta)^2` converts to subjects; the
/// schedule that minimizes it is independent of the endpoint's effect size.
pub fn objective(rules: &TrialRules, rates: &InformationRates) -> f64 {
    match objective_checked(rules, rates, None, false) {
        Ok((v, _)) => v,
        Err(_) => OBJECTIVE_FAIL,
    }
}

/// Evaluates the objective and also returns the solved drift, optionally
/// warm-started from a nearby schedule's drift. With `fast` set, the drift
/// solve and exit probabilities stay on the smooth base-grid surface (the two
/// surfaces agree to ~1e-8 relative); the search runs fast and the winning
/// schedule is re-scored strictly afterwards.
fn objective_checked(
    rules: &TrialRules,
    rates: &InformationRates,
    drift_hint: Option<f64>,
    fast: bool,
) -> Result<(f64, f64)> {
    let efficacy = solve_efficacy_boundaries(&rules.boundary, rates, rules.alpha)?;
    let theta;
    let solution;
    if rules.futility.is_active() {
        solution = solve_futility_boundaries(
            &rules.boundary,
            &rules.futility,
            rates,
            rules.alpha,
            rules.beta,
            &efficacy,
        )?;
        theta = solution.drift;
    } else {
        theta = if fast {
            crate::design::drift_fast(
                rates,
                &efficacy.bounds,
                rules.boundary.sidedness,
                1.0 - rules.beta,
                drift_hint,
            )?
        } else {
            drift_for_power_hinted(
                rates,
                &efficacy.bounds,
                rules.beta,
                rules.boundary.sidedness,
                drift_hint,
            )?
        };
        solution = crate::boundaries::FutilitySolution {
            bounds: efficacy.bounds,
            drift: theta,
            iterations: 0,
            capped_stages: efficacy.capped_stages,
        };
    }
    let t = rates.as_slice();
    let mut factor = 1.0;
    if rates.stages() > 1 {
        let dist = StageDistribution::new(rates.clone(), theta)?;
        let regions = solution.bounds.regions(rules.boundary.sidedness, true)?;
        let exits = if fast {
            crate::gauss::propagate_unchecked(&dist, &regions, crate::gauss::GridConfig::default())?
        } else {
            propagate(&dist, &regions)?
        };
        for k in 1..rates.stages() {
            factor += (t[k] - t[k - 1]) / t[0] * exits.continue_past(k - 1);
        }
    }
    Ok((theta * theta * factor, theta))
}

/// Converts the scale-free objective to subjects for the given fixed-design
/// size and error rates.
pub fn objective_to_subjects(objective: f64, n_fixed: f64, z_alpha: f64, z_beta: f64) -> f64 {
    objective * n_fixed / ((z_alpha + z_beta) * (z_alpha + z_beta))
}

/// Search configuration. Defaults follow the module conventions: relative
/// simplex tolerance 1e-8, budget `2000 (K-1)` per restart, restart sweeps
/// repeated until relative improvement drops below 1e-7.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub simplex_tolerance: f64,
    pub max_evals: usize,
    pub improvement_epsilon: f64,
    /// Edge length of the initial simplex in encoded coordinates.
    pub initial_step: f64,
}

impl OptimConfig {
    pub fn for_stages(stages: usize) -> Self {
        Self {
            simplex_tolerance: 1e-8,
            max_evals: 2000 * stages.saturating_sub(1).max(1),
            improvement_epsilon: 1e-7,
            initial_step: 0.25,
        }
    }
}

/// Result of [`optimize_rates`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub rates: InformationRates,
    /// Scale-free objective value at the optimum.
    pub objective: f64,
    pub evaluations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// `(starting interims, final objective)` per restart, in sweep order.
    pub per_restart_log: Vec<(Vec<f64>, f64)>,
}

/// One Nelder-Mead run with standard coefficients (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Returns the best vertex, its value, the
/// number of evaluations used, and whether the spread tolerance was met.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    config: &OptimConfig,
) -> (Vec<f64>, f64, usize, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    // Initial simplex: start plus a fixed step along each axis.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += config.initial_step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    let mut converged = false;
    while evals < config.max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= config.simplex_tolerance * (best.abs() + 1e-12) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, &xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let point = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };

        let xr = point(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = point(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = point(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let best_x = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, &bi) in v.0.iter_mut().zip(&best_x) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    v.1 = eval(&v.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals, converged)
}

/// Systematic starting schedules for the first sweep: equal spacing, early-
/// and late-compressed variants, and two power-law skews.
fn initial_starts(stages: usize) -> Vec<Vec<f64>> {
    let k = stages as f64;
    let shapes: [fn(f64, f64) -> f64; 5] = [
        |i, k| i / k,
        |i, k| 0.6 * i / k,
        |i, k| 0.4 + 0.6 * i / k,
        |i, k| libm::sqrt(i / k),
        |i, k| (i / k) * (i / k),
    ];
    shapes
        .iter()
        .map(|shape| (1..stages).map(|i| shape(i as f64, k)).collect())
        .collect()
}

/// Finds the interim schedule minimizing the scale-free ESS objective under
/// H1 for `stages` analyses. Deterministic: fixed restart grid, sweeps
/// repeated until the best objective stops improving.
pub fn optimize_rates(
    rules: &TrialRules,
    stages: usize,
    config: &OptimConfig,
) -> Result<OptimResult> {
    if stages < 2 {
        let rates = InformationRates::equal_spacing(1);
        let (obj, _) = objective_checked(rules, &rates, None, false)?;
        return Ok(OptimResult {
            rates,
            objective: obj,
            evaluations: 1,
            restarts_used: 0,
            converged: true,
            per_restart_log: Vec::new(),
        });
    }

    // Cache keyed on the candidate interims rounded to 1e-10, since restarts
    // revisit the same region.
    let mut cache: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    let mut evaluations = 0usize;
    // Warm-start the drift solve from the previous evaluation; successive
    // simplex candidates are close, so the root moves little.
    let mut drift_hint: Option<f64> = None;
    let mut eval_interims = |interims: &[f64]| -> f64 {
        let key: Vec<u64> = interims
            .iter()
            .map(|&t| (libm::round(t * 1e10) as i64) as u64)
            .collect();
        if let Some(&v) = cache.get(&key) {
            return v;
        }
        evaluations += 1;
        let v = match InformationRates::from_interims(interims) {
            Ok(r) => match objective_checked(rules, &r, drift_hint, true) {
                Ok((v, theta)) => {
                    drift_hint = Some(theta);
                    v
                }
                Err(_) => OBJECTIVE_FAIL,
            },
            Err(_) => OBJECTIVE_FAIL,
        };
        cache.insert(key, v);
        v
    };

    let mut best_x: Option<Vec<f64>> = None;
    let mut best_val = f64::INFINITY;
    let mut restarts_used = 0usize;
    let mut any_converged = false;
    let mut log: Vec<(Vec<f64>, f64)> = Vec::new();

    let mut pending: Vec<Vec<f64>> = initial_starts(stages);
    let mut sweep_config = config.clone();
    loop {
        let sweep_entry = best_val;
        for start_rates in pending.drain(..) {
            let start_vec = match encode(&start_rates) {
                Ok(v) => v,
                Err(_) => continue,
            };
            restarts_used += 1;
            let (x, val, _evals, conv) = nelder_mead(
                |v| eval_interims(&decode(v)),
                &start_vec,
                &sweep_config,
            );
            any_converged |= conv;
            log.push((start_rates, val));
            let better = val < best_val
                || (val == best_val
                    && best_x
                        .as_ref()
                        .map(|b| decode(&x) < decode(b))
                        .unwrap_or(true));
            if better {
                best_val = val;
                best_x = Some(x);
            }
        }
        let improved = sweep_entry - best_val;
        if !(improved > config.improvement_epsilon * (best_val.abs() + 1e-12))
            && sweep_entry.is_finite()
        {
            break;
        }
        // Next sweep: perturb the best schedule by +/-0.05 per coordinate,
        // refining locally with a smaller initial simplex.
        sweep_config.initial_step = 0.05;
        let base = decode(best_x.as_ref().unwrap());
        for i in 0..base.len() {
            for delta in [-0.05, 0.05] {
                let mut p = base.clone();
                p[i] += delta;
                if encode(&p).is_ok() {
                    pending.push(p);
                }
            }
        }
        if pending.is_empty() {
            break;
        }
    }

    let best_x = best_x.ok_or(Error::Infeasible("no feasible schedule found"))?;
    if !best_val.is_finite() {
        return Err(Error::Infeasible("objective failed at every candidate"));
    }
    // The search ran on the fast surface; re-score the winner strictly and
    // keep equal spacing instead if it strictly dominates.
    let mut best_rates = InformationRates::from_interims(&decode(&best_x))?;
    let (mut strict_val, _) = objective_checked(rules, &best_rates, drift_hint, false)?;
    evaluations += 1;
    let equal = InformationRates::equal_spacing(stages);
    if equal.as_slice() != best_rates.as_slice() {
        if let Ok((equal_val, _)) = objective_checked(rules, &equal, drift_hint, false) {
            evaluations += 1;
            if equal_val < strict_val {
                best_rates = equal;
                strict_val = equal_val;
            }
        }
    }
    Ok(OptimResult {
        rates: best_rates,
        objective: strict_val,
        evaluations,
        restarts_used,
        converged: any_converged,
        per_restart_log: log,
    })
}
