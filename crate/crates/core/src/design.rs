//! Endpoint assumptions, drift derivation, sample sizes, and the full
//! operating-characteristics report of a specified group sequential design.

use alloc::vec::Vec;

use crate::boundaries::{
    solve_efficacy_boundaries, solve_futility_boundaries, BoundaryRule, BoundarySet,
    FutilityMode, FutilityRule, Sidedness,
};
use crate::error::{Error, Result};
use crate::gauss::{self, normal_quantile, propagate, StageDistribution, StageProbabilities};
use crate::rates::InformationRates;
use crate::roots::find_root;

/// Hypothesis selector: null, the midpoint effect `delta*/2`, or the design
/// alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Null,
    Mid,
    Alternative,
}

/// Endpoint distribution family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    /// Normal outcome with target mean difference `delta_star` and common
    /// standard deviation `sigma`.
    Continuous { delta_star: f64, sigma: f64 },
    /// Two-arm binomial outcome with the given event rates.
    Binary { p_control: f64, p_treatment: f64 },
}

/// Endpoint plus the treatment:control allocation ratio `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointSpec {
    pub endpoint: Endpoint,
    pub allocation_ratio: f64,
}

impl EndpointSpec {
    pub fn new(endpoint: Endpoint, allocation_ratio: f64) -> Result<Self> {
        if !(allocation_ratio > 0.0) || !allocation_ratio.is_finite() {
            return Err(Error::InvalidSpec(
                "allocation ratio must be positive and finite".into(),
            ));
        }
        match endpoint {
            Endpoint::Continuous { delta_star, sigma } => {
                if !(sigma > 0.0) || !delta_star.is_finite() {
                    return Err(Error::InvalidSpec(
                        "continuous endpoint requires sigma > 0 and finite delta*".into(),
                    ));
                }
                if delta_star == 0.0 {
                    return Err(Error::InvalidSpec(
                        "continuous endpoint requires delta* != 0".into(),
                    ));
                }
            }
            Endpoint::Binary {
                p_control,
                p_treatment,
            } => {
                for p in [p_control, p_treatment] {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::InvalidSpec(
                            "binary endpoint rates must lie in (0, 1)".into(),
                        ));
                    }
                }
                if p_control == p_treatment {
                    return Err(Error::InvalidSpec(
                        "binary endpoint requires p_treatment != p_control".into(),
                    ));
                }
            }
        }
        Ok(Self {
            endpoint,
            allocation_ratio,
        })
    }

    pub fn equal_allocation(endpoint: Endpoint) -> Result<Self> {
        Self::new(endpoint, 1.0)
    }
}

/// Standardized effect `delta / sigma*` under the selected hypothesis. The
/// binary case standardizes by the pooled rate's standard deviation; the
/// constant is immaterial because only ratios of effects enter the design
/// (Mid is exactly half of Alternative for both endpoint kinds).
pub fn standardized_effect(spec: &EndpointSpec, under: Hypothesis) -> f64 {
    let full = match spec.endpoint {
        Endpoint::Continuous { delta_star, sigma } => delta_star / sigma,
        Endpoint::Binary {
            p_control,
            p_treatment,
        } => {
            let r = spec.allocation_ratio;
            let pbar = (p_control + r * p_treatment) / (1.0 + r);
            (p_control - p_treatment) / libm::sqrt(pbar * (1.0 - pbar))
        }
    };
    match under {
        Hypothesis::Null => 0.0,
        Hypothesis::Mid => 0.5 * full,
        Hypothesis::Alternative => full,
    }
}

/// Error-rate and stopping-rule portion of a design specification.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRules {
    pub alpha: f64,
    pub beta: f64,
    pub boundary: BoundaryRule,
    pub futility: FutilityRule,
}

impl TrialRules {
    pub fn new(
        alpha: f64,
        beta: f64,
        boundary: BoundaryRule,
        futility: FutilityRule,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 && alpha + beta < 1.0) {
            return Err(Error::InvalidSpec(
                "require 0 < alpha, beta < 1 and alpha + beta < 1".into(),
            ));
        }
        if futility.is_active() && boundary.sidedness == Sidedness::TwoSidedSymmetric {
            return Err(Error::Infeasible(
                "futility bounds with two-sided symmetric efficacy are not supported",
            ));
        }
        Ok(Self {
            alpha,
            beta,
            boundary,
            futility,
        })
    }
}

/// A fully specified group sequential design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub rules: TrialRules,
    pub endpoint: EndpointSpec,
    pub rates: InformationRates,
}

impl DesignSpec {
    pub fn stages(&self) -> usize {
        self.rates.stages()
    }
}

/// Quantile of the efficacy tail: `z_{1-alpha}` one-sided, `z_{1-alpha/2}`
/// two-sided.
fn alpha_quantile(alpha: f64, sidedness: Sidedness) -> Result<f64> {
    let p = match sidedness {
        Sidedness::OneSided => 1.0 - alpha,
        Sidedness::TwoSidedSymmetric => 1.0 - alpha / 2.0,
    };
    normal_quantile(p)
}

/// Cumulative efficacy-exit probability (power) at drift `theta`, respecting
/// futility bounds when present.
fn power_at(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    theta: f64,
) -> Result<f64> {
    let dist = StageDistribution::new(rates.clone(), theta)?;
    let regions = bounds.regions(sidedness, true)?;
    Ok(propagate(&dist, &regions)?.total_efficacy())
}

/// Power at the base grid resolution with no refinement step. The refinement
/// threshold makes the full pipeline piecewise in `theta`; this surface is
/// smooth, so root iterations on it converge fast. The root is then polished
/// against the full pipeline.
fn power_fast(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    theta: f64,
) -> Result<f64> {
    let dist = StageDistribution::new(rates.clone(), theta)?;
    let regions = bounds.regions(sidedness, true)?;
    Ok(gauss::propagate_unchecked(&dist, &regions, gauss::GridConfig::default())?
        .total_efficacy())
}

/// Solves the drift `theta > 0` at which the design attains power `1 - beta`.
/// Futility bounds, when present, are respected in the power calculation for
/// both binding and non-binding modes.
pub fn drift_for_power(
    rates: &InformationRates,
    bounds: &BoundarySet,
    beta: f64,
    sidedness: Sidedness,
) -> Result<f64> {
    drift_for_power_hinted(rates, bounds, beta, sidedness, None)
}

/// [`drift_for_power`] with a warm-start guess from a nearby design; iterative
/// callers (futility fixed points, schedule optimization) converge in a few
/// power evaluations instead of a cold bracketed search.
pub fn drift_for_power_hinted(
    rates: &InformationRates,
    bounds: &BoundarySet,
    beta: f64,
    sidedness: Sidedness,
    hint: Option<f64>,
) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain("beta must lie in (0, 1)"));
    }
    let target = 1.0 - beta;

    // One-sided single-stage designs have the closed form u_1 + z_{1-beta};
    // keeping it exact makes K = 1 degenerate to the fixed design identically.
    if rates.stages() == 1 && sidedness == Sidedness::OneSided {
        return Ok(bounds.upper[0] + normal_quantile(target)?);
    }

    // Solve on the smooth base-grid surface first, then polish against the
    // full (refinement-checked) pipeline so the post-condition holds there.
    let theta0 = drift_fast(rates, bounds, sidedness, target, hint)?;
    polish_drift(rates, bounds, sidedness, target, theta0)
}

/// Drift solve against the base-grid surface only; used internally where the
/// result feeds a further iteration that re-polishes (schedule optimization).
pub(crate) fn drift_fast(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    target: f64,
    hint: Option<f64>,
) -> Result<f64> {
    match hint {
        Some(h) if h.is_finite() && h > 0.0 => {
            match drift_near(rates, bounds, sidedness, target, h)? {
                Some(t) => Ok(t),
                None => drift_cold(rates, bounds, sidedness, target),
            }
        }
        _ => drift_cold(rates, bounds, sidedness, target),
    }
}

/// Cold bracketed solve on the base-grid power surface.
fn drift_cold(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    target: f64,
) -> Result<f64> {
    // Upper bracket: the fixed-design drift for the final bound, inflated; the
    // interim penalty never triples the requirement.
    let u_last = *bounds.upper.last().unwrap();
    let mut hi = 3.0 * (u_last + normal_quantile(target)?.max(0.0) + 1.0);
    for _ in 0..4 {
        if power_fast(rates, bounds, sidedness, hi)? >= target {
            break;
        }
        hi *= 2.0;
    }
    find_root(
        |theta| match power_fast(rates, bounds, sidedness, theta) {
            Ok(p) => p - target,
            Err(_) => f64::NAN,
        },
        1e-6,
        hi,
        1e-9,
        1e-12,
        200,
        "drift for power",
    )
}

/// Attempts a tight bracket around the hint on the base-grid surface,
/// expanding geometrically a few times; `None` means the hint was unusable.
fn drift_near(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    target: f64,
    hint: f64,
) -> Result<Option<f64>> {
    let f = |theta: f64| -> Result<f64> {
        Ok(power_fast(rates, bounds, sidedness, theta)? - target)
    };
    let mut lo = (hint * 0.97).max(1e-6);
    let mut hi = hint * 1.03;
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    for _ in 0..8 {
        if flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo = (lo * 0.7).max(1e-6);
            flo = f(lo)?;
        } else if fhi < 0.0 {
            lo = hi;
            flo = fhi;
            hi *= 1.4;
            fhi = f(hi)?;
        } else {
            break;
        }
    }
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Ok(None);
    }
    let root = find_root(
        |theta| match power_fast(rates, bounds, sidedness, theta) {
            Ok(p) => p - target,
            Err(_) => f64::NAN,
        },
        lo,
        hi,
        1e-9,
        1e-12,
        200,
        "drift for power",
    )?;
    Ok(Some(root))
}

/// Newton-style correction of the base-grid root against the full pipeline;
/// the two surfaces differ by at most the refinement increment, so one or two
/// steps suffice. Falls back to a bracketed full-pipeline solve if not.
fn polish_drift(
    rates: &InformationRates,
    bounds: &BoundarySet,
    sidedness: Sidedness,
    target: f64,
    theta0: f64,
) -> Result<f64> {
    let h = 1e-4 * theta0.max(1e-3);
    let slope = (power_fast(rates, bounds, sidedness, theta0 + h)?
        - power_fast(rates, bounds, sidedness, theta0 - h)?)
        / (2.0 * h);
    let mut x = theta0;
    if slope > 1e-12 {
        for _ in 0..8 {
            let err = target - power_at(rates, bounds, sidedness, x)?;
            if libm::fabs(err) <= 1e-9 {
                return Ok(x);
            }
            x += err / slope;
            if !(x > 0.0) || !x.is_finite() {
                break;
            }
        }
    }
    // Rare fallback: bracket around the base-grid root on the full pipeline.
    find_root(
        |theta| match power_at(rates, bounds, sidedness, theta) {
            Ok(p) => p - target,
            Err(_) => f64::NAN,
        },
        (theta0 * 0.5).max(1e-6),
        theta0 * 2.0 + 1.0,
        1e-9,
        1e-12,
        200,
        "drift for power",
    )
}

/// Fixed-design total sample size `N_0` for the endpoint at the given error
/// rates. Continuous uses the classical normal formula; binary uses the
/// pooled-under-H0 / unpooled-under-H1 two-proportion approximation.
pub fn fixed_design_size(
    endpoint: &EndpointSpec,
    alpha: f64,
    beta: f64,
    sidedness: Sidedness,
) -> Result<f64> {
    let z_a = alpha_quantile(alpha, sidedness)?;
    let z_b = normal_quantile(1.0 - beta)?;
    let r = endpoint.allocation_ratio;
    match endpoint.endpoint {
        Endpoint::Continuous { delta_star, sigma } => {
            let se = sigma / libm::fabs(delta_star);
            Ok(se * se * (1.0 + r) * (1.0 + r) / r * (z_a + z_b) * (z_a + z_b))
        }
        Endpoint::Binary {
            p_control,
            p_treatment,
        } => {
            let delta = libm::fabs(p_control - p_treatment);
            let pbar = (p_control + r * p_treatment) / (1.0 + r);
            let pooled = libm::sqrt((1.0 + 1.0 / r) * pbar * (1.0 - pbar));
            let unpooled = libm::sqrt(
                p_control * (1.0 - p_control) + p_treatment * (1.0 - p_treatment) / r,
            );
            let s = (z_a * pooled + z_b * unpooled) / delta;
            // n per control arm, scaled to the trial total.
            Ok(s * s * (1.0 + r))
        }
    }
}

/// Sample sizes of the sequential design: `(n_fixed, n_max, n_per_stage)`.
/// The maximum size scales the fixed design by `theta^2 / ((z_a + z_b)^2 t_1)`.
pub fn sample_sizes(
    spec: &DesignSpec,
    theta: f64,
) -> Result<(f64, f64, Vec<f64>)> {
    if !(theta > 0.0) {
        return Err(Error::Domain("drift must be positive"));
    }
    let rules = &spec.rules;
    let n_fixed = fixed_design_size(&spec.endpoint, rules.alpha, rules.beta, rules.boundary.sidedness)?;
    let z_a = alpha_quantile(rules.alpha, rules.boundary.sidedness)?;
    let z_b = normal_quantile(1.0 - rules.beta)?;
    let n_max = n_fixed * theta * theta / ((z_a + z_b) * (z_a + z_b) * spec.rates.first());
    let n_per_stage = spec.rates.as_slice().iter().map(|&t| t * n_max).collect();
    Ok((n_fixed, n_max, n_per_stage))
}

/// `E[N] = sum_k N_k Pr(stop at stage k)` for the given stagewise exits.
pub fn expected_sample_size(n_per_stage: &[f64], exits: &StageProbabilities) -> f64 {
    n_per_stage
        .iter()
        .enumerate()
        .map(|(k, &n)| n * exits.stop_probability(k))
        .sum()
}

/// Full operating-characteristics report of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingCharacteristics {
    pub boundaries: BoundarySet,
    /// Canonical drift at the design alternative.
    pub drift: f64,
    pub n_fixed: f64,
    pub n_max: f64,
    pub n_per_stage: Vec<f64>,
    pub exit_h0: StageProbabilities,
    pub exit_mid: StageProbabilities,
    pub exit_h1: StageProbabilities,
    pub ess_h0: f64,
    pub ess_mid: f64,
    pub ess_h1: f64,
    /// Maximum inflation factor `n_max / n_fixed`.
    pub mif: f64,
    pub eif_h0: f64,
    pub eif_mid: f64,
    pub eif_h1: f64,
    /// Type I error under the design's own convention (non-binding futility
    /// is ignored, so this equals alpha up to solver tolerance).
    pub type_i_error: f64,
    /// Type I error when futility bounds are actually respected; below
    /// nominal for non-binding designs.
    pub type_i_error_attained: f64,
    /// Stages where a vanishing spending increment forced the bound to the cap.
    pub capped_stages: Vec<usize>,
}

/// Solves the boundaries and drift of a design and evaluates its complete
/// operating characteristics.
pub fn characterize(spec: &DesignSpec) -> Result<OperatingCharacteristics> {
    let rules = &spec.rules;
    let efficacy = solve_efficacy_boundaries(&rules.boundary, &spec.rates, rules.alpha)?;
    let solution = solve_futility_boundaries(
        &rules.boundary,
        &rules.futility,
        &spec.rates,
        rules.alpha,
        rules.beta,
        &efficacy,
    )?;
    let bounds = solution.bounds;
    let theta = solution.drift;
    let sidedness = rules.boundary.sidedness;

    let (n_fixed, n_max, n_per_stage) = sample_sizes(spec, theta)?;

    // Stopping behavior (and hence ESS) always respects futility bounds.
    let conduct = bounds.regions(sidedness, true)?;
    let exit_at = |drift: f64| -> Result<StageProbabilities> {
        let dist = StageDistribution::new(spec.rates.clone(), drift)?;
        propagate(&dist, &conduct)
    };
    let exit_h0 = exit_at(0.0)?;
    let exit_mid = exit_at(0.5 * theta)?;
    let exit_h1 = exit_at(theta)?;

    let type_i_error_attained = exit_h0.total_efficacy();
    let type_i_error = if rules.futility.mode == FutilityMode::NonBinding {
        let free = bounds.regions(sidedness, false)?;
        let dist = StageDistribution::new(spec.rates.clone(), 0.0)?;
        propagate(&dist, &free)?.total_efficacy()
    } else {
        type_i_error_attained
    };

    let ess_h0 = expected_sample_size(&n_per_stage, &exit_h0);
    let ess_mid = expected_sample_size(&n_per_stage, &exit_mid);
    let ess_h1 = expected_sample_size(&n_per_stage, &exit_h1);

    Ok(OperatingCharacteristics {
        boundaries: bounds,
        drift: theta,
        n_fixed,
        n_max,
        n_per_stage,
        exit_h0,
        exit_mid,
        exit_h1,
        ess_h0,
        ess_mid,
        ess_h1,
        mif: n_max / n_fixed,
        eif_h0: ess_h0 / n_fixed,
        eif_mid: ess_mid / n_fixed,
        eif_h1: ess_h1 / n_fixed,
        type_i_error,
        type_i_error_attained,
        capped_stages: solution.capped_stages,
    })
}
