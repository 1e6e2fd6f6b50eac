//! Spending functions, classical boundary families, and the solvers that turn
//! an error-rate specification plus an information-rate schedule into
//! per-stage stopping bounds on the Z scale.

use alloc::vec::Vec;

use crate::design;
use crate::error::{Error, Result};
use crate::gauss::{self, normal_cdf, normal_quantile, normal_sf, ForwardState, GridConfig};
use crate::rates::InformationRates;

/// Z-scale cap applied when a spending increment underflows; the bound is
/// reported as capped rather than failing the solve.
pub const BOUND_CAP: f64 = 10.0;

/// Probability tolerance of the stagewise bound root-finder.
const SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sidedness {
    OneSided,
    TwoSidedSymmetric,
}

/// Boundary family: a classical rule or an error-spending function.
#[derive(Debug, Clone, PartialEq)]
pub enum SpendingFamily {
    /// Fixed interim bound at z = 3 with an exactly solved final bound.
    HaybittlePeto,
    /// Lan-DeMets Pocock-type spending `A(t) = level * ln(1 + (e-1) t)`.
    Pocock,
    /// Lan-DeMets O'Brien-Fleming-type spending
    /// `A(t) = 2 (1 - Phi(z_{1-level/2} / sqrt(t)))`.
    OBrienFleming,
    /// Kim-DeMets power family `A(t) = level * t^rho`, `rho > 0`.
    KimDeMets { rho: f64 },
    /// Hwang-Shih-DeCani family `A(t) = level (1 - e^{-gamma t}) / (1 - e^{-gamma})`,
    /// `gamma != 0`.
    HwangShihDeCani { gamma: f64 },
    /// Piecewise-linear cumulative spending through the given
    /// `(t, fraction-of-level)` knots; must be nondecreasing and end at
    /// `(1, 1)`.
    Custom(Vec<(f64, f64)>),
}

impl SpendingFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpendingFamily::KimDeMets { rho } if !(*rho > 0.0) => {
                Err(Error::InvalidSpec("kim-demets rho must be positive".into()))
            }
            SpendingFamily::HwangShihDeCani { gamma } if *gamma == 0.0 || !gamma.is_finite() => {
                Err(Error::InvalidSpec(
                    "hwang-shih-decani gamma must be nonzero and finite".into(),
                ))
            }
            SpendingFamily::Custom(table) => {
                let mut prev = (0.0, 0.0);
                for &(t, s) in table {
                    if t < prev.0 || s < prev.1 || !(t <= 1.0) || !(s <= 1.0) {
                        return Err(Error::InvalidSpec(
                            "custom spending table must be nondecreasing within [0,1]".into(),
                        ));
                    }
                    prev = (t, s);
                }
                if table.last() != Some(&(1.0, 1.0)) {
                    return Err(Error::InvalidSpec(
                        "custom spending table must end at (1, 1)".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Efficacy stopping rule: boundary family plus test sidedness.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRule {
    pub family: SpendingFamily,
    pub sidedness: Sidedness,
}

impl BoundaryRule {
    pub fn new(family: SpendingFamily, sidedness: Sidedness) -> Result<Self> {
        family.validate()?;
        Ok(Self { family, sidedness })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FutilityMode {
    None,
    Binding,
    NonBinding,
}

/// Futility stopping rule: mode plus the beta-spending family used to place
/// the lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FutilityRule {
    pub mode: FutilityMode,
    pub spending: Option<SpendingFamily>,
}

impl FutilityRule {
    pub fn none() -> Self {
        Self {
            mode: FutilityMode::None,
            spending: None,
        }
    }

    pub fn new(mode: FutilityMode, spending: Option<SpendingFamily>) -> Result<Self> {
        match (mode, &spending) {
            (FutilityMode::None, Some(_)) => Err(Error::InvalidSpec(
                "futility spending given but futility mode is none".into(),
            )),
            (FutilityMode::None, None) => Ok(Self { mode, spending }),
            (_, None) => Err(Error::InvalidSpec(
                "futility mode requires a beta-spending family".into(),
            )),
            (_, Some(f)) => {
                f.validate()?;
                if matches!(f, SpendingFamily::HaybittlePeto) {
                    return Err(Error::InvalidSpec(
                        "haybittle-peto is not a beta-spending family".into(),
                    ));
                }
                Ok(Self { mode, spending })
            }
        }
    }

    pub fn is_active(&self) -> bool {
        self.mode != FutilityMode::None
    }
}

/// Per-stage stopping bounds on the Z scale. `lower` is present only for
/// futility designs; by convention the final lower bound equals the final
/// upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub upper: Vec<f64>,
    pub lower: Option<Vec<f64>>,
}

impl BoundarySet {
    pub fn stages(&self) -> usize {
        self.upper.len()
    }

    /// Regions for propagation. `respect_lower` controls whether futility
    /// bounds shape the continuation intervals (true under H1 and for binding
    /// type I error; false for the non-binding H0 convention).
    pub fn regions(&self, sidedness: Sidedness, respect_lower: bool) -> Result<gauss::StageRegions> {
        let lower = if respect_lower { self.lower.clone() } else { None };
        gauss::StageRegions::new(
            self.upper.clone(),
            lower,
            sidedness == Sidedness::TwoSidedSymmetric,
        )
    }
}

/// Solved efficacy bounds plus the stages (if any) where a vanishing spending
/// increment forced the bound to the cap.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySolution {
    pub bounds: BoundarySet,
    pub capped_stages: Vec<usize>,
}

/// Cumulative type I (or type II) error spent by information fraction `t`.
///
/// `level` is the one-sided (per-tail) total error. Haybittle-Peto is a fixed
/// boundary rule, not a spending function, and is rejected here.
pub fn cumulative_spend(family: &SpendingFamily, level: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain("spending time must lie in (0, 1]"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("spending level must lie in (0, 1)"));
    }
    if t == 1.0 {
        return Ok(level);
    }
    match family {
        SpendingFamily::HaybittlePeto => Err(Error::Domain(
            "haybittle-peto has no spending function; bounds are fixed at z = 3",
        )),
        SpendingFamily::Pocock => {
            Ok(level * libm::log(1.0 + (core::f64::consts::E - 1.0) * t))
        }
        SpendingFamily::OBrienFleming => {
            let z = normal_quantile(1.0 - level / 2.0)?;
            Ok(2.0 * normal_sf(z / libm::sqrt(t)))
        }
        SpendingFamily::KimDeMets { rho } => Ok(level * libm::pow(t, *rho)),
        SpendingFamily::HwangShihDeCani { gamma } => {
            Ok(level * (1.0 - libm::exp(-gamma * t)) / (1.0 - libm::exp(-gamma)))
        }
        SpendingFamily::Custom(table) => {
            let mut prev = (0.0, 0.0);
            for &(tk, s) in table {
                if t <= tk {
                    let frac = if tk > prev.0 {
                        (t - prev.0) / (tk - prev.0)
                    } else {
                        1.0
                    };
                    return Ok(level * (prev.1 + frac * (s - prev.1)));
                }
                prev = (tk, s);
            }
            Ok(level)
        }
    }
}

/// Solves stagewise efficacy bounds so the incremental exit probability under
/// the null at each stage equals the spending increment (or, for
/// Haybittle-Peto, fixes interims at z = 3 and solves the final bound so the
/// cumulative exit equals `alpha`).
pub fn solve_efficacy_boundaries(
    rule: &BoundaryRule,
    rates: &InformationRates,
    alpha: f64,
) -> Result<BoundarySolution> {
    solve_efficacy_with_continuation(rule, rates, alpha, None)
}

/// As [`solve_efficacy_boundaries`], with the continuation interval truncated
/// below at the given futility bounds (the binding-futility H0 convention).
pub fn solve_efficacy_with_continuation(
    rule: &BoundaryRule,
    rates: &InformationRates,
    alpha: f64,
    lower: Option<&[f64]>,
) -> Result<BoundarySolution> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    rule.family.validate()?;
    let stages = rates.stages();
    let two_sided = rule.sidedness == Sidedness::TwoSidedSymmetric;
    if two_sided && lower.is_some() {
        return Err(Error::Infeasible(
            "futility bounds with two-sided symmetric efficacy are not supported",
        ));
    }
    let level = if two_sided { alpha / 2.0 } else { alpha };
    let tail_mult = if two_sided { 2.0 } else { 1.0 };
    let hp = matches!(rule.family, SpendingFamily::HaybittlePeto);

    let null = gauss::StageDistribution::new(rates.clone(), 0.0)?;
    let cfg = GridConfig::default();

    let mut upper: Vec<f64> = Vec::with_capacity(stages);
    let mut capped = Vec::new();
    let mut spent = 0.0;
    let mut state: Option<ForwardState> = None;

    for k in 0..stages {
        // Incremental exit probability at stage k as a function of the bound.
        let exit_at = |u: f64, state: &Option<ForwardState>| -> f64 {
            match state {
                None => {
                    let mut e = normal_sf(u);
                    if two_sided {
                        e += normal_cdf(-u);
                    }
                    e
                }
                Some(s) => {
                    let mut e = s.upper_exit(k, u);
                    if two_sided {
                        e += s.mirror_exit(k, u);
                    }
                    e
                }
            }
        };

        let u_k = if hp && k < stages - 1 {
            3.0
        } else {
            let target = if hp {
                alpha - spent
            } else {
                let cum = cumulative_spend(&rule.family, level, rates.get(k))?;
                let prev = if k == 0 {
                    0.0
                } else {
                    cumulative_spend(&rule.family, level, rates.get(k - 1))?
                };
                tail_mult * (cum - prev)
            };
            let at_cap = exit_at(BOUND_CAP, &state);
            if target <= at_cap + SOLVE_TOL {
                capped.push(k);
                BOUND_CAP
            } else if state.is_none() {
                // Stage 1 is a plain normal tail: solve it in closed form.
                let p = if two_sided { target / 2.0 } else { target };
                normal_quantile(1.0 - p)?.min(BOUND_CAP)
            } else {
                crate::roots::find_root(
                    |u| exit_at(u, &state) - target,
                    0.0,
                    BOUND_CAP,
                    SOLVE_TOL,
                    1e-12,
                    200,
                    "efficacy bound",
                )?
            }
        };
        spent += exit_at(u_k, &state);
        upper.push(u_k);

        if k < stages - 1 {
            let lo = match lower {
                Some(l) => l[k],
                None if two_sided => -u_k,
                None => f64::NEG_INFINITY,
            };
            if lo >= u_k {
                return Err(Error::Infeasible(
                    "futility bound crosses efficacy bound during solve",
                ));
            }
            match &mut state {
                None => state = Some(ForwardState::init(&null, (lo, u_k), cfg)?),
                Some(s) => s.advance(k, (lo, u_k))?,
            }
        }
    }

    let lower_out = lower.map(|l| {
        let mut v = l.to_vec();
        if v.len() == stages {
            v[stages - 1] = upper[stages - 1];
        }
        v
    });
    Ok(BoundarySolution {
        bounds: BoundarySet {
            upper,
            lower: lower_out,
        },
        capped_stages: capped,
    })
}

/// Outcome of the futility fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FutilitySolution {
    pub bounds: BoundarySet,
    /// Drift consistent with the solved bounds at the requested power.
    pub drift: f64,
    pub iterations: usize,
    pub capped_stages: Vec<usize>,
}

const FIXED_POINT_CAP: usize = 100;
const DRIFT_TOL: f64 = 1e-8;

/// Solves lower (futility) bounds so the incremental futility-exit
/// probability under the alternative matches the beta-spending increments.
///
/// The drift itself depends on the boundaries, so the solve iterates: place
/// lower bounds at the current drift, re-solve the efficacy bounds when
/// futility is binding, then refresh the drift from the power equation until
/// it moves by less than `1e-8`.
pub fn solve_futility_boundaries(
    rule: &BoundaryRule,
    futility: &FutilityRule,
    rates: &InformationRates,
    alpha: f64,
    beta: f64,
    efficacy: &BoundarySolution,
) -> Result<FutilitySolution> {
    if !futility.is_active() {
        let drift = design::drift_for_power(rates, &efficacy.bounds, beta, rule.sidedness)?;
        return Ok(FutilitySolution {
            bounds: efficacy.bounds.clone(),
            drift,
            iterations: 0,
            capped_stages: efficacy.capped_stages.clone(),
        });
    }
    if rule.sidedness == Sidedness::TwoSidedSymmetric {
        return Err(Error::Infeasible(
            "futility bounds with two-sided symmetric efficacy are not supported",
        ));
    }
    let bspend = futility.spending.as_ref().unwrap();
    let stages = rates.stages();
    if stages < 2 {
        return Err(Error::InvalidSpec(
            "futility requires at least one interim analysis".into(),
        ));
    }

    let mut upper = efficacy.bounds.upper.clone();
    let mut capped = efficacy.capped_stages.clone();
    let mut theta = design::drift_for_power(rates, &efficacy.bounds, beta, rule.sidedness)?;

    for iter in 1..=FIXED_POINT_CAP {
        let lower = place_lower_bounds(bspend, rates, beta, &upper, theta)?;
        if rule.mode_is_binding(futility) {
            let resolved = solve_efficacy_with_continuation(rule, rates, alpha, Some(&lower))?;
            upper = resolved.bounds.upper;
            capped = resolved.capped_stages;
        }
        let mut full_lower = lower;
        full_lower.push(upper[stages - 1]);
        let bounds = BoundarySet {
            upper: upper.clone(),
            lower: Some(full_lower),
        };
        let new_theta =
            design::drift_for_power_hinted(rates, &bounds, beta, rule.sidedness, Some(theta))?;
        if libm::fabs(new_theta - theta) < DRIFT_TOL {
            return Ok(FutilitySolution {
                bounds,
                drift: new_theta,
                iterations: iter,
                capped_stages: capped,
            });
        }
        theta = new_theta;
    }
    Err(Error::FixedPointDiverged)
}

impl BoundaryRule {
    fn mode_is_binding(&self, futility: &FutilityRule) -> bool {
        futility.mode == FutilityMode::Binding
    }
}

/// Places interim lower bounds under drift `theta` so the stagewise futility
/// exits match the beta-spending increments. Returns `K - 1` bounds.
fn place_lower_bounds(
    bspend: &SpendingFamily,
    rates: &InformationRates,
    beta: f64,
    upper: &[f64],
    theta: f64,
) -> Result<Vec<f64>> {
    let stages = rates.stages();
    let alt = gauss::StageDistribution::new(rates.clone(), theta)?;
    let cfg = GridConfig::default();
    let mut lower = Vec::with_capacity(stages - 1);
    let mut state: Option<ForwardState> = None;

    for k in 0..stages - 1 {
        let cum = cumulative_spend(bspend, beta, rates.get(k))?;
        let prev = if k == 0 {
            0.0
        } else {
            cumulative_spend(bspend, beta, rates.get(k - 1))?
        };
        let target = cum - prev;

        let mu = alt.mean(k);
        let exit_at = |l: f64, state: &Option<ForwardState>| -> f64 {
            match state {
                None => normal_cdf(l - mu),
                Some(s) => s.lower_exit(k, l),
            }
        };

        let hi = upper[k] - 1e-9;
        let l_k = if target <= exit_at(-BOUND_CAP, &state) + SOLVE_TOL {
            -BOUND_CAP
        } else if exit_at(hi, &state) < target {
            return Err(Error::Infeasible(
                "beta-spending increment exceeds continuation mass: l_k >= u_k",
            ));
        } else {
            crate::roots::find_root(
                |l| exit_at(l, &state) - target,
                -BOUND_CAP,
                hi,
                SOLVE_TOL,
                1e-12,
                200,
                "futility bound",
            )?
        };
        lower.push(l_k);

        match &mut state {
            None => state = Some(ForwardState::init(&alt, (l_k, upper[k]), cfg)?),
            Some(s) => s.advance(k, (l_k, upper[k]))?,
        }
    }
    Ok(lower)
}
