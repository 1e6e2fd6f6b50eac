//! Standard-normal primitives and the forward recursion that evaluates joint
//! stagewise exit probabilities of the canonical sequential Z-process.
//!
//! The recursion propagates the sub-density of non-stopped sample paths from
//! one analysis to the next over a composite-Simpson grid clipped to the
//! continuation interval. Exit probabilities at each analysis are evaluated
//! exactly through the conditional normal tail, before clipping, so no
//! interval-truncation bias enters the reported probabilities.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rates::InformationRates;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / SQRT_2PI
}

/// Standard normal distribution function, |error| <= 1e-12.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`, computed without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile: initial rational approximation (Acklam) polished
/// with one Newton step against `normal_cdf`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("normal_quantile requires 0 < p < 1"));
    }
    let x = acklam(p);
    // Newton polish: x' = x - (Phi(x) - p) / phi(x).
    let err = normal_cdf(x) - p;
    Ok(x - err / normal_pdf(x))
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// The canonical joint law of the sequential Z-statistics: per-stage means
/// `theta * sqrt(t_k / t_1)` and correlations `sqrt(min(t_k,t_k') / max(t_k,t_k'))`,
/// both derived from the schedule and the drift, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDistribution {
    rates: InformationRates,
    drift: f64,
}

impl StageDistribution {
    pub fn new(rates: InformationRates, drift: f64) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::Domain("drift must be finite"));
        }
        Ok(Self { rates, drift })
    }

    pub fn rates(&self) -> &InformationRates {
        &self.rates
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Information fraction relative to the first analysis, `t_k / t_1`.
    pub fn relative_information(&self, k: usize) -> f64 {
        self.rates.get(k) / self.rates.first()
    }

    /// Mean of `Z_{k+1}` (0-indexed): `theta * sqrt(t_k / t_1)`.
    pub fn mean(&self, k: usize) -> f64 {
        self.drift * libm::sqrt(self.relative_information(k))
    }

    /// Correlation between `Z_{j+1}` and `Z_{k+1}`.
    pub fn correlation(&self, j: usize, k: usize) -> f64 {
        let (tj, tk) = (self.rates.get(j), self.rates.get(k));
        libm::sqrt(if tj <= tk { tj / tk } else { tk / tj })
    }
}

/// Composite-Simpson quadrature grid on an equally spaced node set.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub half_width: f64,
    pub points_per_stage: usize,
}

impl QuadratureGrid {
    /// Grid over `[a, b]`; `points` is rounded up to the next odd count.
    pub fn simpson_over(a: f64, b: f64, points: usize) -> Self {
        let n = if points % 2 == 0 { points + 1 } else { points.max(3) };
        let h = (b - a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
        let mut weights = vec![h / 3.0; n];
        for (i, w) in weights.iter_mut().enumerate().skip(1).take(n - 2) {
            *w *= if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        Self {
            nodes,
            weights,
            half_width: 0.5 * (b - a),
            points_per_stage: n,
        }
    }

    /// Grid centered at `center` extending `half_width` either side.
    pub fn simpson_centered(center: f64, half_width: f64, points: usize) -> Self {
        Self::simpson_over(center - half_width, center + half_width, points)
    }
}

/// Per-stage stopping thresholds and continuation semantics used by
/// [`propagate`]. `lower` bounds, when present, are respected as stopping
/// rules at interim stages; `two_sided` mirrors the efficacy bound to `-u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRegions {
    upper: Vec<f64>,
    lower: Option<Vec<f64>>,
    two_sided: bool,
}

impl StageRegions {
    pub fn new(upper: Vec<f64>, lower: Option<Vec<f64>>, two_sided: bool) -> Result<Self> {
        if upper.is_empty() {
            return Err(Error::InvalidSpec("no stages in boundary set".into()));
        }
        if let Some(lo) = &lower {
            if two_sided {
                return Err(Error::Infeasible(
                    "futility bounds with two-sided symmetric efficacy are not supported",
                ));
            }
            if lo.len() != upper.len() {
                return Err(Error::InvalidSpec(
                    "lower and upper bound counts differ".into(),
                ));
            }
            for k in 0..lo.len() - 1 {
                if lo[k] >= upper[k] {
                    return Err(Error::Infeasible(
                        "continuation interval empty: l_k >= u_k at an interim stage",
                    ));
                }
            }
        }
        if two_sided && upper[..upper.len() - 1].iter().any(|&u| u <= 0.0) {
            return Err(Error::Infeasible(
                "two-sided interim bound must be positive",
            ));
        }
        Ok(Self {
            upper,
            lower,
            two_sided,
        })
    }

    pub fn stages(&self) -> usize {
        self.upper.len()
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> Option<&[f64]> {
        self.lower.as_deref()
    }

    /// Continuation interval after interim stage `k`.
    fn continuation(&self, k: usize) -> (f64, f64) {
        let hi = self.upper[k];
        let lo = match &self.lower {
            Some(l) => l[k],
            None if self.two_sided => -hi,
            None => f64::NEG_INFINITY,
        };
        (lo, hi)
    }
}

/// Stagewise first-exit probabilities returned by [`propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct StageProbabilities {
    /// First exit across the efficacy bound at each stage (both tails for
    /// two-sided symmetric designs).
    pub efficacy: Vec<f64>,
    /// First exit below the futility bound at each interim stage.
    pub futility: Vec<f64>,
    /// Mass reaching the final analysis without rejecting.
    pub final_accept: f64,
}

impl StageProbabilities {
    pub fn stages(&self) -> usize {
        self.efficacy.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.efficacy.iter().sum::<f64>() + self.futility.iter().sum::<f64>() + self.final_accept
    }

    pub fn total_efficacy(&self) -> f64 {
        self.efficacy.iter().sum()
    }

    pub fn total_futility(&self) -> f64 {
        self.futility.iter().sum()
    }

    /// Probability the trial stops at stage `k` (final stage absorbs all
    /// remaining mass).
    pub fn stop_probability(&self, k: usize) -> f64 {
        let mut p = self.efficacy[k] + self.futility[k];
        if k == self.stages() - 1 {
            p += self.final_accept;
        }
        p
    }

    /// Probability no boundary was crossed at stages `0..=k`.
    pub fn continue_past(&self, k: usize) -> f64 {
        let exited: f64 = (0..=k).map(|j| self.efficacy[j] + self.futility[j]).sum();
        1.0 - exited
    }
}

/// Grid resolution for the forward recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub points_per_stage: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points_per_stage: 301,
            half_width: 6.5,
        }
    }
}

/// Tolerance on `|total probability mass - 1|` before the grid is refined.
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Evaluates stagewise first-exit probabilities of the canonical sequential
/// Z-process by forward propagation of the sub-density of non-stopped paths.
///
/// Runs at the default grid resolution and refines once (doubling the node
/// count) if the total-mass check fails.
pub fn propagate(dist: &StageDistribution, regions: &StageRegions) -> Result<StageProbabilities> {
    propagate_with(dist, regions, GridConfig::default())
}

/// [`propagate`] with an explicit grid configuration.
pub fn propagate_with(
    dist: &StageDistribution,
    regions: &StageRegions,
    cfg: GridConfig,
) -> Result<StageProbabilities> {
    if regions.stages() != dist.rates().stages() {
        return Err(Error::InvalidSpec(
            "boundary set and rate schedule have different stage counts".into(),
        ));
    }
    let probs = propagate_at(dist, regions, cfg)?;
    if libm::fabs(probs.total_mass() - 1.0) <= MASS_TOLERANCE {
        return Ok(probs);
    }
    let refined = GridConfig {
        points_per_stage: cfg.points_per_stage * 2 - 1,
        ..cfg
    };
    let probs = propagate_at(dist, regions, refined)?;
    if libm::fabs(probs.total_mass() - 1.0) <= MASS_TOLERANCE {
        Ok(probs)
    } else {
        Err(Error::GridResolution)
    }
}

/// Loose sanity bound for the single-pass surface: legitimate schedules sit
/// within ~1e-6 of unit mass on the base grid, while schedules the grid cannot
/// represent at all (e.g. nearly coincident analyses) are off by orders of
/// magnitude and must not be reported as smooth, tiny objectives.
pub(crate) const LOOSE_MASS_TOLERANCE: f64 = 1e-4;

/// Single pass of the forward recursion at a fixed grid, without the
/// normalization check or refinement. Smooth in the drift, which makes it the
/// right surface for root-finding; final reported probabilities should go
/// through [`propagate`] instead.
pub(crate) fn propagate_unchecked(
    dist: &StageDistribution,
    regions: &StageRegions,
    cfg: GridConfig,
) -> Result<StageProbabilities> {
    let probs = propagate_at(dist, regions, cfg)?;
    if libm::fabs(probs.total_mass() - 1.0) <= LOOSE_MASS_TOLERANCE {
        Ok(probs)
    } else {
        Err(Error::GridResolution)
    }
}

fn propagate_at(
    dist: &StageDistribution,
    regions: &StageRegions,
    cfg: GridConfig,
) -> Result<StageProbabilities> {
    let stages = regions.stages();
    let two_sided = regions.two_sided;
    let has_lower = regions.lower.is_some();

    let mut efficacy = Vec::with_capacity(stages);
    let mut futility = vec![0.0; stages];

    // Stage 1 is exact.
    let mu1 = dist.mean(0);
    let u1 = regions.upper[0];
    let mut eff = normal_sf(u1 - mu1);
    if two_sided {
        eff += normal_cdf(-u1 - mu1);
    }
    efficacy.push(eff);
    if stages == 1 {
        return Ok(StageProbabilities {
            final_accept: 1.0 - eff,
            efficacy,
            futility,
        });
    }
    if has_lower {
        futility[0] = normal_cdf(regions.continuation(0).0 - mu1);
    }

    let mut state = ForwardState::init(dist, regions.continuation(0), cfg)?;
    let mut final_accept = 0.0;
    for k in 1..stages {
        let u = regions.upper[k];
        let mut eff = state.upper_exit(k, u);
        if two_sided {
            eff += state.mirror_exit(k, u);
        }
        efficacy.push(eff);

        if k == stages - 1 {
            final_accept = state.total() - eff;
            break;
        }

        if has_lower {
            futility[k] = state.lower_exit(k, regions.continuation(k).0);
        }
        state.advance(k, regions.continuation(k))?;
    }

    Ok(StageProbabilities {
        efficacy,
        futility,
        final_accept,
    })
}

/// Sub-density of non-stopped paths, carried forward one analysis at a time.
///
/// After construction the state holds the weighted sub-density of paths that
/// continued past stage 0; `upper_exit`/`lower_exit` evaluate first-exit
/// probabilities at stage `k` (the stage following the last `advance`), and
/// `advance(k, cont)` clips to the continuation interval of stage `k` and
/// moves the density there.
pub(crate) struct ForwardState<'a> {
    dist: &'a StageDistribution,
    cfg: GridConfig,
    nodes: Vec<f64>,
    mass: Vec<f64>,
}

impl<'a> ForwardState<'a> {
    /// State after clipping stage 0 to its continuation interval.
    pub(crate) fn init(
        dist: &'a StageDistribution,
        cont: (f64, f64),
        cfg: GridConfig,
    ) -> Result<Self> {
        let mu1 = dist.mean(0);
        let grid = clipped_grid(mu1, cont.0, cont.1, cfg)?;
        let mass = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&x, &w)| w * normal_pdf(x - mu1))
            .collect();
        Ok(Self {
            dist,
            cfg,
            nodes: grid.nodes,
            mass,
        })
    }

    fn transition(&self, k: usize) -> (f64, f64, f64, f64) {
        let w_prev = self.dist.relative_information(k - 1);
        let w_k = self.dist.relative_information(k);
        let dv = w_k - w_prev;
        (
            libm::sqrt(w_prev),
            libm::sqrt(w_k),
            libm::sqrt(dv),
            self.dist.drift() * dv,
        )
    }

    /// Probability of first exit above `u` at stage `k`.
    pub(crate) fn upper_exit(&self, k: usize, u: f64) -> f64 {
        let (sp, sk, sd, shift) = self.transition(k);
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(x, m)| m * normal_sf((u * sk - x * sp - shift) / sd))
            .sum()
    }

    /// Probability of first exit below `-u` at stage `k` (two-sided mirror).
    pub(crate) fn mirror_exit(&self, k: usize, u: f64) -> f64 {
        self.lower_exit(k, -u)
    }

    /// Probability of first exit below `l` at stage `k`.
    pub(crate) fn lower_exit(&self, k: usize, l: f64) -> f64 {
        let (sp, sk, sd, shift) = self.transition(k);
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(x, m)| m * normal_cdf((l * sk - x * sp - shift) / sd))
            .sum()
    }

    /// Mass still in play before stage `k`'s stopping rule is applied.
    pub(crate) fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Applies stage `k`'s continuation interval and moves the sub-density there.
    pub(crate) fn advance(&mut self, k: usize, cont: (f64, f64)) -> Result<()> {
        let (sp, sk, sd, shift) = self.transition(k);
        let grid = clipped_grid(self.dist.mean(k), cont.0, cont.1, self.cfg)?;
        self.mass = transfer_density(&self.nodes, &self.mass, &grid, sp, sk, sd, shift);
        self.nodes = grid.nodes;
        Ok(())
    }
}

/// Grid over the continuation interval clipped to `half_width` standard
/// deviations around the stage mean. When the mean lies far outside the
/// continuation interval the window is anchored to the nearer edge (the
/// surviving mass there is negligible but must stay representable).
fn clipped_grid(mean: f64, clo: f64, chi: f64, cfg: GridConfig) -> Result<QuadratureGrid> {
    let hw = cfg.half_width;
    let mut a = if clo.is_finite() { clo.max(mean - hw) } else { mean - hw };
    let mut b = chi.min(mean + hw);
    if a >= b {
        if mean > chi {
            b = chi;
            a = if clo.is_finite() { clo.max(chi - 2.0 * hw) } else { chi - 2.0 * hw };
        } else {
            a = if clo.is_finite() { clo } else { b - 2.0 * hw };
            b = chi.min(a + 2.0 * hw);
        }
    }
    if a >= b {
        return Err(Error::Infeasible("empty continuation interval"));
    }
    Ok(QuadratureGrid::simpson_over(a, b, cfg.points_per_stage))
}

/// Propagates weighted sub-density mass from the previous grid onto `grid`.
///
/// The kernel is `phi((z*sk - x*sp - shift)/sd) * sk/sd` on two equally spaced
/// node sets, so along a row the argument changes by a constant step and the
/// Gaussian values obey a two-term multiplicative recurrence. Each row costs
/// O(1) exponentials plus one multiply per node, and the walk stops once the
/// kernel underflows past `1e-18`.
fn transfer_density(
    nodes: &[f64],
    mass: &[f64],
    grid: &QuadratureGrid,
    sp: f64,
    sk: f64,
    sd: f64,
    shift: f64,
) -> Vec<f64> {
    const CUTOFF: f64 = 1e-18;
    let n_old = nodes.len();
    let dv = (nodes[1] - nodes[0]) * sp / sd;
    let v0 = nodes[0] * sp / sd;
    let g = libm::exp(-dv * dv);
    let scale = sk / (sd * SQRT_2PI);

    grid.nodes
        .iter()
        .map(|&z| {
            let uj = (z * sk - shift) / sd;
            let i0 = (libm::round((uj - v0) / dv) as i64).clamp(0, n_old as i64 - 1) as usize;
            let q0 = uj - (v0 + i0 as f64 * dv);
            let p0 = libm::exp(-0.5 * q0 * q0);
            let mut acc = p0 * mass[i0];
            // Walk toward smaller i: q grows by dv each step.
            let mut val = p0;
            let mut ratio = libm::exp(-q0 * dv - 0.5 * dv * dv);
            for i in (0..i0).rev() {
                val *= ratio;
                ratio *= g;
                if val < CUTOFF {
                    break;
                }
                acc += val * mass[i];
            }
            // Walk toward larger i: q shrinks by dv each step.
            val = p0;
            ratio = libm::exp(q0 * dv - 0.5 * dv * dv);
            for i in i0 + 1..n_old {
                val *= ratio;
                ratio *= g;
                if val < CUTOFF {
                    break;
                }
                acc += val * mass[i];
            }
            acc * scale
        })
        .zip(&grid.weights)
        .map(|(f, &w)| f * w)
        .collect()
}
