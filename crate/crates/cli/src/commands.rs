//! Subcommand implementations. Each returns the list of files written so the
//! binary (and tests) can report them.

use std::fs;
use std::path::{Path, PathBuf};

use gsd_core::boundaries::Sidedness;
use gsd_core::design::{characterize, expected_sample_size, DesignSpec};
use gsd_core::gauss::{propagate, StageDistribution};
use gsd_core::optimizer::{optimize_rates, OptimConfig};
use gsd_core::oracle::{mc_exit_probabilities, mc_expected_sample_size, SimConfig};
use gsd_core::InformationRates;

use crate::config::{
    Config, FamilyCfg, FutilityModeCfg, FutilitySection, ScheduleSection, SpendingSection,
};
use crate::report::{build_report, human_table, report_json, stage_csv, Report};
use crate::{CliError, Result};

/// Output formats for report-producing commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl OutputOptions {
    pub fn new(out_dir: impl Into<PathBuf>, formats: Vec<Format>) -> Result<Self> {
        if formats.is_empty() {
            return Err(CliError::Schema("at least one output format required".into()));
        }
        Ok(Self {
            out_dir: out_dir.into(),
            formats,
        })
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn write_report(report: &Report, out: &OutputOptions, stem: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for format in &out.formats {
        let (name, contents) = match format {
            Format::Table => (format!("{stem}.txt"), human_table(report)),
            Format::Csv => (format!("{stem}.csv"), stage_csv(report)),
            Format::Json => (format!("{stem}.json"), report_json(report)),
        };
        written.push(write_file(&out.out_dir, &name, &contents)?);
    }
    Ok(written)
}

/// `design`: characterize the configured schedule.
pub fn run_design(config: &Config, out: &OutputOptions, stem: &str) -> Result<Vec<PathBuf>> {
    let report = build_report(config)?;
    write_report(&report, out, stem)
}

/// `optimize`: find the ESS(H1)-minimizing schedule for the configured number
/// of analyses, then report the design at that schedule.
pub fn run_optimize(config: &Config, out: &OutputOptions, stem: &str) -> Result<Vec<PathBuf>> {
    let report = optimized_report(config)?;
    write_report(&report, out, stem)
}

fn optimized_report(config: &Config) -> Result<Report> {
    let rules = config.rules()?;
    let stages = config.stages()?;
    let result = optimize_rates(&rules, stages, &OptimConfig::for_stages(stages))
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let mut optimized = config.clone();
    optimized.schedule = ScheduleSection {
        rates: Some(result.rates.as_slice().to_vec()),
        stages: None,
    };
    build_report(&optimized)
}

/// Long-format CSV header for the reference tables. Pinned by golden tests.
pub const TABLES_CSV_HEADER: &str = "family,beta,stages,schedule_kind,metric,value";

fn family_label(family: FamilyCfg) -> &'static str {
    match family {
        FamilyCfg::HaybittlePeto => "haybittle-peto",
        FamilyCfg::Pocock => "pocock",
        FamilyCfg::OBrienFleming => "obrien-fleming",
        FamilyCfg::KimDeMets => "kim-demets",
        FamilyCfg::HwangShihDeCani => "hwang-shih-decani",
        FamilyCfg::Custom => "custom",
    }
}

/// Reference-design configuration used by `tables`: one-sided alpha 0.025
/// with a unit-variance continuous endpoint (the emitted quantities are all
/// scale-free, so the endpoint choice is immaterial).
fn tables_config(
    family: FamilyCfg,
    beta: f64,
    futility: FutilityModeCfg,
    rates: Vec<f64>,
) -> Config {
    use crate::config::{DesignSection, EndpointKindCfg, EndpointSection, SidednessCfg};
    // Haybittle-Peto is an efficacy rule only; its futility companion uses
    // O'Brien-Fleming beta-spending.
    let futility_family = match family {
        FamilyCfg::HaybittlePeto => FamilyCfg::OBrienFleming,
        other => other,
    };
    Config {
        design: DesignSection {
            alpha: 0.025,
            beta,
            sidedness: SidednessCfg::OneSided,
        },
        boundary: SpendingSection {
            family,
            rho: None,
            gamma: None,
            table: None,
        },
        futility: match futility {
            FutilityModeCfg::None => None,
            mode => Some(FutilitySection {
                mode,
                spending: Some(SpendingSection {
                    family: futility_family,
                    rho: None,
                    gamma: None,
                    table: None,
                }),
            }),
        },
        endpoint: EndpointSection {
            kind: EndpointKindCfg::Continuous,
            p_control: None,
            p_treatment: None,
            delta: Some(0.5),
            sigma: Some(1.0),
            allocation_ratio: 1.0,
        },
        schedule: ScheduleSection {
            rates: Some(rates),
            stages: None,
        },
    }
}

/// `tables`: for each (family, beta, K) cell, optimize the schedule and
/// characterize both the optimal and the equally spaced design. Emits the
/// rate table in the paper's layout plus a long-format CSV of the inflation
/// factors. Solver failures annotate the cell and processing continues.
pub fn run_tables(
    families: &[FamilyCfg],
    betas: &[f64],
    max_stages: usize,
    futility: FutilityModeCfg,
    out: &OutputOptions,
) -> Result<Vec<PathBuf>> {
    if max_stages < 1 || max_stages > 9 {
        return Err(CliError::Schema("max-stages must lie in 1..=9".into()));
    }
    if families.is_empty() || betas.is_empty() {
        return Err(CliError::Schema("at least one family and beta required".into()));
    }
    let mut written = Vec::new();
    let mut long_csv = String::from(TABLES_CSV_HEADER);
    long_csv.push('\n');

    for &family in families {
        let label = family_label(family);
        let mut text = format!(
            "Optimal information rates (%) - {label} design, one-sided alpha 0.025\n"
        );
        for &beta in betas {
            text.push_str(&format!("\nbeta = {beta}\n"));
            for stages in 1..=max_stages {
                let rules = match tables_config(family, beta, futility, vec![1.0]).rules() {
                    Ok(r) => r,
                    Err(e) => {
                        text.push_str(&format!("K={stages}: error: {e}\n"));
                        continue;
                    }
                };
                let optimal = match optimize_rates(
                    &rules,
                    stages,
                    &OptimConfig::for_stages(stages),
                ) {
                    Ok(r) => r,
                    Err(e) => {
                        text.push_str(&format!("K={stages}: solver error: {e}\n"));
                        continue;
                    }
                };
                let row: Vec<String> = optimal
                    .rates
                    .as_slice()
                    .iter()
                    .map(|t| format!("{:5.1}", 100.0 * t))
                    .collect();
                text.push_str(&format!("K={stages}: {}\n", row.join(" ")));

                for (kind, rates) in [
                    ("optimal", optimal.rates.clone()),
                    ("equal", InformationRates::equal_spacing(stages)),
                ] {
                    let config = tables_config(
                        family,
                        beta,
                        futility,
                        rates.as_slice().to_vec(),
                    );
                    match build_report(&config) {
                        Ok(report) => {
                            for (metric, value) in [
                                ("mif", report.inflation.mif),
                                ("eif_h0", report.inflation.eif_h0),
                                ("eif_mid", report.inflation.eif_mid),
                                ("eif_h1", report.inflation.eif_h1),
                            ] {
                                long_csv.push_str(&format!(
                                    "{label},{beta},{stages},{kind},{metric},{value:.6}\n"
                                ));
                            }
                        }
                        Err(e) => {
                            text.push_str(&format!("K={stages} ({kind}): solver error: {e}\n"));
                        }
                    }
                }
            }
        }
        written.push(write_file(&out.out_dir, &format!("tables-rates-{label}.txt"), &text)?);
    }
    written.push(write_file(&out.out_dir, "tables-long.csv", &long_csv)?);
    Ok(written)
}

pub const HYPRESS_PRESET: &str = include_str!("../presets/hypress.toml");
pub const ADRENAL_PRESET: &str = include_str!("../presets/adrenal.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStudy {
    Hypress,
    Adrenal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Original,
    Optimal,
}

/// `case-study`: regenerate a bundled trial redesign in either its original
/// or optimally rescheduled form.
pub fn run_case_study(
    name: CaseStudy,
    variant: Variant,
    out: &OutputOptions,
) -> Result<Vec<PathBuf>> {
    let (preset, study) = match name {
        CaseStudy::Hypress => (HYPRESS_PRESET, "hypress"),
        CaseStudy::Adrenal => (ADRENAL_PRESET, "adrenal"),
    };
    let config = crate::config::parse_toml(preset)?;
    match variant {
        Variant::Original => {
            let report = build_report(&config)?;
            write_report(&report, out, &format!("{study}-original"))
        }
        Variant::Optimal => {
            let mut base = config;
            base.schedule = ScheduleSection {
                rates: None,
                stages: Some(base.stages()?),
            };
            let report = optimized_report(&base)?;
            write_report(&report, out, &format!("{study}-optimal"))
        }
    }
}

/// Comparison CSV header for `verify`. Pinned by golden tests.
pub const VERIFY_CSV_HEADER: &str = "hypothesis,stage,quantity,analytic,mc,mc_se,z";

/// `verify`: Monte Carlo check of the analytic exit probabilities and ESS
/// under H0 and H1 for the configured design.
pub fn run_verify(
    config: &Config,
    paths: u64,
    seed: u64,
    out: &OutputOptions,
) -> Result<Vec<PathBuf>> {
    let spec = DesignSpec {
        rules: config.rules()?,
        endpoint: config.endpoint_spec()?,
        rates: config.rates()?,
    };
    let oc = characterize(&spec).map_err(|e| CliError::Solver(e.to_string()))?;
    let two_sided = spec.rules.boundary.sidedness == Sidedness::TwoSidedSymmetric;
    let sim = SimConfig::new(paths, seed).map_err(|e| CliError::Schema(e.to_string()))?;

    let mut csv = String::from(VERIFY_CSV_HEADER);
    csv.push('\n');
    let mut max_abs_z = 0.0f64;
    for (hypothesis, drift) in [("h0", 0.0), ("h1", oc.drift)] {
        let dist = StageDistribution::new(spec.rates.clone(), drift)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let regions = oc
            .boundaries
            .regions(spec.rules.boundary.sidedness, true)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let analytic = propagate(&dist, &regions).map_err(|e| CliError::Solver(e.to_string()))?;
        let mc = mc_exit_probabilities(&dist, &oc.boundaries, two_sided, &sim)
            .map_err(|e| CliError::Solver(e.to_string()))?;

        let mut push = |stage: usize, quantity: &str, a: f64, m: f64, se: f64| {
            let z = if se > 0.0 { (m - a) / se } else { 0.0 };
            max_abs_z = max_abs_z.max(z.abs());
            csv.push_str(&format!(
                "{hypothesis},{stage},{quantity},{a:.6},{m:.6},{se:.6},{z:.3}\n"
            ));
        };
        for k in 0..spec.stages() {
            push(
                k + 1,
                "efficacy",
                analytic.efficacy[k],
                mc.probabilities.efficacy[k],
                mc.efficacy_se[k],
            );
            if oc.boundaries.lower.is_some() && k < spec.stages() - 1 {
                push(
                    k + 1,
                    "futility",
                    analytic.futility[k],
                    mc.probabilities.futility[k],
                    mc.futility_se[k],
                );
            }
        }
        let ess_analytic = expected_sample_size(&oc.n_per_stage, &analytic);
        let ess_mc = mc_expected_sample_size(&mc, &oc.n_per_stage, &sim)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        push(0, "ess", ess_analytic, ess_mc.estimate, ess_mc.standard_error);
    }

    let summary = format!(
        "verify: {paths} paths, seed {seed}\nmax |z| over all comparisons: {max_abs_z:.3}\n"
    );
    let mut written = Vec::new();
    written.push(write_file(&out.out_dir, "verify.csv", &csv)?);
    written.push(write_file(&out.out_dir, "verify.txt", &summary)?);
    Ok(written)
}
