//! Report assembly and emission. The JSON report embeds the resolved input
//! configuration, so a report file can be fed straight back in as an input.
//! All rounding happens here, at emission time.

use serde::{Deserialize, Serialize};

use gsd_core::design::{characterize, DesignSpec, OperatingCharacteristics};

use crate::config::Config;
use crate::{CliError, Result};

/// Version of the CSV/JSON column and field layout; bump on any change.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of the stage-table CSV. Pinned by golden-file tests.
pub const STAGE_CSV_HEADER: &str =
    "stage,rate,n,u_k,l_k,eff_h0,fut_h0,eff_mid,fut_mid,eff_h1,fut_h1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub rate: f64,
    pub n: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    pub efficacy_h0: f64,
    pub futility_h0: f64,
    pub efficacy_mid: f64,
    pub futility_mid: f64,
    pub efficacy_h1: f64,
    pub futility_h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssSummary {
    pub h0: f64,
    pub mid: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inflation {
    pub mif: f64,
    pub eif_h0: f64,
    pub eif_mid: f64,
    pub eif_h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// The resolved input; reading this back as a configuration reproduces
    /// the identical report.
    pub input: Config,
    pub drift: f64,
    pub n_fixed: f64,
    pub n_max: f64,
    pub type_i_error: f64,
    pub type_i_error_attained: f64,
    pub ess: EssSummary,
    pub inflation: Inflation,
    pub stages: Vec<StageRow>,
}

pub fn build_report(config: &Config) -> Result<Report> {
    let spec = DesignSpec {
        rules: config.rules()?,
        endpoint: config.endpoint_spec()?,
        rates: config.rates()?,
    };
    let oc = characterize(&spec).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(assemble(config, &spec, &oc))
}

fn assemble(config: &Config, spec: &DesignSpec, oc: &OperatingCharacteristics) -> Report {
    let stages = (0..spec.stages())
        .map(|k| StageRow {
            stage: k + 1,
            rate: spec.rates.get(k),
            n: oc.n_per_stage[k],
            upper: oc.boundaries.upper[k],
            lower: oc.boundaries.lower.as_ref().map(|l| l[k]),
            efficacy_h0: oc.exit_h0.efficacy[k],
            futility_h0: oc.exit_h0.futility[k],
            efficacy_mid: oc.exit_mid.efficacy[k],
            futility_mid: oc.exit_mid.futility[k],
            efficacy_h1: oc.exit_h1.efficacy[k],
            futility_h1: oc.exit_h1.futility[k],
        })
        .collect();
    Report {
        schema_version: SCHEMA_VERSION,
        input: config.clone(),
        drift: oc.drift,
        n_fixed: oc.n_fixed,
        n_max: oc.n_max,
        type_i_error: oc.type_i_error,
        type_i_error_attained: oc.type_i_error_attained,
        ess: EssSummary {
            h0: oc.ess_h0,
            mid: oc.ess_mid,
            h1: oc.ess_h1,
        },
        inflation: Inflation {
            mif: oc.mif,
            eif_h0: oc.eif_h0,
            eif_mid: oc.eif_mid,
            eif_h1: oc.eif_h1,
        },
        stages,
    }
}

/// Stage table as CSV, one row per analysis.
pub fn stage_csv(report: &Report) -> String {
    let mut out = String::from(STAGE_CSV_HEADER);
    out.push('\n');
    for row in &report.stages {
        let lower = row
            .lower
            .map(|l| format!("{l:.6}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{:.6},{:.4},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            row.stage,
            row.rate,
            row.n,
            row.upper,
            lower,
            row.efficacy_h0,
            row.futility_h0,
            row.efficacy_mid,
            row.futility_mid,
            row.efficacy_h1,
            row.futility_h1,
        ));
    }
    out
}

/// Full nested report as pretty JSON.
pub fn report_json(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Human-readable report table.
pub fn human_table(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Group sequential design: {} analyses\n",
        report.stages.len()
    ));
    out.push_str(&format!(
        "drift {:.4}   N_fixed {:.1}   MSS {:.1}   type I {:.4} (attained {:.4})\n\n",
        report.drift, report.n_fixed, report.n_max, report.type_i_error,
        report.type_i_error_attained,
    ));
    out.push_str(
        "stage   rate      n        u_k      l_k      eff(H0)  eff(mid) eff(H1)  fut(H0)  fut(mid) fut(H1)\n",
    );
    for row in &report.stages {
        let lower = row
            .lower
            .map(|l| format!("{l:8.3}"))
            .unwrap_or_else(|| "       -".into());
        out.push_str(&format!(
            "{:>5}   {:5.3}  {:8.1}  {:7.3}  {lower} {:8.4} {:8.4} {:8.4} {:8.4} {:8.4} {:8.4}\n",
            row.stage,
            row.rate,
            row.n,
            row.upper,
            row.efficacy_h0,
            row.efficacy_mid,
            row.efficacy_h1,
            row.futility_h0,
            row.futility_mid,
            row.futility_h1,
        ));
    }
    out.push_str(&format!(
        "\nESS under H0 {:.1}   under H0/H1 {:.1}   under H1 {:.1}\n",
        report.ess.h0, report.ess.mid, report.ess.h1
    ));
    out.push_str(&format!(
        "inflation: MIF {:.4}   EIF(H0) {:.4}   EIF(H0/H1) {:.4}   EIF(H1) {:.4}\n",
        report.inflation.mif,
        report.inflation.eif_h0,
        report.inflation.eif_mid,
        report.inflation.eif_h1
    ));
    out
}
