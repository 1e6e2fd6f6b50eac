//! The published configuration schema: a single structured document (TOML,
//! or the `input` section of a previously emitted JSON report) describing one
//! group sequential design.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use gsd_core::boundaries::{BoundaryRule, FutilityMode, FutilityRule, Sidedness, SpendingFamily};
use gsd_core::design::{Endpoint, EndpointSpec, TrialRules};
use gsd_core::InformationRates;

use crate::{CliError, Result};

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub design: DesignSection,
    pub boundary: SpendingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub futility: Option<FutilitySection>,
    pub endpoint: EndpointSection,
    pub schedule: ScheduleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub alpha: f64,
    pub beta: f64,
    pub sidedness: SidednessCfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SidednessCfg {
    #[serde(rename = "one-sided")]
    OneSided,
    #[serde(rename = "two-sided")]
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyCfg {
    #[serde(rename = "haybittle-peto")]
    HaybittlePeto,
    #[serde(rename = "pocock")]
    Pocock,
    #[serde(rename = "obrien-fleming")]
    OBrienFleming,
    #[serde(rename = "kim-demets")]
    KimDeMets,
    #[serde(rename = "hwang-shih-decani")]
    HwangShihDeCani,
    #[serde(rename = "custom")]
    Custom,
}

/// A spending-function selection with its family-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpendingSection {
    pub family: FamilyCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Piecewise-linear spending table as `[t, cumulative fraction]` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

impl SpendingSection {
    pub fn to_core(&self, context: &str) -> Result<SpendingFamily> {
        let family = match self.family {
            FamilyCfg::HaybittlePeto => SpendingFamily::HaybittlePeto,
            FamilyCfg::Pocock => SpendingFamily::Pocock,
            FamilyCfg::OBrienFleming => SpendingFamily::OBrienFleming,
            FamilyCfg::KimDeMets => SpendingFamily::KimDeMets {
                rho: self
                    .rho
                    .ok_or_else(|| schema(format!("{context}.rho: required for kim-demets")))?,
            },
            FamilyCfg::HwangShihDeCani => SpendingFamily::HwangShihDeCani {
                gamma: self.gamma.ok_or_else(|| {
                    schema(format!("{context}.gamma: required for hwang-shih-decani"))
                })?,
            },
            FamilyCfg::Custom => SpendingFamily::Custom(
                self.table
                    .clone()
                    .ok_or_else(|| schema(format!("{context}.table: required for custom")))?
                    .into_iter()
                    .map(|[t, f]| (t, f))
                    .collect(),
            ),
        };
        for (name, value) in [("rho", self.rho), ("gamma", self.gamma)] {
            let allowed = matches!(
                (name, self.family),
                ("rho", FamilyCfg::KimDeMets) | ("gamma", FamilyCfg::HwangShihDeCani)
            );
            if value.is_some() && !allowed {
                return Err(schema(format!(
                    "{context}.{name}: not allowed for this family"
                )));
            }
        }
        if self.table.is_some() && self.family != FamilyCfg::Custom {
            return Err(schema(format!(
                "{context}.table: not allowed for this family"
            )));
        }
        family
            .validate()
            .map_err(|e| schema(format!("{context}: {e}")))?;
        Ok(family)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FutilitySection {
    pub mode: FutilityModeCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spending: Option<SpendingSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FutilityModeCfg {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "binding")]
    Binding,
    #[serde(rename = "nonbinding")]
    NonBinding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSection {
    pub kind: EndpointKindCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_control: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_treatment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default = "default_allocation")]
    pub allocation_ratio: f64,
}

fn default_allocation() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKindCfg {
    #[serde(rename = "binary")]
    Binary,
    #[serde(rename = "continuous")]
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Full schedule of information rates ending at 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    /// Number of analyses; used by `optimize` and as equal spacing by `design`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
}

impl Config {
    pub fn rules(&self) -> Result<TrialRules> {
        let sidedness = match self.design.sidedness {
            SidednessCfg::OneSided => Sidedness::OneSided,
            SidednessCfg::TwoSided => Sidedness::TwoSidedSymmetric,
        };
        let boundary = BoundaryRule::new(self.boundary.to_core("boundary")?, sidedness)
            .map_err(|e| schema(format!("boundary: {e}")))?;
        let futility = match &self.futility {
            None
            | Some(FutilitySection {
                mode: FutilityModeCfg::None,
                ..
            }) => FutilityRule::none(),
            Some(section) => {
                let mode = match section.mode {
                    FutilityModeCfg::Binding => FutilityMode::Binding,
                    FutilityModeCfg::NonBinding => FutilityMode::NonBinding,
                    FutilityModeCfg::None => unreachable!(),
                };
                let spending = section
                    .spending
                    .as_ref()
                    .ok_or_else(|| schema("futility.spending: required when mode is not none"))?
                    .to_core("futility.spending")?;
                FutilityRule::new(mode, Some(spending))
                    .map_err(|e| schema(format!("futility: {e}")))?
            }
        };
        TrialRules::new(self.design.alpha, self.design.beta, boundary, futility)
            .map_err(|e| schema(format!("design: {e}")))
    }

    pub fn endpoint_spec(&self) -> Result<EndpointSpec> {
        let e = &self.endpoint;
        let endpoint = match e.kind {
            EndpointKindCfg::Binary => {
                if e.delta.is_some() || e.sigma.is_some() {
                    return Err(schema("endpoint: delta/sigma not allowed for binary"));
                }
                Endpoint::Binary {
                    p_control: e
                        .p_control
                        .ok_or_else(|| schema("endpoint.p_control: required for binary"))?,
                    p_treatment: e
                        .p_treatment
                        .ok_or_else(|| schema("endpoint.p_treatment: required for binary"))?,
                }
            }
            EndpointKindCfg::Continuous => {
                if e.p_control.is_some() || e.p_treatment.is_some() {
                    return Err(schema(
                        "endpoint: p_control/p_treatment not allowed for continuous",
                    ));
                }
                Endpoint::Continuous {
                    delta_star: e
                        .delta
                        .ok_or_else(|| schema("endpoint.delta: required for continuous"))?,
                    sigma: e
                        .sigma
                        .ok_or_else(|| schema("endpoint.sigma: required for continuous"))?,
                }
            }
        };
        EndpointSpec::new(endpoint, e.allocation_ratio)
            .map_err(|e| schema(format!("endpoint: {e}")))
    }

    pub fn rates(&self) -> Result<InformationRates> {
        match (&self.schedule.rates, self.schedule.stages) {
            (Some(rates), _) => InformationRates::new(rates.clone())
                .map_err(|e| schema(format!("schedule.rates: {e}"))),
            (None, Some(stages)) if stages >= 1 => Ok(InformationRates::equal_spacing(stages)),
            _ => Err(schema("schedule: either rates or stages >= 1 is required")),
        }
    }

    pub fn stages(&self) -> Result<usize> {
        match (self.schedule.stages, &self.schedule.rates) {
            (Some(stages), _) if stages >= 1 => Ok(stages),
            (None, Some(rates)) if !rates.is_empty() => Ok(rates.len()),
            _ => Err(schema("schedule: either rates or stages >= 1 is required")),
        }
    }

    /// Full validation pass: every section converts to its engine type.
    pub fn validate(&self) -> Result<()> {
        self.rules()?;
        self.endpoint_spec()?;
        self.rates()?;
        Ok(())
    }
}

/// Parses a configuration document from TOML text.
pub fn parse_toml(text: &str) -> Result<Config> {
    let config: Config =
        toml::from_str(text).map_err(|e| schema(format!("config parse error: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Loads a configuration from a file: TOML by default; `.json` files may be
/// either a bare configuration or a full report (its `input` section is used),
/// which makes emitted reports round-trip as inputs.
pub fn load(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path)
        .map_err(|e| schema(format!("{}: {e}", path.display())))?;
    if path.extension().map(|x| x == "json").unwrap_or(false) {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| schema(format!("{}: {e}", path.display())))?;
        let config_value = value.get("input").cloned().unwrap_or(value);
        let config: Config = serde_json::from_value(config_value)
            .map_err(|e| schema(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    } else {
        parse_toml(&text).map_err(|e| match e {
            CliError::Schema(msg) => schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
