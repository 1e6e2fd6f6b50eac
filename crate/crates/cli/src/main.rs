//! `gsd`: group sequential design reports, reference tables, case studies,
//! and Monte Carlo verification from a single configuration document.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gsd_cli::commands::{self, CaseStudy, Format, OutputOptions, Variant};
use gsd_cli::config::{self, FamilyCfg, FutilityModeCfg};
use gsd_cli::CliError;

#[derive(Parser)]
#[command(name = "gsd", version, about = "Group sequential design toolkit")]
struct Cli {
    /// Output directory for report files.
    #[arg(long, global = true, env = "GSD_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Output formats (comma separated): table, csv, json.
    #[arg(long, global = true, value_delimiter = ',', default_values = ["table", "csv", "json"])]
    format: Vec<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "haybittle-peto")]
    HaybittlePeto,
    Pocock,
    #[value(name = "obrien-fleming")]
    OBrienFleming,
}

impl From<FamilyArg> for FamilyCfg {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::HaybittlePeto => FamilyCfg::HaybittlePeto,
            FamilyArg::Pocock => FamilyCfg::Pocock,
            FamilyArg::OBrienFleming => FamilyCfg::OBrienFleming,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FutilityArg {
    None,
    Binding,
    Nonbinding,
}

impl From<FutilityArg> for FutilityModeCfg {
    fn from(f: FutilityArg) -> Self {
        match f {
            FutilityArg::None => FutilityModeCfg::None,
            FutilityArg::Binding => FutilityModeCfg::Binding,
            FutilityArg::Nonbinding => FutilityModeCfg::NonBinding,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Hypress,
    Adrenal,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Optimal,
}

#[derive(Subcommand)]
enum Command {
    /// Characterize the design described by a configuration document.
    Design {
        #[arg(long)]
        input: PathBuf,
    },
    /// Optimize the interim schedule, then characterize the optimal design.
    Optimize {
        #[arg(long)]
        input: PathBuf,
    },
    /// Regenerate the reference rate tables and inflation-factor plot data.
    Tables {
        #[arg(long, value_delimiter = ',',
              default_values = ["haybittle-peto", "pocock", "obrien-fleming"])]
        family: Vec<FamilyArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2])]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        max_stages: usize,
        #[arg(long, value_enum, default_value_t = FutilityArg::None)]
        futility: FutilityArg,
    },
    /// Regenerate a bundled case study.
    CaseStudy {
        #[arg(value_enum)]
        name: CaseArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Original)]
        variant: VariantArg,
    },
    /// Monte Carlo verification of the analytic operating characteristics.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long, default_value_t = 20_260_823)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let out = OutputOptions::new(
        cli.out.clone(),
        cli.format.iter().map(|&f| f.into()).collect(),
    )?;
    match cli.command {
        Command::Design { input } => {
            let config = config::load(&input)?;
            commands::run_design(&config, &out, "design")
        }
        Command::Optimize { input } => {
            let config = config::load(&input)?;
            commands::run_optimize(&config, &out, "optimize")
        }
        Command::Tables {
            family,
            beta,
            max_stages,
            futility,
        } => {
            let families: Vec<FamilyCfg> = family.into_iter().map(Into::into).collect();
            commands::run_tables(&families, &beta, max_stages, futility.into(), &out)
        }
        Command::CaseStudy { name, variant } => commands::run_case_study(
            match name {
                CaseArg::Hypress => CaseStudy::Hypress,
                CaseArg::Adrenal => CaseStudy::Adrenal,
            },
            match variant {
                VariantArg::Original => Variant::Original,
                VariantArg::Optimal => Variant::Optimal,
            },
            &out,
        ),
        Command::Verify { input, paths, seed } => {
            let config = config::load(&input)?;
            commands::run_verify(&config, paths, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
