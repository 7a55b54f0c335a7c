//! `pkgaudit` — audit a package-registry metadata snapshot for
//! supply-chain risk.
//!
//! Exit codes: 0 = ran clean, 1 = findings present (offensive squat
//! candidates, license violations, scanner flags, or non-empty advisory
//! exposure), 2 = usage or I/O error.

mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pkgaudit_core::advisories::AdvisorySet;
use pkgaudit_core::depgraph::Metric;
use pkgaudit_core::{
    load_advisories, load_snapshot, LicenseAliases, LicenseId, LoadOptions, LoadReport,
    ScanConfig, ScanWeights, Snapshot, SquatConfig,
};

#[derive(Parser)]
#[command(
    name = "pkgaudit",
    version,
    about = "Supply-chain risk audits over package registry snapshots",
    arg_required_else_help = true
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Snapshot file: newline-delimited JSON, one package per line.
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,

    /// Advisory file: newline-delimited JSON advisories.
    #[arg(long, global = true)]
    advisories: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Traversal depth bound for graph metrics; "none" removes the bound.
    #[arg(long, global = true, default_value = "5")]
    depth: DepthArg,

    /// Maximum edit distance for typosquat detection (1-3).
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    max_distance: u8,

    /// Reserved builtin module names, one per line (default: bundled list).
    #[arg(long, global = true)]
    builtins: Option<PathBuf>,

    /// Extra license aliases as JSON: {"alias text": "LICENSE_ID"}.
    #[arg(long, global = true)]
    license_aliases: Option<PathBuf>,

    /// Scanner risk weights as JSON: {"FLAG_KIND": weight}.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,

    /// Warning-stub phrases, one per line (default: "did you mean to install").
    #[arg(long, global = true)]
    warning_phrases: Option<PathBuf>,

    /// Abort loading on the first malformed or duplicate record.
    #[arg(long, global = true)]
    strict: bool,

    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override the snapshot date (YYYY-MM-DD; default: latest release date).
    #[arg(long, global = true)]
    snapshot_date: Option<NaiveDate>,

    /// Omit member lists larger than this from JSON output.
    #[arg(long, global = true, default_value_t = 10_000)]
    members_limit: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

/// Depth argument: a number of hops or "none" for unbounded.
#[derive(Clone, Copy)]
struct DepthArg(Option<usize>);

impl FromStr for DepthArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "inf" | "unlimited" => Ok(DepthArg(None)),
            other => other
                .parse::<usize>()
                .map(|n| DepthArg(Some(n)))
                .map_err(|_| format!("expected a number or \"none\", got {other:?}")),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Snapshot growth and composition statistics.
    Stats,
    /// Packages that depend on a package, or on a maintainer's packages.
    Reach {
        /// Package name (canonicalized before lookup).
        package: Option<String>,
        /// Query a maintainer email instead of a package.
        #[arg(long, conflicts_with = "package")]
        maintainer: Option<String>,
        /// Recompute the reach per calendar year.
        #[arg(long, conflicts_with = "maintainer")]
        series: bool,
    },
    /// Implicitly trusted packages (ITP) and maintainers (ITM).
    Trust { package: String },
    /// Rank packages or maintainers by a graph metric.
    Top {
        /// One of: package-reach, maintainer-reach, itp, itm.
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Scan the name universe for impersonation candidates.
    Squat,
    /// Scan dependency edges for license violations.
    LicenseCheck {
        /// Also propagate violations to transitive dependents.
        #[arg(long)]
        transitive: bool,
    },
    /// Join the advisory file: listing, timeline, exposure or patch lag.
    Advisories {
        /// Restrict to one package (timeline view unless combined).
        #[arg(long)]
        package: Option<String>,
        /// Compute exposure sets through the dependency graph.
        #[arg(long)]
        exposure: bool,
        /// Compute patch lag of direct dependents.
        #[arg(long, conflicts_with = "exposure")]
        lag: bool,
    },
    /// Scan setup scripts under a path for install-time risk indicators.
    ScanSetup { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

struct Context {
    globals: GlobalArgs,
    squat_config: SquatConfig,
    scan_config: ScanConfig,
    aliases: LicenseAliases,
}

impl Context {
    fn depth(&self) -> Option<usize> {
        self.globals.depth.0
    }

    fn load_snapshot(&self) -> Result<(Snapshot, LoadReport), AnyError> {
        let path = self
            .globals
            .snapshot
            .as_ref()
            .ok_or("--snapshot is required for this command")?;
        let options = LoadOptions {
            strict: self.globals.strict,
            snapshot_date: self.globals.snapshot_date,
        };
        Ok(load_snapshot(path, &options)?)
    }

    fn load_advisories(&self, snapshot: &Snapshot) -> Result<AdvisorySet, AnyError> {
        let path = self
            .globals
            .advisories
            .as_ref()
            .ok_or("--advisories is required for this command")?;
        Ok(load_advisories(path, snapshot, self.globals.strict)?)
    }
}

fn read_lines(path: &PathBuf) -> Result<Vec<String>, AnyError> {
    Ok(std::fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn build_context(globals: GlobalArgs) -> Result<Context, AnyError> {
    if let Some(threads) = globals.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }

    let mut squat_config = SquatConfig {
        max_distance: globals.max_distance as usize,
        ..SquatConfig::default()
    };
    if let Some(path) = &globals.builtins {
        squat_config.reserved_builtins = read_lines(path)?;
    }
    if let Some(path) = &globals.warning_phrases {
        squat_config.warning_phrases = read_lines(path)?;
    }

    let mut scan_config = ScanConfig::default();
    if let Some(path) = &globals.weights {
        let text = std::fs::read_to_string(path)?;
        scan_config.weights = serde_json::from_str::<ScanWeights>(&text)?;
    }

    let aliases = match &globals.license_aliases {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let raw: BTreeMap<String, String> = serde_json::from_str(&text)?;
            let mut entries = Vec::new();
            for (alias, id) in raw {
                let id = LicenseId::from_name(&id)
                    .ok_or_else(|| format!("unknown license id {id:?} in {path:?}"))?;
                entries.push((alias, id));
            }
            LicenseAliases::new(entries)
        }
        None => LicenseAliases::default(),
    };

    Ok(Context {
        globals,
        squat_config,
        scan_config,
        aliases,
    })
}

fn run(cli: Cli) -> Result<ExitCode, AnyError> {
    let ctx = build_context(cli.globals)?;
    let findings = match cli.command {
        Command::Stats => output::stats(&ctx)?,
        Command::Reach {
            package,
            maintainer,
            series,
        } => output::reach(&ctx, package, maintainer, series)?,
        Command::Trust { package } => output::trust(&ctx, &package)?,
        Command::Top { metric, k } => {
            let metric = Metric::from_str(&metric).map_err(AnyError::from)?;
            if k == 0 {
                return Err("--k must be at least 1".into());
            }
            output::top(&ctx, metric, k)?
        }
        Command::Squat => output::squat(&ctx)?,
        Command::LicenseCheck { transitive } => output::license_check(&ctx, transitive)?,
        Command::Advisories {
            package,
            exposure,
            lag,
        } => output::advisories(&ctx, package, exposure, lag)?,
        Command::ScanSetup { path } => output::scan_setup(&ctx, &path)?,
    };
    Ok(ExitCode::from(u8::from(findings)))
}
