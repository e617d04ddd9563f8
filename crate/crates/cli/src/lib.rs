//! `leafadv` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/config/I-O error, 2 leaf mask generation
//! failed, 3 classifier could not be loaded, 4 no candidate placement for any
//! (sign, leaf) pair.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use leafadv::maskgen::{EdgeParams, MaskGenError};
use thiserror::Error;

pub use commands::{
    cmd_attack, cmd_classify, cmd_compare, cmd_demo, cmd_init_model, cmd_maskgen, cmd_metrics, cmd_report,
};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Failed(String),
    #[error("{context}: {source}")]
    MaskGen {
        context: String,
        #[source]
        source: MaskGenError,
    },
    #[error("classifier: {0}")]
    ClassifierLoad(String),
    #[error("no candidate placements for any sign/leaf pair")]
    NoCandidates,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MaskGen { .. } => 2,
            CliError::ClassifierLoad(_) => 3,
            CliError::NoCandidates => 4,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn failed(e: impl std::fmt::Display) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// Lowercase file-name-safe form of a display name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

#[derive(Debug, Parser)]
#[command(name = "leafadv", version, about = "Leaf-occlusion attacks on traffic-sign classifiers, with edge forensics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for the edge pipeline; unset flags keep the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct EdgeArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub canny_low: Option<f64>,
    #[arg(long)]
    pub canny_high: Option<f64>,
    #[arg(long)]
    pub dilate_radius: Option<usize>,
    #[arg(long)]
    pub dilate_iterations: Option<usize>,
    #[arg(long)]
    pub close_radius: Option<usize>,
    /// Keep the silhouette of the dilated outline instead of shrinking it back.
    #[arg(long)]
    pub no_compensate: bool,
}

impl EdgeArgs {
    pub fn apply(&self, mut p: EdgeParams) -> EdgeParams {
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.canny_low {
            p.canny_low = v;
        }
        if let Some(v) = self.canny_high {
            p.canny_high = v;
        }
        if let Some(v) = self.dilate_radius {
            p.dilate_radius = v;
        }
        if let Some(v) = self.dilate_iterations {
            p.dilate_iterations = v;
        }
        if let Some(v) = self.close_radius {
            p.close_radius = v;
        }
        if self.no_compensate {
            p.compensate_dilation = false;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract a leaf silhouette mask and write it as PGM.
    Maskgen {
        #[arg(long)]
        image: PathBuf,
        /// Defaults to `<image stem>_mask.pgm` next to the image.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        edge: EdgeArgs,
    },
    /// Run the grid-search attack described by a TOML run config.
    Attack {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify one image.
    Classify {
        #[arg(long)]
        image: PathBuf,
        /// Weights file (LCNN binary or JSON).
        #[arg(long, conflicts_with = "config")]
        weights: Option<PathBuf>,
        /// Use the classifier of a run config (required for stub classifiers).
        #[arg(long, requires = "sign")]
        config: Option<PathBuf>,
        /// Sign entry whose mask a stub classifier should use.
        #[arg(long)]
        sign: Option<String>,
    },
    /// Edge metrics of one image.
    Metrics {
        #[arg(long)]
        image: PathBuf,
        /// Restrict edges to this mask.
        #[arg(long)]
        region: Option<PathBuf>,
        /// Row name; defaults to the image stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Average gradient angles as unit vectors instead of plain degrees.
        #[arg(long)]
        circular: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        edge: EdgeArgs,
    },
    /// Baseline-vs-adversarial comparison table with cohort averages.
    Compare {
        /// Reference fixture holding baselines and adversarial rows.
        #[arg(long, conflicts_with_all = ["base", "adv"])]
        reference: Option<PathBuf>,
        /// Baseline metrics JSON written by `metrics`.
        #[arg(long, requires = "adv")]
        base: Option<PathBuf>,
        /// Adversarial metrics JSON with its outcome, `path:S` or `path:U`.
        #[arg(long)]
        adv: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collect the per-pair attack reports of a run directory into one table.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the default network with seeded random weights.
    InitModel {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write synthetic sign and leaf assets plus a run config to try the pipeline.
    Demo {
        #[arg(long)]
        dir: PathBuf,
        /// Use a stub classifier instead of the random default network.
        #[arg(long)]
        stub: bool,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Maskgen { image, out: dest, edge } => cmd_maskgen(&image, dest.as_deref(), &edge.apply(EdgeParams::default()), out),
        Command::Attack { config } => cmd_attack(&config, out).map(|_| ()),
        Command::Classify { image, weights, config, sign } => {
            cmd_classify(&image, weights.as_deref(), config.as_deref(), sign.as_deref(), out)
        }
        Command::Metrics { image, region, name, format, circular, out: dest, edge } => cmd_metrics(
            &commands::MetricsArgs {
                image,
                region,
                name,
                format,
                circular,
                out: dest,
                params: edge.apply(EdgeParams::default()),
            },
            out,
        ),
        Command::Compare { reference, base, adv, out: dest } => {
            cmd_compare(reference.as_deref(), base.as_deref(), &adv, dest.as_deref(), out)
        }
        Command::Report { dir, out: dest } => cmd_report(&dir, dest.as_deref(), out),
        Command::InitModel { out: dest, seed } => cmd_init_model(&dest, seed, out),
        Command::Demo { dir, stub } => cmd_demo(&dir, stub, out),
    }
}
