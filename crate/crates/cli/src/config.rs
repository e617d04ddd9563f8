//! Run configuration for `leafadv attack`.
//!
//! ```toml
//! output_dir = "out"
//!
//! [classifier]
//! kind = "weights"            # or "stub"
//! path = "model.lcnn"
//!
//! [attack]                    # any AttackConfig field; defaults otherwise
//! grid_stride = 4
//!
//! [edge]                      # any EdgeParams field
//! sigma = 1.4
//!
//! [[signs]]
//! name = "Stop"
//! image = "stop.png"
//! mask = "stop_mask.pgm"
//! label = "Stop"              # class name or index
//!
//! [[leaves]]
//! species = "maple"
//! image = "maple.png"
//! mask = "maple_mask.pgm"     # optional; generated when absent
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use leafadv::attack::AttackConfig;
use leafadv::classifier::StubRule;
use leafadv::maskgen::EdgeParams;
use leafadv::raster::LeafSpecies;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSource {
    /// `LCNN` binary or JSON weights file.
    Weights { path: PathBuf },
    /// Mean-intensity rule evaluated over each sign's own mask.
    Stub(StubRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    pub name: String,
    pub image: PathBuf,
    pub mask: PathBuf,
    pub label: LabelRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafEntry {
    pub species: LeafSpecies,
    pub image: PathBuf,
    #[serde(default)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub classifier: ClassifierSource,
    #[serde(default)]
    pub attack: AttackConfig,
    /// Overrides `attack.edge` when given.
    #[serde(default)]
    pub edge: Option<EdgeParams>,
    pub signs: Vec<SignEntry>,
    pub leaves: Vec<LeafEntry>,
}

impl RunConfig {
    /// Parses, resolves relative paths and checks that every input exists.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let ClassifierSource::Weights { path } = &mut self.classifier {
            fix(path);
        }
        for s in &mut self.signs {
            fix(&mut s.image);
            fix(&mut s.mask);
        }
        for l in &mut self.leaves {
            fix(&mut l.image);
            if let Some(m) = &mut l.mask {
                fix(m);
            }
        }
        if let Some(edge) = self.edge.take() {
            self.attack.edge = edge;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.attack.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.signs.is_empty() || self.leaves.is_empty() {
            return Err(CliError::Config("at least one sign and one leaf are required".into()));
        }
        let mut files: Vec<&Path> = Vec::new();
        for s in &self.signs {
            files.push(&s.image);
            files.push(&s.mask);
        }
        for l in &self.leaves {
            files.push(&l.image);
            if let Some(m) = &l.mask {
                files.push(m);
            }
        }
        if let Some(missing) = files.into_iter().find(|p| !p.is_file()) {
            return Err(CliError::Config(format!("input file not found: {}", missing.display())));
        }
        let mut names: Vec<String> = self.signs.iter().map(|s| crate::slug(&s.name)).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("sign names must be distinct".into()));
        }
        Ok(())
    }

    pub fn edge(&self) -> &EdgeParams {
        &self.attack.edge
    }
}
