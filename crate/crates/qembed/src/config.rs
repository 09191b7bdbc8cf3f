//! Experiment configuration: TOML file plus command-line overrides.

use crate::error::{QembedError, Result};
use crate::observables::HistogramSpec;
use crate::qparam::{EnsembleKind, SystemSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qtable,
    Density,
    Ldos,
    Survival,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Qtable => "qtable",
            Mode::Density => "density",
            Mode::Ldos => "ldos",
            Mode::Survival => "survival",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = QembedError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(QembedError::Config(format!(
                "unknown output format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// Row specification for the qtable command: every k from 1 to m for each
/// (kind, N, m) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QtableSection {
    pub kinds: Vec<EnsembleKind>,
    /// (N, m) pairs.
    pub systems: Vec<(u32, u32)>,
}

impl Default for QtableSection {
    fn default() -> Self {
        QtableSection {
            kinds: vec![EnsembleKind::Fegoe, EnsembleKind::Fegue],
            systems: vec![(12, 6), (20, 8), (50, 10)],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Optional; when present it must agree with the chosen subcommand.
    pub mode: Option<Mode>,
    pub kind: EnsembleKind,
    pub n_sp: u32,
    pub m: u32,
    pub k: u32,
    pub members: usize,
    pub lambda: f64,
    /// LDOS window half-width around the standardized center.
    pub delta: f64,
    /// Survival-probability window: qualifying states satisfy |e_b| <= delta1.
    pub delta1: f64,
    pub bins: usize,
    pub hist_lo: f64,
    pub hist_hi: f64,
    pub time_max: f64,
    pub time_steps: usize,
    /// Number of abscissa points for emitted theory curves.
    pub theory_points: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// 0 means use all available cores.
    pub workers: usize,
    /// Density mode only: include h(1) + lambda V(k) instead of the pure
    /// interaction. LDOS and survival always use the quench Hamiltonian.
    pub include_mean_field: bool,
    pub qtable: QtableSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: None,
            kind: EnsembleKind::Fegoe,
            n_sp: 12,
            m: 6,
            k: 2,
            members: 1000,
            lambda: 0.5,
            delta: 0.2,
            delta1: 0.01,
            bins: 50,
            hist_lo: -3.0,
            hist_hi: 3.0,
            time_max: 5.0,
            time_steps: 500,
            theory_points: 201,
            seed: 1,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            workers: 0,
            include_mean_field: false,
            qtable: QtableSection::default(),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub members: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            QembedError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| QembedError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(s) = overrides.seed {
            self.seed = s;
        }
        if let Some(m) = overrides.members {
            self.members = m;
        }
        if let Some(o) = &overrides.out {
            self.out_dir = o.clone();
        }
        if let Some(f) = overrides.format {
            self.format = f;
        }
        if let Some(w) = overrides.workers {
            self.workers = w;
        }
    }

    pub fn system(&self) -> Result<SystemSpec> {
        SystemSpec::new(self.n_sp, self.m, self.k, self.kind)
    }

    pub fn histogram_spec(&self) -> HistogramSpec {
        HistogramSpec {
            bins: self.bins,
            lo: self.hist_lo,
            hi: self.hist_hi,
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.time_steps)
            .map(|i| i as f64 * self.time_max / self.time_steps as f64)
            .collect()
    }

    pub fn theory_grid(&self) -> Vec<f64> {
        let n = self.theory_points.max(2);
        (0..n)
            .map(|i| self.hist_lo + (self.hist_hi - self.hist_lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(QembedError::Config(format!(
                    "config sets mode = {m} but the {mode} subcommand was invoked"
                )));
            }
        }
        if mode != Mode::Qtable {
            self.system()?;
        } else {
            if self.qtable.kinds.is_empty() || self.qtable.systems.is_empty() {
                return Err(QembedError::Config(
                    "qtable requires at least one kind and one (N, m) pair".into(),
                ));
            }
        }
        if self.members < 1 {
            return Err(QembedError::Config("members must be >= 1".into()));
        }
        if self.lambda < 0.0 {
            return Err(QembedError::Config("lambda must be non-negative".into()));
        }
        if self.delta <= 0.0 || self.delta1 <= 0.0 {
            return Err(QembedError::Config("delta and delta1 must be positive".into()));
        }
        if self.bins < 1 {
            return Err(QembedError::Config("bins must be >= 1".into()));
        }
        if !(self.hist_lo < self.hist_hi) {
            return Err(QembedError::Config("hist_lo must be below hist_hi".into()));
        }
        if self.time_steps < 1 || self.time_max <= 0.0 {
            return Err(QembedError::Config(
                "time grid needs time_steps >= 1 and time_max > 0".into(),
            ));
        }
        Ok(())
    }
}
