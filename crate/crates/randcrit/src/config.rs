//! Experiment configuration shared by command-line flags and JSON files.
//!
//! A config is resolved in two steps: [`ExperimentConfig::normalized`] fills
//! per-command defaults, and [`ExperimentConfig::job`] validates the result
//! against the core preconditions. The normalized config is what gets echoed
//! into `summary.json` and hashed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use randcrit_core::ensembles::{EnsembleKind, EnsembleSpec};
use randcrit_core::grid::GridSpec;
use randcrit_core::special_geometry::{PeriodModel, Rect};
use randcrit_core::vacua::{self, AttractorOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    ZerosMc,
    RealZeros,
    Attractors,
    FluxVacua,
    FluxContinuum,
    Report,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Density => "density",
            CommandKind::ZerosMc => "zeros-mc",
            CommandKind::RealZeros => "real-zeros",
            CommandKind::Attractors => "attractors",
            CommandKind::FluxVacua => "flux-vacua",
            CommandKind::FluxContinuum => "flux-continuum",
            CommandKind::Report => "report",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleName {
    Kac,
    Kostlan,
}

impl From<EnsembleName> for EnsembleKind {
    fn from(e: EnsembleName) -> Self {
        match e {
            EnsembleName::Kac => EnsembleKind::Kac,
            EnsembleName::Kostlan => EnsembleKind::Kostlan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Cubic,
    Rigid,
}

/// Period model: kind, cubic coupling and the pairing convention tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: String,
}

pub const DEFAULT_KAPPA: f64 = 6.0;

fn default_eta() -> String {
    "standard".to_string()
}

impl ModelConfig {
    pub fn cubic(kappa: f64) -> Self {
        Self {
            kind: ModelName::Cubic,
            kappa: Some(kappa),
            eta: default_eta(),
        }
    }

    pub fn rigid() -> Self {
        Self {
            kind: ModelName::Rigid,
            kappa: None,
            eta: default_eta(),
        }
    }

    pub fn build(&self) -> Result<PeriodModel, CliError> {
        if self.eta != "standard" {
            return Err(CliError::config(format!(
                "unknown pairing convention {:?}; only \"standard\" is implemented",
                self.eta
            )));
        }
        match self.kind {
            ModelName::Cubic => Ok(PeriodModel::cubic(self.kappa.unwrap_or(DEFAULT_KAPPA))?),
            ModelName::Rigid => {
                if self.kappa.is_some() {
                    return Err(CliError::config("the rigid model takes no kappa"));
                }
                Ok(PeriodModel::rigid())
            }
        }
    }
}

/// Square grid `lo:hi:n` over `[lo, hi]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridArg {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self {
            lo: num(p[0])?,
            hi: num(p[1])?,
            n: p[2].trim().parse().map_err(|e| format!("{:?}: {e}", p[2]))?,
        })
    }
}

impl GridArg {
    pub fn spec(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::square(self.lo, self.hi, self.n)?)
    }
}

/// Rectangle `x0:x1:y0:y1` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionArg {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl FromStr for RegionArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != 4 {
            return Err(format!("expected x0:x1:y0:y1, got {s:?}"));
        }
        Ok(Self {
            x0: v[0],
            x1: v[1],
            y0: v[2],
            y1: v[3],
        })
    }
}

impl RegionArg {
    pub const DEFAULT: RegionArg = RegionArg {
        x0: -0.4,
        x1: 0.4,
        y0: 1.0,
        y1: 2.0,
    };

    pub fn rect(&self) -> Result<Rect, CliError> {
        Ok(Rect::new(self.x0, self.x1, self.y0, self.y1)?)
    }
}

/// Everything that determines a run's outputs. Thread count and output
/// directory are deliberately absent: they never change the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zmax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<f64>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_size: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_screen: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
}

/// A validated unit of work.
#[derive(Debug, Clone)]
pub enum Job {
    Density {
        ensemble: EnsembleSpec,
        grid: GridSpec,
    },
    ZerosMc {
        ensemble: EnsembleSpec,
        grid: GridSpec,
        n_samples: u64,
        seed: u64,
    },
    RealZeros {
        degree: usize,
        n_samples: u64,
        seed: u64,
    },
    Attractors {
        model: PeriodModel,
        region: Rect,
        zmax: f64,
        box_size: i64,
        options: AttractorOptions,
    },
    FluxVacua {
        model: PeriodModel,
        region: Rect,
        lmax: i64,
        box_size: i64,
        bins: usize,
    },
    FluxContinuum {
        model: PeriodModel,
        region: Rect,
        lmax: f64,
        n_samples: u64,
        seed: u64,
        box_radius: f64,
    },
    Report {
        inputs: Vec<PathBuf>,
    },
}

/// Fields that do not apply to a command.
fn reject(present: bool, field: &str, cmd: CommandKind) -> Result<(), CliError> {
    if present {
        Err(CliError::config(format!("`{field}` does not apply to `{cmd}`")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn empty(command: CommandKind) -> Self {
        Self {
            command,
            seed: None,
            ensemble: None,
            degree: None,
            grid: None,
            n_samples: None,
            model: None,
            region: None,
            zmax: None,
            lmax: None,
            box_size: None,
            box_radius: None,
            start_grid: None,
            analytic_screen: None,
            bins: None,
            inputs: Vec::new(),
        }
    }

    /// Reads a config file. A previous run's `summary.json` is accepted too:
    /// its `config` member is used.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("config is not valid JSON: {e}")))?;
        let v = match v.get("config") {
            Some(inner) if v.get("config_hash").is_some() => inner.clone(),
            _ => v,
        };
        serde_json::from_value(v).map_err(|e| CliError::config(format!("config: {e}")))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: ExperimentConfig) -> Result<Self, CliError> {
        if over.command != self.command {
            return Err(CliError::config(format!(
                "config file is for `{}` but the command is `{}`",
                self.command, over.command
            )));
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(seed, ensemble, degree, grid, n_samples, model, region, zmax, lmax, box_size, box_radius, start_grid, analytic_screen, bins);
        if !over.inputs.is_empty() {
            self.inputs = over.inputs;
        }
        Ok(self)
    }

    /// Fills per-command defaults and rejects fields that do not apply.
    pub fn normalized(&self) -> Result<Self, CliError> {
        use CommandKind::*;
        let c = self.command;
        let mut n = self.clone();
        let ens = matches!(c, Density | ZerosMc);
        reject(!ens && n.ensemble.is_some(), "ensemble", c)?;
        reject(!ens && n.grid.is_some(), "grid", c)?;
        reject(!matches!(c, Density | ZerosMc | RealZeros) && n.degree.is_some(), "degree", c)?;
        reject(!matches!(c, ZerosMc | RealZeros | FluxContinuum) && n.n_samples.is_some(), "n_samples", c)?;
        reject(!matches!(c, ZerosMc | RealZeros | FluxContinuum) && n.seed.is_some(), "seed", c)?;
        let geo = matches!(c, Attractors | FluxVacua | FluxContinuum);
        reject(!geo && n.model.is_some(), "model", c)?;
        reject(!geo && n.region.is_some(), "region", c)?;
        reject(c != Attractors && n.zmax.is_some(), "zmax", c)?;
        reject(c != Attractors && n.start_grid.is_some(), "start_grid", c)?;
        reject(c != Attractors && n.analytic_screen.is_some(), "analytic_screen", c)?;
        reject(!matches!(c, FluxVacua | FluxContinuum) && n.lmax.is_some(), "lmax", c)?;
        reject(!matches!(c, Attractors | FluxVacua) && n.box_size.is_some(), "box", c)?;
        reject(c != FluxContinuum && n.box_radius.is_some(), "box_radius", c)?;
        reject(c != FluxVacua && n.bins.is_some(), "bins", c)?;
        reject(c != Report && !n.inputs.is_empty(), "inputs", c)?;

        match c {
            Density => {
                n.ensemble.get_or_insert(EnsembleName::Kostlan);
                n.degree.get_or_insert(20);
                n.grid.get_or_insert(GridArg { lo: -3.0, hi: 3.0, n: 200 });
            }
            ZerosMc => {
                n.ensemble.get_or_insert(EnsembleName::Kostlan);
                n.degree.get_or_insert(20);
                n.grid.get_or_insert(GridArg { lo: -3.0, hi: 3.0, n: 30 });
                n.n_samples.get_or_insert(10_000);
                n.seed.get_or_insert(0);
            }
            RealZeros => {
                n.degree.get_or_insert(10);
                n.n_samples.get_or_insert(100_000);
                n.seed.get_or_insert(0);
            }
            Attractors => {
                n.model.get_or_insert(ModelConfig::cubic(DEFAULT_KAPPA));
                n.region.get_or_insert(RegionArg::DEFAULT);
                n.zmax.get_or_insert(2.0);
                n.box_size.get_or_insert(64);
                n.start_grid.get_or_insert(vacua::DEFAULT_START_GRID);
                n.analytic_screen.get_or_insert(true);
            }
            FluxVacua => {
                n.model.get_or_insert(ModelConfig::rigid());
                n.region.get_or_insert(RegionArg::DEFAULT);
                n.lmax.get_or_insert(150.0);
                n.box_size.get_or_insert(40);
                n.bins.get_or_insert(10);
            }
            FluxContinuum => {
                n.model.get_or_insert(ModelConfig::rigid());
                let region = *n.region.get_or_insert(RegionArg::DEFAULT);
                let lmax = *n.lmax.get_or_insert(150.0);
                n.n_samples.get_or_insert(1_000_000);
                n.seed.get_or_insert(0);
                if n.box_radius.is_none() {
                    let r = vacua::flux_required_radius(region.rect()?, lmax);
                    n.box_radius = Some(r.ceil().max(1.0));
                }
            }
            Report => {
                if n.inputs.is_empty() {
                    return Err(CliError::config("`report` needs at least one input run directory"));
                }
            }
        }
        if let Some(m) = &mut n.model {
            if m.kind == ModelName::Cubic && m.kappa.is_none() {
                m.kappa = Some(DEFAULT_KAPPA);
            }
        }
        Ok(n)
    }

    /// Validates a normalized config into a job.
    pub fn job(&self) -> Result<Job, CliError> {
        let missing = |f: &str| CliError::config(format!("`{f}` is required for `{}`", self.command));
        let ensemble = || -> Result<EnsembleSpec, CliError> {
            let kind = self.ensemble.ok_or_else(|| missing("ensemble"))?;
            let n = self.degree.ok_or_else(|| missing("degree"))?;
            Ok(EnsembleSpec::new(kind.into(), n)?)
        };
        let model = || self.model.as_ref().ok_or_else(|| missing("model"))?.build();
        let region = || self.region.ok_or_else(|| missing("region"))?.rect();
        let seed = self.seed.unwrap_or(0);
        Ok(match self.command {
            CommandKind::Density => Job::Density {
                ensemble: ensemble()?,
                grid: self.grid.ok_or_else(|| missing("grid"))?.spec()?,
            },
            CommandKind::ZerosMc => {
                let n_samples = self.n_samples.ok_or_else(|| missing("n_samples"))?;
                if n_samples < 1 {
                    return Err(CliError::config("n_samples must be at least 1"));
                }
                Job::ZerosMc {
                    ensemble: ensemble()?,
                    grid: self.grid.ok_or_else(|| missing("grid"))?.spec()?,
                    n_samples,
                    seed,
                }
            }
            CommandKind::RealZeros => {
                let degree = self.degree.ok_or_else(|| missing("degree"))?;
                if degree < 1 {
                    return Err(CliError::config("degree must be at least 1"));
                }
                let n_samples = self.n_samples.ok_or_else(|| missing("n_samples"))?;
                if n_samples == 1 {
                    return Err(CliError::config("n_samples must be 0 (quadrature only) or at least 2"));
                }
                Job::RealZeros { degree, n_samples, seed }
            }
            CommandKind::Attractors => {
                let model = model()?;
                if !matches!(self.model.as_ref().map(|m| m.kind), Some(ModelName::Cubic)) {
                    return Err(CliError::config("attractor counting uses the cubic model"));
                }
                let options = AttractorOptions {
                    start_grid: self.start_grid.unwrap_or(vacua::DEFAULT_START_GRID),
                    analytic_screen: self.analytic_screen.unwrap_or(true),
                };
                let zmax = self.zmax.ok_or_else(|| missing("zmax"))?;
                let box_size = self.box_size.ok_or_else(|| missing("box"))?;
                let region = region()?;
                // run the core validation before any compute
                vacua::AttractorPlan::new(&model, region, zmax, box_size, options)?;
                Job::Attractors {
                    model,
                    region,
                    zmax,
                    box_size,
                    options,
                }
            }
            CommandKind::FluxVacua => {
                let model = model()?;
                let lmax = self.lmax.ok_or_else(|| missing("lmax"))?;
                if lmax.fract() != 0.0 || !(1.0..=1e12).contains(&lmax) {
                    return Err(CliError::config("lmax must be a positive integer for lattice enumeration"));
                }
                let bins = self.bins.ok_or_else(|| missing("bins"))?;
                if bins == 0 {
                    return Err(CliError::config("bins must be at least 1"));
                }
                let box_size = self.box_size.ok_or_else(|| missing("box"))?;
                let region = region()?;
                vacua::FluxPlan::new(&model, region, lmax as i64, box_size)?;
                Job::FluxVacua {
                    model,
                    region,
                    lmax: lmax as i64,
                    box_size,
                    bins,
                }
            }
            CommandKind::FluxContinuum => {
                let model = model()?;
                if !matches!(self.model.as_ref().map(|m| m.kind), Some(ModelName::Rigid)) {
                    return Err(CliError::config("continuum flux counting uses the rigid model"));
                }
                let lmax = self.lmax.ok_or_else(|| missing("lmax"))?;
                if !(lmax > 0.0 && lmax.is_finite()) {
                    return Err(CliError::config("lmax must be positive"));
                }
                let box_radius = self.box_radius.ok_or_else(|| missing("box_radius"))?;
                if !(box_radius > 0.0 && box_radius.is_finite()) {
                    return Err(CliError::config("box_radius must be positive"));
                }
                let n_samples = self.n_samples.ok_or_else(|| missing("n_samples"))?;
                if n_samples < 1 {
                    return Err(CliError::config("n_samples must be at least 1"));
                }
                Job::FluxContinuum {
                    model,
                    region: region()?,
                    lmax,
                    n_samples,
                    seed,
                    box_radius,
                }
            }
            CommandKind::Report => Job::Report {
                inputs: self.inputs.clone(),
            },
        })
    }

    /// Canonical JSON of the config.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
