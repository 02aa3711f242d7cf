//! Executes a config and writes its artifacts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use randcrit_core::kacrice;
use randcrit_core::vacua::{self, CountReport, CriticalPointRecord, Source, W2Statistics};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifacts::{self, opt, OutputDir, Table};
use crate::config::{CommandKind, ExperimentConfig, Job, RegionArg};
use crate::drivers;
use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub outputs: Value,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W2Summary {
    pub q: f64,
    pub n_lower: usize,
    pub ks_distance: f64,
    pub ks_pvalue: f64,
}

impl From<&W2Statistics> for W2Summary {
    fn from(w: &W2Statistics) -> Self {
        Self {
            q: w.q,
            n_lower: w.n_lower,
            ks_distance: w.ks_distance,
            ks_pvalue: w.ks_pvalue,
        }
    }
}

/// `count_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReportDoc {
    pub command: CommandKind,
    pub config_hash: String,
    pub region: RegionArg,
    pub control: f64,
    pub count: u64,
    pub signed_index: i64,
    pub prediction: f64,
    pub ratio: Option<f64>,
    pub box_size: i64,
    pub count_box_minus_one: u64,
    pub sufficient_box: i64,
    pub box_complete: bool,
    pub non_converged: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_asymptotic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<W2Summary>,
}

impl CountReportDoc {
    fn new(command: CommandKind, hash: &str, r: &CountReport) -> Self {
        Self {
            command,
            config_hash: hash.to_string(),
            region: RegionArg {
                x0: r.region.x0,
                x1: r.region.x1,
                y0: r.region.y0,
                y1: r.region.y1,
            },
            control: r.control,
            count: r.count,
            signed_index: r.signed_index,
            prediction: r.prediction,
            ratio: r.ratio,
            box_size: r.box_size,
            count_box_minus_one: r.count_box_minus_one,
            sufficient_box: r.sufficient_box,
            box_complete: r.box_complete(),
            non_converged: r.non_converged,
            lattice_asymptotic: None,
            w2: None,
        }
    }
}

/// Data files produced by a job, in write order, plus its outputs summary.
struct Produced {
    files: Vec<(String, Vec<u8>)>,
    outputs: Value,
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

pub const RECORD_TAIL: [&str; 6] = ["x", "y", "absZ2_or_absW2", "L", "sign", "converged"];

fn records_table(command: &str, hash: &str, flux: bool, records: &[CriticalPointRecord]) -> Table {
    let mut header: Vec<&str> = if flux {
        vec!["f0", "f1", "h0", "h1"]
    } else {
        vec!["g0", "g1", "g2", "g3"]
    };
    header.extend(RECORD_TAIL);
    let mut t = Table::new(command, hash, &header);
    for r in records {
        let mut row: Vec<String> = match r.source {
            Source::Charge(g) => g.iter().map(i64::to_string).collect(),
            Source::Flux(f) => f.f.iter().chain(&f.h).map(i64::to_string).collect(),
        };
        row.extend([
            r.location.re.to_string(),
            r.location.im.to_string(),
            r.value.to_string(),
            opt(r.length),
            r.sign.to_string(),
            r.converged.to_string(),
        ]);
        t.row(&row);
    }
    t
}

fn produce(job: &Job, cfg: &ExperimentConfig, hash: &str) -> Result<Produced, CliError> {
    let cmd = cfg.command.name();
    Ok(match job {
        Job::Density { ensemble, grid } => {
            let d = drivers::density_grid(ensemble, *grid)?;
            let mut t = Table::new(cmd, hash, &["x", "y", "density"]);
            for (k, v) in d.values.iter().enumerate() {
                let z = grid.cell_center(k);
                t.row(&[z.re.to_string(), z.im.to_string(), v.to_string()]);
            }
            Produced {
                files: vec![("density.csv".into(), t.into_bytes())],
                outputs: json!({
                    "cells": grid.cells(),
                    "mass_on_grid": d.total_mass(),
                    "max_density": d.values.iter().cloned().fold(0.0, f64::max),
                }),
            }
        }
        Job::ZerosMc {
            ensemble,
            grid,
            n_samples,
            seed,
        } => {
            let d = drivers::zero_histogram(ensemble, *grid, *n_samples, *seed)?;
            let mut t = Table::new(cmd, hash, &["x", "y", "count", "density", "stderr"]);
            for k in 0..grid.cells() {
                let z = grid.cell_center(k);
                t.row(&[
                    z.re.to_string(),
                    z.im.to_string(),
                    d.counts[k].to_string(),
                    d.density[k].to_string(),
                    d.stderr[k].to_string(),
                ]);
            }
            Produced {
                files: vec![("zeros.csv".into(), t.into_bytes())],
                outputs: json!({
                    "n_samples": d.n_samples,
                    "seed": seed,
                    "total_roots": d.total_roots(),
                    "overflow": d.overflow,
                    "residual_violations": d.residual_violations,
                }),
            }
        }
        Job::RealZeros {
            degree,
            n_samples,
            seed,
        } => {
            let expected = kacrice::expected_real_zeros(*degree)?;
            let asymptotic = 2.0 / PI * (*degree as f64).ln();
            let (mean, stderr) = if *n_samples >= 2 {
                let (m, s) = drivers::real_root_tally(*degree, *n_samples, *seed)?.mean_stderr();
                (Some(m), Some(s))
            } else {
                (None, None)
            };
            let mut t = Table::new(cmd, hash, &["degree", "n_samples", "mean", "stderr", "expected", "log_asymptotic"]);
            t.row(&[
                degree.to_string(),
                n_samples.to_string(),
                opt(mean),
                opt(stderr),
                expected.to_string(),
                asymptotic.to_string(),
            ]);
            Produced {
                files: vec![("real_zeros.csv".into(), t.into_bytes())],
                outputs: json!({
                    "degree": degree,
                    "n_samples": n_samples,
                    "seed": seed,
                    "mean": mean,
                    "stderr": stderr,
                    "expected": expected,
                    "log_asymptotic": asymptotic,
                }),
            }
        }
        Job::Attractors {
            model,
            region,
            zmax,
            box_size,
            options,
        } => {
            let (rep, records) = drivers::attractor_points(model, *region, *zmax, *box_size, *options)?;
            let mut doc = CountReportDoc::new(cfg.command, hash, &rep);
            doc.lattice_asymptotic = Some(vacua::attractor_lattice_asymptotic(model, *region, *zmax)?);
            let t = records_table(cmd, hash, false, &records);
            Produced {
                files: vec![
                    ("records.csv".into(), t.into_bytes()),
                    ("count_report.json".into(), json_bytes(&doc)),
                ],
                outputs: serde_json::to_value(&doc).expect("serializable"),
            }
        }
        Job::FluxVacua {
            model,
            region,
            lmax,
            box_size,
            bins,
        } => {
            let (rep, records) = drivers::flux_vacua(model, *region, *lmax, *box_size)?;
            let mut doc = CountReportDoc::new(cfg.command, hash, &rep);
            let values: Vec<f64> = records.iter().filter(|r| r.converged).map(|r| r.value).collect();
            let mut files = vec![("records.csv".into(), records_table(cmd, hash, true, &records).into_bytes())];
            if values.len() >= vacua::W2_MIN_RECORDS {
                let w = vacua::w2_statistics(&values, *bins)?;
                let mut t = Table::new(cmd, hash, &["lo", "hi", "count"]);
                for (k, c) in w.counts.iter().enumerate() {
                    t.row(&[w.bin_edges[k].to_string(), w.bin_edges[k + 1].to_string(), c.to_string()]);
                }
                files.push(("w2_hist.csv".into(), t.into_bytes()));
                doc.w2 = Some(W2Summary::from(&w));
            }
            files.push(("count_report.json".into(), json_bytes(&doc)));
            Produced {
                files,
                outputs: serde_json::to_value(&doc).expect("serializable"),
            }
        }
        Job::FluxContinuum {
            model,
            region,
            lmax,
            n_samples,
            seed,
            box_radius,
        } => {
            let c = drivers::continuum_flux(model, *region, *lmax, *n_samples, *seed, *box_radius)?;
            let mut t = Table::new(
                cmd,
                hash,
                &["lmax", "box_radius", "required_radius", "n_samples", "hits", "estimate", "stderr"],
            );
            t.row(&[
                lmax.to_string(),
                c.box_radius.to_string(),
                c.required_radius.to_string(),
                c.n_samples.to_string(),
                c.hits.to_string(),
                c.estimate.to_string(),
                c.stderr.to_string(),
            ]);
            Produced {
                files: vec![("continuum.csv".into(), t.into_bytes())],
                outputs: json!({
                    "estimate": c.estimate,
                    "stderr": c.stderr,
                    "hits": c.hits,
                    "n_samples": c.n_samples,
                    "seed": seed,
                    "box_radius": c.box_radius,
                    "required_radius": c.required_radius,
                    "contained": c.contained(),
                }),
            }
        }
        Job::Report { inputs } => report(inputs, cmd, hash)?,
    })
}

/// Checks that every artifact of a run carries the run's config hash.
pub fn verify_run(dir: &Path) -> Result<(ExperimentConfig, String, Value), CliError> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let summary: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let hash = summary["config_hash"]
        .as_str()
        .ok_or_else(|| CliError::Input(format!("{}: no config_hash", path.display())))?
        .to_string();
    if cfg.hash() != hash {
        return Err(CliError::Input(format!("{}: config_hash does not match its config", path.display())));
    }
    let names = summary["artifacts"]
        .as_array()
        .ok_or_else(|| CliError::Input(format!("{}: no artifact list", path.display())))?;
    for n in names {
        let name = n.as_str().unwrap_or_default();
        let p = dir.join(name);
        let body = fs::read_to_string(&p).map_err(|e| CliError::io(format!("reading {}", p.display()), e))?;
        let found = if name.ends_with(".csv") {
            artifacts::csv_hash(&body).map(String::from)
        } else {
            serde_json::from_str::<Value>(&body)
                .ok()
                .and_then(|v| v["config_hash"].as_str().map(String::from))
        };
        if found.as_deref() != Some(hash.as_str()) {
            return Err(CliError::Input(format!("{} does not carry config hash {hash}", p.display())));
        }
    }
    Ok((cfg, hash, summary))
}

/// Cross-run summary: verifies every input run and tabulates count reports.
fn report(inputs: &[PathBuf], cmd: &str, hash: &str) -> Result<Produced, CliError> {
    let mut t = Table::new(
        cmd,
        hash,
        &[
            "run",
            "command",
            "control",
            "count",
            "signed_index",
            "prediction",
            "ratio",
            "box_size",
            "sufficient_box",
        ],
    );
    let mut runs = Vec::new();
    for (k, dir) in inputs.iter().enumerate() {
        let (cfg, run_hash, _) = verify_run(dir)?;
        let rp = dir.join("count_report.json");
        if rp.exists() {
            let text = fs::read_to_string(&rp).map_err(|e| CliError::io(format!("reading {}", rp.display()), e))?;
            let doc: CountReportDoc =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", rp.display())))?;
            t.row(&[
                k.to_string(),
                doc.command.to_string(),
                doc.control.to_string(),
                doc.count.to_string(),
                doc.signed_index.to_string(),
                doc.prediction.to_string(),
                opt(doc.ratio),
                doc.box_size.to_string(),
                doc.sufficient_box.to_string(),
            ]);
        }
        runs.push(json!({ "run": k, "command": cfg.command, "config_hash": run_hash }));
    }
    Ok(Produced {
        files: vec![("scaling.csv".into(), t.into_bytes())],
        outputs: json!({ "runs": runs }),
    })
}

/// Validates `config`, computes, and writes the data files and `summary.json`
/// into `opts.out`. On any failure the files written so far are removed.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let cfg = config.normalized()?;
    let job = cfg.job()?;
    let hash = cfg.hash();
    if let Some(0) = opts.threads {
        return Err(CliError::config("threads must be at least 1"));
    }
    let produced = drivers::with_threads(opts.threads, || produce(&job, &cfg, &hash))?;

    let mut out = OutputDir::open(&opts.out)?;
    let written = (|| {
        let mut names = Vec::new();
        for (name, bytes) in &produced.files {
            out.write(name, bytes)?;
            names.push(name.clone());
        }
        let mut versions = BTreeMap::new();
        versions.insert("randcrit", env!("CARGO_PKG_VERSION"));
        versions.insert("randcrit-core", randcrit_core::VERSION);
        let summary = json!({
            "tool": "randcrit",
            "versions": versions,
            "command": cfg.command,
            "config": cfg,
            "config_hash": hash,
            "outputs": produced.outputs,
            "artifacts": names,
            "wall_time_s": start.elapsed().as_secs_f64(),
        });
        out.write("summary.json", &json_bytes(&summary))?;
        Ok::<_, CliError>(names)
    })();
    match written {
        Ok(names) => Ok(RunOutcome {
            config: cfg,
            config_hash: hash,
            outputs: produced.outputs,
            artifacts: names
                .iter()
                .chain(std::iter::once(&"summary.json".to_string()))
                .map(|n| opts.out.join(n))
                .collect(),
        }),
        Err(e) => {
            out.rollback();
            Err(e)
        }
    }
}

