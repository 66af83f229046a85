//! Executes a validated config and writes its reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use muxsec_core::capacity::{channel_capacity, equal_rate_capacity_tuple, region_membership, secrecy_capacity};
use muxsec_core::channel::{cascade, mutual_information};
use muxsec_core::code::generate_codebook;
use muxsec_core::ensemble::{
    achievability_params, ensemble_experiment, existence_witness, threshold_params, EnsembleResult,
};
use muxsec_core::resolvability::{rate_sweep, sweep_trends};
use muxsec_core::security::{evaluate, verdu_han_lower_bound};
use muxsec_core::{BoundInputs, Error, RegionMode, RegionSpec};
use serde_json::{json, Value};

use crate::config::{load_config, Experiment, ExperimentConfig, SizeSpec, Threshold};
use crate::error::{CliError, CliResult};

pub const SUMMARY_FILE: &str = "summary.json";

/// Report bodies produced by one run, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<(String, String)>,
}

impl Report {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, body)| body.as_str())
    }

    pub fn summary(&self) -> Value {
        serde_json::from_str(self.file(SUMMARY_FILE).expect("every report has a summary")).expect("summary is JSON")
    }
}

fn resolve_threshold(t: Threshold, auto: impl FnOnce() -> CliResult<f64>) -> CliResult<f64> {
    match t {
        Threshold::Value(v) => Ok(v),
        Threshold::Auto => auto(),
    }
}

/// Runs the experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<Report> {
    let seed = cfg.master_seed;
    let mut files = Vec::new();
    let result = match &cfg.experiment {
        Experiment::Capacity { channel_path, main, pair, tolerance, restarts } => {
            let (capacity, input) = channel_capacity(main, *tolerance)?;
            let mut result = json!({
                "channel": channel_path,
                "capacity": capacity,
                "capacity_input": input.probs(),
                "secrecy_value": null,
                "secrecy_input": null,
                "secrecy_test_channel": null,
                "secrecy_certified": null,
                "minimal_T": null,
                "equal_rate_tuple": null,
            });
            if let Some(pair) = pair {
                let sol = secrecy_capacity(pair, *restarts, *tolerance, seed)?;
                result["secrecy_value"] = json!(sol.value);
                result["secrecy_input"] = json!(sol.input_dist.probs());
                result["secrecy_test_channel"] = json!(sol.test_channel.as_ref().map(|u| u.rows()));
                result["secrecy_certified"] = json!(sol.certified_global);
                match equal_rate_capacity_tuple(pair, *tolerance) {
                    Ok((rt, t, _)) => {
                        result["minimal_T"] = json!(t);
                        result["equal_rate_tuple"] = json!(rt.rates());
                    }
                    Err(Error::NoSecrecyGap { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            result
        }
        Experiment::Region { channel_path, pair, rates, mode, input, test_channel } => {
            let spec = RegionSpec::new(pair.clone(), rates.len(), *mode)?;
            let member = region_membership(rates, &spec, input, test_channel.as_ref())?;
            let (main, wire) = match (mode, test_channel) {
                (RegionMode::Stochastic, Some(u)) => (cascade(u, pair.main())?, cascade(u, pair.wiretap())?),
                _ => (pair.main().clone(), pair.wiretap().clone()),
            };
            json!({
                "channel_pair": channel_path,
                "mode": mode,
                "rates": rates.rates(),
                "total_rate": rates.total(),
                "i_main": mutual_information(input, &main)?,
                "i_wiretap": mutual_information(input, &wire)?,
                "member": member,
            })
        }
        Experiment::CodeEval { channel_path, pair, input, n, sizes, a, gamma } => {
            let a = resolve_threshold(*a, || Ok(threshold_params(input, pair, gamma.expect("validated"))?.0))?;
            let code = generate_codebook(input, *n, sizes, a, seed)?;
            let report = evaluate(&code, pair, input)?;
            let vh = match gamma {
                Some(g) => Some(verdu_han_lower_bound(&code, pair.main(), *g)?),
                None => None,
            };
            let eps_sum: f64 = report.per_message.iter().map(|m| m.eps).sum();
            files.push(("report.csv".to_string(), report.to_csv()));
            files.push(("codebook.txt".to_string(), code.to_text()));
            json!({
                "channel_pair": channel_path,
                "n": n,
                "sizes": sizes,
                "threshold_a": a,
                "codebook_seed": seed,
                "per_message": report.per_message,
                "eps_sum": eps_sum,
                "gamma": gamma,
                "verdu_han_lower_bound": vh,
            })
        }
        Experiment::Ensemble { channel_path, pair, input, n, sizes, gamma, a, b, trials } => {
            let ach = match sizes {
                SizeSpec::Rates(rt) => Some(achievability_params(input, pair, rt, gamma.expect("validated"), *n)?),
                SizeSpec::Sizes(_) => None,
            };
            let sizes = match (sizes, &ach) {
                (SizeSpec::Sizes(s), _) => s.clone(),
                (_, Some(ach)) => ach.inputs.sizes.clone(),
                _ => unreachable!("rates always produce achievability parameters"),
            };
            let auto = || threshold_params(input, pair, gamma.expect("validated"));
            let a = resolve_threshold(*a, || Ok(auto()?.0))?;
            let b = resolve_threshold(*b, || Ok(auto()?.1))?;
            let bi = BoundInputs::new(pair.clone(), input.clone(), *n, sizes, a, b)?;
            let er = ensemble_experiment(&bi, *trials, seed)?;
            let witness = existence_witness(&er, bi.sizes.len());
            files.push(("trials.csv".to_string(), ensemble_csv(&er)));
            json!({
                "channel_pair": channel_path,
                "n": n,
                "sizes": bi.sizes,
                "a": a,
                "b": b,
                "gamma": gamma,
                "trials": trials,
                "bounds": er.bounds,
                "per_message": er.per_message,
                "all_within_bounds": er.all_within_bounds(),
                "existence_check": witness.is_some(),
                "existence_witness": witness,
                "achievability": ach.map(|a| json!({
                    "i_main": a.i_main,
                    "i_wiretap": a.i_wiretap,
                    "total_slack": a.total_slack,
                    "dummy_slack": a.dummy_slack,
                })),
            })
        }
        Experiment::Resolvability { channel_path, channel, input, n_list, rate_list, seeds } => {
            let table = rate_sweep(channel, input, n_list, rate_list, *seeds, seed)?;
            let trends = sweep_trends(&table, channel, input)?;
            files.push(("sweep.csv".to_string(), table.to_csv()));
            json!({
                "channel": channel_path,
                "cells": table.cells,
                "trends": trends,
                "trends_hold": trends.holds(),
            })
        }
    };
    let summary = json!({
        "kind": cfg.kind.name(),
        "config_sha256": cfg.config_hash,
        "master_seed": seed,
        "result": result,
    });
    let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body.push('\n');
    files.push((SUMMARY_FILE.to_string(), body));
    Ok(Report { files })
}

/// One row per trial, then a `mean` row.
pub fn ensemble_csv(er: &EnsembleResult) -> String {
    let t_count = er.per_message.len();
    let mut out = String::from("trial,seed");
    for measure in ["eps", "vd", "leak_rate"] {
        for t in 1..=t_count {
            let _ = write!(out, ",{measure}_{t}");
        }
    }
    out.push('\n');
    for r in &er.records {
        let _ = write!(out, "{},{}", r.trial, r.seed);
        for column in [&r.eps, &r.vd, &r.leak_rate] {
            for v in column.iter() {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out.push_str("mean,");
    for pick in [0, 1, 2] {
        for m in &er.per_message {
            let est = [&m.eps, &m.vd, &m.leak_rate][pick];
            let _ = write!(out, ",{}", est.mean);
        }
    }
    out.push('\n');
    out
}

pub fn default_output(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| {
        let stem = cfg.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        Path::new("results").join(stem)
    })
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub report: Report,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Threads("--threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Loads `config`, executes it and writes every report file into the output
/// directory (`out`, else the config's `output`, else `results/<stem>`).
pub fn run(config: &Path, out: Option<&Path>, threads: Option<usize>) -> CliResult<RunOutcome> {
    let cfg = load_config(config)?;
    let report = with_threads(threads, || execute(&cfg))??;
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| default_output(&cfg));
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;
    for (name, body) in &report.files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(RunOutcome { out_dir, report })
}
