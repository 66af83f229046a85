//! Dry-run plans: what a config would compute and how large it gets.

use std::fmt;
use std::path::Path;

use muxsec_core::ENUMERATION_BUDGET;
use serde::Serialize;

use crate::config::{load_config, Experiment, SizeSpec};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeSpace {
    pub label: String,
    /// Saturates at `u128::MAX`.
    pub outcomes: u128,
    pub within_budget: bool,
}

impl OutcomeSpace {
    fn power(label: impl Into<String>, base: usize, n: usize) -> Self {
        let outcomes = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(base as u128)).unwrap_or(u128::MAX);
        Self { label: label.into(), outcomes, within_budget: outcomes <= ENUMERATION_BUDGET as u128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub kind: String,
    pub master_seed: u64,
    pub steps: Vec<String>,
    pub outcome_spaces: Vec<OutcomeSpace>,
    /// Codebooks the run samples and evaluates exactly.
    pub codebook_evaluations: Option<usize>,
    /// Seeded resolvability runs across the sweep grid.
    pub runs: Option<usize>,
}

impl Plan {
    pub fn within_budget(&self) -> bool {
        self.outcome_spaces.iter().all(|o| o.within_budget)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind: {}", self.kind)?;
        writeln!(f, "master_seed: {}", self.master_seed)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: {s}", i + 1)?;
        }
        for o in &self.outcome_spaces {
            let status = if o.within_budget { "within budget" } else { "EXCEEDS budget" };
            writeln!(f, "{}: {} outcomes ({status} of {ENUMERATION_BUDGET})", o.label, o.outcomes)?;
        }
        if let Some(e) = self.codebook_evaluations {
            writeln!(f, "codebook evaluations: {e}")?;
        }
        if let Some(r) = self.runs {
            writeln!(f, "runs: {r}")?;
        }
        Ok(())
    }
}

pub fn describe(config: &Path) -> CliResult<Plan> {
    let cfg = load_config(config)?;
    let mut steps = Vec::new();
    let mut spaces = Vec::new();
    let mut codebook_evaluations = None;
    let mut runs = None;
    match &cfg.experiment {
        Experiment::Capacity { channel_path, main, pair, restarts, .. } => {
            steps.push(format!("capacity of the main channel in {channel_path} ({}x{})", main.in_size(), main.out_size()));
            if pair.is_some() {
                steps.push(format!("secrecy capacity: direct search plus {restarts} seeded restarts"));
                steps.push("minimal multiplex order and equal-rate tuple".to_string());
            }
        }
        Experiment::Region { channel_path, rates, mode, .. } => {
            steps.push(format!(
                "{} region membership of {:?} for {channel_path}",
                serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                rates.rates()
            ));
        }
        Experiment::CodeEval { pair, n, sizes, .. } => {
            let total: usize = sizes.iter().product();
            steps.push(format!("sample one codebook of {total} codewords, length {n}, sizes {sizes:?}"));
            steps.push("exact per-message error, leakage and variational distance".to_string());
            spaces.push(OutcomeSpace::power("main outputs |Y|^n", pair.main().out_size(), *n));
            spaces.push(OutcomeSpace::power("wiretap outputs |Z|^n", pair.wiretap().out_size(), *n));
            codebook_evaluations = Some(1);
        }
        Experiment::Ensemble { pair, n, sizes, trials, .. } => {
            match sizes {
                SizeSpec::Sizes(s) => steps.push(format!("sizes {s:?} at blocklength {n}")),
                SizeSpec::Rates(r) => steps.push(format!("sizes round(2^(n R_t)) for rates {:?} at n = {n}", r.rates())),
            }
            steps.push(format!("exact spectra at n = {n} for the bound terms"));
            steps.push(format!("{trials} seeded codebooks, each measured exactly"));
            spaces.push(OutcomeSpace::power("main outputs |Y|^n", pair.main().out_size(), *n));
            spaces.push(OutcomeSpace::power("wiretap outputs |Z|^n", pair.wiretap().out_size(), *n));
            codebook_evaluations = Some(*trials);
        }
        Experiment::Resolvability { channel, n_list, rate_list, seeds, .. } => {
            let total = n_list.len() * rate_list.len() * seeds;
            steps.push(format!(
                "{} blocklengths x {} rates x {seeds} seeds of exact output distributions",
                n_list.len(),
                rate_list.len()
            ));
            let n_max = n_list.iter().copied().max().unwrap_or(0);
            spaces.push(OutcomeSpace::power("largest output space |Z|^n", channel.out_size(), n_max));
            runs = Some(total);
        }
    }
    Ok(Plan {
        kind: cfg.kind.name().to_string(),
        master_seed: cfg.master_seed,
        steps,
        outcome_spaces: spaces,
        codebook_evaluations,
        runs,
    })
}
