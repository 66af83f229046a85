//! Channel resolvability at finite blocklength.
//!
//! A uniform index over `M = round(2^{n·rate})` codewords drawn i.i.d. from
//! `p^n` drives `V^n`; the achieved output law is compared in L1 with the
//! target `(pV)^n`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{is_full_rank, l1_distance, mutual_information, output_probs, Dist, Dmc};
use crate::code::generate_codebook;
use crate::rng::derive_seed;
use crate::security::{outcome_count, product_output, word_output};
use crate::stats::mean_stderr;
use crate::{Error, Result};

/// Lower floor the mean distance must stay above for rates below `I(p, V)`.
/// A desk-scale heuristic, not a limit.
pub const NON_VANISHING_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvabilityRun {
    pub n: usize,
    pub rate: f64,
    pub codewords: usize,
    pub seed: u64,
    pub d_value: f64,
}

pub fn codebook_size(n: usize, rate: f64) -> usize {
    ((n as f64 * rate).exp2().round() as usize).max(1)
}

/// Achieved output law of `codewords` uniform codewords through `V^n`.
pub fn achieved_output(v: &Dmc, p: &Dist, n: usize, codewords: usize, seed: u64) -> Result<Vec<f64>> {
    let len = outcome_count(v.out_size(), n, "resolvability output space")?;
    let code = generate_codebook(p, n, &[codewords], 0.0, seed)?;
    let mut out = vec![0.0; len];
    let share = 1.0 / codewords as f64;
    for x in code.codewords() {
        for (acc, o) in out.iter_mut().zip(word_output(v, x)) {
            *acc += o * share;
        }
    }
    Ok(out)
}

pub fn resolvability_run(v: &Dmc, p: &Dist, n: usize, rate: f64, seed: u64) -> Result<ResolvabilityRun> {
    if p.len() != v.in_size() {
        return Err(Error::DimensionMismatch("input distribution does not match the channel".into()));
    }
    if n == 0 || !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidArgument(format!("need n ≥ 1 and a finite rate ≥ 0 (got n = {n}, rate = {rate})")));
    }
    let codewords = codebook_size(n, rate);
    let achieved = achieved_output(v, p, n, codewords, seed)?;
    let target = product_output(&output_probs(p.probs(), v), n);
    Ok(ResolvabilityRun { n, rate, codewords, seed, d_value: l1_distance(&achieved, &target) })
}

/// `‖(1/M) Σ_k V^n(·|x_k) - (pV)^n‖_1` for one seeded codebook.
pub fn resolvability_distance(v: &Dmc, p: &Dist, n: usize, rate: f64, seed: u64) -> Result<f64> {
    Ok(resolvability_run(v, p, n, rate, seed)?.d_value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub rate: f64,
    pub codewords: usize,
    pub mean_d: f64,
    pub stderr: Option<f64>,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n_list: Vec<usize>,
    pub rate_list: Vec<f64>,
    /// Rate-major: all `n` for the first rate, then the next rate.
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, n: usize, rate: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.n == n && c.rate == rate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rate,mean_d,stderr,seeds\n");
        for c in &self.cells {
            let se = c.stderr.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", c.n, c.rate, c.mean_d, se, c.seeds);
        }
        out
    }
}

/// Mean distance over `seeds` codebooks for every `(n, rate)` cell. Seed `j`
/// of every cell is `derive_seed(master_seed, j)`.
pub fn rate_sweep(v: &Dmc, p: &Dist, n_list: &[usize], rate_list: &[f64], seeds: usize, master_seed: u64) -> Result<SweepTable> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("at least one seed per cell is required".into()));
    }
    for &n in n_list {
        outcome_count(v.out_size(), n, "resolvability output space")?;
    }
    let jobs: Vec<(usize, f64)> = rate_list.iter().flat_map(|&r| n_list.iter().map(move |&n| (n, r))).collect();
    let cells = jobs
        .into_par_iter()
        .map(|(n, rate)| {
            let ds = (0..seeds)
                .map(|j| resolvability_distance(v, p, n, rate, derive_seed(master_seed, j as u64)))
                .collect::<Result<Vec<f64>>>()?;
            let (mean_d, stderr) = mean_stderr(&ds);
            Ok(SweepCell { n, rate, codewords: codebook_size(n, rate), mean_d, stderr, seeds })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { n_list: n_list.to_vec(), rate_list: rate_list.to_vec(), cells })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTrend {
    pub rate: f64,
    pub above_information: bool,
    /// For rates above `I(p, V)`: mean distance non-increasing in `n`.
    pub non_increasing: Option<bool>,
    /// For rates below `I(p, V)` on a full-rank channel: the mean distance at
    /// the largest `n` stays above [`NON_VANISHING_FLOOR`].
    pub non_vanishing: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub mutual_information: f64,
    pub full_rank: bool,
    pub per_rate: Vec<RateTrend>,
}

impl TrendReport {
    pub fn holds(&self) -> bool {
        self.per_rate.iter().all(|r| r.non_increasing.unwrap_or(true) && r.non_vanishing.unwrap_or(true))
    }
}

pub fn sweep_trends(table: &SweepTable, v: &Dmc, p: &Dist) -> Result<TrendReport> {
    let info = mutual_information(p, v)?;
    let full_rank = is_full_rank(v);
    let mut ns = table.n_list.clone();
    ns.sort_unstable();
    let per_rate = table
        .rate_list
        .iter()
        .map(|&rate| {
            let column: Vec<f64> = ns.iter().filter_map(|&n| table.cell(n, rate)).map(|c| c.mean_d).collect();
            let above = rate > info;
            RateTrend {
                rate,
                above_information: above,
                non_increasing: above.then(|| column.windows(2).all(|w| w[1] <= w[0])),
                non_vanishing: (!above && full_rank).then(|| column.last().is_some_and(|&d| d >= NON_VANISHING_FLOOR)),
            }
        })
        .collect();
    Ok(TrendReport { mutual_information: info, full_rank, per_rate })
}
