//! Random-coding ensemble bounds and the experiments that check them.
//!
//! For a random multiplex code with message sizes `M_t`, dummy sizes
//! `L_t = Π M / M_t`, decoding threshold `a` and secrecy parameter `b`, the
//! ensemble averages satisfy
//!
//! ```text
//! E ε_t ≤ Pr{ i_W < a } + (Π M) 2^{-an}
//! E d_t ≤ 2 (2 δ_n + sqrt(2^{bn} / L_t))
//! E I_t ≤ η(δ_n)/n + δ_n log2|Z| + 2^{bn} / L_t,      δ_n = Pr{ i_V > b }
//! ```
//!
//! where `i_W`, `i_V` are per-symbol information densities at blocklength `n`
//! and `η(x) = -x log2 x`. `I_t` is the per-symbol leakage `I(K_t; Z^n)/n`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::RateTuple;
use crate::channel::{mutual_information, xlog2x, Dist, WiretapPair};
use crate::code::{generate_codebook, MultiplexCode, ThresholdDecoder};
use crate::rng::{derive_seed, stream};
use crate::security::{conditional_outputs, exact_errors, leakage_from, vd_from};
use crate::spectrum::spectrum_at;
use crate::stats::mean_stderr;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BoundInputs {
    pub pair: WiretapPair,
    pub p: Dist,
    pub n: usize,
    pub sizes: Vec<usize>,
    pub a: f64,
    pub b: f64,
}

impl BoundInputs {
    pub fn new(pair: WiretapPair, p: Dist, n: usize, sizes: Vec<usize>, a: f64, b: f64) -> Result<Self> {
        if p.len() != pair.in_size() {
            return Err(Error::DimensionMismatch(format!(
                "input distribution has {} symbols, channels have {} inputs",
                p.len(),
                pair.in_size()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
        }
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidArgument("message sizes must be nonempty and at least 1".into()));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument("thresholds a and b must be finite".into()));
        }
        Ok(Self { pair, p, n, sizes, a, b })
    }

    pub fn total_size(&self) -> f64 {
        self.sizes.iter().map(|&m| m as f64).product()
    }

    pub fn dummy_size(&self, t: usize) -> f64 {
        self.total_size() / self.sizes[t] as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageBounds {
    pub dummy_size: f64,
    pub d_bound: f64,
    pub leak_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaBounds {
    /// `Pr{i_W < a}` at blocklength `n`.
    pub main_tail: f64,
    /// Shared by every message: the right side depends only on `Π M`.
    pub eps_bound: f64,
    pub delta_n: f64,
    pub per_message: Vec<MessageBounds>,
}

/// `η(x) = -x log2 x`, `η(0) = 0`.
pub fn eta(x: f64) -> f64 {
    -xlog2x(x)
}

pub fn lemma1_bounds(bi: &BoundInputs) -> Result<LemmaBounds> {
    let n = bi.n as f64;
    let main = spectrum_at(&bi.p, bi.pair.main(), bi.n)?;
    let wire = spectrum_at(&bi.p, bi.pair.wiretap(), bi.n)?;
    let main_tail = main.tail_below(bi.a);
    let delta_n = wire.tail_above(bi.b);
    let eps_bound = main_tail + bi.total_size() * (-bi.a * n).exp2();
    let z_bits = (bi.pair.wiretap().out_size() as f64).log2();
    let per_message = (0..bi.sizes.len())
        .map(|t| {
            let l = bi.dummy_size(t);
            let excess = (bi.b * n).exp2() / l;
            MessageBounds {
                dummy_size: l,
                d_bound: 2.0 * (2.0 * delta_n + excess.sqrt()),
                leak_bound: eta(delta_n) / n + delta_n * z_bits + excess,
            }
        })
        .collect();
    Ok(LemmaBounds { main_tail, eps_bound, delta_n, per_message })
}

/// Exact measures of one sampled codebook.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub vd: Vec<f64>,
    /// Per-symbol leakage `I(K_t; Z^n) / n`.
    pub leak_rate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` for a single trial.
    pub stderr: Option<f64>,
    pub bound: f64,
    /// `mean ≤ bound + 3·stderr` (the raw mean when `stderr` is absent).
    pub within_bound: bool,
}

impl Estimate {
    fn new(values: &[f64], bound: f64) -> Self {
        let (mean, stderr) = mean_stderr(values);
        let within_bound = mean <= bound + 3.0 * stderr.unwrap_or(0.0);
        Self { mean, stderr, bound, within_bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageSummary {
    /// 1-based message slot.
    pub t: usize,
    pub eps: Estimate,
    pub vd: Estimate,
    pub leak_rate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub trials: usize,
    pub master_seed: u64,
    pub bounds: LemmaBounds,
    pub per_message: Vec<MessageSummary>,
    pub records: Vec<TrialRecord>,
}

impl EnsembleResult {
    /// Every estimate sits within three standard errors of its bound.
    pub fn all_within_bounds(&self) -> bool {
        self.per_message.iter().all(|m| m.eps.within_bound && m.vd.within_bound && m.leak_rate.within_bound)
    }
}

pub fn evaluate_trial(bi: &BoundInputs, trial: usize, seed: u64) -> Result<TrialRecord> {
    let code = generate_codebook(&bi.p, bi.n, &bi.sizes, bi.a, seed)?;
    trial_measures(&code, bi, trial)
}

fn trial_measures(code: &MultiplexCode, bi: &BoundInputs, trial: usize) -> Result<TrialRecord> {
    let errors = exact_errors(code, bi.pair.main(), &bi.p)?;
    let mut vd = Vec::with_capacity(bi.sizes.len());
    let mut leak_rate = Vec::with_capacity(bi.sizes.len());
    for t in 0..bi.sizes.len() {
        let co = conditional_outputs(code, bi.pair.wiretap(), t)?;
        vd.push(vd_from(&co));
        leak_rate.push(leakage_from(&co).joint_mi / bi.n as f64);
    }
    Ok(TrialRecord { trial, seed: code.seed(), eps: errors.per_message, vd, leak_rate })
}

/// Samples `trials` codebooks (codebook `i` seeded by `derive_seed(master_seed, i)`),
/// measures each exactly and compares the means with [`lemma1_bounds`].
pub fn ensemble_experiment(bi: &BoundInputs, trials: usize, master_seed: u64) -> Result<EnsembleResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let bounds = lemma1_bounds(bi)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|i| evaluate_trial(bi, i, derive_seed(master_seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let column = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let per_message = (0..bi.sizes.len())
        .map(|t| MessageSummary {
            t: t + 1,
            eps: Estimate::new(&column(&|r| r.eps[t]), bounds.eps_bound),
            vd: Estimate::new(&column(&|r| r.vd[t]), bounds.per_message[t].d_bound),
            leak_rate: Estimate::new(&column(&|r| r.leak_rate[t]), bounds.per_message[t].leak_bound),
        })
        .collect();
    Ok(EnsembleResult { trials, master_seed, bounds, per_message, records })
}

/// Whether some sampled codebook has, for every message, error, variational
/// distance and leakage each at most `3T` times the ensemble mean.
pub fn existence_check(er: &EnsembleResult, t_count: usize) -> bool {
    existence_witness(er, t_count).is_some()
}

/// The first trial meeting the [`existence_check`] conditions.
pub fn existence_witness(er: &EnsembleResult, t_count: usize) -> Option<usize> {
    let scale = 3.0 * t_count as f64;
    er.records
        .iter()
        .find(|r| {
            er.per_message.iter().enumerate().all(|(t, m)| {
                r.eps[t] <= scale * m.eps.mean && r.vd[t] <= scale * m.vd.mean && r.leak_rate[t] <= scale * m.leak_rate.mean
            })
        })
        .map(|r| r.trial)
}

#[derive(Debug, Clone, Serialize)]
pub struct Achievability {
    pub inputs: BoundInputs,
    /// `I(p, W)` and `I(p, V)`.
    pub i_main: f64,
    pub i_wiretap: f64,
    /// `(Π M) / 2^{n R_total}`: the factor by which integer rounding inflates
    /// `(Π M) 2^{-an}` above `2^{-nγ/2}`.
    pub total_slack: f64,
    /// `2^{n (R_total - R_t)} / L_t` per message.
    pub dummy_slack: Vec<f64>,
}

/// `(a, b) = (I(p, W) - γ/2, I(p, V) + γ/2)`.
pub fn threshold_params(p: &Dist, pair: &WiretapPair, gamma: f64) -> Result<(f64, f64)> {
    Ok((mutual_information(p, pair.main())? - gamma / 2.0, mutual_information(p, pair.wiretap())? + gamma / 2.0))
}

/// Slack below which a rate constraint counts as tight and is rejected.
pub const ACHIEVABILITY_TOL: f64 = 1e-9;

/// Parameters under which the ensemble bounds decay at rate `2^{-nγ/2}`:
/// `M_t = round(2^{n R_t})` and thresholds from [`threshold_params`].
///
/// The rate tuple must satisfy `R_total < I(p, W) - γ` and
/// `R_total - R_t > I(p, V) + γ` for every `t`, each with margin
/// [`ACHIEVABILITY_TOL`].
pub fn achievability_params(p: &Dist, pair: &WiretapPair, rt: &RateTuple, gamma: f64, n: usize) -> Result<Achievability> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let i_main = mutual_information(p, pair.main())?;
    let i_wiretap = mutual_information(p, pair.wiretap())?;
    let total = rt.total();
    if total > i_main - gamma - ACHIEVABILITY_TOL {
        return Err(Error::RateViolation {
            constraint: "total-rate",
            detail: format!("R_total = {total} must stay below I(p, W) - gamma = {}", i_main - gamma),
        });
    }
    for (t, r) in rt.rates().iter().enumerate() {
        if total - r < i_wiretap + gamma + ACHIEVABILITY_TOL {
            return Err(Error::RateViolation {
                constraint: "dummy-rate",
                detail: format!(
                    "message {}: R_total - R_t = {} must exceed I(p, V) + gamma = {}",
                    t + 1,
                    total - r,
                    i_wiretap + gamma
                ),
            });
        }
    }
    let nf = n as f64;
    let sizes: Vec<usize> = rt.rates().iter().map(|r| ((nf * r).exp2().round() as usize).max(1)).collect();
    let (a, b) = threshold_params(p, pair, gamma)?;
    let inputs = BoundInputs::new(pair.clone(), p.clone(), n, sizes, a, b)?;
    let total_slack = inputs.total_size() / (nf * total).exp2();
    let dummy_slack = (0..rt.len()).map(|t| (nf * (total - rt.rates()[t])).exp2() / inputs.dummy_size(t)).collect();
    Ok(Achievability { inputs, i_main, i_wiretap, total_slack, dummy_slack })
}

/// Monte Carlo estimate of every message error of `code`, as
/// `(mean, standard error)` per message.
pub fn monte_carlo_errors(code: &MultiplexCode, bi: &BoundInputs, samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let w = bi.pair.main();
    let decoder = ThresholdDecoder::new(code, w, &bi.p)?;
    let rows: Vec<WeightedIndex<f64>> =
        w.rows().iter().map(|r| WeightedIndex::new(r).expect("stochastic row")).collect();
    let mut rng = stream(seed, 0);
    let mut counts = vec![0usize; code.message_count()];
    let mut y = vec![0; code.n()];
    for _ in 0..samples {
        let j = rng.random_range(0..code.len());
        for (ys, &xs) in y.iter_mut().zip(&code.codewords()[j]) {
            *ys = rows[xs].sample(&mut rng);
        }
        let decoded = decoder.decode_index(&y);
        for (t, c) in counts.iter_mut().enumerate() {
            if decoded.is_none_or(|d| code.component_of(d, t) != code.component_of(j, t)) {
                *c += 1;
            }
        }
    }
    let s = samples as f64;
    Ok(counts
        .into_iter()
        .map(|c| {
            let m = c as f64 / s;
            (m, (m * (1.0 - m) / s).sqrt())
        })
        .collect())
}
