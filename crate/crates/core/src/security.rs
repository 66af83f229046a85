//! Exact per-message error and secrecy of a multiplex code by enumeration of
//! every output word.
//!
//! Output words of length `n` over an alphabet of size `q` are indexed in
//! mixed radix with the first symbol most significant.
//!
//! Parallel loops split the outcome space into fixed chunks of
//! [`CHUNK`] indices, sum each chunk sequentially and then add the chunk
//! partials in index order. Results are therefore identical run to run and
//! independent of the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{divergence, l1_distance, xlog2x, Dist, Dmc, WiretapPair};
use crate::code::{MultiplexCode, ThresholdDecoder};
use crate::{Error, Result, ENUMERATION_BUDGET};

/// Outcome indices per parallel work unit.
pub const CHUNK: usize = 4096;

/// Tolerance of the internal check that both leakage routes agree.
pub const LEAKAGE_ROUTE_TOL: f64 = 1e-9;

pub(crate) fn outcome_count(q: usize, n: usize, what: &str) -> Result<usize> {
    let required = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded { what: what.into(), required, limit: ENUMERATION_BUDGET });
    }
    Ok(required as usize)
}

pub(crate) fn word_of(mut index: usize, q: usize, n: usize, out: &mut [usize]) {
    debug_assert_eq!(out.len(), n);
    for s in out.iter_mut().rev() {
        *s = index % q;
        index /= q;
    }
}

/// `V^n(·|x)` as a flat vector over all output words.
pub(crate) fn word_output(v: &Dmc, x: &[usize]) -> Vec<f64> {
    let q = v.out_size();
    let mut dist = vec![1.0];
    for &sym in x {
        let row = v.row(sym);
        let mut next = vec![0.0; dist.len() * q];
        for (j, &m) in dist.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (z, &vz) in row.iter().enumerate() {
                next[j * q + z] = m * vz;
            }
        }
        dist = next;
    }
    dist
}

/// `(pV)^n` as a flat vector.
pub(crate) fn product_output(single: &[f64], n: usize) -> Vec<f64> {
    let mut dist = vec![1.0];
    for _ in 0..n {
        dist = dist.iter().flat_map(|&m| single.iter().map(move |&s| m * s)).collect();
    }
    dist
}

/// Eavesdropper output distributions conditioned on the value of one message
/// (or a group of messages), averaged over all other messages.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalOutput {
    pub n: usize,
    pub out_size: usize,
    /// `per_k[k][z]`, one distribution per message value.
    pub per_k: Vec<Vec<f64>>,
}

impl ConditionalOutput {
    /// Uniform mixture over message values: the unconditional output law.
    pub fn mixture(&self) -> Vec<f64> {
        let m = self.per_k.len() as f64;
        let len = self.per_k[0].len();
        (0..len).map(|z| self.per_k.iter().map(|d| d[z]).sum::<f64>() / m).collect()
    }

    pub fn dist(&self, k: usize) -> Result<Dist> {
        Dist::new(self.per_k[k].clone())
    }
}

fn grouped_outputs(code: &MultiplexCode, v: &Dmc, groups: usize, key: impl Fn(usize) -> usize) -> Result<ConditionalOutput> {
    if v.in_size() != code.input_dist().len() {
        return Err(Error::DimensionMismatch("wiretap input alphabet does not match the code".into()));
    }
    let len = outcome_count(v.out_size(), code.n(), "eavesdropper output space")?;
    let mut per_k = vec![vec![0.0; len]; groups];
    for (j, x) in code.codewords().iter().enumerate() {
        let out = word_output(v, x);
        for (acc, o) in per_k[key(j)].iter_mut().zip(out) {
            *acc += o;
        }
    }
    let share = groups as f64 / code.len() as f64;
    for d in &mut per_k {
        d.iter_mut().for_each(|m| *m *= share);
    }
    Ok(ConditionalOutput { n: code.n(), out_size: v.out_size(), per_k })
}

fn check_slot(code: &MultiplexCode, t: usize) -> Result<()> {
    if t >= code.message_count() {
        return Err(Error::IndexOutOfRange(format!("message slot {t} of {}", code.message_count())));
    }
    Ok(())
}

/// `per_k[k] = (1/L_t) Σ_{tuples with k_t = k} V^n(·|codeword)`.
pub fn conditional_outputs(code: &MultiplexCode, v: &Dmc, t: usize) -> Result<ConditionalOutput> {
    check_slot(code, t)?;
    grouped_outputs(code, v, code.sizes()[t], |j| code.component_of(j, t))
}

/// Conditional outputs for the joint value of the messages in `slots`
/// (mixed radix over the slots in the given order).
pub fn joint_conditional_outputs(code: &MultiplexCode, v: &Dmc, slots: &[usize]) -> Result<ConditionalOutput> {
    if slots.is_empty() {
        return Err(Error::InvalidArgument("at least one message slot is required".into()));
    }
    for (i, &t) in slots.iter().enumerate() {
        check_slot(code, t)?;
        if slots[..i].contains(&t) {
            return Err(Error::InvalidArgument(format!("message slot {t} listed twice")));
        }
    }
    let groups = slots.iter().map(|&t| code.sizes()[t]).product();
    grouped_outputs(code, v, groups, |j| slots.iter().fold(0, |acc, &t| acc * code.sizes()[t] + code.component_of(j, t)))
}

/// Error probabilities of every message under uniform messages, plus the
/// erasure probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorProfile {
    pub per_message: Vec<f64>,
    pub erasure: f64,
}

/// Exact `ε_t` for every `t`, with erasures counted as errors for all `t`.
pub fn exact_errors(code: &MultiplexCode, w: &Dmc, p: &Dist) -> Result<ErrorProfile> {
    let decoder = ThresholdDecoder::new(code, w, p)?;
    let (q, n) = (w.out_size(), code.n());
    let len = outcome_count(q, n, "receiver output space")?;
    let t_count = code.message_count();
    let chunks: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            // acc[t] for message errors, acc[t_count] for erasures
            let mut acc = vec![0.0; t_count + 1];
            let mut y = vec![0; n];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(len) {
                word_of(idx, q, n, &mut y);
                let decoded = decoder.decode_index(&y);
                for (j, x) in code.codewords().iter().enumerate() {
                    let prob: f64 = x.iter().zip(&y).map(|(&a, &b)| w.prob(a, b)).product();
                    if prob == 0.0 {
                        continue;
                    }
                    match decoded {
                        None => acc.iter_mut().for_each(|a| *a += prob),
                        Some(d) if d != j => {
                            for (t, a) in acc[..t_count].iter_mut().enumerate() {
                                if code.component_of(d, t) != code.component_of(j, t) {
                                    *a += prob;
                                }
                            }
                        }
                        Some(_) => {}
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; t_count + 1];
    for chunk in chunks {
        for (a, c) in total.iter_mut().zip(chunk) {
            *a += c;
        }
    }
    let count = code.len() as f64;
    let erasure = total[t_count] / count;
    total.truncate(t_count);
    Ok(ErrorProfile { per_message: total.into_iter().map(|e| e / count).collect(), erasure })
}

pub fn exact_error(code: &MultiplexCode, w: &Dmc, p: &Dist, t: usize) -> Result<f64> {
    check_slot(code, t)?;
    Ok(exact_errors(code, w, p)?.per_message[t])
}

/// Leakage of one message computed two ways.
#[derive(Debug, Clone, Serialize)]
pub struct Leakage {
    /// `I(K_t; Z^n)` in bits via `H(K) + H(Z) - H(K, Z)` on the joint law.
    pub joint_mi: f64,
    /// `(1/M_t) Σ_k D(Q_k V^n ‖ mixture)` in bits.
    pub avg_divergence: f64,
    /// `D(Q_k V^n ‖ mixture)` per message value.
    pub per_k_divergence: Vec<f64>,
    /// `‖mixture - Q_k V^n‖_1` per message value.
    pub per_k_l1: Vec<f64>,
}

pub fn leakage_from(co: &ConditionalOutput) -> Leakage {
    let m = co.per_k.len() as f64;
    let mix = co.mixture();
    let h_mix = -mix.iter().map(|&x| xlog2x(x)).sum::<f64>();
    let h_joint = -co.per_k.iter().flatten().map(|&x| xlog2x(x / m)).sum::<f64>();
    let joint_mi = (m.log2() + h_mix - h_joint).max(0.0);
    let per_k_divergence: Vec<f64> = co.per_k.iter().map(|d| divergence(d, &mix)).collect();
    let per_k_l1 = co.per_k.iter().map(|d| l1_distance(&mix, d)).collect();
    let avg_divergence = per_k_divergence.iter().sum::<f64>() / m;
    Leakage { joint_mi, avg_divergence, per_k_divergence, per_k_l1 }
}

/// `(I(K_t; Z^n) in bits, I(K_t; Z^n) / n)`.
///
/// Panics if the joint-law and average-divergence routes disagree by more
/// than [`LEAKAGE_ROUTE_TOL`].
pub fn exact_leakage(code: &MultiplexCode, v: &Dmc, t: usize) -> Result<(f64, f64)> {
    let co = conditional_outputs(code, v, t)?;
    let leak = leakage_from(&co);
    assert!(
        (leak.joint_mi - leak.avg_divergence).abs() <= LEAKAGE_ROUTE_TOL,
        "leakage routes disagree: {} vs {}",
        leak.joint_mi,
        leak.avg_divergence
    );
    Ok((leak.joint_mi, leak.joint_mi / code.n() as f64))
}

/// `I(K_S; Z^n)` in bits for the joint value of the messages in `slots`.
pub fn joint_leakage(code: &MultiplexCode, v: &Dmc, slots: &[usize]) -> Result<f64> {
    Ok(leakage_from(&joint_conditional_outputs(code, v, slots)?).joint_mi)
}

/// `I(K_target; Z^n | K_given)` in bits, via the chain rule.
pub fn conditional_leakage(code: &MultiplexCode, v: &Dmc, target: usize, given: usize) -> Result<f64> {
    let both = joint_leakage(code, v, &[given, target])?;
    let alone = joint_leakage(code, v, &[given])?;
    Ok((both - alone).max(0.0))
}

/// Average pairwise L1 distance among the conditional outputs; 0 for a
/// single-valued message.
pub fn vd_from(co: &ConditionalOutput) -> f64 {
    let m = co.per_k.len();
    if m < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..m {
        for k2 in k + 1..m {
            acc += 2.0 * l1_distance(&co.per_k[k], &co.per_k[k2]);
        }
    }
    acc / (m * (m - 1)) as f64
}

pub fn exact_vd(code: &MultiplexCode, v: &Dmc, t: usize) -> Result<f64> {
    Ok(vd_from(&conditional_outputs(code, v, t)?))
}

/// Per message value `k`: `(‖mixture - per_k‖_1, (1/(M-1)) Σ_{k'≠k} ‖per_k' - per_k‖_1)`.
pub fn mixture_bound_from(co: &ConditionalOutput) -> Result<Vec<(f64, f64)>> {
    let m = co.per_k.len();
    if m < 2 {
        return Err(Error::InvalidArgument("mixture bound is vacuous for a single-valued message".into()));
    }
    let mix = co.mixture();
    Ok((0..m)
        .map(|k| {
            let lhs = l1_distance(&mix, &co.per_k[k]);
            let rhs = (0..m).filter(|&k2| k2 != k).map(|k2| l1_distance(&co.per_k[k2], &co.per_k[k])).sum::<f64>()
                / (m - 1) as f64;
            (lhs, rhs)
        })
        .collect())
}

pub fn mixture_distance_bound(code: &MultiplexCode, v: &Dmc, t: usize) -> Result<Vec<(f64, f64)>> {
    mixture_bound_from(&conditional_outputs(code, v, t)?)
}

/// `D ≥ ‖·‖_1² / (2 ln 2)` with divergence in bits.
pub fn pinsker_check(d_kl: f64, d_l1: f64) -> bool {
    d_kl >= d_l1 * d_l1 / (2.0 * std::f64::consts::LN_2) - 1e-12
}

/// `Pr{(1/n) log2 W^n(Y|X)/P_Y(Y) ≤ (1/n) log2 |C| - γ} - e^{-nγ}` with `X`
/// uniform over the codebook and `P_Y` the output law it induces.
///
/// The total error `Σ_t ε_t` of any decoder is at least this value.
pub fn verdu_han_lower_bound(code: &MultiplexCode, w: &Dmc, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let (q, n) = (w.out_size(), code.n());
    let len = outcome_count(q, n, "receiver output space")?;
    let count = code.len() as f64;
    let threshold = count.log2() - n as f64 * gamma;
    let outputs: Vec<Vec<f64>> = code.codewords().iter().map(|x| word_output(w, x)).collect();
    let mut induced = vec![0.0; len];
    for out in &outputs {
        for (acc, o) in induced.iter_mut().zip(out) {
            *acc += o / count;
        }
    }
    let mut mass = 0.0;
    for out in &outputs {
        for (&wy, &py) in out.iter().zip(&induced) {
            if wy > 0.0 && (wy / py).log2() <= threshold {
                mass += wy / count;
            }
        }
    }
    Ok(mass - (-(n as f64) * gamma).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageSecurity {
    /// 1-based message slot.
    pub t: usize,
    pub size: usize,
    pub dummy_size: usize,
    pub eps: f64,
    pub leak_total: f64,
    pub leak_rate: f64,
    pub vd: f64,
    pub erasure_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub n: usize,
    pub per_message: Vec<MessageSecurity>,
}

impl SecurityReport {
    pub const CSV_HEADER: &'static str = "t,M_t,L_t,eps,leak_total_bits,leak_rate,vd,erasure_frac";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for m in &self.per_message {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                m.t, m.size, m.dummy_size, m.eps, m.leak_total, m.leak_rate, m.vd, m.erasure_frac
            );
        }
        out
    }
}

/// Evaluates every message of `code` on both channels of `pair`. `p` is the
/// distribution the decoder uses for its reference output law.
pub fn evaluate(code: &MultiplexCode, pair: &WiretapPair, p: &Dist) -> Result<SecurityReport> {
    let errors = exact_errors(code, pair.main(), p)?;
    let mut per_message = Vec::with_capacity(code.message_count());
    for t in 0..code.message_count() {
        let co = conditional_outputs(code, pair.wiretap(), t)?;
        let leak = leakage_from(&co);
        per_message.push(MessageSecurity {
            t: t + 1,
            size: code.sizes()[t],
            dummy_size: code.dummy_size(t),
            eps: errors.per_message[t],
            leak_total: leak.joint_mi,
            leak_rate: leak.joint_mi / code.n() as f64,
            vd: vd_from(&co),
            erasure_frac: errors.erasure,
        });
    }
    Ok(SecurityReport { n: code.n(), per_message })
}
