//! The random multiplex codebook and its decoders.
//!
//! A code for `T` messages with sizes `(M_1, …, M_T)` holds one codeword per
//! message tuple, stored in row-major order with the first message most
//! significant. Message indices are 0-based throughout the API.
//!
//! The threshold decoder accepts `y` for codeword `x` when
//! `W^n(y|x) / (pW)^n(y) > 2^{an}`, and decodes to a tuple only when exactly
//! one codeword accepts `y`; otherwise it erases.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{output_probs, Dist, Dmc};
use crate::{Error, Result};

/// Largest number of codewords a code may have.
pub const MAX_CODEWORDS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexCode {
    n: usize,
    sizes: Vec<usize>,
    codewords: Vec<Vec<usize>>,
    threshold_a: f64,
    input_dist: Dist,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Tuple(Vec<usize>),
    Erasure,
}

impl DecodeOutcome {
    pub fn component(&self, t: usize) -> Option<usize> {
        match self {
            DecodeOutcome::Tuple(k) => Some(k[t]),
            DecodeOutcome::Erasure => None,
        }
    }
}

fn codeword_count(sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("a code needs at least one message".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("message sizes must be at least 1".into()));
    }
    sizes
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .filter(|&c| c <= MAX_CODEWORDS)
        .ok_or_else(|| Error::BudgetExceeded {
            what: "codebook".into(),
            required: sizes.iter().map(|&m| m as u128).product(),
            limit: MAX_CODEWORDS as u64,
        })
}

/// Draws every codeword i.i.d. from `p^n` with a ChaCha8 stream seeded by
/// `seed`. Codewords are drawn in row-major tuple order, symbol by symbol.
pub fn generate_codebook(p: &Dist, n: usize, sizes: &[usize], threshold_a: f64, seed: u64) -> Result<MultiplexCode> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
    }
    if !threshold_a.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold {threshold_a} is not finite")));
    }
    let count = codeword_count(sizes)?;
    let sampler = WeightedIndex::new(p.probs()).expect("validated distribution");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codewords = (0..count).map(|_| (0..n).map(|_| sampler.sample(&mut rng)).collect()).collect();
    Ok(MultiplexCode { n, sizes: sizes.to_vec(), codewords, threshold_a, input_dist: p.clone(), seed })
}

impl MultiplexCode {
    /// Wraps explicit codewords, e.g. a hand-built or parsed codebook.
    pub fn from_codewords(
        n: usize,
        sizes: Vec<usize>,
        codewords: Vec<Vec<usize>>,
        threshold_a: f64,
        input_dist: Dist,
        seed: u64,
    ) -> Result<Self> {
        let count = codeword_count(&sizes)?;
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
        }
        if codewords.len() != count {
            return Err(Error::DimensionMismatch(format!(
                "{} codewords supplied, message sizes need {count}",
                codewords.len()
            )));
        }
        for word in &codewords {
            if word.len() != n {
                return Err(Error::DimensionMismatch(format!("codeword of length {} in a length-{n} code", word.len())));
            }
            if let Some(&s) = word.iter().find(|&&s| s >= input_dist.len()) {
                return Err(Error::SymbolOutOfRange { symbol: s, size: input_dist.len() });
            }
        }
        Ok(Self { n, sizes, codewords, threshold_a, input_dist, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn message_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn threshold_a(&self) -> f64 {
        self.threshold_a
    }

    pub fn input_dist(&self) -> &Dist {
        &self.input_dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Dummy size `L_t = Π M / M_t`.
    pub fn dummy_size(&self, t: usize) -> usize {
        self.codewords.len() / self.sizes[t]
    }

    pub fn index_of(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.sizes.len() {
            return Err(Error::IndexOutOfRange(format!(
                "tuple has {} components, code has {} messages",
                tuple.len(),
                self.sizes.len()
            )));
        }
        let mut idx = 0;
        for (t, (&k, &m)) in tuple.iter().zip(&self.sizes).enumerate() {
            if k >= m {
                return Err(Error::IndexOutOfRange(format!("message {t} index {k} not below size {m}")));
            }
            idx = idx * m + k;
        }
        Ok(idx)
    }

    pub fn tuple_of(&self, mut index: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.sizes.len()];
        for (slot, &m) in tuple.iter_mut().zip(&self.sizes).rev() {
            *slot = index % m;
            index /= m;
        }
        tuple
    }

    /// Component `t` of the tuple at row-major `index`.
    pub fn component_of(&self, index: usize, t: usize) -> usize {
        let stride: usize = self.sizes[t + 1..].iter().product();
        (index / stride) % self.sizes[t]
    }

    pub fn encode(&self, tuple: &[usize]) -> Result<&[usize]> {
        Ok(&self.codewords[self.index_of(tuple)?])
    }

    /// Encodes message `k` of slot `t`, filling every other slot with a
    /// uniformly drawn dummy message.
    pub fn stochastic_encode(&self, t: usize, k: usize, seed: u64) -> Result<&[usize]> {
        if t >= self.sizes.len() {
            return Err(Error::IndexOutOfRange(format!("message slot {t} of {}", self.sizes.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tuple: Vec<usize> = self
            .sizes
            .iter()
            .enumerate()
            .map(|(s, &m)| if s == t { k } else { rng.random_range(0..m) })
            .collect();
        self.encode(&tuple)
    }

    /// Text export: `key = value` header lines, then one codeword per line.
    pub fn to_text(&self) -> String {
        let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "sizes = {}", join(&mut self.sizes.iter().map(|m| m.to_string())));
        let _ = writeln!(out, "threshold_a = {:?}", self.threshold_a);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "input_dist = {}", join(&mut self.input_dist.probs().iter().map(|p| format!("{p:?}"))));
        for word in &self.codewords {
            let _ = writeln!(out, "{}", join(&mut word.iter().map(|s| s.to_string())));
        }
        out
    }

    pub fn from_text(src: &str) -> Result<Self> {
        let mut n = None;
        let mut sizes = None;
        let mut threshold = None;
        let mut seed = None;
        let mut dist = None;
        let mut words = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let value = value.trim();
                let nums = |v: &str| -> Result<Vec<f64>> {
                    v.split_whitespace().map(|s| s.parse::<f64>().map_err(|e| err(format!("{s}: {e}")))).collect()
                };
                match key.trim() {
                    "n" => n = Some(value.parse::<usize>().map_err(|e| err(format!("n: {e}")))?),
                    "sizes" => {
                        sizes = Some(
                            value
                                .split_whitespace()
                                .map(|s| s.parse::<usize>().map_err(|e| err(format!("sizes: {e}"))))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    "threshold_a" => threshold = Some(value.parse::<f64>().map_err(|e| err(format!("threshold_a: {e}")))?),
                    "seed" => seed = Some(value.parse::<u64>().map_err(|e| err(format!("seed: {e}")))?),
                    "input_dist" => dist = Some(Dist::new(nums(value)?).map_err(|e| err(e.to_string()))?),
                    other => return Err(err(format!("unknown header field `{other}`"))),
                }
            } else {
                let word = line
                    .split_whitespace()
                    .map(|s| s.parse::<usize>().map_err(|e| err(format!("symbol {s}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                words.push(word);
            }
        }
        let missing = |f: &str| Error::Parse { line: 0, message: format!("missing header field `{f}`") };
        Self::from_codewords(
            n.ok_or_else(|| missing("n"))?,
            sizes.ok_or_else(|| missing("sizes"))?,
            words,
            threshold.ok_or_else(|| missing("threshold_a"))?,
            dist.ok_or_else(|| missing("input_dist"))?,
            seed.ok_or_else(|| missing("seed"))?,
        )
    }
}

/// Log-domain tables for decoding one code over one channel.
#[derive(Debug, Clone)]
pub struct ThresholdDecoder<'a> {
    code: &'a MultiplexCode,
    /// `log2 W(y|x)`, `-inf` for zero entries.
    log_w: Vec<Vec<f64>>,
    /// `log2 (pW)(y)`.
    log_q: Vec<f64>,
    /// `a·n`.
    threshold: f64,
}

impl<'a> ThresholdDecoder<'a> {
    /// `p` is the generation distribution; the reference output law is the
    /// i.i.d. product `(pW)^n`.
    pub fn new(code: &'a MultiplexCode, w: &Dmc, p: &Dist) -> Result<Self> {
        if p.len() != w.in_size() {
            return Err(Error::DimensionMismatch(format!(
                "input distribution has {} symbols, channel has {} inputs",
                p.len(),
                w.in_size()
            )));
        }
        if code.input_dist.len() != w.in_size() {
            return Err(Error::DimensionMismatch("code alphabet does not match channel input".into()));
        }
        let log_w = w.rows().iter().map(|row| row.iter().map(|v| v.log2()).collect()).collect();
        let log_q = output_probs(p.probs(), w).iter().map(|q| q.log2()).collect();
        Ok(Self { code, log_w, log_q, threshold: code.threshold_a * code.n as f64 })
    }

    /// `log2 [W^n(y|x) / (pW)^n(y)]`.
    pub fn density(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&a, &b)| self.log_w[a][b] - self.log_q[b]).sum()
    }

    pub fn accepts(&self, x: &[usize], y: &[usize]) -> bool {
        self.density(x, y) > self.threshold
    }

    /// Row-major index of the unique accepting codeword, if there is one.
    pub fn decode_index(&self, y: &[usize]) -> Option<usize> {
        let mut found = None;
        for (j, x) in self.code.codewords.iter().enumerate() {
            if self.accepts(x, y) {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }

    pub fn decode(&self, y: &[usize]) -> DecodeOutcome {
        match self.decode_index(y) {
            Some(j) => DecodeOutcome::Tuple(self.code.tuple_of(j)),
            None => DecodeOutcome::Erasure,
        }
    }
}

fn check_word(y: &[usize], n: usize, w: &Dmc) -> Result<()> {
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("received word has length {}, code has {n}", y.len())));
    }
    if let Some(&s) = y.iter().find(|&&s| s >= w.out_size()) {
        return Err(Error::SymbolOutOfRange { symbol: s, size: w.out_size() });
    }
    Ok(())
}

pub fn threshold_decode(code: &MultiplexCode, w: &Dmc, p: &Dist, y: &[usize]) -> Result<DecodeOutcome> {
    check_word(y, code.n, w)?;
    Ok(ThresholdDecoder::new(code, w, p)?.decode(y))
}

/// Maximum-likelihood decoding; ties go to the smallest row-major index.
pub fn ml_decode_index(code: &MultiplexCode, w: &Dmc, y: &[usize]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, x) in code.codewords.iter().enumerate() {
        let lik: f64 = x.iter().zip(y).map(|(&a, &b)| w.prob(a, b)).product();
        if lik > best.1 {
            best = (j, lik);
        }
    }
    best.0
}

pub fn ml_decode(code: &MultiplexCode, w: &Dmc, y: &[usize]) -> Result<DecodeOutcome> {
    check_word(y, code.n, w)?;
    Ok(DecodeOutcome::Tuple(code.tuple_of(ml_decode_index(code, w, y))))
}
