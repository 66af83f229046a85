//! Finite alphabets, distributions and discrete memoryless channels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, PROB_TOL};

/// `x log2 x` with the convention `0 log 0 = 0`.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

fn check_probs(probs: &[f64], what: &str) -> std::result::Result<(), String> {
    if probs.is_empty() {
        return Err(format!("{what} is empty"));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(format!("{what} entry {i} = {p} is negative or not finite"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(format!("{what} sums to {sum}, not 1"));
    }
    Ok(())
}

/// A probability distribution over `{0, …, len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    /// Validates and wraps `probs`. Inputs are never renormalised.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, "distribution").map_err(Error::InvalidDist)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        Self { probs: vec![1.0 / size as f64; size] }
    }

    pub fn point(size: usize, symbol: usize) -> Self {
        assert!(symbol < size);
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Self { probs }
    }

    /// Builds a distribution from nonnegative weights by normalising them.
    /// Used by the optimisers, which work on unnormalised parameters.
    pub(crate) fn from_weights(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        Self { probs: weights.iter().map(|w| w / total).collect() }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// Shannon entropy `-Σ p log2 p` in bits.
pub fn entropy(p: &Dist) -> f64 {
    -p.probs.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Kullback-Leibler divergence `D(p‖q)` in bits over raw probability slices.
///
/// Returns `f64::INFINITY` when `p` puts mass where `q` has none.
pub fn divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc += pi * (pi / qi).log2();
        }
    }
    acc.max(0.0)
}

/// L1 distance between two probability vectors.
pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// A discrete memoryless channel, `rows[x][y] = W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dmc {
    in_size: usize,
    out_size: usize,
    rows: Vec<Vec<f64>>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let in_size = rows.len();
        if in_size == 0 {
            return Err(Error::InvalidChannel("channel has no input symbols".into()));
        }
        let out_size = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != out_size {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {out_size}",
                    row.len()
                )));
            }
            check_probs(row, &format!("row {x}")).map_err(Error::InvalidChannel)?;
        }
        Ok(Self { in_size, out_size, rows })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "crossover {p} outside [0, 1]");
        Self { in_size: 2, out_size: 2, rows: vec![vec![1.0 - p, p], vec![p, 1.0 - p]] }
    }

    pub fn identity(size: usize) -> Self {
        let rows = (0..size).map(|x| Dist::point(size, x).probs).collect();
        Self { in_size: size, out_size: size, rows }
    }

    /// A channel whose every row equals `row`: the output carries no
    /// information about the input.
    pub fn constant(in_size: usize, row: &Dist) -> Self {
        Self { in_size, out_size: row.len(), rows: vec![row.probs.clone(); in_size] }
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Relabels input and output symbols: `out.rows[i][j] = rows[in_perm[i]][out_perm[j]]`.
    pub fn permuted(&self, in_perm: &[usize], out_perm: &[usize]) -> Self {
        let rows = in_perm
            .iter()
            .map(|&x| out_perm.iter().map(|&y| self.rows[x][y]).collect())
            .collect();
        Self { in_size: self.in_size, out_size: self.out_size, rows }
    }
}

/// A main channel and a wiretap channel driven by the same input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiretapPair {
    main: Dmc,
    wiretap: Dmc,
}

impl WiretapPair {
    pub fn new(main: Dmc, wiretap: Dmc) -> Result<Self> {
        if main.in_size != wiretap.in_size {
            return Err(Error::DimensionMismatch(format!(
                "main channel has {} inputs, wiretap channel has {}",
                main.in_size, wiretap.in_size
            )));
        }
        Ok(Self { main, wiretap })
    }

    pub fn main(&self) -> &Dmc {
        &self.main
    }

    pub fn wiretap(&self) -> &Dmc {
        &self.wiretap
    }

    pub fn in_size(&self) -> usize {
        self.main.in_size
    }
}

/// An input word paired with an output word of the same length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointWord {
    x_word: Vec<usize>,
    y_word: Vec<usize>,
}

impl JointWord {
    pub fn new(x_word: Vec<usize>, y_word: Vec<usize>) -> Result<Self> {
        if x_word.is_empty() || x_word.len() != y_word.len() {
            return Err(Error::DimensionMismatch(format!(
                "joint word lengths {} and {} must be equal and positive",
                x_word.len(),
                y_word.len()
            )));
        }
        Ok(Self { x_word, y_word })
    }

    pub fn x_word(&self) -> &[usize] {
        &self.x_word
    }

    pub fn y_word(&self) -> &[usize] {
        &self.y_word
    }

    pub fn len(&self) -> usize {
        self.x_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_word.is_empty()
    }
}

fn check_input(p: &Dist, w: &Dmc) -> Result<()> {
    if p.len() != w.in_size {
        return Err(Error::DimensionMismatch(format!(
            "input distribution has {} symbols, channel has {} inputs",
            p.len(),
            w.in_size
        )));
    }
    Ok(())
}

/// The output distribution `P_X W`.
pub fn output_dist(p: &Dist, w: &Dmc) -> Result<Dist> {
    check_input(p, w)?;
    Ok(Dist { probs: output_probs(p.probs(), w) })
}

pub(crate) fn output_probs(p: &[f64], w: &Dmc) -> Vec<f64> {
    let mut out = vec![0.0; w.out_size];
    for (px, row) in p.iter().zip(&w.rows) {
        if *px == 0.0 {
            continue;
        }
        for (o, wy) in out.iter_mut().zip(row) {
            *o += px * wy;
        }
    }
    out
}

/// `I(X;Y) = H(Y) - H(Y|X)` in bits.
pub fn mutual_information(p: &Dist, w: &Dmc) -> Result<f64> {
    check_input(p, w)?;
    Ok(mutual_information_unchecked(p.probs(), w))
}

pub(crate) fn mutual_information_unchecked(p: &[f64], w: &Dmc) -> f64 {
    let q = output_probs(p, w);
    // Σ_x p(x) D(W_x ‖ q) avoids the cancellation of H(Y) - H(Y|X).
    let mut acc = 0.0;
    for (px, row) in p.iter().zip(&w.rows) {
        if *px > 0.0 {
            acc += px * divergence(row, &q);
        }
    }
    acc.max(0.0)
}

/// `W^n(y^n | x^n) = Π W(y_i | x_i)`.
pub fn product_extend(w: &Dmc, x_word: &[usize], y_word: &[usize]) -> Result<f64> {
    if x_word.len() != y_word.len() {
        return Err(Error::DimensionMismatch(format!(
            "input word has length {}, output word has length {}",
            x_word.len(),
            y_word.len()
        )));
    }
    let mut prob = 1.0;
    for (&x, &y) in x_word.iter().zip(y_word) {
        if x >= w.in_size {
            return Err(Error::SymbolOutOfRange { symbol: x, size: w.in_size });
        }
        if y >= w.out_size {
            return Err(Error::SymbolOutOfRange { symbol: y, size: w.out_size });
        }
        prob *= w.rows[x][y];
    }
    Ok(prob)
}

/// The cascade `UW`: first `u`, then `w`.
pub fn cascade(u: &Dmc, w: &Dmc) -> Result<Dmc> {
    if u.out_size != w.in_size {
        return Err(Error::DimensionMismatch(format!(
            "first channel has {} outputs, second has {} inputs",
            u.out_size, w.in_size
        )));
    }
    let rows = u.rows.iter().map(|row| output_probs(row, w)).collect();
    Ok(Dmc { in_size: u.in_size, out_size: w.out_size, rows })
}

/// Relative singular-value cutoff for [`is_full_rank`].
pub const RANK_TOL: f64 = 1e-10;

/// Whether the rows `V(·|x)` are linearly independent.
pub fn is_full_rank(v: &Dmc) -> bool {
    if v.in_size > v.out_size {
        return false;
    }
    let m = DMatrix::from_fn(v.in_size, v.out_size, |i, j| v.rows[i][j]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return false;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count() == v.in_size
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Dist::new(vec![1.0, 0.0]).unwrap()), 0.0);
        assert!(close(entropy(&Dist::uniform(2)), 1.0, 1e-15));
        // -(0.2 log2 0.2 + 0.8 log2 0.8) evaluated with mpmath at 50 digits
        assert!(close(entropy(&Dist::new(vec![0.2, 0.8]).unwrap()), 0.7219280948873623, 1e-12));
    }

    #[test]
    fn mutual_information_examples() {
        let u = Dist::uniform(2);
        assert!(close(mutual_information(&u, &Dmc::identity(2)).unwrap(), 1.0, 1e-15));
        let flat = Dmc::constant(3, &Dist::new(vec![0.3, 0.7]).unwrap());
        let p = Dist::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(mutual_information(&p, &flat).unwrap(), 0.0);
        let bsc = Dmc::bsc(0.1);
        assert!(close(mutual_information(&u, &bsc).unwrap(), 1.0 - binary_entropy(0.1), 1e-12));
        assert!(close(mutual_information(&u, &bsc).unwrap(), 0.531004, 1e-6));
        assert!(matches!(
            mutual_information(&Dist::uniform(3), &bsc),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn product_extend_examples() {
        let bsc = Dmc::bsc(0.1);
        assert_eq!(product_extend(&bsc, &[1], &[0]).unwrap(), 0.1);
        assert_eq!(product_extend(&Dmc::identity(3), &[2, 0, 1], &[2, 0, 1]).unwrap(), 1.0);
        assert!(close(product_extend(&bsc, &[0, 0], &[0, 1]).unwrap(), 0.09, 1e-15));
        assert!(matches!(
            product_extend(&bsc, &[0, 2], &[0, 1]),
            Err(Error::SymbolOutOfRange { symbol: 2, size: 2 })
        ));
    }

    #[test]
    fn cascade_examples() {
        let w = Dmc::bsc(0.2);
        assert_eq!(cascade(&Dmc::identity(2), &w).unwrap(), w);
        let u = Dmc::bsc(0.1);
        assert_eq!(cascade(&u, &Dmc::identity(2)).unwrap(), u);
        let c = cascade(&u, &w).unwrap();
        assert!(close(c.prob(0, 1), 0.26, 1e-15));
        assert!(close(c.prob(1, 0), 0.26, 1e-15));
        assert!(cascade(&Dmc::identity(3), &w).is_err());
    }

    #[test]
    fn output_dist_examples() {
        let sym = Dmc::new(vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]]).unwrap();
        let out = output_dist(&Dist::uniform(3), &sym).unwrap();
        assert!(out.probs().iter().all(|&q| close(q, 1.0 / 3.0, 1e-15)));
        assert_eq!(output_dist(&Dist::point(3, 1), &sym).unwrap().probs(), sym.row(1));
        let out = output_dist(&Dist::new(vec![0.3, 0.7]).unwrap(), &Dmc::bsc(0.1)).unwrap();
        assert!(close(out.probs()[0], 0.34, 1e-15) && close(out.probs()[1], 0.66, 1e-15));
    }

    #[test]
    fn full_rank_examples() {
        assert!(is_full_rank(&Dmc::identity(3)));
        let dup = Dmc::new(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        assert!(!is_full_rank(&dup));
        assert!(is_full_rank(&Dmc::bsc(0.3)));
        assert!(!is_full_rank(&Dmc::bsc(0.5)));
        // more inputs than outputs can never be independent
        let wide = Dmc::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        assert!(!is_full_rank(&wide));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(Dist::new(vec![0.5, 0.6]).is_err());
        assert!(Dist::new(vec![-0.1, 1.1]).is_err());
        assert!(Dist::new(vec![0.5, 0.5 + 1e-10]).is_err());
        assert!(Dmc::new(vec![vec![0.5, 0.5], vec![0.9, 0.2]]).is_err());
        assert!(Dmc::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(WiretapPair::new(Dmc::identity(2), Dmc::identity(3)).is_err());
        assert!(JointWord::new(vec![0, 1], vec![0]).is_err());
        assert!(JointWord::new(vec![], vec![]).is_err());
    }

    #[test]
    fn divergence_conventions() {
        assert_eq!(divergence(&[1.0, 0.0], &[0.0, 1.0]), f64::INFINITY);
        assert_eq!(divergence(&[0.0, 1.0], &[0.5, 0.5]), 1.0);
        assert_eq!(divergence(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }
}
