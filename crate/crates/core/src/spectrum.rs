//! Exact information-density spectra for i.i.d. inputs through memoryless
//! channels.
//!
//! For input distribution `p` and channel `w`, the blocklength-`n` spectrum is
//! the law of `(1/n) log2 [W^n(Y^n|X^n) / (pW)^n(Y^n)]` under
//! `X^n ~ p^n`, `Y^n ~ W^n(·|X^n)`. Because the density is a sum of i.i.d.
//! single-letter terms, the spectrum is built by repeated exact convolution.
//!
//! Atoms are stored by their un-normalised total (the sum over symbols) so
//! that merging is done on the quantity that is actually summed; values
//! exposed to callers are always per symbol.

use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{output_probs, Dist, Dmc};
use crate::{Error, Result};

/// Atoms whose totals differ by less than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Hard cap on the number of atoms a spectrum may hold.
pub const MAX_ATOMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    n: usize,
    /// `(total density in bits, mass)`, strictly increasing in total.
    atoms: Vec<(f64, f64)>,
}

impl Spectrum {
    /// A single atom at per-symbol `value` for blocklength `n`.
    pub fn deterministic(value: f64, n: usize) -> Self {
        assert!(n >= 1);
        Self { n, atoms: vec![(value * n as f64, 1.0)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(value in bits per symbol, mass)` pairs in increasing value order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n as f64;
        self.atoms.iter().map(move |&(total, mass)| (total / n, mass))
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.atoms[0].0 / self.n as f64
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0 / self.n as f64
    }

    /// `Pr{value < a}`.
    pub fn tail_below(&self, a: f64) -> f64 {
        self.atoms().take_while(|&(v, _)| v < a).map(|(_, m)| m).sum()
    }

    /// `Pr{value > b}`.
    pub fn tail_above(&self, b: f64) -> f64 {
        self.atoms().filter(|&(v, _)| v > b).map(|(_, m)| m).sum()
    }

    /// Mean density in bits per symbol.
    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, m)| v * m).sum()
    }

    /// Two-column `value,mass` CSV for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mass\n");
        for (v, m) in self.atoms() {
            let _ = writeln!(out, "{v},{m}");
        }
        out
    }
}

/// Sorts `(total, mass)` pairs and merges neighbours closer than [`MERGE_TOL`].
pub(crate) fn merge_atoms(mut raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    let mut anchor = f64::NEG_INFINITY;
    for (total, mass) in raw {
        match merged.last_mut() {
            Some(last) if total - anchor < MERGE_TOL => last.1 += mass,
            _ => {
                anchor = total;
                merged.push((total, mass));
            }
        }
    }
    merged
}

/// The blocklength-1 spectrum of `p` through `w`.
pub fn single_letter_spectrum(p: &Dist, w: &Dmc) -> Result<Spectrum> {
    if p.len() != w.in_size() {
        return Err(Error::DimensionMismatch(format!(
            "input distribution has {} symbols, channel has {} inputs",
            p.len(),
            w.in_size()
        )));
    }
    let q = output_probs(p.probs(), w);
    let mut raw = Vec::new();
    for (x, &px) in p.probs().iter().enumerate() {
        for (y, &wy) in w.row(x).iter().enumerate() {
            let joint = px * wy;
            if joint > 0.0 {
                assert!(q[y] > 0.0, "output symbol {y} has zero probability but positive joint mass");
                raw.push(((wy / q[y]).log2(), joint));
            }
        }
    }
    Ok(Spectrum { n: 1, atoms: merge_atoms(raw) })
}

/// The spectrum of the sum of independent draws from `s` and `base`,
/// normalised to blocklength `s.n + base.n`.
pub fn convolve_spectrum(s: &Spectrum, base: &Spectrum) -> Result<Spectrum> {
    let pairs = s.atoms.len().saturating_mul(base.atoms.len());
    let mut raw = Vec::with_capacity(pairs.min(MAX_ATOMS * 4));
    for &(ta, ma) in &s.atoms {
        for &(tb, mb) in &base.atoms {
            raw.push((ta + tb, ma * mb));
        }
    }
    let atoms = merge_atoms(raw);
    if atoms.len() > MAX_ATOMS {
        return Err(Error::SpectrumTooLarge { atoms: atoms.len(), cap: MAX_ATOMS });
    }
    Ok(Spectrum { n: s.n + base.n, atoms })
}

/// The blocklength-`n` spectrum of `p` through `w` (i.i.d. inputs).
pub fn spectrum_at(p: &Dist, w: &Dmc, n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
    }
    let base = single_letter_spectrum(p, w)?;
    let mut acc = base.clone();
    for _ in 1..n {
        acc = convolve_spectrum(&acc, &base)?;
    }
    Ok(acc)
}
