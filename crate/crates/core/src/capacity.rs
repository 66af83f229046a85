//! Channel capacity, secrecy capacity and multiplex rate regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{cascade, divergence, mutual_information, mutual_information_unchecked, output_probs, Dist, Dmc, WiretapPair};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Absolute tolerance for every rate-region comparison.
pub const REGION_TOL: f64 = 1e-9;

/// Residual below which a wiretap channel counts as a degraded version of
/// the main channel.
pub const DEGRADED_TOL: f64 = 1e-9;

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTuple {
    rates: Vec<f64>,
}

impl RateTuple {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidArgument("rate tuple needs at least one rate".into()));
        }
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidArgument(format!("rate {r} is negative or not finite")));
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionMode {
    /// Deterministic encoder: the input distribution feeds the channels directly.
    Deterministic,
    /// Stochastic encoder: a test channel precedes both channels.
    Stochastic,
}

#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub pair: WiretapPair,
    pub t_count: usize,
    pub mode: RegionMode,
}

impl RegionSpec {
    pub fn new(pair: WiretapPair, t_count: usize, mode: RegionMode) -> Result<Self> {
        if t_count == 0 {
            return Err(Error::InvalidArgument("multiplex order must be at least 1".into()));
        }
        Ok(Self { pair, t_count, mode })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SecrecySolution {
    pub value: f64,
    pub input_dist: Dist,
    /// Test channel from the auxiliary alphabet to the channel input, when
    /// prefixing one beat the direct solution.
    pub test_channel: Option<Dmc>,
    pub restarts_used: usize,
    pub certified_global: bool,
}

/// Alternating-maximisation capacity solver.
///
/// Iterates until the gap between `I(p, w)` and `max_x D(w_x ‖ pw)` is at most
/// `tol`. The returned capacity is `I(p*, w)`, the lower end of the bracket.
pub fn channel_capacity(w: &Dmc, tol: f64) -> Result<(f64, Dist)> {
    channel_capacity_with(w, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn channel_capacity_with(w: &Dmc, tol: f64, max_iterations: usize) -> Result<(f64, Dist)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut p = vec![1.0 / w.in_size() as f64; w.in_size()];
    let mut d = vec![0.0; w.in_size()];
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for _ in 0..max_iterations {
        let q = output_probs(&p, w);
        for (dx, row) in d.iter_mut().zip(w.rows()) {
            *dx = divergence(row, &q);
        }
        lower = p.iter().zip(&d).map(|(px, dx)| px * dx).sum::<f64>().max(0.0);
        upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= tol {
            let dist = Dist::from_weights(&p);
            let value = mutual_information_unchecked(dist.probs(), w);
            return Ok((value, dist));
        }
        // p(x) <- p(x) 2^{D_x} / Σ, shifted by the max for stability
        let mut total = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - upper).exp2();
            total += *px;
        }
        p.iter_mut().for_each(|px| *px /= total);
    }
    Err(Error::NoConvergence { iterations: max_iterations, lower, upper })
}

/// `I(p, W) - I(p, V)`, possibly negative.
pub fn secrecy_gap(p: &Dist, pair: &WiretapPair) -> Result<f64> {
    Ok(mutual_information(p, pair.main())? - mutual_information(p, pair.wiretap())?)
}

fn project_to_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// Looks for a stochastic `D` with `V = W D`, by accelerated projected
/// gradient on `‖W D - V‖²` with each row of `D` kept on the simplex.
///
/// Returns the degrading channel when the max-abs residual reaches
/// [`DEGRADED_TOL`].
pub fn find_degrading_channel(pair: &WiretapPair) -> Option<Dmc> {
    let w = pair.main();
    let v = pair.wiretap();
    let (nx, ny, nz) = (w.in_size(), w.out_size(), v.out_size());

    // Lipschitz constant of the gradient: 2 λ_max(WᵀW) ≤ 2 ‖W‖_F².
    let frob: f64 = w.rows().iter().flatten().map(|a| a * a).sum();
    let step = 1.0 / (2.0 * frob);

    let residual = |d: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..nx)
            .map(|x| {
                (0..nz)
                    .map(|z| (0..ny).map(|y| w.prob(x, y) * d[y][z]).sum::<f64>() - v.prob(x, z))
                    .collect()
            })
            .collect()
    };
    let max_abs = |r: &[Vec<f64>]| r.iter().flatten().fold(0.0f64, |m, a| m.max(a.abs()));

    let mut d: Vec<Vec<f64>> = vec![vec![1.0 / nz as f64; nz]; ny];
    let mut mom = d.clone();
    let mut t = 1.0f64;
    for _ in 0..50_000 {
        let r = residual(&mom);
        let mut next = mom.clone();
        for (y, row) in next.iter_mut().enumerate() {
            for (z, cell) in row.iter_mut().enumerate() {
                let grad: f64 = (0..nx).map(|x| 2.0 * w.prob(x, y) * r[x][z]).sum();
                *cell -= step * grad;
            }
            project_to_simplex(row);
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        for y in 0..ny {
            for z in 0..nz {
                mom[y][z] = next[y][z] + beta * (next[y][z] - d[y][z]);
            }
        }
        d = next;
        t = t_next;
        if max_abs(&residual(&d)) <= DEGRADED_TOL {
            // rows are on the simplex up to rounding; renormalise before validating
            let rows = d
                .iter()
                .map(|row| {
                    let s: f64 = row.iter().sum();
                    row.iter().map(|a| a / s).collect()
                })
                .collect();
            return Dmc::new(rows).ok();
        }
    }
    None
}

/// All distributions on `k` symbols whose probabilities are multiples of
/// `1/resolution`.
pub fn simplex_grid(k: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(k - 1, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(k, resolution, &mut Vec::with_capacity(k), &mut counts);
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|c| c as f64 / resolution as f64).collect())
        .collect()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Compass search maximising `f` over unconstrained parameters.
fn compass_search(mut x: Vec<f64>, f: &dyn Fn(&[f64]) -> f64, tol: f64) -> (Vec<f64>, f64) {
    let mut best = f(&x);
    let mut step = 1.0;
    let mut evals = 0usize;
    while step > tol.min(1e-6) && evals < 200_000 {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + dir * step;
                let val = f(&x);
                evals += 1;
                if val > best + 1e-15 {
                    best = val;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best)
}

fn logits_of(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&q| if q > 0.0 { q.ln() } else { -40.0 }).collect()
}

/// Best secrecy gap over input distributions with no prefixed test channel:
/// a 1/64 grid refined by local search.
fn direct_secrecy(pair: &WiretapPair, tol: f64) -> (f64, Dist) {
    let k = pair.in_size();
    // keep the grid to a few hundred thousand points on larger alphabets
    let mut resolution = 64;
    while resolution > 4 && binomial(resolution + k - 1, k - 1) > 300_000 {
        resolution /= 2;
    }
    let gap = |p: &[f64]| {
        mutual_information_unchecked(p, pair.main()) - mutual_information_unchecked(p, pair.wiretap())
    };
    let grid = simplex_grid(k, resolution);
    let (mut best_p, mut best) = grid
        .iter()
        .map(|p| (p.clone(), gap(p)))
        .fold((vec![], f64::NEG_INFINITY), |acc, (p, g)| if g > acc.1 { (p, g) } else { acc });
    let (x, refined) = compass_search(logits_of(&best_p), &|l| gap(&softmax(l)), tol);
    if refined > best {
        best = refined;
        best_p = softmax(&x);
    }
    (best, Dist::from_weights(&best_p))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Unpacks auxiliary-search parameters into `(p̃, U)`.
fn unpack(params: &[f64], aux: usize, k: usize) -> (Vec<f64>, Dmc) {
    let p = softmax(&params[..aux]);
    let rows = (0..aux).map(|a| softmax(&params[aux + a * k..aux + (a + 1) * k])).collect();
    (p, Dmc::new(rows).expect("softmax rows are stochastic"))
}

fn aux_objective(params: &[f64], aux: usize, pair: &WiretapPair) -> f64 {
    let (p, u) = unpack(params, aux, pair.in_size());
    let uw = cascade(&u, pair.main()).expect("dimensions agree");
    let uv = cascade(&u, pair.wiretap()).expect("dimensions agree");
    mutual_information_unchecked(&p, &uw) - mutual_information_unchecked(&p, &uv)
}

/// Best-effort secrecy capacity: maximises `I(X̃;Y) - I(X̃;Z)` over input
/// distributions on an auxiliary alphabet of size `|X|+1` and test channels
/// into `X`.
///
/// The direct solution (no test channel) is always one of the candidates.
/// Each of the `restarts` local searches starts from parameters drawn with a
/// seed derived from `seed` and the restart index, so the result does not
/// depend on how restarts are scheduled.
pub fn secrecy_capacity(pair: &WiretapPair, restarts: usize, tol: f64, seed: u64) -> Result<SecrecySolution> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let k = pair.in_size();
    let aux = k + 1;
    let (direct_value, direct_p) = direct_secrecy(pair, tol);

    // direct start: U is the identity on the first k auxiliary symbols
    let mut identity_start = logits_of(direct_p.probs());
    identity_start.push(-40.0);
    for a in 0..aux {
        let row: Vec<f64> = if a < k { Dist::point(k, a).probs().to_vec() } else { vec![1.0 / k as f64; k] };
        identity_start.extend(logits_of(&row));
    }

    let dim = aux + aux * k;
    let starts: Vec<Vec<f64>> = std::iter::once(identity_start)
        .chain((0..restarts).map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
            (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()
        }))
        .collect();
    let results: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|s| compass_search(s, &|x| aux_objective(x, aux, pair), tol))
        .collect();
    // first-wins on ties keeps the choice independent of thread scheduling
    let (best_params, aux_value) = results
        .into_iter()
        .fold((vec![], f64::NEG_INFINITY), |acc, (x, v)| if v > acc.1 { (x, v) } else { acc });

    let degraded = find_degrading_channel(pair).is_some();
    if degraded || aux_value <= direct_value + tol {
        return Ok(SecrecySolution {
            value: direct_value.max(0.0),
            input_dist: direct_p,
            test_channel: None,
            restarts_used: restarts,
            certified_global: degraded,
        });
    }
    let (p, u) = unpack(&best_params, aux, k);
    Ok(SecrecySolution {
        value: aux_value,
        input_dist: Dist::from_weights(&p),
        test_channel: Some(u),
        restarts_used: restarts,
        certified_global: false,
    })
}

/// Checks a certificate `(p, u)` for membership of `rt` in the multiplex
/// secrecy region.
///
/// Deterministic mode: `R_total ≤ I(p, W)` and `R_total - R_t ≥ I(p, V)` for
/// every `t`. Stochastic mode applies the same test to the cascades `uW` and
/// `uV`.
pub fn region_membership(rt: &RateTuple, spec: &RegionSpec, p: &Dist, u: Option<&Dmc>) -> Result<bool> {
    if rt.len() != spec.t_count {
        return Err(Error::DimensionMismatch(format!(
            "rate tuple has {} entries, region has order {}",
            rt.len(),
            spec.t_count
        )));
    }
    let (i_main, i_wire) = match (spec.mode, u) {
        (RegionMode::Deterministic, _) => {
            (mutual_information(p, spec.pair.main())?, mutual_information(p, spec.pair.wiretap())?)
        }
        (RegionMode::Stochastic, Some(u)) => {
            let uw = cascade(u, spec.pair.main())?;
            let uv = cascade(u, spec.pair.wiretap())?;
            (mutual_information(p, &uw)?, mutual_information(p, &uv)?)
        }
        (RegionMode::Stochastic, None) => {
            return Err(Error::MissingCertificate("stochastic mode needs a test channel".into()))
        }
    };
    let total = rt.total();
    let reliable = total <= i_main + REGION_TOL;
    let secret = rt.rates().iter().all(|r| total - r >= i_wire - REGION_TOL);
    Ok(reliable && secret)
}

/// Smallest multiplex order for which equal rates summing to `I(p, W)` keep
/// every message secret.
pub fn minimal_t(p: &Dist, pair: &WiretapPair) -> Result<usize> {
    let i_main = mutual_information(p, pair.main())?;
    let gap = i_main - mutual_information(p, pair.wiretap())?;
    if gap <= 0.0 {
        return Err(Error::NoSecrecyGap { gap });
    }
    Ok(((i_main / gap).ceil() as usize).max(1))
}

/// Splits the main-channel capacity evenly across the minimal number of
/// messages.
pub fn equal_rate_capacity_tuple(pair: &WiretapPair, tol: f64) -> Result<(RateTuple, usize, Dist)> {
    let (c, p) = channel_capacity(pair.main(), tol)?;
    let t = minimal_t(&p, pair)?;
    let rates = RateTuple::new(vec![c / t as f64; t])?;
    Ok((rates, t, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::binary_entropy;
    use proptest::prelude::*;

    fn bsc_pair(a: f64, b: f64) -> WiretapPair {
        WiretapPair::new(Dmc::bsc(a), Dmc::bsc(b)).unwrap()
    }

    #[test]
    fn capacity_examples() {
        let (c, p) = channel_capacity(&Dmc::identity(2), 1e-9).unwrap();
        assert!((c - 1.0).abs() < 1e-9);
        assert!((p.probs()[0] - 0.5).abs() < 1e-9);
        let (c, _) = channel_capacity(&Dmc::bsc(0.05), 1e-9).unwrap();
        assert!((c - (1.0 - binary_entropy(0.05))).abs() < 1e-9);
        assert!((c - 0.713603).abs() < 1e-6);
        let flat = Dmc::constant(3, &Dist::new(vec![0.2, 0.8]).unwrap());
        assert_eq!(channel_capacity(&flat, 1e-9).unwrap().0, 0.0);
    }

    #[test]
    fn capacity_of_asymmetric_channel() {
        // Z-channel with flip 0.5: C = log2(5/4), p*(1) = 2/5
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let (c, p) = channel_capacity(&z, 1e-12).unwrap();
        assert!((c - (1.25f64).log2()).abs() < 1e-9, "{c}");
        assert!((p.probs()[1] - 0.4).abs() < 1e-5);
    }

    #[test]
    fn capacity_non_convergence_is_reported() {
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        match channel_capacity_with(&z, 1e-15, 3) {
            Err(Error::NoConvergence { iterations: 3, lower, upper }) => assert!(lower < upper),
            other => panic!("unexpected {other:?}"),
        }
        assert!(channel_capacity(&z, 0.0).is_err());
    }

    #[test]
    fn secrecy_gap_examples() {
        let u = Dist::uniform(2);
        assert_eq!(secrecy_gap(&u, &bsc_pair(0.1, 0.1)).unwrap(), 0.0);
        let pair = WiretapPair::new(Dmc::identity(2), Dmc::constant(2, &u)).unwrap();
        assert!((secrecy_gap(&u, &pair).unwrap() - 1.0).abs() < 1e-15);
        let g = secrecy_gap(&u, &bsc_pair(0.05, 0.2)).unwrap();
        assert!((g - (binary_entropy(0.2) - binary_entropy(0.05))).abs() < 1e-12);
        assert!((g - 0.435531).abs() < 1e-6);
    }

    #[test]
    fn degradedness_detection() {
        let d = find_degrading_channel(&bsc_pair(0.05, 0.2)).expect("BSC(0.2) is a degraded BSC(0.05)");
        // 0.05 (1 - q) + 0.95 q = 0.2
        assert!((d.prob(0, 1) - 0.15 / 0.9).abs() < 1e-7);
        assert!(find_degrading_channel(&bsc_pair(0.2, 0.05)).is_none());
        let flat = WiretapPair::new(Dmc::bsc(0.1), Dmc::constant(2, &Dist::uniform(2))).unwrap();
        assert!(find_degrading_channel(&flat).is_some());
        assert!(find_degrading_channel(&bsc_pair(0.1, 0.1)).is_some());
    }

    #[test]
    fn secrecy_capacity_examples() {
        let s = secrecy_capacity(&bsc_pair(0.1, 0.1), 2, 1e-9, 1).unwrap();
        assert!(s.value.abs() < 1e-9);

        let s = secrecy_capacity(&bsc_pair(0.05, 0.2), 3, 1e-9, 7).unwrap();
        assert!((s.value - 0.435531).abs() < 1e-6);
        assert!((s.input_dist.probs()[0] - 0.5).abs() < 1e-3);
        assert!(s.test_channel.is_none());
        assert!(s.certified_global);
        assert_eq!(s.restarts_used, 3);

        let w = Dmc::new(vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.7, 0.2], vec![0.0, 0.2, 0.8]]).unwrap();
        let pair = WiretapPair::new(w.clone(), Dmc::constant(3, &Dist::uniform(2))).unwrap();
        let s = secrecy_capacity(&pair, 2, 1e-9, 3).unwrap();
        let (c, _) = channel_capacity(&w, 1e-10).unwrap();
        assert!((s.value - c).abs() < 1e-6, "{} vs {c}", s.value);
    }

    #[test]
    fn secrecy_capacity_is_reproducible() {
        let w = Dmc::new(vec![vec![0.9, 0.1, 0.0], vec![0.1, 0.8, 0.1], vec![0.0, 0.3, 0.7]]).unwrap();
        let v = Dmc::new(vec![vec![0.6, 0.4], vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let pair = WiretapPair::new(w, v).unwrap();
        let a = secrecy_capacity(&pair, 4, 1e-8, 11).unwrap();
        let b = secrecy_capacity(&pair, 4, 1e-8, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!(!a.certified_global || a.test_channel.is_none());
        if let Some(u) = &a.test_channel {
            assert!(u.in_size() <= 4);
        }
    }

    #[test]
    fn region_membership_examples() {
        let spec = RegionSpec::new(bsc_pair(0.05, 0.2), 2, RegionMode::Deterministic).unwrap();
        let u = Dist::uniform(2);
        let member = |r: [f64; 2]| region_membership(&RateTuple::new(r.to_vec()).unwrap(), &spec, &u, None).unwrap();
        assert!(member([0.35, 0.35]));
        assert!(!member([0.5, 0.22]));
        assert!(!member([0.6, 0.1]));

        let stochastic = RegionSpec::new(bsc_pair(0.05, 0.2), 2, RegionMode::Stochastic).unwrap();
        let rt = RateTuple::new(vec![0.35, 0.35]).unwrap();
        assert!(matches!(region_membership(&rt, &stochastic, &u, None), Err(Error::MissingCertificate(_))));
        assert!(region_membership(&rt, &stochastic, &u, Some(&Dmc::identity(2))).unwrap());
        assert!(region_membership(&RateTuple::new(vec![0.3]).unwrap(), &spec, &u, None).is_err());
    }

    #[test]
    fn minimal_t_examples() {
        let u = Dist::uniform(2);
        let flat = WiretapPair::new(Dmc::bsc(0.1), Dmc::constant(2, &u)).unwrap();
        assert_eq!(minimal_t(&u, &flat).unwrap(), 1);
        assert_eq!(minimal_t(&u, &bsc_pair(0.05, 0.2)).unwrap(), 2);
        // closed form: (1 - h(0.1)) / (h(0.11) - h(0.1)) = 17.17…
        assert_eq!(minimal_t(&u, &bsc_pair(0.1, 0.11)).unwrap(), 18);
        assert!(matches!(minimal_t(&u, &bsc_pair(0.1, 0.1)), Err(Error::NoSecrecyGap { .. })));
        assert!(minimal_t(&u, &bsc_pair(0.2, 0.1)).is_err());
    }

    #[test]
    fn equal_rate_tuple_examples() {
        let pair = bsc_pair(0.05, 0.2);
        let (rt, t, p) = equal_rate_capacity_tuple(&pair, 1e-10).unwrap();
        assert_eq!(t, 2);
        assert!(rt.rates().iter().all(|r| (r - 0.356802).abs() < 1e-6));
        let spec = RegionSpec::new(pair, t, RegionMode::Deterministic).unwrap();
        assert!(region_membership(&rt, &spec, &p, None).unwrap());

        let u = Dist::uniform(2);
        let pair = WiretapPair::new(Dmc::identity(2), Dmc::constant(2, &u)).unwrap();
        let (rt, t, _) = equal_rate_capacity_tuple(&pair, 1e-10).unwrap();
        assert_eq!(t, 1);
        assert!((rt.rates()[0] - 1.0).abs() < 1e-9);

        assert!(equal_rate_capacity_tuple(&bsc_pair(0.1, 0.1), 1e-10).is_err());
    }

    #[test]
    fn grid_size() {
        assert_eq!(simplex_grid(2, 64).len(), 65);
        assert_eq!(simplex_grid(3, 4).len(), 15);
        assert!(simplex_grid(3, 8).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    fn stochastic_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Dmc> {
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, cols), rows).prop_map(move |raw| {
            Dmc::new(
                raw.into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        let mut row: Vec<f64> = r.iter().map(|a| a / s).collect();
                        let head: f64 = row[..cols - 1].iter().sum();
                        row[cols - 1] = 1.0 - head;
                        row
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn capacity_invariant_under_relabeling(w in stochastic_matrix(3, 3)) {
            let (c, _) = channel_capacity(&w, 1e-9).unwrap();
            let permuted = w.permuted(&[2, 0, 1], &[1, 2, 0]);
            let (cp, _) = channel_capacity(&permuted, 1e-9).unwrap();
            prop_assert!((c - cp).abs() <= 2e-9);
        }

        #[test]
        fn degraded_pairs_have_nonnegative_gap(w in stochastic_matrix(2, 3), d in stochastic_matrix(3, 2)) {
            let pair = WiretapPair::new(w.clone(), cascade(&w, &d).unwrap()).unwrap();
            for p in simplex_grid(2, 16) {
                prop_assert!(secrecy_gap(&Dist::new(p).unwrap(), &pair).unwrap() >= -1e-12);
            }
        }

        #[test]
        fn secrecy_value_dominates_grid(w in stochastic_matrix(2, 2), v in stochastic_matrix(2, 3)) {
            let pair = WiretapPair::new(w, v).unwrap();
            let s = secrecy_capacity(&pair, 1, 1e-8, 5).unwrap();
            let grid_best = simplex_grid(2, 64)
                .into_iter()
                .map(|p| secrecy_gap(&Dist::new(p).unwrap(), &pair).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s.value >= grid_best - 1e-6);
            prop_assert!(s.value >= 0.0);
        }

        #[test]
        fn scaling_preserves_reliability(s in 0.01f64..=1.0, r1 in 0.0f64..0.4, r2 in 0.0f64..0.4) {
            let spec = RegionSpec::new(bsc_pair(0.05, 0.2), 2, RegionMode::Deterministic).unwrap();
            let u = Dist::uniform(2);
            let rt = RateTuple::new(vec![r1, r2]).unwrap();
            let scaled = RateTuple::new(vec![r1 * s, r2 * s]).unwrap();
            let i_main = mutual_information(&u, spec.pair.main()).unwrap();
            if rt.total() <= i_main + REGION_TOL {
                prop_assert!(scaled.total() <= i_main + REGION_TOL);
            }
            // the secrecy constraint is re-evaluated, not assumed to carry over
            let i_wire = mutual_information(&u, spec.pair.wiretap()).unwrap();
            let expected = scaled.total() <= i_main + REGION_TOL
                && scaled.rates().iter().all(|r| scaled.total() - r >= i_wire - REGION_TOL);
            prop_assert_eq!(region_membership(&scaled, &spec, &u, None).unwrap(), expected);
        }

        #[test]
        fn equal_rate_tuple_is_member(a in 0.01f64..0.2, extra in 0.05f64..0.3) {
            let pair = bsc_pair(a, a + extra);
            let (rt, t, p) = equal_rate_capacity_tuple(&pair, 1e-10).unwrap();
            let spec = RegionSpec::new(pair, t, RegionMode::Deterministic).unwrap();
            prop_assert!(region_membership(&rt, &spec, &p, None).unwrap());
        }
    }
}
