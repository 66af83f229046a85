//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use muxsec_cli::run;
use muxsec_core::capacity::{channel_capacity, minimal_t, region_membership, secrecy_gap};
use muxsec_core::channel::{binary_entropy, mutual_information};
use muxsec_core::code::generate_codebook;
use muxsec_core::ensemble::{ensemble_experiment, existence_check};
use muxsec_core::resolvability::{rate_sweep, sweep_trends};
use muxsec_core::rng::derive_seed;
use muxsec_core::security::{
    conditional_outputs, exact_errors, exact_leakage, leakage_from, mixture_bound_from, pinsker_check,
    verdu_han_lower_bound,
};
use muxsec_core::spectrum::spectrum_at;
use muxsec_core::stats::{mean_stderr, spearman};
use muxsec_core::{BoundInputs, Dist, Dmc, RateTuple, RegionMode, RegionSpec, WiretapPair};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn h(p: f64) -> f64 {
    binary_entropy(p)
}

fn pair(main: f64, wire: f64) -> WiretapPair {
    WiretapPair::new(Dmc::bsc(main), Dmc::bsc(wire)).unwrap()
}

fn c1_capacity() -> Outcome {
    let mut worst_err = 0.0f64;
    let mut worst_time = Duration::ZERO;
    for p in [0.05, 0.1, 0.2, 0.3] {
        let start = Instant::now();
        let (c, _) = channel_capacity(&Dmc::bsc(p), 1e-9).unwrap();
        worst_time = worst_time.max(start.elapsed());
        worst_err = worst_err.max((c - (1.0 - h(p))).abs());
    }
    outcome(
        worst_err <= 1e-6 && worst_time < Duration::from_secs(1),
        format!("max |C - (1 - h(p))| = {worst_err:.2e}, slowest {worst_time:.2?}"),
    )
}

fn c2_gap_and_order() -> Outcome {
    let start = Instant::now();
    let pr = pair(0.05, 0.2);
    let u = Dist::uniform(2);
    let gap = secrecy_gap(&u, &pr).unwrap();
    let closed = h(0.2) - h(0.05);
    let t = minimal_t(&u, &pr).unwrap();
    let c = 1.0 - h(0.05);
    let rt = RateTuple::new(vec![c / 2.0, c / 2.0]).unwrap();
    let spec = RegionSpec::new(pr, 2, RegionMode::Deterministic).unwrap();
    let member = region_membership(&rt, &spec, &u, None).unwrap();
    let elapsed = start.elapsed();
    outcome(
        (gap - closed).abs() <= 1e-6 && t == 2 && member && elapsed < Duration::from_secs(1),
        format!("gap = {gap:.7} (closed form {closed:.7}), T = {t}, (C/2, C/2) member = {member}, {elapsed:.2?}"),
    )
}

/// Spectrum of `p^n` through `w^n` by enumerating every `(x^n, y^n)` pair,
/// as sorted `(total density, mass)` atoms.
fn brute_force_spectrum(p: &[f64], w: &[Vec<f64>], n: usize) -> Vec<(f64, f64)> {
    let (k, m) = (p.len(), w[0].len());
    let q: Vec<f64> = (0..m).map(|y| (0..k).map(|x| p[x] * w[x][y]).sum()).collect();
    let mut raw = Vec::new();
    let words = |size: usize| (0..size.pow(n as u32)).map(move |mut i| {
        let mut word = vec![0; n];
        for s in word.iter_mut().rev() {
            *s = i % size;
            i /= size;
        }
        word
    });
    for xs in words(k) {
        let px: f64 = xs.iter().map(|&x| p[x]).product();
        if px == 0.0 {
            continue;
        }
        for ys in words(m) {
            let mut mass = px;
            let mut total = 0.0;
            for (&x, &y) in xs.iter().zip(&ys) {
                mass *= w[x][y];
                if w[x][y] > 0.0 {
                    total += (w[x][y] / q[y]).log2();
                }
            }
            if mass > 0.0 {
                raw.push((total, mass));
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (v, mass) in raw {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= 1e-10 => last.1 += mass,
            _ => merged.push((v, mass)),
        }
    }
    merged
}

fn c3_spectrum_oracle() -> Outcome {
    let start = Instant::now();
    let channels = [
        vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        vec![vec![0.7, 0.3], vec![0.3, 0.7]],
        vec![vec![1.0, 0.0], vec![0.4, 0.6]],
        vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.6, 0.4], vec![0.6, 0.4]],
    ];
    let inputs = [vec![0.5, 0.5], vec![0.3, 0.7], vec![1.0, 0.0]];
    let (mut cases, mut mismatches, mut worst) = (0, 0, 0.0f64);
    for rows in &channels {
        let w = Dmc::new(rows.clone()).unwrap();
        for probs in &inputs {
            let p = Dist::new(probs.clone()).unwrap();
            for n in 1..=10 {
                cases += 1;
                let built: Vec<(f64, f64)> =
                    spectrum_at(&p, &w, n).unwrap().atoms().map(|(v, mass)| (v * n as f64, mass)).collect();
                let oracle = brute_force_spectrum(probs, rows, n);
                if built.len() != oracle.len() {
                    mismatches += 1;
                    continue;
                }
                for (a, b) in built.iter().zip(&oracle) {
                    worst = worst.max((a.1 - b.1).abs());
                    if (a.0 - b.0).abs() > 1e-9 || (a.1 - b.1).abs() > 1e-9 {
                        mismatches += 1;
                        break;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(30),
        format!("{cases} cases, {mismatches} mismatches, max mass diff {worst:.1e}, {elapsed:.2?}"),
    )
}

fn bounds_inputs() -> BoundInputs {
    BoundInputs::new(pair(0.1, 0.3), Dist::uniform(2), 8, vec![2, 2], 0.30, 0.35).unwrap()
}

const BOUNDS_SEED: u64 = 20240601;

fn c4_ensemble_bounds() -> Outcome {
    let start = Instant::now();
    let bi = bounds_inputs();
    let er = ensemble_experiment(&bi, 200, BOUNDS_SEED).unwrap();
    // δ_n for BSC(0.3), uniform input: density per symbol is 1 + log2(0.7) or 1 + log2(0.3)
    let n = 8;
    let delta_binomial: f64 = (0..=n)
        .filter(|&k| ((n - k) as f64 * (1.0 + 0.7f64.log2()) + k as f64 * (1.0 + 0.3f64.log2())) > 0.35 * n as f64)
        .map(|k| binomial(n, k) * 0.3f64.powi(k as i32) * 0.7f64.powi((n - k) as i32))
        .sum();
    let delta_ok = (er.bounds.delta_n - delta_binomial).abs() < 1e-12;
    let elapsed = start.elapsed();
    let lines: Vec<String> = er
        .per_message
        .iter()
        .map(|m| {
            format!(
                "t={}: eps {:.4}<={:.4}, d {:.4}<={:.4}, I {:.4}<={:.4}",
                m.t, m.eps.mean, m.eps.bound, m.vd.mean, m.vd.bound, m.leak_rate.mean, m.leak_rate.bound
            )
        })
        .collect();
    outcome(
        er.all_within_bounds() && delta_ok && elapsed < Duration::from_secs(300),
        format!("{}; delta_n = {:.6} (binomial {:.6}); {elapsed:.2?}", lines.join("; "), er.bounds.delta_n, delta_binomial),
    )
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn c5_existence() -> Outcome {
    let bi = bounds_inputs();
    let er = ensemble_experiment(&bi, 200, BOUNDS_SEED).unwrap();
    let found = existence_check(&er, 2);
    let witness = muxsec_core::ensemble::existence_witness(&er, 2);
    outcome(found, format!("witness trial {witness:?} of 200"))
}

/// Random small codebooks over a few wiretap channels, with every slot of
/// size at least 2.
fn random_instances(count: usize) -> Vec<(Dmc, muxsec_core::MultiplexCode)> {
    let channels = [
        Dmc::bsc(0.3),
        Dmc::new(vec![vec![0.6, 0.3, 0.1], vec![0.1, 0.2, 0.7]]).unwrap(),
        Dmc::new(vec![vec![1.0, 0.0], vec![0.4, 0.6]]).unwrap(),
        Dmc::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]]).unwrap(),
    ];
    (0..count)
        .map(|i| {
            let seed = derive_seed(6, i as u64);
            let v = channels[i % channels.len()].clone();
            let n = 2 + (seed % 4) as usize;
            let sizes = vec![2 + (seed >> 8) as usize % 3, 2 + (seed >> 16) as usize % 2];
            let code = generate_codebook(&Dist::uniform(v.in_size()), n, &sizes, 0.0, seed).unwrap();
            (v, code)
        })
        .collect()
}

fn c6_leakage_routes() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (v, code) in random_instances(120) {
        for t in 0..code.message_count() {
            let leak = leakage_from(&conditional_outputs(&code, &v, t).unwrap());
            worst = worst.max((leak.joint_mi - leak.avg_divergence).abs());
            count += 1;
        }
    }
    let bi = bounds_inputs();
    for s in 0..50 {
        let code = generate_codebook(&bi.p, bi.n, &bi.sizes, bi.a, derive_seed(BOUNDS_SEED, s)).unwrap();
        for t in 0..2 {
            let leak = leakage_from(&conditional_outputs(&code, bi.pair.wiretap(), t).unwrap());
            worst = worst.max((leak.joint_mi - leak.avg_divergence).abs());
            count += 1;
        }
    }
    outcome(worst <= 1e-9, format!("{count} (codebook, message) instances, max route gap {worst:.1e}"))
}

fn c7_mixture_and_pinsker() -> Outcome {
    let instances = random_instances(120);
    let (mut mix_checks, mut mix_viol, mut pinsker_checks, mut pinsker_viol) = (0, 0, 0, 0);
    for (v, code) in &instances {
        for t in 0..code.message_count() {
            let co = conditional_outputs(code, v, t).unwrap();
            for (lhs, rhs) in mixture_bound_from(&co).unwrap() {
                mix_checks += 1;
                if lhs > rhs + 1e-12 {
                    mix_viol += 1;
                }
            }
            let leak = leakage_from(&co);
            for (d, l1) in leak.per_k_divergence.iter().zip(&leak.per_k_l1) {
                pinsker_checks += 1;
                if !pinsker_check(*d, *l1) {
                    pinsker_viol += 1;
                }
            }
        }
    }
    outcome(
        instances.len() >= 100 && mix_viol == 0 && pinsker_viol == 0,
        format!(
            "{} codebooks: mixture {mix_viol}/{mix_checks} violations, Pinsker {pinsker_viol}/{pinsker_checks} violations",
            instances.len()
        ),
    )
}

fn c8_verdu_han() -> Outcome {
    let w = Dmc::bsc(0.1);
    let p = Dist::uniform(2);
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for s in 0..50 {
        let code = generate_codebook(&p, 8, &[4, 4], 0.3, derive_seed(8, s)).unwrap();
        let eps_sum: f64 = exact_errors(&code, &w, &p).unwrap().per_message.iter().sum();
        let bound = verdu_han_lower_bound(&code, &w, 0.05).unwrap();
        min_margin = min_margin.min(eps_sum - bound);
        if eps_sum < bound {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("50 codebooks, {violations} violations, min(sum eps - bound) = {min_margin:.4}"))
}

fn c9_dummy_trend() -> Outcome {
    let v = Dmc::bsc(0.3);
    let p = Dist::uniform(2);
    let dummies = [2.0, 4.0, 8.0];
    let means: Vec<f64> = [2usize, 4, 8]
        .iter()
        .map(|&l| {
            let leaks: Vec<f64> = (0..100)
                .map(|s| {
                    let code = generate_codebook(&p, 8, &[2, l], 0.0, derive_seed(9, s)).unwrap();
                    exact_leakage(&code, &v, 0).unwrap().0
                })
                .collect();
            mean_stderr(&leaks).0
        })
        .collect();
    let rho = spearman(&dummies, &means);
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        rho < 0.0 && monotone,
        format!("mean leakage (bits) at L = 2, 4, 8: {:.5}, {:.5}, {:.5}; Spearman {rho}", means[0], means[1], means[2]),
    )
}

fn c10_resolvability() -> Outcome {
    let start = Instant::now();
    let v = Dmc::bsc(0.3);
    let p = Dist::uniform(2);
    let info = mutual_information(&p, &v).unwrap();
    let table = rate_sweep(&v, &p, &[2, 4, 8], &[0.05, 0.5], 50, 2024).unwrap();
    let trends = sweep_trends(&table, &v, &p).unwrap();
    let high: Vec<f64> = [2, 4, 8].iter().map(|&n| table.cell(n, 0.5).unwrap().mean_d).collect();
    let low = table.cell(8, 0.05).unwrap().mean_d;
    let elapsed = start.elapsed();
    outcome(
        high.windows(2).all(|w| w[1] <= w[0]) && low >= 0.1 && trends.holds() && elapsed < Duration::from_secs(120),
        format!(
            "I = {info:.6}; rate 0.5: d = {:.4}, {:.4}, {:.4} at n = 2, 4, 8; rate 0.05, n = 8: d = {low:.4}; {elapsed:.2?}",
            high[0], high[1], high[2]
        ),
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c11_reproducibility() -> Outcome {
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut configs: Vec<PathBuf> = fs::read_dir(&configs_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    configs.sort();
    let scratch = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let first = scratch.path().join(format!("{i}-a"));
        let second = scratch.path().join(format!("{i}-b"));
        run(cfg, Some(&first), None).unwrap();
        run(cfg, Some(&second), Some(1)).unwrap();
        if read_dir_sorted(&first) != read_dir_sorted(&second) {
            differing.push(cfg.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    outcome(
        !configs.is_empty() && differing.is_empty(),
        format!("{} shipped configs run twice, differing: {differing:?}", configs.len()),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("C1 capacity oracle", c1_capacity),
        ("C2 secrecy gap and minimal T", c2_gap_and_order),
        ("C3 spectrum vs brute force", c3_spectrum_oracle),
        ("C4 ensemble means within bounds", c4_ensemble_bounds),
        ("C5 code existence", c5_existence),
        ("C6 leakage route identity", c6_leakage_routes),
        ("C7 mixture inequality and Pinsker", c7_mixture_and_pinsker),
        ("C8 Verdu-Han lower bound", c8_verdu_han),
        ("C9 secrecy vs dummy size", c9_dummy_trend),
        ("C10 resolvability trends", c10_resolvability),
        ("C11 reproducibility", c11_reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !result.pass {
            failed += 1;
        }
        println!("[{}] {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
