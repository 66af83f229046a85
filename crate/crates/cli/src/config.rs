//! Experiment configuration files.
//!
//! A config is TOML with a top-level `kind`, a `master_seed` and an optional
//! `output` directory, plus one table named after the kind:
//!
//! ```toml
//! kind = "ensemble"
//! master_seed = 20240601
//!
//! [ensemble]
//! channel_pair = "channels/bsc010_bsc030.toml"
//! input_dist = [0.5, 0.5]
//! n = 8
//! sizes = [2, 2]
//! a = 0.30
//! b = 0.35
//! trials = 200
//! ```
//!
//! Channel paths are resolved against the directory holding the config.

use std::fs;
use std::path::{Path, PathBuf};

use muxsec_core::channel_file::{parse_channel, parse_pair};
use muxsec_core::{Dist, Dmc, RateTuple, RegionMode, WiretapPair};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Capacity,
    Region,
    CodeEval,
    Ensemble,
    Resolvability,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Capacity => "capacity",
            Kind::Region => "region",
            Kind::CodeEval => "code_eval",
            Kind::Ensemble => "ensemble",
            Kind::Resolvability => "resolvability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum RawThreshold {
    Value(f64),
    Auto(AutoKeyword),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    master_seed: u64,
    output: Option<String>,
    capacity: Option<RawCapacity>,
    region: Option<RawRegion>,
    code_eval: Option<RawCodeEval>,
    ensemble: Option<RawEnsemble>,
    resolvability: Option<RawResolvability>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCapacity {
    channel: Option<String>,
    channel_pair: Option<String>,
    tolerance: Option<f64>,
    restarts: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    channel_pair: String,
    rates: Vec<f64>,
    mode: Option<RegionMode>,
    input_dist: Option<Vec<f64>>,
    test_channel: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCodeEval {
    channel_pair: String,
    input_dist: Option<Vec<f64>>,
    n: usize,
    sizes: Vec<usize>,
    a: RawThreshold,
    gamma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    channel_pair: String,
    input_dist: Option<Vec<f64>>,
    n: usize,
    sizes: Option<Vec<usize>>,
    rates: Option<Vec<f64>>,
    gamma: Option<f64>,
    a: RawThreshold,
    b: RawThreshold,
    trials: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResolvability {
    channel: String,
    input_dist: Option<Vec<f64>>,
    n_list: Vec<usize>,
    rate_list: Vec<f64>,
    seeds: usize,
}

/// A threshold given as a number or derived from `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Value(f64),
    Auto,
}

/// Message sizes given directly or through a rate tuple.
#[derive(Debug, Clone, PartialEq)]
pub enum SizeSpec {
    Sizes(Vec<usize>),
    Rates(RateTuple),
}

#[derive(Debug, Clone)]
pub enum Experiment {
    Capacity {
        channel_path: String,
        main: Dmc,
        pair: Option<WiretapPair>,
        tolerance: f64,
        restarts: usize,
    },
    Region {
        channel_path: String,
        pair: WiretapPair,
        rates: RateTuple,
        mode: RegionMode,
        input: Dist,
        test_channel: Option<Dmc>,
    },
    CodeEval {
        channel_path: String,
        pair: WiretapPair,
        input: Dist,
        n: usize,
        sizes: Vec<usize>,
        a: Threshold,
        gamma: Option<f64>,
    },
    Ensemble {
        channel_path: String,
        pair: WiretapPair,
        input: Dist,
        n: usize,
        sizes: SizeSpec,
        gamma: Option<f64>,
        a: Threshold,
        b: Threshold,
        trials: usize,
    },
    Resolvability {
        channel_path: String,
        channel: Dmc,
        input: Dist,
        n_list: Vec<usize>,
        rate_list: Vec<f64>,
        seeds: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub path: PathBuf,
    pub kind: Kind,
    pub master_seed: u64,
    /// Output directory from the config, resolved against its directory.
    pub output: Option<PathBuf>,
    /// Hex SHA-256 of the raw config bytes.
    pub config_hash: String,
    pub experiment: Experiment,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Ctx<'a> {
    path: &'a Path,
    base: &'a Path,
    section: &'static str,
}

impl Ctx<'_> {
    fn invalid(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::Validation {
            path: self.path.to_path_buf(),
            field: format!("{}.{field}", self.section),
            message: message.into(),
        }
    }

    fn read(&self, rel: &str) -> CliResult<(PathBuf, String)> {
        let full = self.base.join(rel);
        let src = fs::read_to_string(&full).map_err(|source| CliError::Io { path: full.clone(), source })?;
        Ok((full, src))
    }

    fn channel(&self, rel: &str) -> CliResult<Dmc> {
        let (full, src) = self.read(rel)?;
        parse_channel(&src).map_err(|source| CliError::ChannelFile { path: full, source })
    }

    fn pair(&self, rel: &str) -> CliResult<WiretapPair> {
        let (full, src) = self.read(rel)?;
        parse_pair(&src).map_err(|source| CliError::ChannelFile { path: full, source })
    }

    fn input(&self, raw: Option<Vec<f64>>, in_size: usize) -> CliResult<Dist> {
        let Some(probs) = raw else {
            return Ok(Dist::uniform(in_size));
        };
        if probs.len() != in_size {
            return Err(self.invalid("input_dist", format!("has {} entries, channel has {in_size} inputs", probs.len())));
        }
        Dist::new(probs).map_err(|e| self.invalid("input_dist", e.to_string()))
    }

    fn positive(&self, field: &str, value: usize) -> CliResult<usize> {
        if value == 0 {
            return Err(self.invalid(field, "must be at least 1"));
        }
        Ok(value)
    }

    fn sizes(&self, field: &str, sizes: Vec<usize>) -> CliResult<Vec<usize>> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(self.invalid(field, "must list at least one size, each at least 1"));
        }
        Ok(sizes)
    }

    fn rates(&self, field: &str, rates: Vec<f64>) -> CliResult<RateTuple> {
        RateTuple::new(rates).map_err(|e| self.invalid(field, e.to_string()))
    }

    fn gamma(&self, gamma: Option<f64>) -> CliResult<Option<f64>> {
        match gamma {
            Some(g) if !(g > 0.0 && g.is_finite()) => Err(self.invalid("gamma", "must be positive and finite")),
            g => Ok(g),
        }
    }

    fn threshold(&self, field: &str, raw: RawThreshold, gamma: Option<f64>) -> CliResult<Threshold> {
        match raw {
            RawThreshold::Value(v) if v.is_finite() => Ok(Threshold::Value(v)),
            RawThreshold::Value(_) => Err(self.invalid(field, "must be finite")),
            RawThreshold::Auto(_) if gamma.is_none() => Err(self.invalid(field, "\"auto\" needs `gamma`")),
            RawThreshold::Auto(_) => Ok(Threshold::Auto),
        }
    }
}

fn missing_section(path: &Path, kind: Kind) -> CliError {
    CliError::Validation {
        path: path.to_path_buf(),
        field: kind.name().to_string(),
        message: format!("kind = \"{}\" needs a [{}] table", kind.name(), kind.name()),
    }
}

/// Parses and validates a config, loading every channel file it names.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(path, &src)
}

pub fn parse_config(path: &Path, src: &str) -> CliResult<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| CliError::ConfigParse {
        path: path.to_path_buf(),
        line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let ctx = |section| Ctx { path, base: &base, section };
    let kind = raw.kind;
    let missing = || missing_section(path, kind);

    let experiment = match kind {
        Kind::Capacity => {
            let c = ctx("capacity");
            let s = raw.capacity.ok_or_else(missing)?;
            let (channel_path, main, pair) = match (s.channel, s.channel_pair) {
                (Some(p), None) => {
                    let main = c.channel(&p)?;
                    (p, main, None)
                }
                (None, Some(p)) => {
                    let pair = c.pair(&p)?;
                    (p, pair.main().clone(), Some(pair))
                }
                _ => return Err(c.invalid("channel", "give exactly one of `channel` and `channel_pair`")),
            };
            let tolerance = s.tolerance.unwrap_or(1e-9);
            if tolerance.is_nan() || tolerance <= 0.0 {
                return Err(c.invalid("tolerance", "must be positive"));
            }
            let restarts = c.positive("restarts", s.restarts.unwrap_or(8))?;
            Experiment::Capacity { channel_path, main, pair, tolerance, restarts }
        }
        Kind::Region => {
            let c = ctx("region");
            let s = raw.region.ok_or_else(missing)?;
            let pair = c.pair(&s.channel_pair)?;
            let input = c.input(s.input_dist, pair.in_size())?;
            let rates = c.rates("rates", s.rates)?;
            let mode = s.mode.unwrap_or(RegionMode::Deterministic);
            let test_channel = match s.test_channel {
                Some(p) => Some(c.channel(&p)?),
                None if mode == RegionMode::Stochastic => {
                    return Err(c.invalid("test_channel", "stochastic mode needs a test channel"))
                }
                None => None,
            };
            if let Some(u) = &test_channel {
                if u.out_size() != pair.in_size() || u.in_size() != input.len() {
                    return Err(c.invalid(
                        "test_channel",
                        "must map the auxiliary alphabet of `input_dist` onto the channel input",
                    ));
                }
            }
            Experiment::Region { channel_path: s.channel_pair, pair, rates, mode, input, test_channel }
        }
        Kind::CodeEval => {
            let c = ctx("code_eval");
            let s = raw.code_eval.ok_or_else(missing)?;
            let pair = c.pair(&s.channel_pair)?;
            let input = c.input(s.input_dist, pair.in_size())?;
            let gamma = c.gamma(s.gamma)?;
            Experiment::CodeEval {
                channel_path: s.channel_pair,
                pair,
                input,
                n: c.positive("n", s.n)?,
                sizes: c.sizes("sizes", s.sizes)?,
                a: c.threshold("a", s.a, gamma)?,
                gamma,
            }
        }
        Kind::Ensemble => {
            let c = ctx("ensemble");
            let s = raw.ensemble.ok_or_else(missing)?;
            let pair = c.pair(&s.channel_pair)?;
            let input = c.input(s.input_dist, pair.in_size())?;
            let gamma = c.gamma(s.gamma)?;
            let sizes = match (s.sizes, s.rates) {
                (Some(sz), None) => SizeSpec::Sizes(c.sizes("sizes", sz)?),
                (None, Some(r)) if gamma.is_some() => SizeSpec::Rates(c.rates("rates", r)?),
                (None, Some(_)) => return Err(c.invalid("gamma", "required when sizes are given as `rates`")),
                _ => return Err(c.invalid("sizes", "give exactly one of `sizes` and `rates`")),
            };
            Experiment::Ensemble {
                channel_path: s.channel_pair,
                pair,
                input,
                n: c.positive("n", s.n)?,
                sizes,
                gamma,
                a: c.threshold("a", s.a, gamma)?,
                b: c.threshold("b", s.b, gamma)?,
                trials: c.positive("trials", s.trials)?,
            }
        }
        Kind::Resolvability => {
            let c = ctx("resolvability");
            let s = raw.resolvability.ok_or_else(missing)?;
            let channel = c.channel(&s.channel)?;
            let input = c.input(s.input_dist, channel.in_size())?;
            if s.n_list.is_empty() || s.n_list.contains(&0) {
                return Err(c.invalid("n_list", "must list blocklengths, each at least 1"));
            }
            if s.rate_list.is_empty() || s.rate_list.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                return Err(c.invalid("rate_list", "must list finite rates ≥ 0"));
            }
            Experiment::Resolvability {
                channel_path: s.channel,
                channel,
                input,
                n_list: s.n_list,
                rate_list: s.rate_list,
                seeds: c.positive("seeds", s.seeds)?,
            }
        }
    };

    Ok(ExperimentConfig {
        path: path.to_path_buf(),
        kind,
        master_seed: raw.master_seed,
        output: raw.output.map(|o| base.join(o)),
        config_hash: format!("{:x}", Sha256::digest(src.as_bytes())),
        experiment,
    })
}
