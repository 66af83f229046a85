//! Text format for channels and wiretap pairs.
//!
//! A channel file is TOML with `in_size`, `out_size` and `rows`:
//!
//! ```toml
//! in_size = 2
//! out_size = 2
//! rows = [
//!   [0.9, 0.1],
//!   [0.1, 0.9],
//! ]
//! ```
//!
//! A pair file holds two such tables named `main` and `wiretap`.
//! Validation errors carry the 1-based line of the offending row.

use serde::Deserialize;
use toml::Spanned;

use crate::channel::{Dmc, WiretapPair};
use crate::{Error, Result, PROB_TOL};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    in_size: Spanned<usize>,
    out_size: Spanned<usize>,
    rows: Spanned<Vec<Spanned<Vec<f64>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    main: RawChannel,
    wiretap: RawChannel,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn toml_error(src: &str, err: toml::de::Error) -> Error {
    let line = err.span().map(|s| line_of(src, s.start)).unwrap_or(0);
    Error::Parse { line, message: err.message().to_string() }
}

fn build(src: &str, raw: RawChannel, label: &str) -> Result<Dmc> {
    let in_size = *raw.in_size.get_ref();
    let out_size = *raw.out_size.get_ref();
    let rows_line = line_of(src, raw.rows.span().start);
    let rows = raw.rows.into_inner();
    if rows.len() != in_size {
        return Err(Error::Parse {
            line: rows_line,
            message: format!("{label}: expected {in_size} rows, found {}", rows.len()),
        });
    }
    let mut out = Vec::with_capacity(rows.len());
    for (x, row) in rows.into_iter().enumerate() {
        let line = line_of(src, row.span().start);
        let row = row.into_inner();
        if row.len() != out_size {
            return Err(Error::Parse {
                line,
                message: format!("{label}: row {x} has {} entries, expected {out_size}", row.len()),
            });
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Parse {
                line,
                message: format!("{label}: row {x} has a negative or non-finite entry"),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::Parse {
                line,
                message: format!("{label}: row {x} sums to {sum}, not 1"),
            });
        }
        out.push(row);
    }
    Dmc::new(out)
}

pub fn parse_channel(src: &str) -> Result<Dmc> {
    let raw: RawChannel = toml::from_str(src).map_err(|e| toml_error(src, e))?;
    build(src, raw, "channel")
}

pub fn parse_pair(src: &str) -> Result<WiretapPair> {
    let raw: RawPair = toml::from_str(src).map_err(|e| toml_error(src, e))?;
    let main = build(src, raw.main, "main")?;
    let wiretap = build(src, raw.wiretap, "wiretap")?;
    WiretapPair::new(main, wiretap)
}

fn write_table(out: &mut String, w: &Dmc) {
    out.push_str(&format!("in_size = {}\nout_size = {}\nrows = [\n", w.in_size(), w.out_size()));
    for row in w.rows() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:?}")).collect();
        out.push_str(&format!("  [{}],\n", cells.join(", ")));
    }
    out.push_str("]\n");
}

pub fn channel_to_string(w: &Dmc) -> String {
    let mut out = String::new();
    write_table(&mut out, w);
    out
}

pub fn pair_to_string(pair: &WiretapPair) -> String {
    let mut out = String::from("[main]\n");
    write_table(&mut out, pair.main());
    out.push_str("\n[wiretap]\n");
    write_table(&mut out, pair.wiretap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_channel() {
        let src = "in_size = 2\nout_size = 2\nrows = [\n  [0.9, 0.1],\n  [0.1, 0.9],\n]\n";
        assert_eq!(parse_channel(src).unwrap(), Dmc::bsc(0.1));
    }

    #[test]
    fn bad_row_reports_its_line() {
        let src = "in_size = 2\nout_size = 2\nrows = [\n  [0.9, 0.1],\n  [1.0, 0.5],\n]\n";
        match parse_channel(src) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("row 1"), "{message}");
                assert!(message.contains("1.5"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pair_round_trip() {
        let pair = WiretapPair::new(Dmc::bsc(0.05), Dmc::bsc(0.2)).unwrap();
        assert_eq!(parse_pair(&pair_to_string(&pair)).unwrap(), pair);
    }

    #[test]
    fn pair_wiretap_row_line() {
        let src = "[main]\nin_size = 2\nout_size = 2\nrows = [[1.0, 0.0], [0.0, 1.0]]\n\n\
                   [wiretap]\nin_size = 2\nout_size = 2\nrows = [\n  [0.5, 0.5],\n  [0.7, 0.2],\n]\n";
        match parse_pair(src) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 11);
                assert!(message.starts_with("wiretap"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_shapes_and_syntax() {
        assert!(parse_channel("in_size = 2\nout_size = 2\nrows = [[1.0, 0.0]]\n").is_err());
        assert!(parse_channel("in_size = 1\nout_size = 2\nrows = [[1.0]]\n").is_err());
        assert!(matches!(parse_channel("in_size = \n"), Err(Error::Parse { line: 1, .. })));
    }
}
