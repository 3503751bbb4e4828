//! The `dsplim/1` dataset format.
//!
//! ```text
//! # comments run to the end of a line
//! channels 2
//! scales 33 100
//! scales 3.3 10
//! 5 10 100 1 0 12
//! 7 11 98 0 1 9
//! ```
//!
//! Line 1 gives the channel count `N`, the next `N` lines the scales
//! `t_i u_i`, and every remaining line is one dataset of `3N` nonnegative
//! integers `n_1 y_1 z_1 ... n_N y_N z_N`. Blank lines are skipped.

use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::ds_limits::{ChannelObservation, Dataset};

pub const FORMAT_VERSION: &str = "dsplim/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Validation { line: usize, column: usize, message: String },
    #[error("read failed: {0}")]
    Io(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

fn invalid(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Validation { line, column, message: message.into() }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &text[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out.into_iter().map(|(s, tok)| (text[..s].chars().count() + 1, tok)).collect()
}

fn parse_positive(line: usize, col: usize, tok: &str, what: &str) -> Result<f64, ParseError> {
    let v: f64 = tok.parse().map_err(|_| syntax(line, col, format!("expected a number for {what}, found '{tok}'")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(line, col, format!("{what} must be positive and finite, found {tok}")));
    }
    Ok(v)
}

fn parse_count(line: usize, col: usize, tok: &str) -> Result<u64, ParseError> {
    match tok.parse::<u64>() {
        Ok(v) => Ok(v),
        Err(_) if tok.parse::<i64>().is_ok() => Err(invalid(line, col, format!("counts must be nonnegative, found {tok}"))),
        Err(_) => Err(syntax(line, col, format!("expected a nonnegative integer count, found '{tok}'"))),
    }
}

/// Parses every dataset in `reader`.
pub fn parse_dataset_file<R: BufRead>(reader: R) -> Result<Vec<Dataset>, ParseError> {
    let mut channels: Option<usize> = None;
    let mut scales: Vec<(f64, f64)> = Vec::new();
    let mut datasets = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| ParseError::Io(e.to_string()))?;
        let body = line.split('#').next().unwrap_or("");
        let toks = tokens(body);
        if toks.is_empty() {
            continue;
        }
        let Some(n_ch) = channels else {
            match toks.as_slice() {
                [(_, "channels"), (col, n)] => {
                    let n: usize = n.parse().map_err(|_| syntax(lineno, *col, format!("expected a channel count, found '{n}'")))?;
                    if n == 0 {
                        return Err(invalid(lineno, *col, "a dataset needs at least one channel"));
                    }
                    channels = Some(n);
                    continue;
                }
                _ => return Err(syntax(lineno, toks[0].0, "expected header 'channels <N>'")),
            }
        };
        if scales.len() < n_ch {
            match toks.as_slice() {
                [(_, "scales"), (ct, t), (cu, u)] => {
                    scales.push((parse_positive(lineno, *ct, t, "t")?, parse_positive(lineno, *cu, u, "u")?));
                    continue;
                }
                _ => {
                    return Err(syntax(
                        lineno,
                        toks[0].0,
                        format!("expected 'scales <t> <u>' for channel {} of {n_ch}", scales.len() + 1),
                    ))
                }
            }
        }
        if toks.len() != 3 * n_ch {
            let col = toks.get(3 * n_ch).map_or(body.chars().count() + 1, |t| t.0);
            return Err(syntax(
                lineno,
                col,
                format!("dataset row {} has {} fields, expected {}", datasets.len() + 1, toks.len(), 3 * n_ch),
            ));
        }
        let mut chans = Vec::with_capacity(n_ch);
        for (i, &(t, u)) in scales.iter().enumerate() {
            let n = parse_count(lineno, toks[3 * i].0, toks[3 * i].1)?;
            let y = parse_count(lineno, toks[3 * i + 1].0, toks[3 * i + 1].1)?;
            let z = parse_count(lineno, toks[3 * i + 2].0, toks[3 * i + 2].1)?;
            chans.push(ChannelObservation { n, y, z, t, u });
        }
        datasets.push(Dataset { channels: chans, label: datasets.len().to_string() });
    }
    match channels {
        None => Err(syntax(last_line.max(1), 1, "missing header 'channels <N>'")),
        Some(n) if scales.len() < n => {
            Err(syntax(last_line.max(1), 1, format!("expected {n} 'scales' lines, found {}", scales.len())))
        }
        _ => Ok(datasets),
    }
}

pub fn parse_dataset_str(text: &str) -> Result<Vec<Dataset>, ParseError> {
    parse_dataset_file(text.as_bytes())
}

/// Writes datasets sharing one set of scales. Fails if the datasets
/// disagree on channel count or scales.
pub fn write_dataset_file(datasets: &[Dataset]) -> crate::Result<String> {
    let first = datasets.first().ok_or_else(|| crate::Error::InvalidConfig("nothing to write".into()))?;
    let scales: Vec<(f64, f64)> = first.channels.iter().map(|c| (c.t, c.u)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "# {FORMAT_VERSION}");
    let _ = writeln!(out, "channels {}", scales.len());
    for (t, u) in &scales {
        let _ = writeln!(out, "scales {t:?} {u:?}");
    }
    for ds in datasets {
        let same = ds.channels.len() == scales.len() && ds.channels.iter().zip(&scales).all(|(c, s)| (c.t, c.u) == *s);
        if !same {
            return Err(crate::Error::InvalidConfig(format!("dataset '{}' does not share the file's scales", ds.label)));
        }
        let row: Vec<String> = ds.channels.iter().map(|c| format!("{} {} {}", c.n, c.y, c.z)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    Ok(out)
}
