//! MacKay's alist format for sparse parity-check matrices.
//!
//! ```text
//! n m
//! max_bit_degree max_check_degree
//! bit degrees (n numbers)
//! check degrees (m numbers)
//! n lines: 1-indexed checks of each bit
//! m lines: 1-indexed bits of each check
//! ```
//!
//! Zero entries used as padding are accepted and ignored on input; output
//! is written without padding.

use std::fmt::Write as _;

use thiserror::Error;

use crate::constructors::ClassicalCode;
use crate::gf2::BitMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlistError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unexpected end of input, expected {0}")]
    Truncated(&'static str),
}

fn parse_err(line: usize, message: impl Into<String>) -> AlistError {
    AlistError::Parse {
        line,
        message: message.into(),
    }
}

/// Parse an alist document.
///
/// # Errors
///
/// Returns the offending 1-based line number for malformed numbers,
/// out-of-range indices, degree mismatches, or inconsistent bit and check
/// lists.
pub fn load_alist(text: &str) -> Result<ClassicalCode, AlistError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &'static str| -> Result<(usize, Vec<usize>), AlistError> {
        let (no, l) = lines.next().ok_or(AlistError::Truncated(what))?;
        let nums = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(no, format!("invalid number {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((no, nums))
    };
    let (no, dims) = next("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(parse_err(no, "expected two numbers `n m`"));
    };
    let (no, maxes) = next("maximum degrees")?;
    if maxes.len() != 2 {
        return Err(parse_err(no, "expected two maximum degrees"));
    }
    let (no, bit_deg) = next("bit degrees")?;
    if bit_deg.len() != n {
        return Err(parse_err(no, format!("expected {n} bit degrees, found {}", bit_deg.len())));
    }
    let (no, check_deg) = next("check degrees")?;
    if check_deg.len() != m {
        return Err(parse_err(no, format!("expected {m} check degrees, found {}", check_deg.len())));
    }
    let mut h = BitMatrix::zeros(m, n);
    for (b, &deg) in bit_deg.iter().enumerate() {
        let (no, entries) = next("bit neighbour list")?;
        let entries: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if entries.len() != deg {
            return Err(parse_err(no, format!("bit {} lists {} checks, degree says {deg}", b + 1, entries.len())));
        }
        for e in entries {
            if e > m {
                return Err(parse_err(no, format!("check index {e} exceeds {m}")));
            }
            if h.get(e - 1, b) {
                return Err(parse_err(no, format!("check index {e} repeated")));
            }
            h.set(e - 1, b, true);
        }
    }
    for (c, &deg) in check_deg.iter().enumerate() {
        let (no, entries) = next("check neighbour list")?;
        let entries: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if entries.len() != deg {
            return Err(parse_err(no, format!("check {} lists {} bits, degree says {deg}", c + 1, entries.len())));
        }
        for e in &entries {
            if *e > n {
                return Err(parse_err(no, format!("bit index {e} exceeds {n}")));
            }
            if !h.get(c, e - 1) {
                return Err(parse_err(no, format!("check {} lists bit {e}, which does not list it", c + 1)));
            }
        }
        if h.row(c).weight() != deg {
            return Err(parse_err(no, format!("check {} neighbour lists disagree", c + 1)));
        }
    }
    Ok(ClassicalCode::new(h))
}

/// Serialize a classical code as alist.
#[must_use]
pub fn write_alist(code: &ClassicalCode) -> String {
    let (n, m) = (code.n(), code.m());
    let cols: Vec<Vec<usize>> = (0..n).map(|b| code.bit_checks(b)).collect();
    let rows: Vec<Vec<usize>> = (0..m).map(|c| code.check_bits(c)).collect();
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(
        out,
        "{} {}",
        cols.iter().map(Vec::len).max().unwrap_or(0),
        rows.iter().map(Vec::len).max().unwrap_or(0)
    );
    let _ = writeln!(out, "{}", join(&cols.iter().map(Vec::len).collect::<Vec<_>>()));
    let _ = writeln!(out, "{}", join(&rows.iter().map(Vec::len).collect::<Vec<_>>()));
    for c in &cols {
        let _ = writeln!(out, "{}", join(&one_based(c)));
    }
    for r in &rows {
        let _ = writeln!(out, "{}", join(&one_based(r)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAMMING: &str = "7 3\n3 4\n1 1 2 1 2 2 3\n4 4 4\n1\n2\n1 2\n3\n1 3\n2 3\n1 2 3\n1 3 5 7\n2 3 6 7\n4 5 6 7\n";

    #[test]
    fn hamming_round_trip_is_exact() {
        let code = load_alist(HAMMING).unwrap();
        assert_eq!(code.n(), 7);
        assert_eq!(code.m(), 3);
        assert_eq!(write_alist(&code), HAMMING);
    }

    #[test]
    fn padding_zeros_are_ignored() {
        let padded = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let code = load_alist(padded).unwrap();
        assert_eq!(code.check_bits(1), vec![1, 2]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1\n1 x\n2\n1 2\n2 3\n";
        assert!(matches!(load_alist(bad), Err(AlistError::Parse { line: 6, .. })));
        let out_of_range = "3 2\n2 2\n1 2 1\n2 2\n1\n1 9\n2\n1 2\n2 3\n";
        assert!(matches!(load_alist(out_of_range), Err(AlistError::Parse { line: 6, .. })));
        assert_eq!(load_alist("3 2\n"), Err(AlistError::Truncated("maximum degrees")));
    }
}
