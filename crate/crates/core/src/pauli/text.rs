//! Line-oriented text form of a [`PauliSum`].
//!
//! ```text
//! # comment
//! nqubits 4
//! -0.0453218 X0 Z1 X2
//! 0.25 -0.5 Y0        # real part, imaginary part, letters
//! 1.5                 # identity term
//! ```
//!
//! The `nqubits` line is optional; without it the register is sized to the
//! largest index that appears.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{parse_letter_token, PauliSum, PauliTerm};
use crate::error::{Error, Result};

/// How coefficients are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Digits {
    /// `%.Ng`-style output with `N` significant digits.
    Significant(usize),
    /// Shortest string that parses back to the identical `f64`.
    RoundTrip,
}

impl Default for Digits {
    fn default() -> Self {
        Digits::Significant(12)
    }
}

/// Formats a float with `sig` significant digits, trailing zeros stripped.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= sig as i32 {
        let mant = strip_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    strip_zeros(&format!("{:.*}", decimals, v))
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn format_real(v: f64, digits: Digits) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    match digits {
        Digits::Significant(n) => format_sig(v, n),
        Digits::RoundTrip => format!("{v:?}"),
    }
}

/// Parses the text form. Errors carry 1-based line numbers.
pub fn parse_pauli_text(src: &str) -> Result<PauliSum> {
    let mut declared: Option<usize> = None;
    let mut rows: Vec<(usize, Complex64, Vec<(usize, super::Letter)>)> = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse {
            line: line_no,
            message: m,
        };
        let mut toks = line.split_whitespace().peekable();
        if toks.peek() == Some(&"nqubits") {
            toks.next();
            let n = toks
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| err("`nqubits` needs a positive integer".into()))?;
            if declared.is_some() || !rows.is_empty() {
                return Err(err("`nqubits` must appear once, before any term".into()));
            }
            declared = Some(n);
            continue;
        }
        let re: f64 = toks
            .next()
            .unwrap()
            .parse()
            .map_err(|_| err(format!("expected a real coefficient in `{line}`")))?;
        let mut im = 0.0;
        if let Some(t) = toks.peek() {
            if let Ok(v) = t.parse::<f64>() {
                im = v;
                toks.next();
            }
        }
        let mut letters = Vec::new();
        for t in toks {
            let (q, l) = parse_letter_token(t).map_err(err)?;
            if letters.iter().any(|&(p, _)| p == q) {
                return Err(err(format!("qubit {q} appears twice")));
            }
            letters.push((q, l));
        }
        rows.push((line_no, Complex64::new(re, im), letters));
    }
    let inferred = rows
        .iter()
        .flat_map(|(_, _, ls)| ls.iter().map(|&(q, _)| q + 1))
        .max()
        .unwrap_or(1);
    let n = declared.unwrap_or(inferred);
    let mut sum = PauliSum::zero(n);
    for (line, c, letters) in rows {
        let term = PauliTerm::from_letters(n, &letters).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        sum.add_term(term, c)?;
    }
    Ok(sum)
}

impl PauliSum {
    /// Text form with an `nqubits` header, one term per line in canonical order.
    pub fn to_text(&self, digits: Digits) -> String {
        let mut out = format!("nqubits {}\n", self.n_qubits());
        for (t, c) in self.iter() {
            out.push_str(&format_real(c.re, digits));
            if c.im != 0.0 {
                write!(out, " {}", format_real(c.im, digits)).unwrap();
            }
            if !t.is_identity() {
                write!(out, " {t}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(src: &str) -> Result<PauliSum> {
        parse_pauli_text(src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(-0.0453218, 12), "-0.0453218");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(1234.5, 3), "1.23e3");
        assert_eq!(format_sig(2.5e-9, 12), "2.5e-9");
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(100.0, 12), "100");
    }

    #[test]
    fn parse_basic() {
        let s = parse_pauli_text("# h\n-0.0453218 X0 Z1 X2\n0.5 -0.25 Y3\n1.5\n").unwrap();
        assert_eq!(s.n_qubits(), 4);
        assert_eq!(s.len(), 3);
        let id = PauliTerm::identity(4);
        assert_eq!(s.coeff(&id), Complex64::new(1.5, 0.0));
        let y = PauliTerm::parse(4, "Y3").unwrap();
        assert_eq!(s.coeff(&y), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn header_sets_width() {
        let s = parse_pauli_text("nqubits 6\n1 Z0\n").unwrap();
        assert_eq!(s.n_qubits(), 6);
    }

    #[test]
    fn errors_have_line_numbers() {
        let e = parse_pauli_text("1 Z0\n\nabc X1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_pauli_text("1 Z0\n2 Q1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_pauli_text("nqubits 2\n1 Z5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trip_exact() {
        let s = PauliSum::from_real_strs(3, &[(1.0 / 3.0, "X0 Z2"), (-0.1, "")]).unwrap();
        let back = parse_pauli_text(&s.to_text(Digits::RoundTrip)).unwrap();
        assert_eq!(back, s);
    }
}
