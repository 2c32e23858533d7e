//! Engineering-suffix number parsing and formatting.
//!
//! Values are stored in base SI units. Text inputs may carry an SI prefix
//! (`f p n u µ m k M G T`, plus SPICE-style `meg`) optionally followed by a
//! unit symbol (`F V A S s Hz Ω ohm`): `864.5fF`, `5k`, `11.34MΩ`, `1us`.
//! Prefixes are case-sensitive, so `m` is milli and `M` is mega.

use crate::error::{Error, Result};

const PREFIXES: &[(&str, i32)] = &[
    ("meg", 6),
    ("MEG", 6),
    ("T", 12),
    ("G", 9),
    ("M", 6),
    ("k", 3),
    ("K", 3),
    ("m", -3),
    ("u", -6),
    ("µ", -6),
    ("μ", -6),
    ("n", -9),
    ("p", -12),
    ("f", -15),
    ("a", -18),
];

const UNITS: &[&str] = &["ohms", "ohm", "Ohm", "Ω", "Hz", "F", "V", "A", "S", "s"];

fn prefix_exponent(p: &str) -> Option<i32> {
    if p.is_empty() {
        return Some(0);
    }
    PREFIXES.iter().find(|(s, _)| *s == p).map(|(_, e)| *e)
}

fn suffix_exponent(suffix: &str) -> Option<i32> {
    if let Some(e) = prefix_exponent(suffix) {
        return Some(e);
    }
    UNITS
        .iter()
        .filter_map(|u| suffix.strip_suffix(u))
        .find_map(prefix_exponent)
}

/// Applies a decimal exponent by re-parsing, so `864.5f` rounds exactly like
/// the literal `864.5e-15`.
fn scaled(head: &str, exponent: i32) -> Option<f64> {
    let (mantissa, own_exp) = match head.find(['e', 'E']) {
        Some(i) => (&head[..i], head[i + 1..].parse::<i32>().ok()?),
        None => (head, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", own_exp + exponent).parse().ok()
}

/// Parses a number with an optional engineering suffix into base SI units.
pub fn parse_quantity(text: &str) -> Result<f64> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::parse(None, "empty quantity"));
    }
    if let Ok(v) = s.parse::<f64>() {
        return finite(v, s);
    }
    // Longest numeric head whose tail is a known suffix wins, so `1e-3`
    // and `5meg` both resolve.
    let splits: Vec<usize> = s.char_indices().map(|(i, _)| i).skip(1).collect();
    for &at in splits.iter().rev() {
        let (head, tail) = s.split_at(at);
        if let (Ok(_), Some(exp)) = (head.parse::<f64>(), suffix_exponent(tail)) {
            if let Some(v) = scaled(head, exp) {
                return finite(v, s);
            }
        }
    }
    Err(Error::parse(None, format!("cannot parse quantity `{s}`")))
}

fn finite(v: f64, s: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(None, format!("quantity `{s}` is not finite")))
    }
}

/// Formats a value with an SI prefix and three significant decimals.
pub fn format_eng(value: f64, unit: &str) -> String {
    const STEPS: &[(f64, &str)] = &[
        (1e12, "T"),
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "µ"),
        (1e-9, "n"),
        (1e-12, "p"),
        (1e-15, "f"),
        (1e-18, "a"),
    ];
    if value == 0.0 || !value.is_finite() {
        return format!("{value} {unit}");
    }
    let mag = value.abs();
    let (scale, prefix) = STEPS
        .iter()
        .copied()
        .find(|(s, _)| mag >= *s)
        .unwrap_or((1e-18, "a"));
    format!("{:.3} {prefix}{unit}", value / scale)
}

/// `n` logarithmically spaced points from `start` to `end`, both endpoints
/// included exactly. Both bounds must be positive.
pub fn log_space(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (la, lb) = (start.ln(), end.ln());
            let last = n - 1;
            (0..n)
                .map(|k| match k {
                    0 => start,
                    k if k == last => end,
                    k => (la + (lb - la) * k as f64 / last as f64).exp(),
                })
                .collect()
        }
    }
}
