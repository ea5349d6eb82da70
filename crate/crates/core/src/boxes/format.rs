//! Text format for boxes.
//!
//! ```text
//! box3
//! # comment
//! 0 0 0 | 0 0 0 = 1/4
//! ```
//!
//! Outputs come before the bar, inputs after it. Unlisted entries are zero.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{parse_rational, zero};

use super::{bit, pack, Box2, Box3, CorrelationBox, ValidationReport};

/// A box of either arity, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyBox {
    Two(Box2),
    Three(Box3),
}

impl AnyBox {
    pub fn validate(&self) -> ValidationReport {
        match self {
            AnyBox::Two(b) => b.validate(),
            AnyBox::Three(b) => b.validate(),
        }
    }

    pub fn parties(&self) -> usize {
        match self {
            AnyBox::Two(_) => 2,
            AnyBox::Three(_) => 3,
        }
    }

    pub fn as_box2(&self) -> Option<&Box2> {
        match self {
            AnyBox::Two(b) => Some(b),
            AnyBox::Three(_) => None,
        }
    }

    pub fn as_box3(&self) -> Option<&Box3> {
        match self {
            AnyBox::Three(b) => Some(b),
            AnyBox::Two(_) => None,
        }
    }
}

impl From<Box2> for AnyBox {
    fn from(b: Box2) -> Self {
        AnyBox::Two(b)
    }
}

impl From<Box3> for AnyBox {
    fn from(b: Box3) -> Self {
        AnyBox::Three(b)
    }
}

impl<const N: usize> fmt::Display for CorrelationBox<N> {
    /// Canonical serialization: header, then nonzero entries in flat-index
    /// order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "box{N}")?;
        for inputs in 0..Self::SETTINGS {
            for outputs in 0..Self::SETTINGS {
                let p = self.prob(inputs, outputs);
                if p.is_zero() {
                    continue;
                }
                let outs: Vec<String> = (0..N).map(|k| bit(outputs, k, N).to_string()).collect();
                let ins: Vec<String> = (0..N).map(|k| bit(inputs, k, N).to_string()).collect();
                writeln!(f, "{} | {} = {}", outs.join(" "), ins.join(" "), p)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for AnyBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyBox::Two(b) => b.fmt(f),
            AnyBox::Three(b) => b.fmt(f),
        }
    }
}

/// Parses and canonicalizes without checking probabilistic validity.
pub fn parse_box_unchecked(text: &str) -> Result<AnyBox> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty box file"))?;
    match header {
        "box3" => parse_entries::<3>(lines).map(AnyBox::Three),
        "box2" => parse_entries::<2>(lines).map(AnyBox::Two),
        other => Err(Error::parse(
            hline,
            format!("expected header `box2` or `box3`, found `{other}`"),
        )),
    }
}

/// Parses, canonicalizes and validates a box file.
pub fn parse_box(text: &str) -> Result<AnyBox> {
    let b = parse_box_unchecked(text)?;
    let report = b.validate();
    if report.is_valid() {
        Ok(b)
    } else {
        Err(Error::InvalidBox(report.to_string()))
    }
}

fn parse_entries<'a, const N: usize>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<CorrelationBox<N>> {
    let mut table = vec![zero(); CorrelationBox::<N>::LEN];
    let mut seen = vec![false; CorrelationBox::<N>::LEN];
    for (line, text) in lines {
        let (lhs, value) = text
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "missing `=`"))?;
        let (outs, ins) = lhs
            .split_once('|')
            .ok_or_else(|| Error::parse(line, "missing `|`"))?;
        let outputs = parse_bits::<N>(outs, line)?;
        let inputs = parse_bits::<N>(ins, line)?;
        let p = parse_rational(value)
            .ok_or_else(|| Error::parse(line, format!("bad rational `{}`", value.trim())))?;
        let idx = CorrelationBox::<N>::index(pack(&inputs), pack(&outputs));
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::parse(line, "duplicate entry"));
        }
        table[idx] = p;
    }
    CorrelationBox::from_table(table)
}

fn parse_bits<const N: usize>(s: &str, line: usize) -> Result<[u8; N]> {
    let bits: Vec<u8> = s
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(0),
            "1" => Ok(1),
            _ => Err(Error::parse(line, format!("expected a bit, found `{t}`"))),
        })
        .collect::<Result<_>>()?;
    bits.try_into()
        .map_err(|_| Error::parse(line, format!("expected {N} bits on each side of `|`")))
}
