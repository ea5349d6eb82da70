use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{zero, Rational};

use super::{bit, Box3, Party};

/// `XOR of o_p(x_p) over terms == parity`, where `o_p(x_p)` is party p's
/// output when its input is `x_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityConstraint {
    terms: Vec<(Party, u8)>,
    parity: u8,
}

impl ParityConstraint {
    pub fn new(terms: Vec<(Party, u8)>, parity: u8) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::MalformedConstraint("no terms".into()));
        }
        for (i, (p, x)) in terms.iter().enumerate() {
            if *x > 1 || parity > 1 {
                return Err(Error::MalformedConstraint(format!(
                    "non-binary value in {p}{x} = {parity}"
                )));
            }
            if terms[..i].iter().any(|(q, _)| q == p) {
                return Err(Error::MalformedConstraint(format!(
                    "party {p} appears twice"
                )));
            }
        }
        Ok(ParityConstraint { terms, parity })
    }

    pub fn terms(&self) -> &[(Party, u8)] {
        &self.terms
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    /// Whether the constraint constrains outputs at the packed input triple.
    pub fn applies(&self, inputs: usize) -> bool {
        self.terms
            .iter()
            .all(|(p, x)| bit(inputs, p.index(), 3) == *x)
    }

    pub fn satisfied_by(&self, outputs: usize) -> bool {
        let xor = self
            .terms
            .iter()
            .fold(0, |acc, (p, _)| acc ^ bit(outputs, p.index(), 3));
        xor == self.parity
    }
}

impl fmt::Display for ParityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(p, x)| format!("{}{}", p.letter().to_ascii_lowercase(), x))
            .collect();
        write!(f, "{} = {}", terms.join(" + "), self.parity)
    }
}

/// A list of parity relations whose "completion" is a tripartite box: at
/// every input triple, uniform over the outputs obeying every applicable
/// relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    constraints: Vec<ParityConstraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<ParityConstraint>) -> Self {
        ConstraintSet { constraints }
    }

    pub fn push(&mut self, c: ParityConstraint) {
        self.constraints.push(c);
    }

    pub fn constraints(&self) -> &[ParityConstraint] {
        &self.constraints
    }

    /// Relations of the cyclically symmetric extremal class:
    /// a0+b1=0, b0+c1=0, c0+a1=0, a0+b0+c0=0, a1+b1+c1=1.
    pub fn class4() -> Self {
        use Party::*;
        let c = |terms: Vec<(Party, u8)>, parity| ParityConstraint::new(terms, parity).unwrap();
        ConstraintSet::new(vec![
            c(vec![(A, 0), (B, 1)], 0),
            c(vec![(B, 0), (C, 1)], 0),
            c(vec![(C, 0), (A, 1)], 0),
            c(vec![(A, 0), (B, 0), (C, 0)], 0),
            c(vec![(A, 1), (B, 1), (C, 1)], 1),
        ])
    }

    pub fn build(&self) -> Result<Box3> {
        let mut table = vec![zero(); 64];
        for inputs in 0..8usize {
            let active: Vec<&ParityConstraint> = self
                .constraints
                .iter()
                .filter(|c| c.applies(inputs))
                .collect();
            let allowed: Vec<usize> = (0..8)
                .filter(|&o| active.iter().all(|c| c.satisfied_by(o)))
                .collect();
            if allowed.is_empty() {
                return Err(Error::Contradiction(
                    bit(inputs, 0, 3),
                    bit(inputs, 1, 3),
                    bit(inputs, 2, 3),
                ));
            }
            let p = Rational::new(1.into(), (allowed.len() as i64).into());
            for o in allowed {
                table[Box3::index(inputs, o)] = p.clone();
            }
        }
        Box3::from_table(table)
    }
}
