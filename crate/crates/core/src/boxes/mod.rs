//! Bipartite and tripartite conditional probability tables.
//!
//! A box with `N` parties, each with a binary input and a binary output, is
//! stored as a flat table of `4^N` exact rationals. Inputs are packed into an
//! `N`-bit integer with party A in the most significant position, outputs
//! likewise, and the flat index is `inputs << N | outputs`. For three
//! parties this is `32x + 16y + 8z + 4a + 2b + c`.

mod builtin;
mod constraints;
mod format;
mod relabel;

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{one, sign, zero, Rational};

pub use builtin::{builtin, class3, class4, class44, pr_box, Builtin};
pub use constraints::{ConstraintSet, ParityConstraint};
pub use format::{parse_box, parse_box_unchecked, AnyBox};
pub use relabel::Relabeling;

pub type Box3 = CorrelationBox<3>;
pub type Box2 = CorrelationBox<2>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Party {
        Party::ALL[i]
    }

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn from_letter(c: char) -> Option<Party> {
        match c.to_ascii_uppercase() {
            'A' => Some(Party::A),
            'B' => Some(Party::B),
            'C' => Some(Party::C),
            _ => None,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Bit of `party` in an `n`-bit packed assignment.
#[inline]
pub(crate) fn bit(packed: usize, party: usize, n: usize) -> u8 {
    ((packed >> (n - 1 - party)) & 1) as u8
}

/// Packs per-party bits, party 0 most significant.
#[inline]
pub(crate) fn pack(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Conditional distribution `P(outputs | inputs)` over `N` parties.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CorrelationBox<const N: usize> {
    table: Vec<Rational>,
}

impl<const N: usize> CorrelationBox<N> {
    /// Number of joint input (equivalently, output) assignments.
    pub const SETTINGS: usize = 1 << N;
    pub const LEN: usize = 1 << (2 * N);

    pub fn from_table(table: Vec<Rational>) -> Result<Self> {
        if table.len() != Self::LEN {
            return Err(Error::Arity {
                expected: Self::LEN,
                found: table.len(),
            });
        }
        Ok(CorrelationBox { table })
    }

    /// Builds a table from `f(inputs, outputs)` on packed assignments.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let table = (0..Self::LEN)
            .map(|i| f(i >> N, i & (Self::SETTINGS - 1)))
            .collect();
        CorrelationBox { table }
    }

    pub fn uniform() -> Self {
        let p = Rational::new(1.into(), (Self::SETTINGS as i64).into());
        CorrelationBox {
            table: vec![p; Self::LEN],
        }
    }

    /// Local deterministic box. Each strategy is a 2-bit truth table: party
    /// `k` outputs bit `input` of `strategies[k]`.
    pub fn deterministic(strategies: [u8; N]) -> Self {
        Self::from_fn(|inputs, outputs| {
            let hit = (0..N).all(|k| {
                let i = bit(inputs, k, N);
                (strategies[k] >> i) & 1 == bit(outputs, k, N)
            });
            if hit {
                one()
            } else {
                zero()
            }
        })
    }

    /// All `4^N` deterministic vertices, strategies in lexicographic order
    /// with party A most significant.
    pub fn deterministic_vertices() -> Vec<Self> {
        (0..Self::LEN)
            .map(|code| {
                let mut s = [0u8; N];
                for (k, slot) in s.iter_mut().enumerate() {
                    *slot = ((code >> (2 * (N - 1 - k))) & 3) as u8;
                }
                Self::deterministic(s)
            })
            .collect()
    }

    #[inline]
    pub fn index(inputs: usize, outputs: usize) -> usize {
        (inputs << N) | outputs
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Rational> {
        self.table
    }

    /// Probability at packed `inputs`, `outputs`.
    #[inline]
    pub fn prob(&self, inputs: usize, outputs: usize) -> &Rational {
        &self.table[Self::index(inputs, outputs)]
    }

    /// Probability at per-party bits.
    pub fn get(&self, inputs: [u8; N], outputs: [u8; N]) -> &Rational {
        self.prob(pack(&inputs), pack(&outputs))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (i, p) in self.table.iter().enumerate() {
            if p.is_negative() {
                report.negative.push(i);
            }
        }
        for inputs in 0..Self::SETTINGS {
            let total: Rational = (0..Self::SETTINGS).map(|o| self.prob(inputs, o)).sum();
            if total != one() {
                report.unnormalized.push((inputs, total));
            }
        }
        // Party k must not influence the joint marginal of the others.
        for k in 0..N {
            for rest_in in 0..(Self::SETTINGS >> 1) {
                for rest_out in 0..(Self::SETTINGS >> 1) {
                    let marg = |xk: usize| -> Rational {
                        let inputs = insert_bit(rest_in, k, xk, N);
                        (0..2)
                            .map(|ok| self.prob(inputs, insert_bit(rest_out, k, ok, N)))
                            .sum()
                    };
                    if marg(0) != marg(1) {
                        report.signalling.push(Signalling {
                            party: Party::from_index(k),
                            others_inputs: rest_in,
                            others_outputs: rest_out,
                        });
                    }
                }
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// Returns `self` if it validates, otherwise an [`Error::InvalidBox`].
    pub fn checked(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidBox(report.to_string()))
        }
    }

    /// Joint distribution of `parties` (in the given order), obtained by
    /// summing out the other parties' outputs. Fails if the result depends
    /// on a traced-out party's input.
    pub fn marginal(&self, parties: &[Party]) -> Result<Marginal> {
        let kept: Vec<usize> = parties.iter().map(|p| p.index()).collect();
        assert!(
            kept.iter().all(|&k| k < N),
            "party out of range for a {N}-party box"
        );
        let traced: Vec<usize> = (0..N).filter(|k| !kept.contains(k)).collect();
        let m = kept.len();
        let compute = |traced_in: usize| -> Vec<Rational> {
            let mut table = vec![zero(); 1 << (2 * m)];
            for inputs in 0..Self::SETTINGS {
                if extract(inputs, &traced, N) != traced_in {
                    continue;
                }
                let kin = extract(inputs, &kept, N);
                for outputs in 0..Self::SETTINGS {
                    let kout = extract(outputs, &kept, N);
                    table[(kin << m) | kout] += self.prob(inputs, outputs);
                }
            }
            table
        };
        // Each kept-input block was only summed over one traced-input setting.
        let base = compute(0);
        for traced_in in 1..(1usize << traced.len()) {
            if compute(traced_in) != base {
                let pos = traced.len() - 1 - traced_in.trailing_zeros() as usize;
                return Err(Error::IllDefinedMarginal {
                    party: Party::from_index(traced[pos]).letter(),
                });
            }
        }
        Ok(Marginal {
            parties: parties.to_vec(),
            table: base,
        })
    }

    /// `< prod_k (-1)^{o_k} >` over `parties` at the given inputs. Traced-out
    /// parties are read at input 0, which is immaterial for a no-signalling box.
    pub fn correlator(&self, parties: &[Party], inputs: &[u8]) -> Rational {
        assert_eq!(parties.len(), inputs.len(), "one input per party");
        let mut bits = [0u8; N];
        for (p, &x) in parties.iter().zip(inputs) {
            bits[p.index()] = x;
        }
        let packed_in = pack(&bits);
        let mask: usize = parties
            .iter()
            .map(|p| 1usize << (N - 1 - p.index()))
            .fold(0, |a, b| a | b);
        (0..Self::SETTINGS)
            .map(|o| sign((o & mask).count_ones() as u8) * self.prob(packed_in, o))
            .sum()
    }

    /// Entrywise convex combination.
    pub fn mix(boxes: &[Self], weights: &[Rational]) -> Result<Self> {
        if boxes.is_empty() || boxes.len() != weights.len() {
            return Err(Error::MixtureShape);
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NegativeWeight(w.clone()));
        }
        let total: Rational = weights.iter().sum();
        if total != one() {
            return Err(Error::WeightSum(total));
        }
        let mut table = vec![zero(); Self::LEN];
        for (b, w) in boxes.iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            for (t, p) in table.iter_mut().zip(&b.table) {
                *t += w * p;
            }
        }
        Ok(CorrelationBox { table })
    }
}

/// Inserts `value` as the bit of `party` into an `(n-1)`-bit assignment of
/// the remaining parties.
fn insert_bit(rest: usize, party: usize, value: usize, n: usize) -> usize {
    let low_width = n - 1 - party;
    let high = rest >> low_width;
    let low = rest & ((1 << low_width) - 1);
    (high << (low_width + 1)) | (value << low_width) | low
}

/// Sub-assignment of `parties` (in order) from an `n`-bit packed assignment.
fn extract(packed: usize, parties: &[usize], n: usize) -> usize {
    parties
        .iter()
        .fold(0, |acc, &k| (acc << 1) | bit(packed, k, n) as usize)
}

/// Distribution of a subset of parties, as produced by
/// [`CorrelationBox::marginal`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marginal {
    parties: Vec<Party>,
    table: Vec<Rational>,
}

impl Marginal {
    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    /// `P(outputs | inputs)` with one bit per kept party, in kept order.
    pub fn prob(&self, inputs: &[u8], outputs: &[u8]) -> &Rational {
        let m = self.parties.len();
        &self.table[(pack(inputs) << m) | pack(outputs)]
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    /// Reinterprets a two-party marginal as a bipartite box.
    pub fn into_box2(self) -> Option<Box2> {
        (self.parties.len() == 2).then_some(CorrelationBox { table: self.table })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signalling {
    /// Party whose input changes the others' marginal.
    pub party: Party,
    /// Inputs of the remaining parties, packed in party order.
    pub others_inputs: usize,
    pub others_outputs: usize,
}

/// Outcome of [`CorrelationBox::validate`]; empty lists mean the condition
/// holds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Flat indices of negative entries.
    pub negative: Vec<usize>,
    /// Packed input settings whose outputs do not sum to one, with the sum.
    pub unnormalized: Vec<(usize, Rational)>,
    pub signalling: Vec<Signalling>,
}

impl ValidationReport {
    pub fn is_positive(&self) -> bool {
        self.negative.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.unnormalized.is_empty()
    }

    pub fn is_no_signalling(&self) -> bool {
        self.signalling.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.is_positive() && self.is_normalized() && self.is_no_signalling()
    }

    /// Parties flagged for signalling, deduplicated and sorted.
    pub fn signalling_parties(&self) -> Vec<Party> {
        let mut parties: Vec<Party> = self.signalling.iter().map(|s| s.party).collect();
        parties.sort();
        parties.dedup();
        parties
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid no-signalling box");
        }
        let mut lines = Vec::new();
        if !self.negative.is_empty() {
            lines.push(format!(
                "negative entries at flat indices {:?}",
                self.negative
            ));
        }
        for (inputs, total) in &self.unnormalized {
            lines.push(format!("inputs {inputs:b} sum to {total}"));
        }
        for s in &self.signalling {
            lines.push(format!(
                "party {} signals: others' marginal at inputs {:b}, outputs {:b} depends on its input",
                s.party, s.others_inputs, s.others_outputs
            ));
        }
        write!(f, "{}", lines.join("; "))
    }
}
