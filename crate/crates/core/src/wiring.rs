//! Wirings: turning a tripartite box into an effective bipartite one.
//!
//! A bipartition splits the parties into a solo party and a two-party
//! block. The solo party is wired identically. Inside the block one member
//! acts first with input `alpha(s)`, where `s` is the block's effective
//! input; the second member then gets `beta(s, w1)`, which may depend on the
//! first output `w1` (type II) or not (type I); the block output is
//! `gamma(s, w1, w2)`.
//!
//! Boolean functions are truth-table integers: bit `i` holds the value at the
//! argument tuple whose bits, first argument most significant, spell `i`.
//!
//! The effective box lists the side containing party A first, so for `A|BC`
//! it is (solo, block) and for `B|AC`, `C|AB` it is (block, solo).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bell::{chsh_orbit_max, uffink_orbit_max, Correlators, Exact};
use crate::boxes::{pack, Box2, Box3, Party};
use crate::error::{Error, Result};
use crate::rational::{zero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    solo: Party,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [
        Bipartition { solo: Party::A },
        Bipartition { solo: Party::B },
        Bipartition { solo: Party::C },
    ];

    pub fn new(solo: Party) -> Self {
        Bipartition { solo }
    }

    pub fn solo(&self) -> Party {
        self.solo
    }

    /// Block members in alphabetical order.
    pub fn pair(&self) -> [Party; 2] {
        match self.solo {
            Party::A => [Party::B, Party::C],
            Party::B => [Party::A, Party::C],
            Party::C => [Party::A, Party::B],
        }
    }

    pub fn index(&self) -> usize {
        self.solo.index()
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [p, q] = self.pair();
        write!(f, "{}|{}{}", self.solo, p, q)
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    /// `A|BC`, `B|AC` (or `B|CA`), `C|AB` and the mirrored `BC|A` forms.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWiring(format!("bad bipartition `{s}`"));
        let (l, r) = s.trim().split_once('|').ok_or_else(bad)?;
        let (solo, block) = if l.trim().len() == 1 { (l, r) } else { (r, l) };
        let mut solo_chars = solo.trim().chars();
        let solo = match (solo_chars.next(), solo_chars.next()) {
            (Some(c), None) => Party::from_letter(c).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        let mut members: Vec<Party> = block
            .trim()
            .chars()
            .map(Party::from_letter)
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        members.sort();
        let bp = Bipartition::new(solo);
        if members != bp.pair() {
            return Err(bad());
        }
        Ok(bp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WiringKind {
    TypeI,
    TypeII,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Wiring {
    bipartition: Bipartition,
    first: Party,
    alpha: u8,
    beta: u8,
    gamma: u8,
}

impl Wiring {
    pub fn new(
        bipartition: Bipartition,
        first: Party,
        alpha: u8,
        beta: u8,
        gamma: u8,
    ) -> Result<Self> {
        if !bipartition.pair().contains(&first) {
            return Err(Error::InvalidWiring(format!(
                "{first} is not in the block of {bipartition}"
            )));
        }
        if alpha > 3 || beta > 15 {
            return Err(Error::InvalidWiring(format!(
                "truth tables out of range: alpha={alpha} beta={beta}"
            )));
        }
        Ok(Wiring {
            bipartition,
            first,
            alpha,
            beta,
            gamma,
        })
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn first(&self) -> Party {
        self.first
    }

    pub fn second(&self) -> Party {
        let [p, q] = self.bipartition.pair();
        if self.first == p {
            q
        } else {
            p
        }
    }

    pub fn alpha(&self) -> u8 {
        self.alpha
    }

    pub fn beta(&self) -> u8 {
        self.beta
    }

    pub fn gamma(&self) -> u8 {
        self.gamma
    }

    /// 0 when the alphabetically first block member acts first.
    pub fn ordering(&self) -> usize {
        (self.first != self.bipartition.pair()[0]) as usize
    }

    pub fn is_type_i(&self) -> bool {
        (0..2).all(|s| self.beta_at(s, 0) == self.beta_at(s, 1))
    }

    /// Tie-break key: (bipartition, ordering, alpha, beta, gamma).
    pub fn sort_key(&self) -> (usize, usize, u8, u8, u8) {
        (
            self.bipartition.index(),
            self.ordering(),
            self.alpha,
            self.beta,
            self.gamma,
        )
    }

    #[inline]
    pub fn alpha_at(&self, s: u8) -> u8 {
        (self.alpha >> s) & 1
    }

    #[inline]
    pub fn beta_at(&self, s: u8, w1: u8) -> u8 {
        (self.beta >> (2 * s + w1)) & 1
    }

    #[inline]
    pub fn gamma_at(&self, s: u8, w1: u8, w2: u8) -> u8 {
        (self.gamma >> (4 * s + 2 * w1 + w2)) & 1
    }

    /// Inputs and outputs of the three parties for one run of the wiring.
    fn assemble(&self, solo: (u8, u8), first: (u8, u8), second: (u8, u8)) -> usize {
        let mut ins = [0u8; 3];
        let mut outs = [0u8; 3];
        for (p, (i, o)) in [
            (self.bipartition.solo, solo),
            (self.first, first),
            (self.second(), second),
        ] {
            ins[p.index()] = i;
            outs[p.index()] = o;
        }
        Box3::index(pack(&ins), pack(&outs))
    }

    /// Flat Box2 index for a (solo, block) input/output assignment.
    fn effective_index(&self, solo_in: u8, block_in: u8, solo_out: u8, block_out: u8) -> usize {
        if self.bipartition.solo == Party::A {
            Box2::index(pack(&[solo_in, block_in]), pack(&[solo_out, block_out]))
        } else {
            Box2::index(pack(&[block_in, solo_in]), pack(&[block_out, solo_out]))
        }
    }
}

impl fmt::Display for Wiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bp={} order={},{} alpha={} beta={} gamma={}",
            self.bipartition,
            self.first,
            self.second(),
            self.alpha,
            self.beta,
            self.gamma
        )
    }
}

impl FromStr for Wiring {
    type Err = Error;

    /// `bp=A|BC order=B,C alpha=2 beta=15 gamma=102`; fields in any order.
    fn from_str(s: &str) -> Result<Self> {
        let mut bp = None;
        let mut order = None;
        let mut tts = [None; 3];
        for token in s.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                Error::InvalidWiring(format!("expected key=value, found `{token}`"))
            })?;
            let tt = |max: u32| -> Result<u8> {
                value
                    .parse::<u32>()
                    .ok()
                    .filter(|&v| v <= max)
                    .map(|v| v as u8)
                    .ok_or_else(|| Error::InvalidWiring(format!("bad truth table {key}={value}")))
            };
            let slot_taken = match key {
                "bp" => bp.replace(value.parse::<Bipartition>()?).is_some(),
                "order" => {
                    let parties: Vec<Party> = value
                        .split(',')
                        .map(|p| {
                            let mut chars = p.trim().chars();
                            match (chars.next(), chars.next()) {
                                (Some(c), None) => Party::from_letter(c),
                                _ => None,
                            }
                        })
                        .collect::<Option<_>>()
                        .ok_or_else(|| Error::InvalidWiring(format!("bad order `{value}`")))?;
                    order.replace(parties).is_some()
                }
                "alpha" => tts[0].replace(tt(3)?).is_some(),
                "beta" => tts[1].replace(tt(15)?).is_some(),
                "gamma" => tts[2].replace(tt(255)?).is_some(),
                other => return Err(Error::InvalidWiring(format!("unknown field `{other}`"))),
            };
            if slot_taken {
                return Err(Error::InvalidWiring(format!("duplicate field `{key}`")));
            }
        }
        let missing = |name: &str| Error::InvalidWiring(format!("missing field `{name}`"));
        let bp = bp.ok_or_else(|| missing("bp"))?;
        let order = order.ok_or_else(|| missing("order"))?;
        let mut sorted = order.clone();
        sorted.sort();
        if sorted != bp.pair() {
            return Err(Error::InvalidWiring(format!(
                "order must list the block members of {bp}"
            )));
        }
        Wiring::new(
            bp,
            order[0],
            tts[0].ok_or_else(|| missing("alpha"))?,
            tts[1].ok_or_else(|| missing("beta"))?,
            tts[2].ok_or_else(|| missing("gamma"))?,
        )
    }
}

/// Effective bipartite box of `b` under `w`. The source must be a valid
/// no-signalling box.
pub fn apply_wiring(b: &Box3, w: &Wiring) -> Result<Box2> {
    let report = b.validate();
    if !report.is_valid() {
        return Err(Error::InvalidBox(report.to_string()));
    }
    Ok(apply_sequential(b, w))
}

/// Sequential evaluation: the first block member is measured, its outcome
/// `w1` has probability `P(w1 | alpha(s))`, and the rest of the joint
/// outcome is drawn conditioned on it with the second input `beta(s, w1)`.
/// Branches with `P(w1 | alpha(s)) = 0` contribute nothing.
pub(crate) fn apply_sequential(b: &Box3, w: &Wiring) -> Box2 {
    let first_marginal = b
        .marginal(&[w.first])
        .expect("valid boxes have well-defined marginals");
    let mut table = vec![zero(); 16];
    for solo_in in 0..2u8 {
        for s in 0..2u8 {
            let first_in = w.alpha_at(s);
            for w1 in 0..2u8 {
                let p_w1 = first_marginal.prob(&[first_in], &[w1]);
                if p_w1.is_zero() {
                    continue;
                }
                let second_in = w.beta_at(s, w1);
                for solo_out in 0..2u8 {
                    for w2 in 0..2u8 {
                        let joint = b.table()
                            [w.assemble((solo_in, solo_out), (first_in, w1), (second_in, w2))]
                        .clone();
                        if joint.is_zero() {
                            continue;
                        }
                        let conditional = joint / p_w1;
                        let out = w.gamma_at(s, w1, w2);
                        table[w.effective_index(solo_in, s, solo_out, out)] += p_w1 * conditional;
                    }
                }
            }
        }
    }
    Box2::from_table(table).expect("16 entries")
}

/// Type-I wirings only: the block inputs are fixed by `s`, so the effective
/// box is a plain coarse-graining of the tripartite table.
pub fn apply_fixed_inputs(b: &Box3, w: &Wiring) -> Result<Box2> {
    if !w.is_type_i() {
        return Err(Error::InvalidWiring(format!(
            "{w} feeds an output into an input"
        )));
    }
    let mut table = vec![zero(); 16];
    for solo_in in 0..2u8 {
        for s in 0..2u8 {
            let (first_in, second_in) = (w.alpha_at(s), w.beta_at(s, 0));
            for solo_out in 0..2u8 {
                for w1 in 0..2u8 {
                    for w2 in 0..2u8 {
                        let idx = w.assemble((solo_in, solo_out), (first_in, w1), (second_in, w2));
                        let out = w.gamma_at(s, w1, w2);
                        table[w.effective_index(solo_in, s, solo_out, out)] += &b.table()[idx];
                    }
                }
            }
        }
    }
    Box2::from_table(table)
}

/// An effective box together with the tripartite entries feeding each of
/// its entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveBoxDerivation {
    pub source: Box3,
    pub wiring: Wiring,
    pub result: Box2,
    /// For each Box2 flat index, the Box3 flat indices summed into it.
    pub provenance: Vec<Vec<usize>>,
}

pub fn derive(b: &Box3, w: &Wiring) -> Result<EffectiveBoxDerivation> {
    let result = apply_wiring(b, w)?;
    let mut provenance = vec![Vec::new(); 16];
    for solo_in in 0..2u8 {
        for s in 0..2u8 {
            let first_in = w.alpha_at(s);
            for w1 in 0..2u8 {
                let second_in = w.beta_at(s, w1);
                for solo_out in 0..2u8 {
                    for w2 in 0..2u8 {
                        let idx = w.assemble((solo_in, solo_out), (first_in, w1), (second_in, w2));
                        let out = w.gamma_at(s, w1, w2);
                        provenance[w.effective_index(solo_in, s, solo_out, out)].push(idx);
                    }
                }
            }
        }
    }
    Ok(EffectiveBoxDerivation {
        source: b.clone(),
        wiring: *w,
        result,
        provenance,
    })
}

/// All wirings on `bp` of the requested kind, in tie-break order.
pub fn enumerate_wirings(bp: Bipartition, kind: WiringKind) -> Vec<Wiring> {
    let mut out = Vec::new();
    for first in bp.pair() {
        for alpha in 0..4u8 {
            for beta in 0..16u8 {
                for gamma in 0..=255u8 {
                    let w = Wiring {
                        bipartition: bp,
                        first,
                        alpha,
                        beta,
                        gamma,
                    };
                    let keep = match kind {
                        WiringKind::All => true,
                        WiringKind::TypeI => w.is_type_i(),
                        WiringKind::TypeII => !w.is_type_i(),
                    };
                    if keep {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// Every wiring on every bipartition, in tie-break order.
pub fn all_wirings() -> Vec<Wiring> {
    Bipartition::ALL
        .iter()
        .flat_map(|&bp| enumerate_wirings(bp, WiringKind::All))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    ChshMax,
    UffinkMax,
}

impl Functional {
    pub fn eval(&self, b: &Box2) -> Rational {
        let c = Correlators::of(b);
        match self {
            Functional::ChshMax => c.chsh_max(),
            Functional::UffinkMax => c.uffink_max(),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::ChshMax => write!(f, "chsh_max"),
            Functional::UffinkMax => write!(f, "uffink_max"),
        }
    }
}

/// Tripartite table as integers over a common positive denominator.
enum Scaled {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

fn scale(b: &Box3) -> (BigInt, Scaled) {
    let denom = b
        .table()
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let big: Vec<BigInt> = b
        .table()
        .iter()
        .map(|p| p.numer() * (&denom / p.denom()))
        .collect();
    // Squares of correlator numerators must stay within i128.
    let small: Option<Vec<i128>> = big
        .iter()
        .map(|v| {
            v.to_i64()
                .filter(|x| x.unsigned_abs() < 1 << 40)
                .map(i128::from)
        })
        .collect();
    match small {
        Some(t) if denom.bits() < 40 => (denom, Scaled::Small(t)),
        _ => (denom, Scaled::Big(big)),
    }
}

/// Effective table by reading the tripartite entries at the inputs the
/// outputs dictate; the scalar type is the caller's.
fn effective_sum<T: Clone + Zero + std::ops::Add<Output = T>>(table: &[T], w: &Wiring) -> [T; 16] {
    let mut out: [T; 16] = std::array::from_fn(|_| T::zero());
    for solo_in in 0..2u8 {
        for s in 0..2u8 {
            let first_in = w.alpha_at(s);
            for w1 in 0..2u8 {
                let second_in = w.beta_at(s, w1);
                for solo_out in 0..2u8 {
                    for w2 in 0..2u8 {
                        let idx = w.assemble((solo_in, solo_out), (first_in, w1), (second_in, w2));
                        let k = w.effective_index(solo_in, s, solo_out, w.gamma_at(s, w1, w2));
                        out[k] = out[k].clone() + table[idx].clone();
                    }
                }
            }
        }
    }
    out
}

fn correlators_of<T: Exact>(eff: &[T; 16]) -> [T; 4] {
    std::array::from_fn(|k| {
        (0..4).fold(T::zero(), |acc, o| {
            let v = eff[(k << 2) | o].clone();
            if o == 1 || o == 2 {
                acc + -v
            } else {
                acc + v
            }
        })
    })
}

fn sweep_value<T: Exact>(table: &[T], w: &Wiring, functional: Functional) -> T {
    let e = correlators_of(&effective_sum(table, w));
    match functional {
        Functional::ChshMax => chsh_orbit_max(&e),
        Functional::UffinkMax => uffink_orbit_max(&e),
    }
}

fn best_of<T: Exact + Send>(
    wirings: Vec<Wiring>,
    value: impl Fn(&Wiring) -> T + Sync + Send,
) -> (Wiring, T) {
    wirings
        .into_par_iter()
        .map(|w| {
            let v = value(&w);
            (w, v)
        })
        .reduce_with(|x, y| {
            let x_wins = x.1 > y.1 || (x.1 == y.1 && x.0.sort_key() < y.0.sort_key());
            if x_wins {
                x
            } else {
                y
            }
        })
        .expect("nonempty wiring set")
}

/// Exact maximum of `functional` over all bipartitions and wirings. Ties go
/// to the smallest [`Wiring::sort_key`], independent of evaluation order.
pub fn search_max(b: &Box3, functional: Functional) -> Result<(Wiring, Rational)> {
    let report = b.validate();
    if !report.is_valid() {
        return Err(Error::InvalidBox(report.to_string()));
    }
    let (denom, scaled) = scale(b);
    // Correlators carry one factor of the denominator, Uffink two.
    let power = match functional {
        Functional::ChshMax => denom.clone(),
        Functional::UffinkMax => &denom * &denom,
    };
    let (w, numer) = match &scaled {
        Scaled::Small(t) => {
            let (w, v) = best_of(all_wirings(), |w| sweep_value(t, w, functional));
            (w, BigInt::from(v))
        }
        Scaled::Big(t) => best_of(all_wirings(), |w| sweep_value(t, w, functional)),
    };
    Ok((w, Rational::new(numer, power)))
}

/// Effective boxes of every wiring of `b`, grouped by equal tables. Groups
/// come in order of their first wiring, and wirings within a group in
/// tie-break order.
pub fn distinct_effective_boxes(b: &Box3) -> Result<Vec<(Box2, Vec<Wiring>)>> {
    let report = b.validate();
    if !report.is_valid() {
        return Err(Error::InvalidBox(report.to_string()));
    }
    let (denom, scaled) = scale(b);
    let keyed: Vec<(Wiring, Vec<BigInt>)> = all_wirings()
        .into_par_iter()
        .map(|w| {
            let eff: Vec<BigInt> = match &scaled {
                Scaled::Small(t) => effective_sum(t, &w)
                    .iter()
                    .map(|&v| BigInt::from(v))
                    .collect(),
                Scaled::Big(t) => effective_sum(t, &w).to_vec(),
            };
            (w, eff)
        })
        .collect();
    let mut order: Vec<Vec<BigInt>> = Vec::new();
    let mut groups: HashMap<Vec<BigInt>, Vec<Wiring>> = HashMap::new();
    for (w, eff) in keyed {
        groups
            .entry(eff)
            .or_insert_with_key(|k| {
                order.push(k.clone());
                Vec::new()
            })
            .push(w);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let wirings = groups.remove(&key).expect("key recorded on insert");
            let table = key
                .into_iter()
                .map(|v| Rational::new(v, denom.clone()))
                .collect();
            (Box2::from_table(table).expect("16 entries"), wirings)
        })
        .collect())
}
