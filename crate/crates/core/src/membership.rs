//! Locality and time-ordered bilocality as exact LP feasibility.

use num_traits::{Signed, Zero};

use crate::boxes::{bit, pack, AnyBox, Box3, CorrelationBox, Party};
use crate::error::{Error, Result};
use crate::lp::{lp_feasible, LpCertificate, LpProblem};
use crate::rational::{one, rat, zero, Rational};
use crate::wiring::Bipartition;

/// Rows: one per table entry, then normalization. Columns: the
/// deterministic vertices in [`CorrelationBox::deterministic_vertices`] order.
pub fn local_problem<const N: usize>(b: &CorrelationBox<N>) -> LpProblem {
    let vertices = CorrelationBox::<N>::deterministic_vertices();
    let mut p = LpProblem::new(vertices.len());
    for (k, target) in b.table().iter().enumerate() {
        let row = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.table()[k].is_zero())
            .map(|(j, _)| (j, one()))
            .collect();
        p.add_row(row, target.clone()).expect("indices in range");
    }
    p.add_row((0..vertices.len()).map(|j| (j, one())).collect(), one())
        .expect("indices in range");
    p
}

/// Feasible iff `b` is a convex combination of deterministic strategies; the
/// feasible point holds the weights.
pub fn is_local<const N: usize>(b: &CorrelationBox<N>) -> LpCertificate {
    lp_feasible(&local_problem(b))
}

pub fn is_local_any(b: &AnyBox) -> LpCertificate {
    match b {
        AnyBox::Two(b) => is_local(b),
        AnyBox::Three(b) => is_local(b),
    }
}

/// Which block member of a bipartition acts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// The alphabetically first block member acts first and may signal to
    /// the other.
    Forward,
    Backward,
}

/// One deterministic hidden-variable value of a time-ordered bilocal model
/// for a bipartition with block `(P, Q)` (alphabetical).
///
/// Truth tables: `solo` maps the solo input; in each direction the first
/// member's table maps its own input and the second member's table maps
/// `(in_P, in_Q)` at bit `2 in_P + in_Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ToblStrategy {
    pub solo: u8,
    /// `(P = f(in_P), Q = g(in_P, in_Q))`.
    pub forward: (u8, u8),
    /// `(Q = f(in_Q), P = g(in_P, in_Q))`.
    pub backward: (u8, u8),
}

impl ToblStrategy {
    pub const COUNT: usize = 4 * 64 * 64;

    /// Position in the weight vector: lexicographic in
    /// (solo, forward pair, backward pair).
    pub fn index(&self) -> usize {
        let fwd = (self.forward.0 as usize) * 16 + self.forward.1 as usize;
        let bwd = (self.backward.0 as usize) * 16 + self.backward.1 as usize;
        (self.solo as usize) * 4096 + fwd * 64 + bwd
    }

    pub fn from_index(i: usize) -> Self {
        let (solo, fwd, bwd) = (i / 4096, (i / 64) % 64, i % 64);
        ToblStrategy {
            solo: solo as u8,
            forward: ((fwd / 16) as u8, (fwd % 16) as u8),
            backward: ((bwd / 16) as u8, (bwd % 16) as u8),
        }
    }

    /// Packed outputs at packed inputs.
    pub fn outputs(&self, bp: Bipartition, dir: Direction, inputs: usize) -> usize {
        let [p, q] = bp.pair();
        let s = bp.solo();
        let input = |party: Party| bit(inputs, party.index(), 3);
        let (in_p, in_q) = (input(p), input(q));
        let g_idx = 2 * in_p + in_q;
        let (out_p, out_q) = match dir {
            Direction::Forward => ((self.forward.0 >> in_p) & 1, (self.forward.1 >> g_idx) & 1),
            Direction::Backward => (
                (self.backward.1 >> g_idx) & 1,
                (self.backward.0 >> in_q) & 1,
            ),
        };
        let mut outs = [0u8; 3];
        outs[s.index()] = (self.solo >> input(s)) & 1;
        outs[p.index()] = out_p;
        outs[q.index()] = out_q;
        pack(&outs)
    }
}

/// Weights over all [`ToblStrategy`] values for one bipartition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToblModel {
    pub bipartition: Bipartition,
    pub weights: Vec<Rational>,
}

impl ToblModel {
    pub fn from_strategies(
        bipartition: Bipartition,
        strategies: impl IntoIterator<Item = (ToblStrategy, Rational)>,
    ) -> Self {
        let mut weights = vec![zero(); ToblStrategy::COUNT];
        for (s, w) in strategies {
            weights[s.index()] += w;
        }
        ToblModel {
            bipartition,
            weights,
        }
    }

    /// Reads the model off a feasible [`is_tobl`] certificate.
    pub fn from_certificate(bipartition: Bipartition, cert: &LpCertificate) -> Option<Self> {
        let point = cert.point()?;
        (point.len() == ToblStrategy::COUNT).then(|| ToblModel {
            bipartition,
            weights: point.to_vec(),
        })
    }

    pub fn support(&self) -> impl Iterator<Item = (ToblStrategy, &Rational)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| (ToblStrategy::from_index(i), w))
    }

    /// The joint distribution produced when the block acts in order `dir`.
    pub fn induced(&self, dir: Direction) -> Box3 {
        let mut table = vec![zero(); 64];
        for (s, w) in self.support() {
            for inputs in 0..8 {
                table[Box3::index(inputs, s.outputs(self.bipartition, dir, inputs))] += w;
            }
        }
        Box3::from_table(table).expect("64 entries")
    }
}

/// Checks that `m` is a probability vector and that both signalling
/// directions reproduce `b` exactly.
pub fn verify_model(m: &ToblModel, b: &Box3) -> bool {
    m.weights.len() == ToblStrategy::COUNT
        && m.weights.iter().all(|w| !w.is_negative())
        && m.weights.iter().sum::<Rational>() == one()
        && m.induced(Direction::Forward) == *b
        && m.induced(Direction::Backward) == *b
}

/// Rows `64 d + k` equate direction `d`'s induced entry `k` with `b`; row
/// 128 is normalization. Columns are [`ToblStrategy`] indices.
pub fn tobl_problem(b: &Box3, bp: Bipartition) -> LpProblem {
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); 129];
    for j in 0..ToblStrategy::COUNT {
        let s = ToblStrategy::from_index(j);
        for (d, dir) in [Direction::Forward, Direction::Backward]
            .into_iter()
            .enumerate()
        {
            for inputs in 0..8 {
                let k = Box3::index(inputs, s.outputs(bp, dir, inputs));
                rows[64 * d + k].push((j, one()));
            }
        }
        rows[128].push((j, one()));
    }
    let mut p = LpProblem::new(ToblStrategy::COUNT);
    for (i, row) in rows.into_iter().enumerate() {
        let rhs = if i < 128 {
            b.table()[i % 64].clone()
        } else {
            one()
        };
        p.add_row(row, rhs).expect("indices in range");
    }
    p
}

pub fn is_tobl(b: &Box3, bp: Bipartition) -> LpCertificate {
    lp_feasible(&tobl_problem(b, bp))
}

/// Membership models accepted by [`membership`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Local,
    NoSignalling,
    Tobl(Bipartition),
}

/// Runs the requested membership test. No-signalling membership is the
/// validation report itself; it is returned as a trivial certificate.
pub fn membership(b: &AnyBox, model: Model) -> Result<LpCertificate> {
    match model {
        Model::Local => Ok(is_local_any(b)),
        Model::NoSignalling => {
            if b.validate().is_valid() {
                Ok(LpCertificate::Feasible { point: Vec::new() })
            } else {
                Ok(LpCertificate::Infeasible { farkas: Vec::new() })
            }
        }
        Model::Tobl(bp) => match b {
            AnyBox::Three(b3) => Ok(is_tobl(b3, bp)),
            AnyBox::Two(_) => Err(Error::InvalidBox(
                "time-ordered bilocality needs a tripartite box".into(),
            )),
        },
    }
}

fn next_party(p: Party) -> Party {
    Party::from_index((p.index() + 1) % 3)
}

/// Explicit model for the cyclic extremal class with a uniform two-bit
/// hidden variable `(l0, l1)`:
///
/// * solo: `a = l0 ^ (l0 ^ l1) x`
/// * B first: `b = l0 ^ l1 ^ l1 y`, `c = l1 ^ (l0 ^ y) z`
/// * C first: `c = l1 ^ (l0 ^ 1) z`, `b = l0 ^ (l1 ^ z)(y ^ 1)`
///
/// written for `A|BC` and carried to the other bipartitions by the cyclic
/// party shift `A -> B -> C -> A`.
pub fn class4_tobl_model(bp: Bipartition) -> ToblModel {
    let role_b = next_party(bp.solo());
    let [p, q] = bp.pair();
    let strategies = (0..4u8).map(|lambda| {
        let (l0, l1) = (lambda >> 1, lambda & 1);
        let solo = move |x: u8| l0 ^ ((l0 ^ l1) & x);
        let b_first = move |y: u8| l0 ^ l1 ^ (l1 & y);
        let c_after = move |y: u8, z: u8| l1 ^ ((l0 ^ y) & z);
        let c_first = move |z: u8| l1 ^ ((l0 ^ 1) & z);
        let b_after = move |y: u8, z: u8| l0 ^ ((l1 ^ z) & (y ^ 1));

        let tt1 = |f: &dyn Fn(u8) -> u8| f(0) | (f(1) << 1);
        let tt2 =
            |g: &dyn Fn(u8, u8) -> u8| (0..4u8).fold(0, |acc, i| acc | (g(i >> 1, i & 1) << i));
        // Second-member tables take (in_P, in_Q).
        let forward = if p == role_b {
            (tt1(&b_first), tt2(&|ip, iq| c_after(ip, iq)))
        } else {
            (tt1(&c_first), tt2(&|ip, iq| b_after(iq, ip)))
        };
        let backward = if q == role_b {
            (tt1(&b_first), tt2(&|ip, iq| c_after(iq, ip)))
        } else {
            (tt1(&c_first), tt2(&|ip, iq| b_after(ip, iq)))
        };
        (
            ToblStrategy {
                solo: tt1(&solo),
                forward,
                backward,
            },
            rat(1, 4),
        )
    });
    ToblModel::from_strategies(bp, strategies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{class4, class44, pr_box, Box2};
    use crate::wiring::Bipartition;

    #[test]
    fn deterministic_vertices_are_local_with_unit_weight() {
        for (j, v) in Box2::deterministic_vertices().iter().enumerate() {
            let cert = is_local(v);
            assert_eq!(cert.point().unwrap()[j], one());
        }
        let v = Box3::deterministic([1, 2, 3]);
        let cert = is_local(&v);
        assert!(cert.verify(&local_problem(&v)));
        assert_eq!(cert.point().unwrap()[27], one());
    }

    #[test]
    fn pr_is_not_local() {
        let cert = is_local(&pr_box());
        assert!(!cert.is_feasible());
        assert!(cert.verify(&local_problem(&pr_box())));
    }

    #[test]
    fn class4_is_not_local() {
        let cert = is_local(&class4());
        assert!(!cert.is_feasible());
        assert!(cert.verify(&local_problem(&class4())));
    }

    #[test]
    fn strategy_index_roundtrip() {
        for i in [0, 1, 63, 64, 4095, 4096, 16383] {
            assert_eq!(ToblStrategy::from_index(i).index(), i);
        }
    }

    #[test]
    fn printed_model_at_zero_lambda() {
        let m = class4_tobl_model(Bipartition::new(Party::A));
        let s = ToblStrategy::from_index(m.weights.iter().position(|w| !w.is_zero()).unwrap());
        let bp = Bipartition::new(Party::A);
        // lambda = (0,0) is the smallest index: a = 0, b = 0, c = y z.
        for inputs in 0..8usize {
            let (y, z) = ((inputs >> 1) & 1, inputs & 1);
            assert_eq!(s.outputs(bp, Direction::Forward, inputs), y & z);
        }
    }

    #[test]
    fn class4_model_reproduces_box_for_every_bipartition() {
        for bp in Bipartition::ALL {
            let m = class4_tobl_model(bp);
            assert_eq!(m.support().count(), 4, "{bp}");
            assert_eq!(
                m.induced(Direction::Forward),
                m.induced(Direction::Backward)
            );
            assert!(verify_model(&m, &class4()), "{bp}");
            assert!(!verify_model(&m, &class44()));
        }
    }

    #[test]
    fn local_boxes_are_tobl() {
        let b = Box3::deterministic([2, 1, 3]);
        let p = tobl_problem(&b, Bipartition::new(Party::B));
        let cert = lp_feasible(&p);
        assert!(cert.is_feasible() && cert.verify(&p));
        let m = ToblModel::from_certificate(Bipartition::new(Party::B), &cert).unwrap();
        assert!(verify_model(&m, &b));
    }

    #[test]
    fn membership_dispatch() {
        let pr: AnyBox = pr_box().into();
        assert!(membership(&pr, Model::NoSignalling).unwrap().is_feasible());
        assert!(!membership(&pr, Model::Local).unwrap().is_feasible());
        assert!(membership(&pr, Model::Tobl(Bipartition::new(Party::A))).is_err());
    }
}
