//! Bell functionals and the information-causality violation criteria.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};

use crate::boxes::{Box2, Box3, Party, Relabeling};
use crate::error::{Error, Result};
use crate::rational::{int, one, parse_rational, rat, zero, Rational};

/// Bipartite correlators `E[x][y] = P(a = b | xy) - P(a != b | xy)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correlators(pub [[Rational; 2]; 2]);

impl Correlators {
    pub fn of(b: &Box2) -> Self {
        let e = |x: u8, y: u8| b.correlator(&[Party::A, Party::B], &[x, y]);
        Correlators([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn get(&self, x: usize, y: usize) -> &Rational {
        &self.0[x][y]
    }

    /// Correlators of `b.relabel(r)` computed from those of `b`.
    pub fn relabeled(&self, r: &Relabeling<2>) -> Self {
        let map = relabel_map(r);
        let flat = self.flat();
        Correlators(std::array::from_fn(|x| {
            std::array::from_fn(|y| {
                let (src, negate) = map[2 * x + y];
                if negate {
                    -flat[src].clone()
                } else {
                    flat[src].clone()
                }
            })
        }))
    }

    /// `[E00, E01, E10, E11]`.
    pub fn flat(&self) -> [Rational; 4] {
        let e = &self.0;
        [
            e[0][0].clone(),
            e[0][1].clone(),
            e[1][0].clone(),
            e[1][1].clone(),
        ]
    }

    pub fn chsh(&self) -> Rational {
        let e = &self.0;
        &e[0][0] + &e[0][1] + &e[1][0] - &e[1][1]
    }

    pub fn uffink(&self) -> Rational {
        let e = &self.0;
        let u = &e[0][0] + &e[1][0];
        let v = &e[0][1] - &e[1][1];
        &u * &u + &v * &v
    }

    /// Max of `|chsh|` over the full relabeling group.
    pub fn chsh_max(&self) -> Rational {
        chsh_orbit_max(&self.flat())
    }

    pub fn uffink_max(&self) -> Rational {
        uffink_orbit_max(&self.flat())
    }
}

/// Exact scalars the orbit maxima are evaluated over: rationals, and
/// integer numerators over a shared denominator in the wiring sweep.
pub(crate) trait Exact:
    Clone
    + Ord
    + Zero
    + std::ops::Add<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
}

impl<T> Exact for T where
    T: Clone
        + Ord
        + Zero
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Neg<Output = T>
{
}

/// For each new flat correlator index `2x + y`: the old index it reads and
/// whether its sign flips.
fn relabel_map(r: &Relabeling<2>) -> [(usize, bool); 4] {
    let perm = r.perm();
    let inflip = r.input_flip();
    let outflip = r.output_flip();
    std::array::from_fn(|k| {
        let new_in = [k >> 1, k & 1];
        let mut old_in = [0usize; 2];
        let mut flips = 0u8;
        for p in 0..2 {
            old_in[perm[p]] = new_in[p] ^ inflip[p] as usize;
            flips ^= outflip[p][new_in[p]];
        }
        (2 * old_in[0] + old_in[1], flips == 1)
    })
}

type Form = [i8; 4];

/// Distinct linear forms in the original correlators obtained by
/// relabeling, for CHSH (up to overall sign) and for the two Uffink terms
/// (each up to sign).
struct OrbitForms {
    chsh: Vec<Form>,
    uffink: Vec<(Form, Form)>,
}

fn orbit_forms() -> &'static OrbitForms {
    static FORMS: OnceLock<OrbitForms> = OnceLock::new();
    FORMS.get_or_init(|| {
        let pull = |coeffs: [i8; 4], map: &[(usize, bool); 4]| -> Form {
            let mut out = [0i8; 4];
            for (k, &(src, negate)) in map.iter().enumerate() {
                out[src] += if negate { -coeffs[k] } else { coeffs[k] };
            }
            out
        };
        let canon = |f: Form| -> Form {
            match f.iter().find(|&&c| c != 0) {
                Some(&c) if c < 0 => f.map(|v| -v),
                _ => f,
            }
        };
        let mut chsh = Vec::new();
        let mut uffink = Vec::new();
        for r in Relabeling::<2>::all() {
            let map = relabel_map(&r);
            let c = canon(pull([1, 1, 1, -1], &map));
            if !chsh.contains(&c) {
                chsh.push(c);
            }
            let u = (
                canon(pull([1, 0, 1, 0], &map)),
                canon(pull([0, 1, 0, -1], &map)),
            );
            if !uffink.contains(&u) {
                uffink.push(u);
            }
        }
        OrbitForms { chsh, uffink }
    })
}

fn dot<T: Exact>(form: &Form, e: &[T; 4]) -> T {
    form.iter().zip(e).fold(T::zero(), |acc, (&c, v)| match c {
        0 => acc,
        1 => acc + v.clone(),
        -1 => acc + -v.clone(),
        _ => unreachable!("orbit forms have unit coefficients"),
    })
}

/// `max |chsh|` over the relabeling orbit of correlators `e`.
pub(crate) fn chsh_orbit_max<T: Exact>(e: &[T; 4]) -> T {
    orbit_forms()
        .chsh
        .iter()
        .map(|f| {
            let v = dot(f, e);
            if v < T::zero() {
                -v
            } else {
                v
            }
        })
        .max()
        .expect("nonempty orbit")
}

pub(crate) fn uffink_orbit_max<T: Exact>(e: &[T; 4]) -> T {
    orbit_forms()
        .uffink
        .iter()
        .map(|(fu, fv)| {
            let (u, v) = (dot(fu, e), dot(fv, e));
            u.clone() * u + v.clone() * v
        })
        .max()
        .expect("nonempty orbit")
}

/// `E00 + E01 + E10 - E11` in the box's own labeling.
pub fn chsh(b: &Box2) -> Rational {
    Correlators::of(b).chsh()
}

pub fn chsh_max(b: &Box2) -> Rational {
    Correlators::of(b).chsh_max()
}

/// `(E00 + E10)^2 + (E01 - E11)^2`.
pub fn uffink(b: &Box2) -> Rational {
    Correlators::of(b).uffink()
}

pub fn uffink_max(b: &Box2) -> Rational {
    Correlators::of(b).uffink_max()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Chsh(Rational),
    Uffink(Rational),
}

/// Whether a bipartite box is shown to violate information causality by
/// either sufficient criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IcVerdict {
    pub witness: Option<Witness>,
}

impl IcVerdict {
    pub fn violated(&self) -> bool {
        self.witness.is_some()
    }
}

impl fmt::Display for IcVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(Witness::Chsh(_)) => write!(f, "IC violated (CHSH)"),
            Some(Witness::Uffink(_)) => write!(f, "IC violated (Uffink)"),
            None => write!(f, "no witness"),
        }
    }
}

/// CHSH above `2*sqrt(2)` (tested as `chsh^2 > 8`) takes precedence, then
/// Uffink above 4.
pub fn ic_verdict(chsh_max: &Rational, uffink_max: &Rational) -> IcVerdict {
    let witness = if chsh_max * chsh_max > int(8) {
        Some(Witness::Chsh(chsh_max.clone()))
    } else if *uffink_max > int(4) {
        Some(Witness::Uffink(uffink_max.clone()))
    } else {
        None
    };
    IcVerdict { witness }
}

pub fn ic_witness(b: &Box2) -> IcVerdict {
    let c = Correlators::of(b);
    ic_verdict(&c.chsh_max(), &c.uffink_max())
}

/// Weights `q(x1, x2, x3)` of a tripartite GYNI functional, indexed by
/// `4 x1 + 2 x2 + x3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GyniWeights {
    q: [Rational; 8],
}

impl GyniWeights {
    pub fn new(q: [Rational; 8]) -> Result<Self> {
        if let Some(w) = q.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidWeights(format!("negative weight {w}")));
        }
        let total: Rational = q.iter().sum();
        if total != one() {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(GyniWeights { q })
    }

    /// The four-term inequality: weight 1/4 on each even-parity input triple.
    pub fn even_parity() -> Self {
        let q = std::array::from_fn(|x: usize| {
            if x.count_ones().is_multiple_of(2) {
                rat(1, 4)
            } else {
                zero()
            }
        });
        GyniWeights { q }
    }

    pub fn get(&self, x: usize) -> &Rational {
        &self.q[x]
    }

    /// Parses eight `x1 x2 x3 = num/den` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut q: [Option<Rational>; 8] = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (lhs, rhs) = body
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "missing `=`"))?;
            let bits: Vec<usize> = lhs
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    _ => Err(Error::parse(line, format!("expected a bit, found `{t}`"))),
                })
                .collect::<Result<_>>()?;
            let [x1, x2, x3] = bits[..] else {
                return Err(Error::parse(line, "expected three input bits"));
            };
            let value = parse_rational(rhs)
                .ok_or_else(|| Error::parse(line, format!("bad rational `{}`", rhs.trim())))?;
            let slot = &mut q[4 * x1 + 2 * x2 + x3];
            if slot.replace(value).is_some() {
                return Err(Error::parse(line, "duplicate weight"));
            }
        }
        if q.iter().any(Option::is_none) {
            return Err(Error::InvalidWeights("expected eight weights".into()));
        }
        GyniWeights::new(q.map(|w| w.expect("checked above")))
    }
}

impl fmt::Display for GyniWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, w) in self.q.iter().enumerate() {
            writeln!(f, "{} {} {} = {}", x >> 2, (x >> 1) & 1, x & 1, w)?;
        }
        Ok(())
    }
}

/// `sum_x q(x1,x2,x3) P(a=x2, b=x3, c=x1 | x1 x2 x3)`.
pub fn gyni_value(b: &Box3, q: &GyniWeights) -> Rational {
    (0..8usize)
        .filter(|&x| !q.q[x].is_zero())
        .map(|x| {
            let (x1, x2, x3) = (x >> 2, (x >> 1) & 1, x & 1);
            let outputs = (x2 << 2) | (x3 << 1) | x1;
            &q.q[x] * b.prob(x, outputs)
        })
        .sum()
}

/// Local bound `max_x q(x) + q(!x)`.
pub fn gyni_bound(q: &GyniWeights) -> Rational {
    (0..8usize)
        .map(|x| &q.q[x] + &q.q[7 - x])
        .max()
        .expect("eight weights")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GyniReport {
    pub value: Rational,
    pub bound: Rational,
}

impl GyniReport {
    pub fn violated(&self) -> bool {
        self.value > self.bound
    }
}

pub fn gyni(b: &Box3, q: &GyniWeights) -> GyniReport {
    GyniReport {
        value: gyni_value(b, q),
        bound: gyni_bound(q),
    }
}

/// `15/2 + <A1B1C1>/2 - 2(<A0B0C0> + <A0B1> + <B0C1> + <A1C0>)`; negative
/// values rule out a quantum realization.
pub fn k_value(b: &Box3) -> Rational {
    use Party::*;
    let abc1 = b.correlator(&[A, B, C], &[1, 1, 1]);
    let abc0 = b.correlator(&[A, B, C], &[0, 0, 0]);
    let a0b1 = b.correlator(&[A, B], &[0, 1]);
    let b0c1 = b.correlator(&[B, C], &[0, 1]);
    let a1c0 = b.correlator(&[A, C], &[1, 0]);
    k_from_correlators(&abc1, &abc0, &a0b1, &b0c1, &a1c0)
}

fn k_from_correlators(
    abc1: &Rational,
    abc0: &Rational,
    a0b1: &Rational,
    b0c1: &Rational,
    a1c0: &Rational,
) -> Rational {
    rat(15, 2) + abc1 * rat(1, 2) - (abc0 + a0b1 + b0c1 + a1c0) * int(2)
}

/// Value of the sum-of-squares expression for commuting +-1 observables.
fn sos_terms(
    alpha: &Rational,
    beta: &Rational,
    gamma: &Rational,
    delta: &Rational,
) -> [Rational; 3] {
    let half = rat(1, 2);
    let t1 = (alpha * beta + gamma * delta) * &half - one();
    let t2 = (alpha + beta) * &half - one();
    let t3 = (gamma + delta) * &half - one();
    [&t1 * &t1, &t2 * &t2 * int(2), &t3 * &t3 * int(2)]
}

/// Checks, for every assignment of +-1 values to A0, A1, B0, B1, C0, C1,
/// that the sum-of-squares expression in `alpha = A1 C0`, `beta = A0 B1`,
/// `gamma = A0 B0 C0`, `delta = B0 C1` equals the k expression evaluated on
/// the induced correlators, with every square nonnegative.
pub fn sos_identity_check() -> bool {
    (0..64u32).all(|bits| {
        let v = |i: u32| if (bits >> i) & 1 == 0 { one() } else { -one() };
        let (a0, a1, b0, b1, c0, c1) = (v(0), v(1), v(2), v(3), v(4), v(5));
        let alpha = &a1 * &c0;
        let beta = &a0 * &b1;
        let gamma = &a0 * &b0 * &c0;
        let delta = &b0 * &c1;
        let terms = sos_terms(&alpha, &beta, &gamma, &delta);
        let sos: Rational = terms.iter().sum();
        let k = k_from_correlators(&(&a1 * &b1 * &c1), &gamma, &beta, &delta, &alpha);
        terms.iter().all(|t| !t.is_negative()) && sos == k
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{class4, pr_box, Box2};

    fn box_from_correlators(e: [[Rational; 2]; 2]) -> Box2 {
        Box2::from_fn(|inputs, outputs| {
            let (x, y) = (inputs >> 1, inputs & 1);
            let s = if (outputs >> 1) ^ (outputs & 1) == 0 {
                one()
            } else {
                -one()
            };
            (one() + s * &e[x][y]) * rat(1, 4)
        })
    }

    #[test]
    fn pr_values() {
        let pr = pr_box();
        assert_eq!(chsh(&pr), int(4));
        assert_eq!(chsh_max(&pr), int(4));
        assert_eq!(uffink(&pr), int(8));
        assert_eq!(uffink_max(&pr), int(8));
        assert_eq!(ic_witness(&pr).witness, Some(Witness::Chsh(int(4))));
    }

    #[test]
    fn local_and_uniform_values() {
        let det = Box2::deterministic([0, 0]);
        assert_eq!(chsh(&det), int(2));
        assert_eq!(chsh(&Box2::uniform()), zero());
        assert_eq!(uffink(&Box2::uniform()), zero());
        for v in Box2::deterministic_vertices() {
            assert_eq!(chsh_max(&v), int(2));
            assert_eq!(uffink_max(&v), int(4));
            assert!(!ic_witness(&v).violated());
        }
    }

    #[test]
    fn anti_pr_reaches_four() {
        let anti = Box2::from_fn(|inputs, outputs| {
            let target = (inputs == 3) as u32 ^ 1;
            if (outputs.count_ones() % 2) == target {
                rat(1, 2)
            } else {
                zero()
            }
        });
        assert!(anti.is_valid());
        assert_eq!(chsh(&anti), int(-4));
        assert_eq!(chsh_max(&anti), int(4));
    }

    #[test]
    fn three_one_box() {
        let b = box_from_correlators([[one(), one()], [one(), zero()]]);
        assert_eq!(chsh_max(&b), int(3));
        assert_eq!(uffink(&b), int(5));
        assert_eq!(ic_witness(&b).witness, Some(Witness::Chsh(int(3))));
    }

    #[test]
    fn quantum_bound_is_strict() {
        // chsh_max = 2828427/1000000 is just below 2 sqrt 2.
        let v = rat(2828427, 4_000_000);
        let b = box_from_correlators([[v.clone(), v.clone()], [v.clone(), -v]]);
        assert_eq!(chsh_max(&b), rat(2828427, 1_000_000));
        let verdict = ic_witness(&b);
        assert!(!matches!(verdict.witness, Some(Witness::Chsh(_))));
        assert!(uffink_max(&b) < int(4));
        assert!(!verdict.violated());
    }

    #[test]
    fn uffink_decides_below_tsirelson() {
        let verdict = ic_verdict(&rat(14, 5), &rat(40, 9));
        assert_eq!(verdict.witness, Some(Witness::Uffink(rat(40, 9))));
        assert!(!ic_verdict(&rat(14, 5), &int(4)).violated());
    }

    #[test]
    fn correlator_orbit_matches_box_relabeling() {
        let b = box_from_correlators([[rat(1, 2), rat(-1, 3)], [rat(1, 5), rat(3, 4)]]);
        let c = Correlators::of(&b);
        for r in Relabeling::<2>::all() {
            assert_eq!(c.relabeled(&r), Correlators::of(&b.relabel(&r)));
        }
    }

    #[test]
    fn orbit_forms_match_exhaustive_relabeling() {
        let boxes = [
            box_from_correlators([[rat(1, 2), rat(-1, 3)], [rat(1, 5), rat(3, 4)]]),
            box_from_correlators([[one(), one()], [one(), zero()]]),
            box_from_correlators([[rat(-2, 7), zero()], [rat(1, 9), rat(-1, 1)]]),
        ];
        for b in boxes {
            let c = Correlators::of(&b);
            let naive_chsh = Relabeling::<2>::all()
                .iter()
                .map(|r| chsh(&b.relabel(r)).abs())
                .max()
                .unwrap();
            let naive_uffink = Relabeling::<2>::all()
                .iter()
                .map(|r| uffink(&b.relabel(r)))
                .max()
                .unwrap();
            assert_eq!(c.chsh_max(), naive_chsh);
            assert_eq!(c.uffink_max(), naive_uffink);
        }
        let forms = orbit_forms();
        assert_eq!(forms.chsh.len(), 4);
    }

    #[test]
    fn k_examples() {
        assert_eq!(k_value(&class4()), int(-1));
        assert_eq!(k_value(&Box3::deterministic([0, 0, 0])), zero());
        assert_eq!(k_value(&Box3::uniform()), rat(15, 2));
    }

    #[test]
    fn sos_all_plus_assignment_vanishes() {
        let p = one();
        let terms = sos_terms(&p, &p, &p, &p);
        assert!(terms.iter().all(Zero::is_zero));
        assert_eq!(k_from_correlators(&p, &p, &p, &p, &p), zero());
        assert!(sos_identity_check());
    }

    #[test]
    fn gyni_even_parity_on_class4() {
        let q = GyniWeights::even_parity();
        assert_eq!(gyni_value(&class4(), &q), rat(1, 4));
        assert_eq!(gyni_bound(&q), rat(1, 4));
        assert!(!gyni(&class4(), &q).violated());
    }

    #[test]
    fn gyni_uniform_box() {
        let q = GyniWeights::new(std::array::from_fn(|x| rat(x as i64 + 1, 36))).unwrap();
        assert_eq!(gyni_value(&Box3::uniform(), &q), rat(1, 8));
        assert!(gyni_bound(&q) >= rat(1, 4));
    }

    #[test]
    fn gyni_weights_file() {
        let q = GyniWeights::even_parity();
        assert_eq!(GyniWeights::parse(&q.to_string()), Ok(q));
        assert!(GyniWeights::parse("0 0 0 = 1\n").is_err());
        let bad_sum = (0..8)
            .map(|x| format!("{} {} {} = 1/4\n", x >> 2, (x >> 1) & 1, x & 1))
            .collect::<String>();
        assert!(matches!(
            GyniWeights::parse(&bad_sum),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            GyniWeights::parse("0 0 = 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
