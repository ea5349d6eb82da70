use crate::error::{Error, Result};

use super::{bit, pack, CorrelationBox};

/// A relabeling of parties, inputs and outputs.
///
/// Everything is indexed by the *new* party and its *new* input: new party
/// `k` is old party `perm[k]`, its input `i` reads the old input
/// `i ^ input_flip[k]`, and its output is the old output XOR
/// `output_flip[k][i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Relabeling<const N: usize> {
    perm: [usize; N],
    input_flip: [u8; N],
    output_flip: [[u8; 2]; N],
}

impl<const N: usize> Relabeling<N> {
    pub fn new(perm: [usize; N], input_flip: [u8; N], output_flip: [[u8; 2]; N]) -> Result<Self> {
        let mut seen = [false; N];
        for &p in &perm {
            if p >= N || seen[p] {
                return Err(Error::Arity {
                    expected: N,
                    found: perm.len(),
                });
            }
            seen[p] = true;
        }
        Ok(Relabeling {
            perm,
            input_flip: input_flip.map(|b| b & 1),
            output_flip: output_flip.map(|f| f.map(|b| b & 1)),
        })
    }

    pub fn identity() -> Self {
        Relabeling {
            perm: std::array::from_fn(|k| k),
            input_flip: [0; N],
            output_flip: [[0; 2]; N],
        }
    }

    pub fn permutation(perm: [usize; N]) -> Result<Self> {
        Self::new(perm, [0; N], [[0; 2]; N])
    }

    pub fn perm(&self) -> [usize; N] {
        self.perm
    }

    pub fn input_flip(&self) -> [u8; N] {
        self.input_flip
    }

    pub fn output_flip(&self) -> [[u8; 2]; N] {
        self.output_flip
    }

    /// The relabeling undoing `self`.
    pub fn inverse(&self) -> Self {
        let mut inv_perm = [0usize; N];
        for (k, &p) in self.perm.iter().enumerate() {
            inv_perm[p] = k;
        }
        let input_flip = std::array::from_fn(|j| self.input_flip[inv_perm[j]]);
        let output_flip = std::array::from_fn(|j| {
            let k = inv_perm[j];
            let s = self.input_flip[k] as usize;
            [self.output_flip[k][s], self.output_flip[k][1 ^ s]]
        });
        Relabeling {
            perm: inv_perm,
            input_flip,
            output_flip,
        }
    }

    /// `self` followed by `next`: relabeling by the result equals relabeling
    /// by `self` and then by `next`.
    pub fn then(&self, next: &Self) -> Self {
        let perm = std::array::from_fn(|k| self.perm[next.perm[k]]);
        let input_flip =
            std::array::from_fn(|k| next.input_flip[k] ^ self.input_flip[next.perm[k]]);
        let output_flip = std::array::from_fn(|k| {
            let mid = next.perm[k];
            std::array::from_fn(|i| {
                next.output_flip[k][i] ^ self.output_flip[mid][i ^ next.input_flip[k] as usize]
            })
        });
        Relabeling {
            perm,
            input_flip,
            output_flip,
        }
    }

    /// Maps a new (party, input, output) to the old one.
    fn source(&self, k: usize, input: u8, output: u8) -> (usize, u8, u8) {
        (
            self.perm[k],
            input ^ self.input_flip[k],
            output ^ self.output_flip[k][input as usize],
        )
    }

    /// Every element of the group: `N! * 2^N * 4^N` relabelings.
    pub fn all() -> Vec<Self> {
        let mut perms = Vec::new();
        permutations(&mut std::array::from_fn(|k| k), 0, &mut perms);
        let mut out = Vec::new();
        for perm in perms {
            for inflip in 0..(1usize << N) {
                for outflip in 0..(1usize << (2 * N)) {
                    let input_flip = std::array::from_fn(|k| ((inflip >> k) & 1) as u8);
                    let output_flip = std::array::from_fn(|k| {
                        [
                            ((outflip >> (2 * k)) & 1) as u8,
                            ((outflip >> (2 * k + 1)) & 1) as u8,
                        ]
                    });
                    out.push(Relabeling {
                        perm,
                        input_flip,
                        output_flip,
                    });
                }
            }
        }
        out
    }
}

impl Relabeling<3> {
    /// Party A's role goes to B, B's to C, C's to A.
    pub fn cyclic() -> Self {
        Self::permutation([2, 0, 1]).expect("valid permutation")
    }
}

fn permutations<const N: usize>(cur: &mut [usize; N], start: usize, out: &mut Vec<[usize; N]>) {
    if start == N {
        out.push(*cur);
        return;
    }
    for i in start..N {
        cur.swap(start, i);
        permutations(cur, start + 1, out);
        cur.swap(start, i);
    }
}

impl<const N: usize> CorrelationBox<N> {
    pub fn relabel(&self, r: &Relabeling<N>) -> Self {
        Self::from_fn(|inputs, outputs| {
            let mut old_in = [0u8; N];
            let mut old_out = [0u8; N];
            for k in 0..N {
                let (j, i, o) = r.source(k, bit(inputs, k, N), bit(outputs, k, N));
                old_in[j] = i;
                old_out[j] = o;
            }
            self.prob(pack(&old_in), pack(&old_out)).clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{Box2, Box3};
    use crate::rational::rat;
    use proptest::prelude::*;

    fn arb_box3() -> impl Strategy<Value = Box3> {
        proptest::collection::vec(0i64..7, 64)
            .prop_map(|t| Box3::from_table(t.into_iter().map(|n| rat(n, 1)).collect()).unwrap())
    }

    fn arb_relabeling3() -> impl Strategy<Value = Relabeling<3>> {
        (0usize..3072).prop_map(|i| Relabeling::<3>::all()[i])
    }

    #[test]
    fn group_sizes() {
        assert_eq!(Relabeling::<2>::all().len(), 128);
        assert_eq!(Relabeling::<3>::all().len(), 3072);
    }

    #[test]
    fn identity_is_neutral() {
        let b = Box3::deterministic([1, 2, 3]);
        assert_eq!(b.relabel(&Relabeling::identity()), b);
    }

    #[test]
    fn output_flip_on_second_setting_of_a() {
        let r = Relabeling::<2>::new([0, 1], [0, 0], [[0, 1], [0, 0]]).unwrap();
        let pr = crate::boxes::pr_box();
        let flipped = pr.relabel(&r);
        // a' at x'=1 is flipped: a' xor b' = x'y' xor x'.
        let expected = Box2::from_fn(|inputs, outputs| {
            let (x, y) = (inputs >> 1, inputs & 1);
            let (a, b) = (outputs >> 1, outputs & 1);
            if a ^ b == (x & y) ^ x {
                rat(1, 2)
            } else {
                rat(0, 1)
            }
        });
        assert_eq!(flipped, expected);
    }

    #[test]
    fn bad_permutation_is_rejected() {
        assert!(Relabeling::<3>::permutation([0, 0, 1]).is_err());
    }

    proptest! {
        // Arbitrary (not necessarily valid) tables exercise the index maps.
        #[test]
        fn inverse_undoes(b in arb_box3(), r in arb_relabeling3()) {
            prop_assert_eq!(b.relabel(&r).relabel(&r.inverse()), b);
        }

        #[test]
        fn composition_matches_sequential(b in arb_box3(), r1 in arb_relabeling3(), r2 in arb_relabeling3()) {
            prop_assert_eq!(b.relabel(&r1).relabel(&r2), b.relabel(&r1.then(&r2)));
        }

        #[test]
        fn entries_are_permuted(b in arb_box3(), r in arb_relabeling3()) {
            let mut before = b.table().to_vec();
            let mut after = b.relabel(&r).into_table();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
        }
    }
}
