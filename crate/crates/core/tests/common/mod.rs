#![allow(dead_code)]

use nsbox::boxes::{pr_box, Box2, Relabeling};
use nsbox::Rational;
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// The 16 deterministic and 8 PR-type vertices of the bipartite polytope.
pub fn ns_vertices() -> Vec<Box2> {
    let mut out = Box2::deterministic_vertices();
    for r in Relabeling::<2>::all() {
        let v = pr_box().relabel(&r);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    assert_eq!(out.len(), 24);
    out
}

/// Positive weights summing to one with denominators up to `len * 20`.
pub fn random_weights(rng: &mut StdRng, len: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter()
        .map(|n| Rational::new(BigInt::from(n), BigInt::from(total)))
        .collect()
}

/// Mixture of one to four random polytope vertices.
pub fn random_ns_box2(rng: &mut StdRng, vertices: &[Box2]) -> Box2 {
    let k = rng.gen_range(1..=4);
    let picks: Vec<Box2> = (0..k)
        .map(|_| vertices[rng.gen_range(0..vertices.len())].clone())
        .collect();
    let w = random_weights(rng, k);
    Box2::mix(&picks, &w).expect("matching shapes")
}
