//! Random exact objects shared by the integration targets.
#![allow(dead_code)]

use hnpoly::filtration::{FilteredSpace, LinearMap};
use hnpoly::linalg::{self, Matrix};
use hnpoly::measure::DiracMeasure;
use hnpoly::rational::{int, rat};
use hnpoly::Rational;
use rand::Rng;

pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.random_range(-12..=12), rng.random_range(1..=4))
}

/// Invertible integer matrix with entries in `[-3, 3]`.
pub fn invertible<R: Rng>(rng: &mut R, r: usize) -> Matrix {
    loop {
        let m: Matrix = (0..r).map(|_| (0..r).map(|_| int(rng.random_range(-3..=3))).collect()).collect();
        if linalg::rank(&m) == r {
            return m;
        }
    }
}

/// Weights drawn from a short list so that ties occur.
pub fn space<R: Rng>(rng: &mut R, r: usize) -> FilteredSpace {
    let basis = invertible(rng, r);
    let levels: Vec<Rational> = (0..rng.random_range(1..=3)).map(|_| small_rational(rng)).collect();
    let weighted = basis
        .into_iter()
        .map(|v| (v, levels[rng.random_range(0..levels.len())].clone()))
        .collect();
    FilteredSpace::from_weighted_vectors(r, weighted).expect("basis")
}

/// `0 → V' → V → V'' → 0` cut out by the first `k` rows of a random basis.
pub fn exact_triple<R: Rng>(rng: &mut R, r: usize, k: usize) -> (LinearMap, LinearMap) {
    let m = invertible(rng, r);
    let inv = linalg::inverse(&m).expect("invertible");
    let sub = LinearMap::inclusion(m[..k].to_vec(), r).expect("independent rows");
    let quot = LinearMap::new(r, r - k, inv.iter().map(|row| row[k..].to_vec()).collect()).expect("shape");
    (sub, quot)
}

/// Probability measure with up to `max_atoms` atoms.
pub fn measure<R: Rng>(rng: &mut R, max_atoms: usize) -> DiracMeasure {
    let k = rng.random_range(1..=max_atoms);
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    DiracMeasure::new(weights.iter().map(|&w| (small_rational(rng), rat(w, total))).collect::<Vec<_>>())
        .expect("positive masses")
}

/// `ν` pushed upward atom by atom, hence dominating `ν`.
pub fn raised<R: Rng>(rng: &mut R, nu: &DiracMeasure) -> DiracMeasure {
    DiracMeasure::new(
        nu.atoms()
            .iter()
            .map(|(x, m)| (x + rat(rng.random_range(0..=6), 2), m.clone()))
            .collect::<Vec<_>>(),
    )
    .expect("positive masses")
}
