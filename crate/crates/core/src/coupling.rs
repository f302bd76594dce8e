//! The coupling measure `ρ_n` on a product of discrete simplices
//! `Δ_{n_1} × ⋯ × Δ_{n_r}` whose marginals and whose push-forward by `+`
//! are all uniform.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, format_rational, from_biguint, Rational};

/// A point of `Δ_n^{(d)}`: `d` nonnegative integers summing to `n`.
pub type Composition = Vec<u32>;

pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// All compositions of `n` into `d` parts in strictly decreasing
/// lexicographic order.
pub fn enumerate_delta(n: u32, d: usize) -> Result<Vec<Composition>> {
    if d < 1 {
        return Err(Error::InvalidInput("d must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fill(n, d, &mut current, &mut out);
    Ok(out)
}

fn fill(rest: u32, parts: usize, current: &mut Vec<u32>, out: &mut Vec<Composition>) {
    if parts == 1 {
        current.push(rest);
        out.push(current.clone());
        current.pop();
        return;
    }
    for first in (0..=rest).rev() {
        current.push(first);
        fill(rest - first, parts - 1, current, out);
        current.pop();
    }
}

/// Drops the last coordinate.
pub fn gamma_of(alpha: &[u32]) -> Vec<u32> {
    alpha[..alpha.len().saturating_sub(1)].to_vec()
}

/// Restores the last coordinate `n − |γ|`.
pub fn delta_of(gamma: &[u32], n: u32, d: usize) -> Result<Composition> {
    if d < 1 || gamma.len() != d - 1 {
        return Err(Error::DimensionMismatch { expected: d.saturating_sub(1), found: gamma.len() });
    }
    let s: u64 = gamma.iter().map(|&g| u64::from(g)).sum();
    if s > u64::from(n) {
        return Err(Error::OutOfRange { value: format!("|gamma| = {s}"), range: format!("<= {n}") });
    }
    let mut alpha = gamma.to_vec();
    alpha.push(n - s as u32);
    Ok(alpha)
}

/// `ρ_n` with weights `w / denom`, support points stored in
/// Γ-coordinates (the first `d − 1` entries of each composition).
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMeasure {
    d: usize,
    n_vec: Vec<u32>,
    denom: BigUint,
    support: Vec<(Vec<Vec<u32>>, BigUint)>,
}

/// Number of points of `Δ_{n_1} × ⋯ × Δ_{n_r}`, or `None` past `u128`.
pub fn support_size(n_vec: &[u32], d: usize) -> Option<u128> {
    n_vec.iter().try_fold(1u128, |acc, &n| {
        let b = binomial(u64::from(n) + d as u64 - 1, d as u64 - 1).to_u128()?;
        acc.checked_mul(b)
    })
}

/// Integer factorials `0!..=m!`.
struct Factorials(Vec<BigUint>);

impl Factorials {
    fn new(m: usize) -> Self {
        let mut v = vec![BigUint::one()];
        for k in 1..=m {
            let next = &v[k - 1] * BigUint::from(k);
            v.push(next);
        }
        Self(v)
    }

    fn get(&self, k: u32) -> &BigUint {
        &self.0[k as usize]
    }
}

pub fn build_rho(n_vec: &[u32], d: usize, budget: u128) -> Result<CouplingMeasure> {
    if n_vec.len() < 2 {
        return Err(Error::InvalidInput("need r >= 2 factors".into()));
    }
    if d < 1 {
        return Err(Error::InvalidInput("d must be at least 1".into()));
    }
    let required = support_size(n_vec, d).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let total: u32 = n_vec.iter().sum();
    let facts = Factorials::new(total as usize + d - 1);
    let gammas: Vec<Vec<Vec<u32>>> = n_vec
        .iter()
        .map(|&n| enumerate_delta(n, d).map(|v| v.iter().map(|a| gamma_of(a)).collect()))
        .collect::<Result<_>>()?;

    // (d−1)! ∏ n_i!
    let prefactor = n_vec.iter().fold(facts.get(d as u32 - 1).clone(), |acc, &n| acc * facts.get(n));
    let denom = facts.get(total + d as u32 - 1).clone();

    let sizes: Vec<usize> = gammas.iter().map(Vec::len).collect();
    let count = sizes.iter().product::<usize>();
    let support = (0..count)
        .into_par_iter()
        .map(|mut flat| {
            let mut point = Vec::with_capacity(sizes.len());
            for (list, &size) in gammas.iter().zip(&sizes).rev() {
                point.push(list[flat % size].clone());
                flat /= size;
            }
            point.reverse();
            let w = weight(&point, n_vec, d, total, &prefactor, &facts);
            (point, w)
        })
        .collect();
    Ok(CouplingMeasure { d, n_vec: n_vec.to_vec(), denom, support })
}

/// `(d−1)! ∏n_i! · ∏_j (Σ_i γ_ij)!/∏_i γ_ij! · (N − |Σγ_i|)!/∏_i (n_i − |γ_i|)!`.
fn weight(point: &[Vec<u32>], n_vec: &[u32], d: usize, total: u32, prefactor: &BigUint, f: &Factorials) -> BigUint {
    let mut num = prefactor.clone();
    let mut den = BigUint::one();
    let mut grand = 0u32;
    for j in 0..d - 1 {
        let col: u32 = point.iter().map(|g| g[j]).sum();
        grand += col;
        num *= f.get(col);
        for g in point {
            den *= f.get(g[j]);
        }
    }
    num *= f.get(total - grand);
    for (g, &n) in point.iter().zip(n_vec) {
        den *= f.get(n - g.iter().sum::<u32>());
    }
    num / den
}

impl CouplingMeasure {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_vec(&self) -> &[u32] {
        &self.n_vec
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Support points as tuples of full compositions with exact weights.
    pub fn weights(&self) -> impl Iterator<Item = (Vec<Composition>, Rational)> + '_ {
        self.support.iter().map(|(gs, w)| (self.to_delta(gs), self.rational(w)))
    }

    pub fn weight_of(&self, alphas: &[Composition]) -> Rational {
        let gs: Vec<Vec<u32>> = alphas.iter().map(|a| gamma_of(a)).collect();
        self.support
            .iter()
            .find(|(p, _)| *p == gs)
            .map_or_else(Rational::zero, |(_, w)| self.rational(w))
    }

    pub fn total_mass(&self) -> Rational {
        let sum: BigUint = self.support.iter().map(|(_, w)| w).sum();
        self.rational(&sum)
    }

    fn rational(&self, w: &BigUint) -> Rational {
        from_biguint(w) / from_biguint(&self.denom)
    }

    fn to_delta(&self, gs: &[Vec<u32>]) -> Vec<Composition> {
        gs.iter()
            .zip(&self.n_vec)
            .map(|(g, &n)| delta_of(g, n, self.d).expect("support lies in the product simplex"))
            .collect()
    }

    fn accumulate(&self, key: impl Fn(&[Vec<u32>]) -> Vec<u32>, n: u32) -> Vec<(Composition, BigUint)> {
        let points = enumerate_delta(n, self.d).expect("d >= 1");
        let index: HashMap<Vec<u32>, usize> =
            points.iter().enumerate().map(|(i, a)| (gamma_of(a), i)).collect();
        let mut acc = vec![BigUint::zero(); points.len()];
        for (gs, w) in &self.support {
            acc[index[&key(gs)]] += w;
        }
        points.into_iter().zip(acc).collect()
    }

    fn marginal_raw(&self, i: usize) -> Result<Vec<(Composition, BigUint)>> {
        let r = self.n_vec.len();
        if i < 1 || i > r {
            return Err(Error::OutOfRange { value: i.to_string(), range: format!("1..={r}") });
        }
        Ok(self.accumulate(|gs| gs[i - 1].clone(), self.n_vec[i - 1]))
    }

    fn sum_raw(&self) -> Vec<(Composition, BigUint)> {
        let total = self.n_vec.iter().sum();
        self.accumulate(
            |gs| (0..self.d - 1).map(|j| gs.iter().map(|g| g[j]).sum()).collect(),
            total,
        )
    }

    fn to_map(&self, raw: Vec<(Composition, BigUint)>) -> BTreeMap<Composition, Rational> {
        raw.into_iter().map(|(a, w)| (a, self.rational(&w))).collect()
    }

    /// Push-forward by the `i`-th projection, `1 ≤ i ≤ r`.
    pub fn marginal(&self, i: usize) -> Result<BTreeMap<Composition, Rational>> {
        Ok(self.to_map(self.marginal_raw(i)?))
    }

    /// Push-forward by `(α_1, …, α_r) ↦ α_1 + ⋯ + α_r`.
    pub fn sum_pushforward(&self) -> BTreeMap<Composition, Rational> {
        self.to_map(self.sum_raw())
    }

    /// Every mass equals `denom / #points` exactly.
    fn is_uniform(&self, raw: &[(Composition, BigUint)]) -> bool {
        let count = BigUint::from(raw.len());
        raw.iter().all(|(_, w)| w * &count == self.denom)
    }

    pub fn marginal_is_uniform(&self, i: usize) -> Result<bool> {
        Ok(self.is_uniform(&self.marginal_raw(i)?))
    }

    pub fn sum_is_uniform(&self) -> bool {
        self.is_uniform(&self.sum_raw())
    }

    pub fn verify(&self) -> VerifyReport {
        let total = self.total_mass();
        VerifyReport {
            d: self.d,
            n: self.n_vec.clone(),
            total_mass: format_rational(&total),
            total_mass_is_one: total == Rational::one(),
            marginals_uniform: (1..=self.n_vec.len())
                .map(|i| self.marginal_is_uniform(i).expect("index in range"))
                .collect(),
            sum_uniform: self.sum_is_uniform(),
            support_size: self.support.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub d: usize,
    pub n: Vec<u32>,
    pub total_mass: String,
    pub total_mass_is_one: bool,
    pub marginals_uniform: Vec<bool>,
    pub sum_uniform: bool,
    pub support_size: usize,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.total_mass_is_one && self.sum_uniform && self.marginals_uniform.iter().all(|&b| b)
    }
}

/// Checks `Σ_{b ≤ T} (a+b)!/(a!b!) t^b ≡ (1−t)^{−a−1} mod t^{T+1}`, the
/// right side expanded as the `(a+1)`-fold product of `1 + t + t² + ⋯`.
pub fn generating_identity_holds(a: u64, t_max: usize) -> bool {
    let lhs: Vec<BigUint> = (0..=t_max as u64)
        .map(|b| factorial(a + b) / (factorial(a) * factorial(b)))
        .collect();
    let mut rhs = vec![BigUint::zero(); t_max + 1];
    rhs[0] = BigUint::one();
    for _ in 0..=a {
        // multiply by 1/(1−t): prefix sums
        for k in 1..=t_max {
            let prev = rhs[k - 1].clone();
            rhs[k] += prev;
        }
    }
    lhs == rhs
}

/// `Σα_i ≥ Σβ_i` lexicographically whenever `α_i ≥ β_i` for all `i`.
pub fn lex_sum_monotone(alphas: &[Composition], betas: &[Composition]) -> bool {
    let add = |xs: &[Composition]| -> Composition {
        let d = xs.first().map_or(0, Vec::len);
        (0..d).map(|j| xs.iter().map(|x| x[j]).sum()).collect()
    };
    if alphas.iter().zip(betas).any(|(a, b)| a < b) {
        return true;
    }
    add(alphas) >= add(betas)
}
