//! The law of `Σ c_i U_i` for `U` uniform on the standard simplex
//! `{u ≥ 0, Σ u_i = 1}` of `R = len(c)` coordinates.
//!
//! Its CDF is `F(x) = 1 − [c_1, …, c_R] (· − x)_+^{R−1}`, a divided
//! difference, which is evaluated exactly over the rationals. Monte Carlo
//! sampling draws `U` as normalized i.i.d. exponentials.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{binomial, from_biguint, to_f64, Rational};

/// Shards used for Monte Carlo, independent of the thread count so that the
/// output only depends on the master seed.
pub const SHARDS: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CdfMethod {
    /// Only for the cases with a textbook closed form; callers restrict further.
    ClosedForm,
    /// Exact divided-difference evaluation, any coefficients.
    Exact,
    MonteCarlo { seed: u64, samples: u64 },
}

fn require_nonempty(c: &[Rational]) -> Result<()> {
    if c.is_empty() {
        return Err(Error::InvalidInput("need at least one simplex coordinate".into()));
    }
    Ok(())
}

/// `F(x)` exactly, for any coefficients.
pub fn exact_cdf(c: &[Rational], x: &Rational) -> Result<Rational> {
    require_nonempty(c)?;
    let mut t = c.to_vec();
    t.sort();
    let (lo, hi) = (&t[0], &t[t.len() - 1]);
    if x < lo {
        return Ok(Rational::zero());
    }
    if x >= hi {
        return Ok(Rational::one());
    }
    // here lo ≤ x < hi, so not all coefficients are equal and every knot
    // multiplicity is at most R − 1
    let p = t.len() as u64 - 1;
    Ok(Rational::one() - divided_difference(&t, |order, at| truncated_power_derivative(at, x, p, order)))
}

/// `g^{(k)}(t)/k!` for `g(t) = (t − x)_+^p`, `k < p`.
fn truncated_power_derivative(t: &Rational, x: &Rational, p: u64, k: u64) -> Rational {
    let base = t - x;
    if !base.is_positive() {
        return Rational::zero();
    }
    let coeff = from_biguint(&binomial(p, k));
    coeff * pow(&base, p - k)
}

fn pow(base: &Rational, e: u64) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * base)
}

/// `[t_0, …, t_n] g` over sorted knots, where `g_k(order, t)` returns
/// `g^{(order)}(t)/order!` (needed at repeated knots).
fn divided_difference(t: &[Rational], g_k: impl Fn(u64, &Rational) -> Rational) -> Rational {
    let n = t.len();
    let mut table: Vec<Rational> = t.iter().map(|ti| g_k(0, ti)).collect();
    for width in 1..n {
        for i in 0..n - width {
            let j = i + width;
            table[i] = if t[i] == t[j] {
                g_k(width as u64, &t[i])
            } else {
                (&table[i + 1] - &table[i]) / (&t[j] - &t[i])
            };
        }
    }
    table[0].clone()
}

/// Closed forms: all coefficients equal (a step) or exactly two distinct
/// values, where `Σ c_i U_i = a + (b − a) B` with `B ~ Beta(R − k, k)`.
pub fn closed_form_cdf(c: &[Rational], x: &Rational) -> Result<Rational> {
    require_nonempty(c)?;
    let mut distinct = c.to_vec();
    distinct.sort();
    distinct.dedup();
    match distinct.as_slice() {
        [v] => Ok(if x >= v { Rational::one() } else { Rational::zero() }),
        [a, b] => {
            if x <= a {
                return Ok(Rational::zero());
            }
            if x >= b {
                return Ok(Rational::one());
            }
            let r = c.len() as u64;
            let k = c.iter().filter(|v| *v == a).count() as u64;
            let y = (x - a) / (b - a);
            let one_minus = Rational::one() - &y;
            Ok((r - k..r)
                .map(|j| from_biguint(&binomial(r - 1, j)) * pow(&y, j) * pow(&one_minus, r - 1 - j))
                .sum())
        }
        _ => Err(Error::Unsupported(format!(
            "no closed form for {} distinct coefficients",
            distinct.len()
        ))),
    }
}

/// Sorted Monte Carlo samples of `Σ c_i U_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    seed: u64,
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn sample(c: &[f64], samples: u64, seed: u64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("need at least one simplex coordinate".into()));
        }
        if samples == 0 {
            return Err(Error::InvalidInput("need at least one sample".into()));
        }
        let per = samples / SHARDS;
        let extra = samples % SHARDS;
        let mut all: Vec<f64> = (0..SHARDS)
            .into_par_iter()
            .flat_map_iter(|shard| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shard);
                let count = per + u64::from(shard < extra);
                let mut draws = vec![0.0f64; c.len()];
                (0..count)
                    .map(|_| {
                        let mut total = 0.0;
                        for e in draws.iter_mut() {
                            *e = rng.sample(Exp1);
                            total += *e;
                        }
                        c.iter().zip(&draws).map(|(ci, e)| ci * e).sum::<f64>() / total
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        Ok(Self { seed, samples: all })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples in increasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|s| *s <= x) as f64 / self.samples.len() as f64
    }
}

/// `F(x)` by `method`; `x` is converted to a rational exactly.
pub fn cdf(c: &[Rational], x: f64, method: CdfMethod) -> Result<f64> {
    if !x.is_finite() {
        return Ok(if x > 0.0 { 1.0 } else { 0.0 });
    }
    let exact_x = Rational::from_float(x).expect("finite float");
    match method {
        CdfMethod::ClosedForm => closed_form_cdf(c, &exact_x).map(|v| to_f64(&v)),
        CdfMethod::Exact => exact_cdf(c, &exact_x).map(|v| to_f64(&v)),
        CdfMethod::MonteCarlo { seed, samples } => {
            let floats: Vec<f64> = c.iter().map(to_f64).collect();
            Ok(EmpiricalCdf::sample(&floats, samples, seed)?.eval(x))
        }
    }
}

/// A CDF evaluator reused across many points.
pub enum CdfOracle {
    Exact(Vec<Rational>),
    ClosedForm(Vec<Rational>),
    MonteCarlo(EmpiricalCdf),
}

impl CdfOracle {
    pub fn new(c: &[Rational], method: CdfMethod) -> Result<Self> {
        require_nonempty(c)?;
        Ok(match method {
            CdfMethod::Exact => CdfOracle::Exact(c.to_vec()),
            CdfMethod::ClosedForm => {
                closed_form_cdf(c, &Rational::zero())?;
                CdfOracle::ClosedForm(c.to_vec())
            }
            CdfMethod::MonteCarlo { seed, samples } => {
                let floats: Vec<f64> = c.iter().map(to_f64).collect();
                CdfOracle::MonteCarlo(EmpiricalCdf::sample(&floats, samples, seed)?)
            }
        })
    }

    pub fn eval(&self, x: &Rational) -> f64 {
        match self {
            CdfOracle::Exact(c) => to_f64(&exact_cdf(c, x).expect("nonempty")),
            CdfOracle::ClosedForm(c) => to_f64(&closed_form_cdf(c, x).expect("checked at construction")),
            CdfOracle::MonteCarlo(e) => e.eval(to_f64(x)),
        }
    }
}

/// Atoms of the law: only the all-equal case has one.
pub fn atoms(c: &[Rational]) -> Vec<Rational> {
    match c.split_first() {
        Some((first, rest)) if rest.iter().all(|v| v == first) => vec![first.clone()],
        _ => Vec::new(),
    }
}
