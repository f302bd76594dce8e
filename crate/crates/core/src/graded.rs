//! Monomial-weight models of filtered graded symmetric algebras.
//!
//! `B_n = S^n V` carries the filtration spanned by the monomials `e^α` of
//! weight `≥ s`, so `λ` of a general element is the minimum weight over its
//! monomial support and every criterion reduces to weight inequalities.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{enumerate_delta, Composition};
use crate::error::{Error, Result};
use crate::limits::ErrorFn;
use crate::measure::DiracMeasure;
use crate::polygon::{polygon_of, sup_distance, Polygon};
use crate::rational::{binomial_u128, format_rational, rat, to_f64, RatStr, Rational};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

type WeightFn = Arc<dyn Fn(&[u32]) -> Rational + Send + Sync>;

/// Correction `ε(α)` added to the linear part `Σ α_i w_i`.
#[derive(Clone)]
pub enum Perturbation {
    None,
    /// `|ε| ≤ bound`, pseudo-random in `α`.
    Seeded { bound: Rational, seed: u64 },
    /// `|ε(α)| ≤ scale·√|α|`, pseudo-random in `α`.
    SqrtScaled { scale: Rational, seed: u64 },
    /// Explicit values; compositions not listed are an error.
    Table(BTreeMap<Composition, Rational>),
    Custom(WeightFn),
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::None => f.write_str("None"),
            Perturbation::Seeded { bound, seed } => write!(f, "Seeded {{ bound: {bound}, seed: {seed} }}"),
            Perturbation::SqrtScaled { scale, seed } => write!(f, "SqrtScaled {{ scale: {scale}, seed: {seed} }}"),
            Perturbation::Table(t) => write!(f, "Table({} entries)", t.len()),
            Perturbation::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Finalizer of splitmix64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49eb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic value in `[−1, 1]` with denominator 1024.
fn unit_noise(seed: u64, alpha: &[u32]) -> Rational {
    let h = alpha.iter().fold(mix(seed), |h, &a| mix(h ^ u64::from(a)) ^ alpha.len() as u64);
    rat((h % 2049) as i64 - 1024, 1024)
}

/// `⌊1024·√n⌋ / 1024`.
fn sqrt_approx(n: u64) -> Rational {
    let root = (BigInt::from(n) << 20u32).sqrt();
    Rational::new(root, BigInt::from(1024))
}

#[derive(Clone, Debug)]
pub struct MonomialModel {
    d: usize,
    base_weights: Vec<Rational>,
    perturbation: Perturbation,
    n0: u64,
    declared_bound: Option<Rational>,
}

impl MonomialModel {
    pub fn new(base_weights: Vec<Rational>, perturbation: Perturbation) -> Result<Self> {
        if base_weights.is_empty() {
            return Err(Error::InvalidInput("a model needs d >= 1 base weights".into()));
        }
        match &perturbation {
            Perturbation::Seeded { bound, .. } if bound.is_negative() => {
                return Err(Error::InvalidInput("perturbation bound must be nonnegative".into()));
            }
            Perturbation::SqrtScaled { scale, .. } if scale.is_negative() => {
                return Err(Error::InvalidInput("perturbation scale must be nonnegative".into()));
            }
            Perturbation::Table(t) => {
                if let Some(bad) = t.keys().find(|a| a.len() != base_weights.len()) {
                    return Err(Error::InvalidComposition(format!("{bad:?} has the wrong length")));
                }
            }
            _ => {}
        }
        Ok(Self { d: base_weights.len(), base_weights, perturbation, n0: 1, declared_bound: None })
    }

    pub fn linear(base_weights: Vec<Rational>) -> Result<Self> {
        Self::new(base_weights, Perturbation::None)
    }

    /// `weight(α) = f(α)` for an arbitrary pure function; `linear_bound`
    /// is the declared bound on `|weight(α)|/|α|`, if known.
    pub fn from_fn(
        d: usize,
        f: impl Fn(&[u32]) -> Rational + Send + Sync + 'static,
        linear_bound: Option<Rational>,
    ) -> Result<Self> {
        let mut m = Self::new(vec![Rational::zero(); d], Perturbation::Custom(Arc::new(f)))?;
        m.declared_bound = linear_bound;
        Ok(m)
    }

    pub fn with_n0(mut self, n0: u64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn base_weights(&self) -> &[Rational] {
        &self.base_weights
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// `λ(e^α)`.
    pub fn weight(&self, alpha: &[u32]) -> Result<Rational> {
        if alpha.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: alpha.len() });
        }
        let linear: Rational = alpha
            .iter()
            .zip(&self.base_weights)
            .filter(|(&a, _)| a != 0)
            .map(|(&a, w)| w * Rational::from_integer(a.into()))
            .sum();
        let n = alpha.iter().map(|&a| u64::from(a)).sum::<u64>();
        let eps = match &self.perturbation {
            Perturbation::None => Rational::zero(),
            Perturbation::Seeded { bound, seed } => bound * unit_noise(*seed, alpha),
            Perturbation::SqrtScaled { scale, seed } => scale * sqrt_approx(n) * unit_noise(*seed, alpha),
            Perturbation::Table(t) => t
                .get(alpha)
                .cloned()
                .ok_or_else(|| Error::InvalidComposition(format!("{alpha:?} is not in the weight table")))?,
            Perturbation::Custom(f) => f(alpha),
        };
        Ok(linear + eps)
    }

    /// A bound on `|weight(α)|/|α|` valid for all `α ≠ 0`, when one is known.
    pub fn linear_bound(&self) -> Option<Rational> {
        let base = self.base_weights.iter().map(|w| w.abs()).max().unwrap_or_else(Rational::zero);
        let extra = match &self.perturbation {
            Perturbation::None => Rational::zero(),
            Perturbation::Seeded { bound, .. } => bound.clone(),
            Perturbation::SqrtScaled { scale, .. } => scale.clone(),
            Perturbation::Table(t) => t.values().map(|v| v.abs()).max().unwrap_or_else(Rational::zero),
            Perturbation::Custom(_) => return self.declared_bound.clone(),
        };
        Some(base + extra)
    }

    fn monomials(&self, n: u64, budget: u128) -> Result<Vec<Composition>> {
        let count = monomial_count(n, self.d).unwrap_or(u128::MAX);
        if count > budget {
            return Err(Error::BudgetExceeded { required: count, budget });
        }
        enumerate_delta(n as u32, self.d)
    }
}

/// `C(n+d−1, d−1)`, the dimension of `S^n V`.
pub fn monomial_count(n: u64, d: usize) -> Option<u128> {
    binomial_u128(n + d as u64 - 1, d as u64 - 1)
}

#[derive(Serialize, Deserialize)]
pub struct ModelJson {
    pub d: usize,
    pub base_weights: Vec<RatStr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationJson>,
    #[serde(default = "one")]
    pub n0: u64,
}

fn one() -> u64 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PerturbationJson {
    Seeded { bound: RatStr, seed: u64 },
    Sqrt { sqrt_scale: RatStr, seed: u64 },
    Table { table: Vec<(Composition, RatStr)> },
}

impl TryFrom<ModelJson> for MonomialModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        if j.base_weights.len() != j.d {
            return Err(Error::DimensionMismatch { expected: j.d, found: j.base_weights.len() });
        }
        let perturbation = match j.perturbation {
            None => Perturbation::None,
            Some(PerturbationJson::Seeded { bound, seed }) => Perturbation::Seeded { bound: bound.0, seed },
            Some(PerturbationJson::Sqrt { sqrt_scale, seed }) => Perturbation::SqrtScaled { scale: sqrt_scale.0, seed },
            Some(PerturbationJson::Table { table }) => {
                Perturbation::Table(table.into_iter().map(|(a, w)| (a, w.0)).collect())
            }
        };
        Ok(MonomialModel::new(j.base_weights.into_iter().map(|w| w.0).collect(), perturbation)?.with_n0(j.n0))
    }
}

impl TryFrom<&MonomialModel> for ModelJson {
    type Error = Error;

    fn try_from(m: &MonomialModel) -> Result<Self> {
        let perturbation = match &m.perturbation {
            Perturbation::None => None,
            Perturbation::Seeded { bound, seed } => Some(PerturbationJson::Seeded { bound: bound.into(), seed: *seed }),
            Perturbation::SqrtScaled { scale, seed } => {
                Some(PerturbationJson::Sqrt { sqrt_scale: scale.into(), seed: *seed })
            }
            Perturbation::Table(t) => Some(PerturbationJson::Table {
                table: t.iter().map(|(a, w)| (a.clone(), w.into())).collect(),
            }),
            Perturbation::Custom(_) => {
                return Err(Error::Unsupported("custom weight functions have no JSON form".into()));
            }
        };
        Ok(ModelJson {
            d: m.d,
            base_weights: m.base_weights.iter().map(RatStr::from).collect(),
            perturbation,
            n0: m.n0,
        })
    }
}

/// Concave increasing `g(x) = min_k (a_k x + b_k)` with `0 ≤ a_k ≤ c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcaveTestFn {
    lines: Vec<(Rational, Rational)>,
    lipschitz: Rational,
}

impl ConcaveTestFn {
    /// `lines` are `(slope, intercept)` pairs.
    pub fn new(lines: Vec<(Rational, Rational)>, lipschitz: Rational) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::InvalidInput("a test function needs at least one line".into()));
        }
        for (a, _) in &lines {
            if a.is_negative() || *a > lipschitz {
                return Err(Error::OutOfRange {
                    value: format_rational(a),
                    range: format!("[0, {}]", format_rational(&lipschitz)),
                });
            }
        }
        Ok(Self { lines, lipschitz })
    }

    pub fn identity() -> Self {
        Self { lines: vec![(Rational::one(), Rational::zero())], lipschitz: Rational::one() }
    }

    pub fn constant(c: Rational) -> Self {
        Self { lines: vec![(Rational::zero(), c)], lipschitz: Rational::zero() }
    }

    /// `min(x, cap)`.
    pub fn capped(cap: Rational) -> Self {
        Self {
            lines: vec![(Rational::one(), Rational::zero()), (Rational::zero(), cap)],
            lipschitz: Rational::one(),
        }
    }

    pub fn lipschitz(&self) -> &Rational {
        &self.lipschitz
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.lines.iter().map(|(a, b)| a * x + b).min().expect("nonempty")
    }
}

/// `ν_{B_n}`: uniform over the weights of the `C(n+d−1, d−1)` monomials.
pub fn model_measure(m: &MonomialModel, n: u64, budget: u128) -> Result<DiracMeasure> {
    let monomials = m.monomials(n, budget)?;
    let weights: Vec<Rational> = monomials.par_iter().map(|a| m.weight(a)).collect::<Result<_>>()?;
    Ok(DiracMeasure::uniform(weights))
}

/// `I_n = ∫ g d(T_{1/n} ν_{B_n})`.
pub fn integral_i(m: &MonomialModel, g: &ConcaveTestFn, n: u64, budget: u128) -> Result<Rational> {
    if n < 1 {
        return Err(Error::OutOfRange { value: n.to_string(), range: "n >= 1".into() });
    }
    let nu = model_measure(m, n, budget)?;
    let inv = Rational::new(BigInt::one(), BigInt::from(n));
    Ok(nu.atoms().iter().map(|(p, mass)| mass * g.eval(&(p * &inv))).sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub parts: Vec<Composition>,
    /// `weight(α_1 + ⋯ + α_r)`.
    pub product_weight: RatStr,
    /// `Σ (weight(α_i) − f(|α_i|))`.
    pub required: RatStr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub degree_bound: u64,
    pub r_max: usize,
    pub n0: u64,
    pub checked: u64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

fn exact_error_values(f: &ErrorFn, upto: u64) -> Result<Vec<Rational>> {
    (0..=upto)
        .map(|n| {
            let v = f.exact_value(n).ok_or_else(|| {
                Error::Unsupported("graded criteria need an exact error function".into())
            })?;
            if v.is_negative() {
                return Err(Error::InvalidInput(format!("error function is negative at {n}")));
            }
            Ok(v)
        })
        .collect()
}

/// Number of multisets of monomials with `2 ≤ size ≤ r_max`, degrees in
/// `[n0, big_n]` and total degree `≤ big_n`.
fn factorization_count(d: usize, n0: u64, big_n: u64, r_max: usize) -> u128 {
    let cap = big_n as usize;
    // ways[s][k]: multisets of total degree s with k elements
    let mut ways = vec![vec![0u128; r_max + 1]; cap + 1];
    ways[0][0] = 1;
    for deg in n0.max(1)..=big_n {
        let c = monomial_count(deg, d).unwrap_or(u128::MAX);
        let mut next = ways.clone();
        for s in 0..=cap {
            for k in 0..=r_max {
                if ways[s][k] == 0 {
                    continue;
                }
                let mut j = 1usize;
                while k + j <= r_max && s + j * deg as usize <= cap {
                    let choose = binomial_u128(c.saturating_add(j as u128 - 1).min(u64::MAX as u128) as u64, j as u64)
                        .unwrap_or(u128::MAX);
                    let add = ways[s][k].saturating_mul(choose);
                    let cell = &mut next[s + j * deg as usize][k + j];
                    *cell = cell.saturating_add(add);
                    j += 1;
                }
            }
        }
        ways = next;
    }
    ways.iter().flat_map(|row| row.iter().skip(2)).fold(0u128, |a, &b| a.saturating_add(b))
}

/// Checks `weight(α_1+⋯+α_r) ≥ Σ (weight(α_i) − f(|α_i|))` for every
/// multiset with `2 ≤ r ≤ r_max`, `|α_i| ≥ n0`, `Σ|α_i| ≤ big_n`. Stops at
/// the first failure, which becomes the witness.
pub fn check_quasi_filtered(
    m: &MonomialModel,
    f: &ErrorFn,
    big_n: u64,
    r_max: usize,
    budget: u128,
) -> Result<CriterionReport> {
    if big_n < 2 {
        return Err(Error::OutOfRange { value: big_n.to_string(), range: "degree bound >= 2".into() });
    }
    if r_max < 2 {
        return Err(Error::OutOfRange { value: r_max.to_string(), range: "r_max >= 2".into() });
    }
    let required = factorization_count(m.d, m.n0, big_n, r_max);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let fv = exact_error_values(f, big_n)?;
    let mut items: Vec<(Composition, u64, Rational)> = Vec::new();
    let lo = m.n0.max(1);
    for deg in lo..=big_n.saturating_sub(lo) {
        for a in enumerate_delta(deg as u32, m.d)? {
            let w = m.weight(&a)?;
            items.push((a, deg, w - &fv[deg as usize]));
        }
    }
    let mut search = Search { m, items: &items, big_n, r_max, checked: 0, stack: Vec::new(), witness: None };
    search.run(0, &vec![0; m.d], 0, &Rational::zero())?;
    Ok(CriterionReport {
        degree_bound: big_n,
        r_max,
        n0: m.n0,
        checked: search.checked,
        passed: search.witness.is_none(),
        witness: search.witness,
    })
}

struct Search<'a> {
    m: &'a MonomialModel,
    items: &'a [(Composition, u64, Rational)],
    big_n: u64,
    r_max: usize,
    checked: u64,
    stack: Vec<usize>,
    witness: Option<Witness>,
}

impl Search<'_> {
    fn run(&mut self, start: usize, sum: &[u32], deg: u64, acc: &Rational) -> Result<()> {
        for idx in start..self.items.len() {
            let (alpha, d_i, term) = &self.items[idx];
            if deg + d_i > self.big_n {
                break;
            }
            let new_sum: Vec<u32> = sum.iter().zip(alpha).map(|(s, a)| s + a).collect();
            let new_acc = acc + term;
            self.stack.push(idx);
            if self.stack.len() >= 2 {
                self.checked += 1;
                let w = self.m.weight(&new_sum)?;
                if w < new_acc {
                    self.witness = Some(Witness {
                        parts: self.stack.iter().map(|&i| self.items[i].0.clone()).collect(),
                        product_weight: w.into(),
                        required: new_acc.into(),
                    });
                    return Ok(());
                }
            }
            if self.stack.len() < self.r_max {
                self.run(idx, &new_sum, deg + d_i, &new_acc)?;
                if self.witness.is_some() {
                    return Ok(());
                }
            }
            self.stack.pop();
        }
        Ok(())
    }
}

/// The pairwise criterion `B_{n,s} B_{m,t} ⊂ B_{n+m, s+t−f(n)−f(m)}`.
pub fn check_pseudo_filtered(m: &MonomialModel, f: &ErrorFn, big_n: u64, budget: u128) -> Result<CriterionReport> {
    check_quasi_filtered(m, f, big_n, 2, budget)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperadditivityRow {
    pub parts: Vec<u64>,
    /// `N·I_N`.
    pub lhs: RatStr,
    /// `Σ (n_i I_{n_i} − c f(n_i))`.
    pub rhs: RatStr,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperadditivityReport {
    pub rows: Vec<SuperadditivityRow>,
    pub all_hold: bool,
    pub precondition_verified: bool,
    pub warning: Option<String>,
}

/// Checks `N I_N ≥ Σ (n_i I_{n_i} − c f(n_i))` exactly for each partition
/// `(n_1, …, n_r)` of `N`. The quasi-filtered precondition is checked first;
/// when it cannot be confirmed the report carries a warning.
pub fn superadditivity_check(
    m: &MonomialModel,
    g: &ConcaveTestFn,
    partitions: &[Vec<u64>],
    f: &ErrorFn,
    budget: u128,
) -> Result<SuperadditivityReport> {
    if partitions.iter().any(|p| p.is_empty() || p.contains(&0)) {
        return Err(Error::InvalidInput("partition parts must be positive".into()));
    }
    let big_n = partitions.iter().map(|p| p.iter().sum::<u64>()).max().unwrap_or(0);
    let r_max = partitions.iter().map(Vec::len).max().unwrap_or(0);
    let fv = exact_error_values(f, big_n)?;

    let (precondition_verified, warning) = if r_max < 2 || big_n < 2 {
        (true, None)
    } else {
        match check_quasi_filtered(m, f, big_n, r_max, budget) {
            Ok(r) if r.passed => (true, None),
            Ok(r) => (false, Some(format!("model is not quasi-filtered: witness {:?}", r.witness.map(|w| w.parts)))),
            Err(e) => (false, Some(format!("precondition not verified: {e}"))),
        }
    };

    let mut cache: HashMap<u64, Rational> = HashMap::new();
    let mut n_i = |n: u64| -> Result<Rational> {
        if let Some(v) = cache.get(&n) {
            return Ok(v.clone());
        }
        let v = integral_i(m, g, n, budget)? * Rational::from_integer(n.into());
        cache.insert(n, v.clone());
        Ok(v)
    };
    let mut rows = Vec::with_capacity(partitions.len());
    for parts in partitions {
        let total: u64 = parts.iter().sum();
        let lhs = n_i(total)?;
        let mut rhs = Rational::zero();
        for &p in parts {
            rhs += n_i(p)? - g.lipschitz() * &fv[p as usize];
        }
        rows.push(SuperadditivityRow { parts: parts.clone(), holds: lhs >= rhs, lhs: lhs.into(), rhs: rhs.into() });
    }
    Ok(SuperadditivityReport {
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        precondition_verified,
        warning,
    })
}

/// A sequence of finitely supported probability measures `ν_n`, `n ≥ 1`,
/// before normalization by `T_{1/n}`.
pub trait MeasureSequence: Sync {
    fn measure(&self, n: u64) -> Result<DiracMeasure>;

    /// A bound on `sup |supp ν_n| / n`, checked for every `n` that is run.
    fn linear_bound(&self) -> Option<Rational>;
}

/// [`MonomialModel`] viewed as its sequence of measures `ν_{B_n}`.
pub struct ModelSequence<'a> {
    pub model: &'a MonomialModel,
    pub budget: u128,
}

impl MeasureSequence for ModelSequence<'_> {
    fn measure(&self, n: u64) -> Result<DiracMeasure> {
        model_measure(self.model, n, self.budget)
    }

    fn linear_bound(&self) -> Option<Rational> {
        self.model.linear_bound()
    }
}

/// `ν_n = δ_{φ(n)}` with `φ(n) = 2^{⌊log₂ n⌋}`, so that `T_{1/n}ν_n`
/// oscillates between `δ_{1/2}` and `δ_1`.
pub struct DyadicFloorSequence;

impl MeasureSequence for DyadicFloorSequence {
    fn measure(&self, n: u64) -> Result<DiracMeasure> {
        Ok(DiracMeasure::dirac(Rational::from_integer(crate::limits::dyadic_floor(n).into())))
    }

    fn linear_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub n: u64,
    /// `T_{1/n} ν_n`.
    pub measure: DiracMeasure,
    pub polygon: Polygon,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicRow {
    pub k: u32,
    /// `sup |P_{2^k} − P_{2^{k−1}}|`.
    pub vs_half: f64,
    /// `sup |P_{2^k} − P_{2^k − 1}|`.
    pub vs_below: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_max: u64,
    pub tolerance: f64,
    pub linear_bound: Option<RatStr>,
    pub degrees: Vec<DegreeEntry>,
    /// `sup |P_n − P_{n−1}|` for `n ≥ 2`.
    pub successive: Vec<f64>,
    pub dyadic: Vec<DyadicRow>,
    pub converged: bool,
    /// Level with the largest gap, when not converged.
    pub witness_k: Option<u32>,
}

/// Polygons of `T_{1/n}ν_n` for `1 ≤ n ≤ n_max`, with a Cauchy check along
/// dyadic `n`: converged when both gaps stay within `tolerance` on the last
/// three dyadic levels.
pub fn convergence_run(seq: &dyn MeasureSequence, n_max: u64, tolerance: f64) -> Result<ConvergenceReport> {
    if n_max < 1 {
        return Err(Error::OutOfRange { value: n_max.to_string(), range: "n_max >= 1".into() });
    }
    let bound = seq.linear_bound();
    let degrees: Vec<DegreeEntry> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let nu = seq.measure(n)?;
            let inv = Rational::new(BigInt::one(), BigInt::from(n));
            let scaled = nu.dilate(&inv)?;
            if let Some(b) = &bound {
                let extreme = scaled.positions().map(|p| p.abs()).max().unwrap_or_else(Rational::zero);
                if extreme > *b {
                    return Err(Error::HypothesisViolation(format!(
                        "sup |supp ν_n|/n = {} exceeds the linear bound {} at n = {n}",
                        format_rational(&extreme),
                        format_rational(b)
                    )));
                }
            }
            let polygon = polygon_of(&scaled)?;
            Ok(DegreeEntry { n, measure: scaled, polygon })
        })
        .collect::<Result<_>>()?;

    let dist = |a: u64, b: u64| to_f64(&sup_distance(&degrees[a as usize - 1].polygon, &degrees[b as usize - 1].polygon));
    let successive: Vec<f64> = (2..=n_max).into_par_iter().map(|n| dist(n, n - 1)).collect();
    let k_max = 63 - n_max.leading_zeros();
    let dyadic: Vec<DyadicRow> = (1..=k_max)
        .map(|k| {
            let p = 1u64 << k;
            DyadicRow { k, vs_half: dist(p, p / 2), vs_below: dist(p, p - 1) }
        })
        .collect();
    let tail = &dyadic[dyadic.len().saturating_sub(3)..];
    let converged = !tail.is_empty() && tail.iter().all(|r| r.vs_half <= tolerance && r.vs_below <= tolerance);
    let witness_k = if converged {
        None
    } else {
        dyadic
            .iter()
            .max_by(|a, b| a.vs_half.max(a.vs_below).total_cmp(&b.vs_half.max(b.vs_below)))
            .map(|r| r.k)
    };
    Ok(ConvergenceReport {
        n_max,
        tolerance,
        linear_bound: bound.map(RatStr),
        degrees,
        successive,
        dyadic,
        converged,
        witness_k,
    })
}

/// `n ↦ I_n` as floats, for Cauchy checks at desk scale.
pub fn integral_sequence(m: &MonomialModel, g: &ConcaveTestFn, n_max: u64, budget: u128) -> Result<Vec<f64>> {
    (1..=n_max)
        .into_par_iter()
        .map(|n| integral_i(m, g, n, budget).map(|v| to_f64(&v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::FilteredSpace;
    use crate::rational::int;
    use proptest::prelude::*;

    fn first_coordinate() -> MonomialModel {
        MonomialModel::linear(vec![int(1), int(0)]).unwrap()
    }

    fn perturbed(d: usize, seed: u64) -> MonomialModel {
        let base = (0..d).map(|i| rat(i as i64 + 1, 2)).collect();
        MonomialModel::new(base, Perturbation::Seeded { bound: int(1), seed }).unwrap()
    }

    /// Constant weight 2 in rank one: pairwise fine for f ≡ 1, three-fold not.
    fn constant_two() -> MonomialModel {
        MonomialModel::from_fn(1, |_| int(2), Some(int(2))).unwrap()
    }

    #[test]
    fn model_measure_examples() {
        let nu = model_measure(&first_coordinate(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(nu, DiracMeasure::uniform([int(0), int(1), int(2)]));
        let rank_one = MonomialModel::linear(vec![rat(3, 2)]).unwrap();
        assert_eq!(model_measure(&rank_one, 4, DEFAULT_BUDGET).unwrap(), DiracMeasure::dirac(int(6)));
        let zero = MonomialModel::linear(vec![int(0), int(0)]).unwrap();
        assert_eq!(model_measure(&zero, 5, DEFAULT_BUDGET).unwrap(), DiracMeasure::dirac(int(0)));
        assert!(matches!(
            model_measure(&perturbed(4, 1), 30, 100),
            Err(Error::BudgetExceeded { required: 5456, budget: 100 })
        ));
    }

    #[test]
    fn integral_examples() {
        for n in 1..=6 {
            let i = integral_i(&first_coordinate(), &ConcaveTestFn::identity(), n, DEFAULT_BUDGET).unwrap();
            assert_eq!(i, rat(1, 2));
            let c = integral_i(&perturbed(2, 3), &ConcaveTestFn::constant(rat(7, 5)), n, DEFAULT_BUDGET).unwrap();
            assert_eq!(c, rat(7, 5));
        }
        let rank_one = MonomialModel::linear(vec![rat(-2, 3)]).unwrap();
        let g = ConcaveTestFn::capped(int(0));
        for n in 1..=4 {
            assert_eq!(integral_i(&rank_one, &g, n, DEFAULT_BUDGET).unwrap(), g.eval(&rat(-2, 3)));
        }
        assert!(integral_i(&rank_one, &g, 0, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn linear_weights_are_quasi_filtered() {
        let m = MonomialModel::linear(vec![int(3), rat(-1, 2), int(0)]).unwrap();
        let r = check_quasi_filtered(&m, &ErrorFn::zero(), 8, 4, DEFAULT_BUDGET).unwrap();
        assert!(r.passed && r.checked > 0);
    }

    #[test]
    fn bounded_perturbation_passes_with_f_two() {
        let two = ErrorFn::constant(int(2));
        for d in 1..=3 {
            let r = check_quasi_filtered(&perturbed(d, 11), &two, 10, 3, DEFAULT_BUDGET).unwrap();
            assert!(r.passed, "d = {d}: {:?}", r.witness);
        }
    }

    #[test]
    fn bounded_perturbation_fails_with_f_zero() {
        let r = check_quasi_filtered(&perturbed(2, 11), &ErrorFn::zero(), 10, 2, DEFAULT_BUDGET).unwrap();
        assert!(!r.passed);
        let w = r.witness.unwrap();
        // independent recomputation of the witness
        let m = perturbed(2, 11);
        let sum: Vec<u32> = (0..2).map(|j| w.parts.iter().map(|a| a[j]).sum()).collect();
        let rhs: Rational = w.parts.iter().map(|a| m.weight(a).unwrap()).sum();
        assert!(m.weight(&sum).unwrap() < rhs);
        assert_eq!(w.required.0, rhs);
    }

    #[test]
    fn pairwise_does_not_imply_threefold() {
        let one = ErrorFn::constant(int(1));
        let m = constant_two();
        assert!(check_pseudo_filtered(&m, &one, 6, DEFAULT_BUDGET).unwrap().passed);
        let q = check_quasi_filtered(&m, &one, 6, 3, DEFAULT_BUDGET).unwrap();
        assert!(!q.passed);
        assert_eq!(q.witness.unwrap().parts.len(), 3);
        assert!(check_pseudo_filtered(&first_coordinate(), &ErrorFn::zero(), 6, DEFAULT_BUDGET).unwrap().passed);
    }

    #[test]
    fn criterion_budget_and_bounds() {
        assert!(matches!(
            check_quasi_filtered(&perturbed(3, 1), &ErrorFn::zero(), 12, 4, 50),
            Err(Error::BudgetExceeded { budget: 50, .. })
        ));
        assert!(check_quasi_filtered(&first_coordinate(), &ErrorFn::zero(), 1, 2, DEFAULT_BUDGET).is_err());
    }

    /// Brute-force count of the pairs enumerated by the criterion.
    #[test]
    fn factorization_count_matches_enumeration() {
        let d = 2;
        let comps: Vec<(Composition, u64)> = (1..=6u64)
            .flat_map(|n| enumerate_delta(n as u32, d).unwrap().into_iter().map(move |a| (a, n)))
            .collect();
        let mut pairs = 0u128;
        for i in 0..comps.len() {
            for j in i..comps.len() {
                if comps[i].1 + comps[j].1 <= 6 {
                    pairs += 1;
                }
            }
        }
        assert_eq!(factorization_count(d, 1, 6, 2), pairs);
        let r = check_quasi_filtered(&first_coordinate(), &ErrorFn::zero(), 6, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(u128::from(r.checked), pairs);
    }

    #[test]
    fn superadditivity_examples() {
        let id = ConcaveTestFn::identity();
        let parts: Vec<Vec<u64>> = vec![vec![1, 1], vec![2, 3], vec![1, 2, 3], vec![4]];
        let r = superadditivity_check(&first_coordinate(), &id, &parts, &ErrorFn::zero(), DEFAULT_BUDGET).unwrap();
        assert!(r.all_hold && r.precondition_verified);
        for row in &r.rows {
            assert_eq!(row.lhs, row.rhs);
        }

        let mut partitions = Vec::new();
        for n in 2..=12u64 {
            for a in 1..n {
                partitions.push(vec![a, n - a]);
                for b in 1..n - a {
                    partitions.push(vec![a, b, n - a - b]);
                }
            }
        }
        let g = ConcaveTestFn::new(vec![(int(1), int(0)), (rat(1, 3), rat(1, 2))], int(1)).unwrap();
        let two = ErrorFn::constant(int(2));
        let r = superadditivity_check(&perturbed(2, 5), &g, &partitions, &two, DEFAULT_BUDGET).unwrap();
        assert!(r.precondition_verified && r.all_hold);

        let single = superadditivity_check(&perturbed(2, 5), &g, &[vec![5]], &two, DEFAULT_BUDGET).unwrap();
        let row = &single.rows[0];
        assert_eq!(&row.lhs.0 - &row.rhs.0, int(2));
    }

    #[test]
    fn superadditivity_warns_without_precondition() {
        let r = superadditivity_check(
            &perturbed(2, 5),
            &ConcaveTestFn::identity(),
            &[vec![2, 2]],
            &ErrorFn::zero(),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(!r.precondition_verified);
        assert!(r.warning.is_some());
    }

    #[test]
    fn rank_one_linear_polygons_are_fixed() {
        let rank_one = MonomialModel::linear(vec![rat(5, 7)]).unwrap();
        let r = convergence_run(&ModelSequence { model: &rank_one, budget: DEFAULT_BUDGET }, 16, 1e-2).unwrap();
        assert!(r.converged && r.successive.iter().all(|&d| d == 0.0));
        assert!(r.degrees.iter().all(|e| e.polygon == Polygon::linear(rat(5, 7))));
    }

    #[test]
    fn higher_rank_linear_polygons_settle() {
        let m = MonomialModel::linear(vec![int(2), int(-1), int(0)]).unwrap();
        let r = convergence_run(&ModelSequence { model: &m, budget: DEFAULT_BUDGET }, 32, 0.2).unwrap();
        let gaps: Vec<f64> = r.dyadic.iter().map(|row| row.vs_half).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(r.converged);
    }

    #[test]
    fn dyadic_floor_does_not_converge() {
        let r = convergence_run(&DyadicFloorSequence, 64, 1e-2).unwrap();
        assert!(!r.converged);
        assert!(r.dyadic.iter().filter(|row| row.k >= 3).all(|row| row.vs_below >= 0.25));
        assert!(r.witness_k.is_some());
    }

    #[test]
    fn sqrt_perturbation_gaps_shrink() {
        let m = MonomialModel::new(vec![int(1), int(0)], Perturbation::SqrtScaled { scale: int(1), seed: 7 }).unwrap();
        let r = convergence_run(&ModelSequence { model: &m, budget: DEFAULT_BUDGET }, 128, 0.2).unwrap();
        let gaps: Vec<f64> = r.dyadic.iter().map(|row| row.vs_half).collect();
        assert!(gaps[gaps.len() - 1] < gaps[1], "{gaps:?}");
        assert!(r.converged);
    }

    #[test]
    fn linear_bound_violation_is_an_error() {
        let m = MonomialModel::from_fn(1, |a| Rational::from_integer((a[0] * a[0]).into()), Some(int(4))).unwrap();
        let err = convergence_run(&ModelSequence { model: &m, budget: DEFAULT_BUDGET }, 8, 1e-2).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolation(_)));
    }

    #[test]
    fn shift_covariance() {
        let base = perturbed(2, 9);
        let c = rat(3, 4);
        let shifted = MonomialModel::new(
            base.base_weights().iter().map(|w| w + &c).collect(),
            base.perturbation().clone(),
        )
        .unwrap();
        for n in 1..=6u64 {
            let nu = model_measure(&base, n, DEFAULT_BUDGET).unwrap();
            let nu_c = model_measure(&shifted, n, DEFAULT_BUDGET).unwrap();
            let cn = &c * Rational::from_integer(n.into());
            assert_eq!(nu_c, nu.translate(&cn));
            let inv = rat(1, n as i64);
            assert_eq!(nu_c.dilate(&inv).unwrap(), nu.dilate(&inv).unwrap().translate(&c));
        }
    }

    /// `λ` of a general element of `B_n` is the minimum weight over its
    /// monomial support, and the monomial basis is maximal.
    #[test]
    fn monomial_filtration_lemma() {
        let m = perturbed(3, 2);
        let n = 3;
        let monomials = enumerate_delta(n, 3).unwrap();
        let weights: Vec<Rational> = monomials.iter().map(|a| m.weight(a).unwrap()).collect();
        let fil = FilteredSpace::from_coordinate_weights(&weights).unwrap();
        let dim = weights.len();
        assert!(fil.is_maximal_basis(&crate::linalg::identity(dim)).unwrap());
        for mask in [0b1u32, 0b101, 0b1110, 0b1111111111, 0b1000000001] {
            let v: Vec<Rational> = (0..dim).map(|i| if mask >> i & 1 == 1 { int(i as i64 + 1) } else { int(0) }).collect();
            let expected = (0..dim).filter(|i| mask >> i & 1 == 1).map(|i| weights[i].clone()).min().unwrap();
            assert_eq!(fil.index_of(&v).unwrap(), expected.into());
        }
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{"d":2,"base_weights":["1/2","0"],"perturbation":{"bound":"1","seed":42},"n0":1}"#;
        let m = MonomialModel::try_from(serde_json::from_str::<ModelJson>(text).unwrap()).unwrap();
        assert!(matches!(m.perturbation(), Perturbation::Seeded { seed: 42, .. }));
        let back = serde_json::to_string(&ModelJson::try_from(&m).unwrap()).unwrap();
        assert_eq!(back, r#"{"d":2,"base_weights":["1/2","0/1"],"perturbation":{"bound":"1/1","seed":42},"n0":1}"#);
        let sqrt = r#"{"d":1,"base_weights":["0"],"perturbation":{"sqrt_scale":"1","seed":1}}"#;
        let m = MonomialModel::try_from(serde_json::from_str::<ModelJson>(sqrt).unwrap()).unwrap();
        assert!(matches!(m.perturbation(), Perturbation::SqrtScaled { .. }));
    }

    #[test]
    fn cauchy_integrals_at_desk_scale() {
        let g = ConcaveTestFn::capped(rat(3, 4));
        let seq = integral_sequence(&perturbed(2, 4), &g, 64, DEFAULT_BUDGET).unwrap();
        assert!((seq[63] - seq[31]).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn measure_comparison_lemma(
            seed in any::<u64>(),
            c_num in 0i64..8,
            n in 1u64..7,
        ) {
            let c = rat(c_num, 4);
            let base = perturbed(2, seed);
            let bound = c.clone();
            let near = MonomialModel::from_fn(
                2,
                {
                    let base = base.clone();
                    move |a: &[u32]| base.weight(a).unwrap() + &bound * unit_noise(seed ^ 0x5555, a)
                },
                None,
            )
            .unwrap();
            let nu = model_measure(&base, n, DEFAULT_BUDGET).unwrap();
            let nu_near = model_measure(&near, n, DEFAULT_BUDGET).unwrap();
            prop_assert!(nu_near.translate(&c).dominates(&nu).unwrap());
            prop_assert!(nu.translate(&c).dominates(&nu_near).unwrap());
        }
    }
}
