//! Bigraded Poincaré series `P = Q(X, Y) / ∏_i (1 − X Y^{d_i})` and the
//! measures `ν_{n,P} = Σ_d (a_{n,d}/S_n) δ_{d/n}` read off its slices.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{midpoint_grid, DiracMeasure};
use crate::rational::{from_biguint, parse_rational, to_f64, Rational};
use crate::simplex::{self, CdfMethod, CdfOracle};

pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    /// `(x-degree, y-degree) ↦ coefficient` of `Q`, zero entries dropped.
    numerator: BTreeMap<(i64, i64), BigUint>,
    denominators: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    n: i64,
    d: i64,
    coeff: CoeffJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Int(i64),
    Text(String),
}

/// `{numerator: [{n, d, coeff}…], denominators: [d_1, …]}`.
#[derive(Serialize, Deserialize)]
pub struct SeriesJson {
    numerator: Vec<TermJson>,
    #[serde(default)]
    denominators: Vec<u32>,
}

fn parse_coeff(c: CoeffJson) -> Result<BigUint> {
    let value = match c {
        CoeffJson::Int(v) => BigInt::from(v),
        CoeffJson::Text(s) => s.trim().parse::<BigInt>().map_err(|e| Error::Parse(format!("coefficient {s:?}: {e}")))?,
    };
    value.to_biguint().ok_or_else(|| {
        Error::Unsupported(format!("negative numerator coefficient {value}; only nonnegative series are modelled"))
    })
}

impl TryFrom<SeriesJson> for BiSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        let terms = j
            .numerator
            .into_iter()
            .map(|t| Ok(((t.n, t.d), parse_coeff(t.coeff)?)))
            .collect::<Result<Vec<_>>>()?;
        BiSeries::new(terms, j.denominators)
    }
}

impl From<&BiSeries> for SeriesJson {
    fn from(p: &BiSeries) -> Self {
        SeriesJson {
            numerator: p
                .numerator
                .iter()
                .map(|(&(n, d), c)| TermJson { n, d, coeff: CoeffJson::Text(c.to_string()) })
                .collect(),
            denominators: p.denominators.clone(),
        }
    }
}

/// Coefficients `a_{n,d}` of one slice and their sum `S_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub n: i64,
    pub coeffs: BTreeMap<i64, BigUint>,
    pub total: BigUint,
}

impl BiSeries {
    /// Repeated `(n, d)` terms are added.
    pub fn new(terms: Vec<((i64, i64), BigUint)>, denominators: Vec<u32>) -> Result<Self> {
        let mut numerator: BTreeMap<(i64, i64), BigUint> = BTreeMap::new();
        for (k, c) in terms {
            *numerator.entry(k).or_default() += c;
        }
        numerator.retain(|_, c| !c.is_zero());
        Ok(Self { numerator, denominators })
    }

    /// Numerator `1`.
    pub fn with_unit_numerator(denominators: Vec<u32>) -> Self {
        Self::new(vec![((0, 0), BigUint::one())], denominators).expect("valid")
    }

    pub fn numerator(&self) -> &BTreeMap<(i64, i64), BigUint> {
        &self.numerator
    }

    pub fn denominators(&self) -> &[u32] {
        &self.denominators
    }

    /// `X^a Y^b · P`.
    pub fn shifted(&self, a: i64, b: i64) -> Self {
        Self {
            numerator: self.numerator.iter().map(|(&(n, d), c)| ((n + a, d + b), c.clone())).collect(),
            denominators: self.denominators.clone(),
        }
    }

    /// Number of `(count, exponent)` cells the slice computation touches.
    pub fn slice_cost(&self, n: i64) -> u128 {
        let k = self.numerator.keys().map(|&(a, _)| n - a).max().unwrap_or(0).max(0) as u128;
        let top = u128::from(self.denominators.iter().copied().max().unwrap_or(0));
        (k + 1) * (k * top + 1) * (self.denominators.len().max(1) as u128)
    }

    /// The `X^n` coefficient of `P` as a polynomial in `Y`.
    ///
    /// The `X^k` coefficient of `∏ 1/(1 − X Y^{d_i})` is `Σ_{|u| = k} Y^{Σ u_i d_i}`,
    /// built one factor at a time from
    /// `new[j][e] = old[j][e] + new[j−1][e − d_i]`.
    pub fn expand_slice(&self, n: i64, budget: u128) -> Result<Slice> {
        let cost = self.slice_cost(n);
        if cost > budget {
            return Err(Error::BudgetExceeded { required: cost, budget });
        }
        let k_max = self.numerator.keys().map(|&(a, _)| n - a).max().unwrap_or(-1);
        let mut coeffs: BTreeMap<i64, BigUint> = BTreeMap::new();
        if k_max >= 0 {
            let rows = base_rows(&self.denominators, k_max as usize);
            for (&(a, b), c) in &self.numerator {
                let k = n - a;
                if k < 0 {
                    continue;
                }
                for (e, v) in rows[k as usize].iter().enumerate() {
                    if !v.is_zero() {
                        *coeffs.entry(e as i64 + b).or_default() += v * c;
                    }
                }
            }
        }
        let total = coeffs.values().sum();
        Ok(Slice { n, coeffs, total })
    }

    /// `ν_{n,P}`; the zero measure when `S_n = 0`.
    pub fn slice_measure(&self, n: i64, budget: u128) -> Result<DiracMeasure> {
        if n < 1 {
            return Err(Error::OutOfRange { value: n.to_string(), range: "n >= 1".into() });
        }
        let slice = self.expand_slice(n, budget)?;
        if slice.total.is_zero() {
            return Ok(DiracMeasure::zero());
        }
        let total = from_biguint(&slice.total);
        DiracMeasure::new(
            slice
                .coeffs
                .iter()
                .map(|(&d, c)| (Rational::new(BigInt::from(d), BigInt::from(n)), from_biguint(c) / &total)),
        )
    }

    fn limit_coefficients(&self) -> Result<Vec<Rational>> {
        if self.denominators.is_empty() {
            return Err(Error::Unsupported("a series without denominators has no limit measure".into()));
        }
        if self.numerator.is_empty() {
            return Err(Error::Unsupported("the zero series has no limit measure".into()));
        }
        Ok(self.denominators.iter().map(|&d| Rational::from_integer(d.into())).collect())
    }
}

/// `rows[k][e]`: number of `u ∈ Z_{≥0}^m` with `|u| = k` and `Σ u_i d_i = e`.
fn base_rows(ds: &[u32], k_max: usize) -> Vec<Vec<BigUint>> {
    let top = ds.iter().copied().max().unwrap_or(0) as usize;
    let width = k_max * top + 1;
    let mut dp = vec![vec![BigUint::zero(); width]; k_max + 1];
    dp[0][0] = BigUint::one();
    for &d in ds {
        let d = d as usize;
        for j in 1..=k_max {
            let (done, rest) = dp.split_at_mut(j);
            let prev = &done[j - 1];
            for e in d..width {
                if !prev[e - d].is_zero() {
                    let add = prev[e - d].clone();
                    rest[0][e] += add;
                }
            }
        }
    }
    dp
}

/// CDF at `x` of `Σ d_i U_i`, `U` uniform on the simplex. The closed form
/// covers `m ≤ 2` and all-equal `d`.
pub fn limit_cdf_product(d_vec: &[u32], x: f64, method: CdfMethod) -> Result<f64> {
    let c: Vec<Rational> = d_vec.iter().map(|&d| Rational::from_integer(d.into())).collect();
    if method == CdfMethod::ClosedForm {
        let all_equal = d_vec.windows(2).all(|w| w[0] == w[1]);
        if d_vec.len() > 2 && !all_equal {
            return Err(Error::Unsupported("closed form only for m <= 2 or all-equal exponents".into()));
        }
    }
    simplex::cdf(&c, x, method)
}

/// `Σ (I_α/S) ν_{d_α}` with `S = Σ I_α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<(u64, Vec<u32>)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(u64, Vec<u32>)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        if components.iter().any(|(w, _)| *w == 0) {
            return Err(Error::InvalidInput("mixture weights must be positive".into()));
        }
        let h = components[0].1.len();
        if h == 0 || components.iter().any(|(_, d)| d.len() != h) {
            return Err(Error::InvalidInput("all exponent vectors must share one positive length".into()));
        }
        Ok(Self { components })
    }
}

pub fn limit_measure_mixture(spec: &MixtureSpec, x: f64, method: CdfMethod) -> Result<f64> {
    let total: f64 = spec.components.iter().map(|(w, _)| *w as f64).sum();
    spec.components
        .iter()
        .map(|(w, d)| Ok(*w as f64 / total * limit_cdf_product(d, x, method)?))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateRow {
    pub n: i64,
    pub grid_points: usize,
    /// `sup_grid |F_{n,P} − F_P|`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub oracle: CdfMethod,
    pub rows: Vec<CertificateRow>,
}

/// Evaluation points for the certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// Per `n`: midpoints between consecutive atoms of `ν_{n,P}` and one
    /// point beyond each end, moved off the atoms of the limit.
    Auto,
    Points(Vec<Rational>),
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(Grid::Auto);
        }
        s.split(',').map(parse_rational).collect::<Result<_>>().map(Grid::Points)
    }
}

/// Per `n`, the largest gap between the CDF of `ν_{n,P}` and the CDF of the
/// limit over the grid. The limit CDF comes from `oracle`.
pub fn convergence_certificate(
    p: &BiSeries,
    n_list: &[i64],
    grid: &Grid,
    oracle: CdfMethod,
    budget: u128,
) -> Result<Certificate> {
    let c = p.limit_coefficients()?;
    let limit_atoms = simplex::atoms(&c);
    let cdf = CdfOracle::new(&c, oracle)?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let nu = p.slice_measure(n, budget)?;
            let points = match grid {
                Grid::Points(pts) => pts.clone(),
                Grid::Auto => avoid(midpoint_grid(nu.positions()), &limit_atoms, n),
            };
            let deviation = points
                .iter()
                .map(|x| (to_f64(&nu.cdf(x)) - cdf.eval(x)).abs())
                .fold(0.0, f64::max);
            Ok(CertificateRow { n, grid_points: points.len(), deviation })
        })
        .collect::<Result<_>>()?;
    Ok(Certificate { oracle, rows })
}

/// Moves grid points sitting on an atom of the limit by a quarter lattice
/// step to the left.
fn avoid(mut points: Vec<Rational>, atoms: &[Rational], n: i64) -> Vec<Rational> {
    let step = Rational::new(BigInt::one(), BigInt::from(4 * n.max(1)));
    for x in points.iter_mut() {
        if atoms.contains(x) {
            *x -= &step;
        }
    }
    points
}

/// `dim` of a graded module: `−∞` for the zero module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Dimension {
    #[serde(serialize_with = "neg_inf")]
    NegInfinity,
    Finite(u64),
}

fn neg_inf<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("-inf")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionMultiplicity {
    pub dimension: Dimension,
    pub multiplicity: String,
}

/// `H(X) = P(X, 1) = Q(X, 1)/(1 − X)^m`: cancel the factors `(1 − X)` that
/// divide `Q(X, 1)`, then `dim` is the remaining pole order and `c` the
/// reduced numerator at `X = 1`.
pub fn specialize_dimension_multiplicity(p: &BiSeries) -> DimensionMultiplicity {
    if p.numerator.is_empty() {
        return DimensionMultiplicity { dimension: Dimension::NegInfinity, multiplicity: "0".into() };
    }
    // Q(X, 1) as a Laurent polynomial, shifted to start at X^0
    let lo = p.numerator.keys().map(|&(a, _)| a).min().expect("nonempty");
    let hi = p.numerator.keys().map(|&(a, _)| a).max().expect("nonempty");
    let mut q = vec![BigInt::zero(); (hi - lo + 1) as usize];
    for (&(a, _), c) in &p.numerator {
        q[(a - lo) as usize] += BigInt::from(c.clone());
    }
    let mut cancelled = 0usize;
    while cancelled < p.denominators.len() && q.iter().sum::<BigInt>().is_zero() && q.iter().any(|c| !c.is_zero()) {
        q = divide_by_one_minus_x(&q);
        cancelled += 1;
    }
    let value: BigInt = q.iter().sum();
    DimensionMultiplicity {
        dimension: Dimension::Finite((p.denominators.len() - cancelled) as u64),
        multiplicity: value.to_string(),
    }
}

/// Exact quotient of `q` by `(1 − X)`, assuming `q(1) = 0`:
/// `q = (1 − X) s` gives `s_k = Σ_{i ≤ k} q_i`.
fn divide_by_one_minus_x(q: &[BigInt]) -> Vec<BigInt> {
    let mut acc = BigInt::zero();
    q[..q.len() - 1]
        .iter()
        .map(|c| {
            acc += c;
            acc.clone()
        })
        .collect()
}
