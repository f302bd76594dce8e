//! Split vector bundles on a curve, recorded by the slopes and ranks of
//! their semistable summands.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coupling::enumerate_delta;
use crate::error::{Error, Result};
use crate::filtration::FilteredSpace;
use crate::measure::DiracMeasure;
use crate::polygon::{polygon_of, Polygon};
use crate::rational::{binomial_u128, format_rational, RatStr, Rational};
use crate::simplex::{self, CdfMethod};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveData {
    pub g: u64,
    /// Smallest positive degree of a line bundle.
    pub b: u64,
}

impl CurveData {
    pub fn new(g: u64, b: u64) -> Result<Self> {
        if b < 1 {
            return Err(Error::OutOfRange { value: b.to_string(), range: "b >= 1".into() });
        }
        Ok(Self { g, b })
    }

    /// `a(C) = b + g`.
    pub fn a(&self) -> u64 {
        self.b + self.g
    }
}

/// Direct sum of semistable bundles of slope `μ_i` and rank `r_i`, equal
/// slopes merged and sorted by decreasing slope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BundleJson", into = "BundleJson")]
pub struct SplitBundle {
    summands: Vec<(Rational, u64)>,
    char0: bool,
}

#[derive(Serialize, Deserialize)]
struct SummandJson {
    mu: RatStr,
    rank: u64,
}

#[derive(Serialize, Deserialize)]
struct BundleJson {
    summands: Vec<SummandJson>,
    #[serde(default = "yes")]
    char0: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<BundleJson> for SplitBundle {
    type Error = Error;

    fn try_from(j: BundleJson) -> Result<Self> {
        SplitBundle::new(j.summands.into_iter().map(|s| (s.mu.0, s.rank)).collect(), j.char0)
    }
}

impl From<SplitBundle> for BundleJson {
    fn from(e: SplitBundle) -> Self {
        BundleJson {
            summands: e.summands.into_iter().map(|(mu, rank)| SummandJson { mu: RatStr(mu), rank }).collect(),
            char0: e.char0,
        }
    }
}

/// `{curve: {g, b}, summands: [{mu, rank}…], char0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleFile {
    pub curve: CurveData,
    #[serde(flatten)]
    pub bundle: SplitBundle,
}

impl SplitBundle {
    pub fn new(summands: Vec<(Rational, u64)>, char0: bool) -> Result<Self> {
        if summands.is_empty() {
            return Err(Error::InvalidInput("a bundle needs at least one summand".into()));
        }
        if let Some((mu, _)) = summands.iter().find(|(_, r)| *r == 0) {
            return Err(Error::InvalidInput(format!("summand of slope {} has rank 0", format_rational(mu))));
        }
        let mut sorted = summands;
        sorted.sort_by(|a, b| b.0.cmp(&a.0));
        let mut merged: Vec<(Rational, u64)> = Vec::with_capacity(sorted.len());
        for (mu, r) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == mu => {
                    *acc = acc
                        .checked_add(r)
                        .ok_or_else(|| Error::InvalidInput("total rank overflows".into()))?;
                }
                _ => merged.push((mu, r)),
            }
        }
        Ok(Self { summands: merged, char0 })
    }

    /// Line bundles of the given degrees.
    pub fn line_bundles(slopes: &[Rational]) -> Result<Self> {
        Self::new(slopes.iter().map(|m| (m.clone(), 1)).collect(), true)
    }

    pub fn summands(&self) -> &[(Rational, u64)] {
        &self.summands
    }

    pub fn char0(&self) -> bool {
        self.char0
    }

    pub fn rank(&self) -> u64 {
        self.summands.iter().map(|(_, r)| r).sum()
    }

    pub fn degree(&self) -> Rational {
        self.summands.iter().map(|(mu, r)| mu * Rational::from_integer((*r).into())).sum()
    }

    /// `μ_i` repeated `r_i` times.
    pub fn slope_coordinates(&self) -> Vec<Rational> {
        self.summands
            .iter()
            .flat_map(|(mu, r)| std::iter::repeat_n(mu.clone(), *r as usize))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlopeStats {
    pub mu: RatStr,
    pub mu_max: RatStr,
    pub mu_min: RatStr,
}

pub fn slope_stats(e: &SplitBundle) -> SlopeStats {
    let mu = e.degree() / Rational::from_integer(e.rank().into());
    SlopeStats {
        mu: mu.into(),
        mu_max: (&e.summands[0].0).into(),
        mu_min: (&e.summands[e.summands.len() - 1].0).into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HnData {
    /// Distinct slopes, decreasing.
    pub jumps: Vec<RatStr>,
    /// Cumulative ranks of the flag.
    pub dims: Vec<u64>,
    pub measure: DiracMeasure,
    pub polygon: Polygon,
}

/// The Harder–Narasimhan flag of a split bundle: stage `s` is the sum of
/// the summands of slope `≥ s`.
pub fn hn_data(e: &SplitBundle) -> Result<HnData> {
    let total = Rational::from_integer(e.rank().into());
    let measure = DiracMeasure::new(
        e.summands.iter().map(|(mu, r)| (mu.clone(), Rational::from_integer((*r).into()) / &total)),
    )?;
    let dims = e
        .summands
        .iter()
        .scan(0u64, |acc, (_, r)| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    Ok(HnData {
        jumps: e.summands.iter().map(|(mu, _)| mu.into()).collect(),
        dims,
        polygon: polygon_of(&measure)?,
        measure,
    })
}

/// The HN filtration on the generic fibre as a filtered space, one basis
/// vector per unit of rank.
pub fn hn_filtration(e: &SplitBundle) -> Result<FilteredSpace> {
    FilteredSpace::from_coordinate_weights(&e.slope_coordinates())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub a: u64,
    pub mu_max: RatStr,
    /// `μ_max(E_1) + μ_max(E_2) + a(C)`.
    pub upper_bound: RatStr,
    pub upper_holds: bool,
    pub upper_margin: RatStr,
    pub mu_min: RatStr,
    /// `μ_min(E_1) + μ_min(E_2) − a(C)`.
    pub lower_bound: RatStr,
    pub lower_holds: bool,
    pub lower_margin: RatStr,
    pub max_additive: bool,
    pub min_additive: bool,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.lower_holds
    }
}

/// `E_1 ⊗ E_2` and the check of `μ_max(E_1⊗E_2) < μ_max(E_1)+μ_max(E_2)+a(C)`,
/// `μ_min(E_1⊗E_2) > μ_min(E_1)+μ_min(E_2)−a(C)`.
pub fn tensor(e1: &SplitBundle, e2: &SplitBundle, c: &CurveData) -> Result<(SplitBundle, BoundReport)> {
    if !e1.char0 || !e2.char0 {
        return Err(Error::HypothesisViolation(
            "tensor products of semistable bundles are only modelled with char0 = true".into(),
        ));
    }
    let mut summands = Vec::with_capacity(e1.summands.len() * e2.summands.len());
    for (m1, r1) in &e1.summands {
        for (m2, r2) in &e2.summands {
            let r = r1.checked_mul(*r2).ok_or_else(|| Error::InvalidInput("rank overflows".into()))?;
            summands.push((m1 + m2, r));
        }
    }
    let t = SplitBundle::new(summands, true)?;
    let (s1, s2, st) = (slope_stats(e1), slope_stats(e2), slope_stats(&t));
    let a = Rational::from_integer(c.a().into());
    let upper = &s1.mu_max.0 + &s2.mu_max.0 + &a;
    let lower = &s1.mu_min.0 + &s2.mu_min.0 - &a;
    let report = BoundReport {
        a: c.a(),
        upper_holds: st.mu_max.0 < upper,
        upper_margin: (&upper - &st.mu_max.0).into(),
        lower_holds: st.mu_min.0 > lower,
        lower_margin: (&st.mu_min.0 - &lower).into(),
        max_additive: st.mu_max.0 == &s1.mu_max.0 + &s2.mu_max.0,
        min_additive: st.mu_min.0 == &s1.mu_min.0 + &s2.mu_min.0,
        upper_bound: upper.into(),
        lower_bound: lower.into(),
        mu_max: st.mu_max,
        mu_min: st.mu_min,
    };
    Ok((t, report))
}

/// `S^n E = ⊕_{|d| = n} S^{d_1}E_1 ⊗ ⋯ ⊗ S^{d_m}E_m`, the summand for `d`
/// having slope `Σ d_i μ_i` and rank `∏ C(d_i + r_i − 1, r_i − 1)`.
pub fn sym_power_decomposition(e: &SplitBundle, n: u64, budget: u128) -> Result<SplitBundle> {
    let m = e.summands.len();
    let count = binomial_u128(n + m as u64 - 1, m as u64 - 1).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded { required: count, budget });
    }
    let n32 = u32::try_from(n).map_err(|_| Error::OutOfRange { value: n.to_string(), range: "n < 2^32".into() })?;
    let mut summands = Vec::with_capacity(count as usize);
    for d in enumerate_delta(n32, m)? {
        let mut slope = Rational::zero();
        let mut rank: u64 = 1;
        for (&di, (mu, r)) in d.iter().zip(&e.summands) {
            slope += mu * Rational::from_integer(di.into());
            let factor = binomial_u128(u64::from(di) + r - 1, r - 1)
                .and_then(|b| u64::try_from(b).ok())
                .ok_or_else(|| Error::InvalidInput("summand rank overflows u64".into()))?;
            rank = rank.checked_mul(factor).ok_or_else(|| Error::InvalidInput("summand rank overflows u64".into()))?;
        }
        summands.push((slope, rank));
    }
    SplitBundle::new(summands, e.char0)
}

/// `T_{1/n}` of the HN measure of `S^n E`.
pub fn sym_measure(e: &SplitBundle, n: u64, budget: u128) -> Result<DiracMeasure> {
    if n < 1 {
        return Err(Error::OutOfRange { value: n.to_string(), range: "n >= 1".into() });
    }
    let s = sym_power_decomposition(e, n, budget)?;
    let inv = Rational::new(BigInt::one(), BigInt::from(n));
    hn_data(&s)?.measure.dilate(&inv)
}

/// CDF at `x` of the limit of `sym_measure(e, n)`: the image of the uniform
/// law on the simplex with one coordinate per unit of rank under
/// `u ↦ Σ μ_i Σ_j u_ij`. The closed form covers two line bundles only.
pub fn limit_cdf(e: &SplitBundle, x: f64, method: CdfMethod) -> Result<f64> {
    if method == CdfMethod::ClosedForm && !(e.summands.len() == 2 && e.rank() == 2) {
        return Err(Error::Unsupported("closed form only for two line bundles of distinct slopes".into()));
    }
    simplex::cdf(&e.slope_coordinates(), x, method)
}

/// `P(t) = linear·t + quadratic·t²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticPolygon {
    pub linear: RatStr,
    pub quadratic: RatStr,
}

impl QuadraticPolygon {
    pub fn eval(&self, t: &Rational) -> Rational {
        &self.linear.0 * t + &self.quadratic.0 * t * t
    }

    /// The inscribed polygon through the curve at `knots`.
    pub fn secant(&self, knots: Vec<Rational>) -> Result<Polygon> {
        Polygon::secant(knots, |t| self.eval(t))
    }
}

/// Limit polygon of `S^n(L_1 ⊕ L_2)`: `μ_2 t − (μ_2 − μ_1) t²/2`.
pub fn two_line_limit_polygon(mu1: &Rational, mu2: &Rational) -> Result<QuadraticPolygon> {
    if mu1 >= mu2 {
        return Err(Error::InvalidInput(format!(
            "need mu1 < mu2, got {} and {}",
            format_rational(mu1),
            format_rational(mu2)
        )));
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    Ok(QuadraticPolygon { linear: mu2.into(), quadratic: (-(mu2 - mu1) * half).into() })
}

/// `sup |P(ν_n) − secant of the limit at the knots of P(ν_n)|` and the
/// bound `2(μ_2 − μ_1)/n` it is checked against.
pub fn two_line_gap(mu1: &Rational, mu2: &Rational, n: u64, budget: u128) -> Result<(Rational, Rational)> {
    let limit = two_line_limit_polygon(mu1, mu2)?;
    let e = SplitBundle::line_bundles(&[mu1.clone(), mu2.clone()])?;
    let p = polygon_of(&sym_measure(&e, n, budget)?)?;
    let secant = limit.secant(p.knots().to_vec())?;
    let bound = (mu2 - mu1) * Rational::new(BigInt::from(2), BigInt::from(n));
    Ok((crate::polygon::sup_distance(&p, &secant), bound))
}
