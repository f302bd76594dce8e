//! Concave polygons on `[0, 1]` attached to probability measures.
//!
//! For `ν` with survival function `f(x) = ν(]x, +∞[)`, the quasi-inverse
//! `f*(t) = sup{x : f(x) > t}` is a decreasing step function on `]0, 1[` and
//! `P(ν)(t) = ∫_0^t f*`. For a Dirac combination this is piecewise linear:
//! the slopes are the atom positions from the top down, the knots the
//! cumulative masses.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{DiracMeasure, SurvivalFn};
use crate::rational::{format_rational, round_sig12, to_f64, RatStr, Rational};

/// Right-continuous decreasing step function on `]0, 1[`: `values[j]` on
/// `[knots[j], knots[j+1])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiInverse {
    knots: Vec<Rational>,
    values: Vec<Rational>,
}

impl QuasiInverse {
    pub fn knots(&self) -> &[Rational] {
        &self.knots
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// `f*(t)` for `t ∈ ]0, 1[`.
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if !t.is_positive() || *t >= Rational::from_integer(1.into()) {
            return Err(Error::OutOfRange { value: format_rational(t), range: "]0, 1[".into() });
        }
        let j = self.knots.iter().rposition(|k| k <= t).expect("first knot is 0");
        Ok(self.values[j].clone())
    }
}

/// `f*(t) = sup{x : f(x) > t}`. On `[v_k, v_{k−1})` (with `v_{−1} = 1`) the
/// supremum is the breakpoint `b_k`.
pub fn quasi_inverse(f: &SurvivalFn) -> QuasiInverse {
    let b = f.breakpoints();
    let v = f.values();
    let one = Rational::from_integer(1.into());
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for k in (0..b.len()).rev() {
        let upper = if k == 0 { &one } else { &v[k - 1] };
        if v[k] < *upper {
            knots.push(v[k].clone());
            values.push(b[k].clone());
        }
    }
    QuasiInverse { knots, values }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "PolygonJson")]
pub struct Polygon {
    knots: Vec<Rational>,
    slopes: Vec<Rational>,
}

#[derive(Serialize)]
struct PolygonJson {
    knots: Vec<RatStr>,
    slopes: Vec<RatStr>,
}

impl From<Polygon> for PolygonJson {
    fn from(p: Polygon) -> Self {
        PolygonJson {
            knots: p.knots.into_iter().map(RatStr).collect(),
            slopes: p.slopes.into_iter().map(RatStr).collect(),
        }
    }
}

impl Polygon {
    /// `knots` run from 0 to 1 strictly increasing; one strictly smaller
    /// slope per segment.
    pub fn new(knots: Vec<Rational>, slopes: Vec<Rational>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidInput(format!("polygon: {msg}")));
        if knots.len() < 2 || slopes.len() + 1 != knots.len() {
            return bad("need n+1 knots for n slopes");
        }
        if !knots[0].is_zero() || *knots.last().unwrap() != Rational::from_integer(1.into()) {
            return bad("knots must start at 0 and end at 1");
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return bad("knots must be strictly increasing");
        }
        if slopes.windows(2).any(|w| w[0] <= w[1]) {
            return bad("slopes must be strictly decreasing");
        }
        Ok(Self { knots, slopes })
    }

    pub fn linear(slope: Rational) -> Self {
        Self { knots: vec![Rational::zero(), Rational::from_integer(1.into())], slopes: vec![slope] }
    }

    /// Piecewise-linear interpolation of `g` at `knots`. Fails unless the
    /// secant slopes come out strictly decreasing.
    pub fn secant(knots: Vec<Rational>, g: impl Fn(&Rational) -> Rational) -> Result<Self> {
        let slopes = knots
            .windows(2)
            .map(|w| (g(&w[1]) - g(&w[0])) / (&w[1] - &w[0]))
            .collect();
        if !g(&Rational::zero()).is_zero() {
            return Err(Error::InvalidInput("secant polygon: g(0) must be 0".into()));
        }
        Self::new(knots, slopes)
    }

    pub fn knots(&self) -> &[Rational] {
        &self.knots
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    /// `P(t_j)` at every knot.
    pub fn values(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        let mut out = vec![acc.clone()];
        for (w, a) in self.knots.windows(2).zip(&self.slopes) {
            acc += a * (&w[1] - &w[0]);
            out.push(acc.clone());
        }
        out
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t.is_negative() || *t > Rational::from_integer(1.into()) {
            return Err(Error::OutOfRange { value: format_rational(t), range: "[0, 1]".into() });
        }
        let mut acc = Rational::zero();
        for (w, a) in self.knots.windows(2).zip(&self.slopes) {
            if *t <= w[1] {
                return Ok(acc + a * (t - &w[0]));
            }
            acc += a * (&w[1] - &w[0]);
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (w, a) in self.knots.windows(2).zip(&self.slopes) {
            let (lo, hi) = (to_f64(&w[0]), to_f64(&w[1]));
            if t <= hi {
                return acc + to_f64(a) * (t - lo);
            }
            acc += to_f64(a) * (hi - lo);
        }
        acc
    }

    /// `P(ε·) = ε P`: slopes multiplied by `ε > 0`.
    pub fn scale(&self, eps: &Rational) -> Result<Polygon> {
        if !eps.is_positive() {
            return Err(Error::NonPositiveScale(format_rational(eps)));
        }
        Ok(Polygon { knots: self.knots.clone(), slopes: self.slopes.iter().map(|a| a * eps).collect() })
    }

    /// `P + a·t`: every slope increased by `a`.
    pub fn shear(&self, a: &Rational) -> Polygon {
        Polygon { knots: self.knots.clone(), slopes: self.slopes.iter().map(|s| s + a).collect() }
    }

    /// The measure `Σ (t_i − t_{i−1}) δ_{a_i}` this polygon comes from.
    pub fn to_measure(&self) -> DiracMeasure {
        DiracMeasure::new(
            self.knots
                .windows(2)
                .zip(&self.slopes)
                .map(|(w, a)| (a.clone(), &w[1] - &w[0]))
                .collect::<Vec<_>>(),
        )
        .expect("positive gaps")
    }

    /// CSV `t,P(t)` at the knots with exact values; with `samples > 0`, a
    /// second block `t,P(t)` of evenly spaced float samples for plotting.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from("t,P(t)\n");
        for (t, p) in self.knots.iter().zip(self.values()) {
            let _ = writeln!(out, "{},{}", format_rational(t), format_rational(&p));
        }
        if samples > 0 {
            out.push_str("\nt,P(t)\n");
            for i in 0..=samples {
                let t = i as f64 / samples as f64;
                let _ = writeln!(out, "{},{}", round_sig12(t), round_sig12(self.eval_f64(t)));
            }
        }
        out
    }
}

/// `P(ν)` for a nonempty probability measure.
pub fn polygon_of(nu: &DiracMeasure) -> Result<Polygon> {
    if nu.is_empty() || !nu.is_probability() {
        return Err(Error::NotProbability(format_rational(&nu.total())));
    }
    let mut knots = vec![Rational::zero()];
    let mut slopes = Vec::with_capacity(nu.atoms().len());
    let mut acc = Rational::zero();
    for (p, m) in nu.atoms().iter().rev() {
        acc += m;
        knots.push(acc.clone());
        slopes.push(p.clone());
    }
    Polygon::new(knots, slopes)
}

/// `sup_{[0,1]} |P1 − P2|`, attained at a knot of one of them.
pub fn sup_distance(p1: &Polygon, p2: &Polygon) -> Rational {
    let (v1, v2) = (p1.values(), p2.values());
    let mut knots: Vec<&Rational> = p1.knots.iter().chain(&p2.knots).collect();
    knots.sort();
    knots.dedup();
    knots
        .into_iter()
        .map(|t| (p1.eval_from(&v1, t) - p2.eval_from(&v2, t)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

impl Polygon {
    /// `P(t)` for `t ∈ [0, 1]` given the knot values from [`Polygon::values`].
    fn eval_from(&self, values: &[Rational], t: &Rational) -> Rational {
        let j = self.knots.partition_point(|k| k <= t);
        if j >= self.knots.len() {
            return values[values.len() - 1].clone();
        }
        let j = j.max(1) - 1;
        &values[j] + &self.slopes[j] * (t - &self.knots[j])
    }
}
