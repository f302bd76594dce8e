//! Finitely supported Borel measures on the line.
//!
//! A [`DiracMeasure`] is kept in canonical form: positions strictly
//! increasing, masses strictly positive, coincident atoms merged. Structural
//! equality is therefore measure equality.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, RatStr, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct DiracMeasure {
    atoms: Vec<(Rational, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    atoms: Vec<(RatStr, RatStr)>,
}

impl TryFrom<MeasureJson> for DiracMeasure {
    type Error = Error;
    fn try_from(json: MeasureJson) -> Result<Self> {
        DiracMeasure::new(json.atoms.into_iter().map(|(p, m)| (p.0, m.0)))
    }
}

impl From<DiracMeasure> for MeasureJson {
    fn from(m: DiracMeasure) -> Self {
        MeasureJson {
            atoms: m.atoms.into_iter().map(|(p, w)| (RatStr(p), RatStr(w))).collect(),
        }
    }
}

/// Which tail `tail_mass` measures: `[x, +∞)` or `(x, +∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Closed,
    Open,
}

impl DiracMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dirac(x: Rational) -> Self {
        Self { atoms: vec![(x, Rational::one())] }
    }

    /// Canonicalizes arbitrary `(position, mass)` pairs. Zero masses are
    /// dropped, negative masses rejected.
    pub fn new(atoms: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut atoms: Vec<(Rational, Rational)> = atoms.into_iter().collect();
        if let Some((_, m)) = atoms.iter().find(|(_, m)| m.is_negative()) {
            return Err(Error::NegativeWeight(format_rational(m)));
        }
        atoms.retain(|(_, m)| !m.is_zero());
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            match merged.last_mut() {
                Some((q, acc)) if *q == p => *acc += m,
                _ => merged.push((p, m)),
            }
        }
        Ok(Self { atoms: merged })
    }

    /// Equal mass `1/len` on each listed position (repeats accumulate).
    pub fn uniform(positions: impl IntoIterator<Item = Rational>) -> Self {
        let positions: Vec<Rational> = positions.into_iter().collect();
        if positions.is_empty() {
            return Self::zero();
        }
        let w = Rational::new(1.into(), positions.len().into());
        Self::new(positions.into_iter().map(|p| (p, w.clone()))).expect("positive masses")
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn positions(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|(p, _)| p)
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    /// `∫ x dν / ν(ℝ)`; `None` for the zero measure.
    pub fn mean(&self) -> Option<Rational> {
        if self.is_empty() {
            return None;
        }
        let first: Rational = self.atoms.iter().map(|(p, m)| p * m).sum();
        Some(first / self.total())
    }

    pub fn min_position(&self) -> Option<&Rational> {
        self.atoms.first().map(|(p, _)| p)
    }

    pub fn max_position(&self) -> Option<&Rational> {
        self.atoms.last().map(|(p, _)| p)
    }

    pub fn tail_mass(&self, x: &Rational, kind: Tail) -> Rational {
        self.atoms
            .iter()
            .filter(|(p, _)| match kind {
                Tail::Closed => p >= x,
                Tail::Open => p > x,
            })
            .map(|(_, m)| m)
            .sum()
    }

    /// `ν((-∞, x])`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        self.atoms.iter().filter(|(p, _)| p <= x).map(|(_, m)| m).sum()
    }

    pub fn cdf_f64(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| to_f64(p) <= x)
            .map(|(_, m)| to_f64(m))
            .sum()
    }

    /// `self ≻ other`: every closed tail of `self` carries at least as much
    /// mass. Closed tails only change at atoms, so the atoms of both measures
    /// are the only points that need checking.
    pub fn dominates(&self, other: &DiracMeasure) -> Result<bool> {
        let (a, b) = (self.total(), other.total());
        if a != b {
            return Err(Error::UnequalTotals {
                left: format_rational(&a),
                right: format_rational(&b),
            });
        }
        Ok(self
            .positions()
            .chain(other.positions())
            .all(|x| self.tail_mass(x, Tail::Closed) >= other.tail_mass(x, Tail::Closed)))
    }

    /// `τ_c`: shift every atom by `c`.
    pub fn translate(&self, c: &Rational) -> DiracMeasure {
        DiracMeasure {
            atoms: self.atoms.iter().map(|(p, m)| (p + c, m.clone())).collect(),
        }
    }

    /// `T_ε`: scale every position by `ε > 0`.
    pub fn dilate(&self, eps: &Rational) -> Result<DiracMeasure> {
        if !eps.is_positive() {
            return Err(Error::NonPositiveScale(format_rational(eps)));
        }
        Ok(DiracMeasure {
            atoms: self.atoms.iter().map(|(p, m)| (p * eps, m.clone())).collect(),
        })
    }

    /// Multiply every mass by `w ≥ 0`.
    pub fn scale_mass(&self, w: &Rational) -> Result<DiracMeasure> {
        combine(&[(w.clone(), self)])
    }

    pub fn survival(&self) -> SurvivalFn {
        let total = self.total();
        let mut remaining = total.clone();
        let mut breakpoints = Vec::with_capacity(self.atoms.len());
        let mut values = Vec::with_capacity(self.atoms.len());
        for (p, m) in &self.atoms {
            remaining -= m;
            breakpoints.push(p.clone());
            values.push(if total.is_zero() { Rational::zero() } else { &remaining / &total });
        }
        SurvivalFn { breakpoints, values }
    }

    /// CSV with header `position,mass`, exact `p/q` strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,mass\n");
        for (p, m) in &self.atoms {
            let _ = writeln!(out, "{},{}", format_rational(p), format_rational(m));
        }
        out
    }
}

/// Weighted sum `Σ w_i ν_i` with nonnegative weights.
pub fn combine(parts: &[(Rational, &DiracMeasure)]) -> Result<DiracMeasure> {
    if let Some((w, _)) = parts.iter().find(|(w, _)| w.is_negative()) {
        return Err(Error::NegativeWeight(format_rational(w)));
    }
    DiracMeasure::new(
        parts
            .iter()
            .flat_map(|(w, nu)| nu.atoms.iter().map(move |(p, m)| (p.clone(), m * w))),
    )
}

/// `max_{x ∈ grid} |ν1([x,∞)) − ν2([x,∞))|`.
pub fn cdf_sup_distance(a: &DiracMeasure, b: &DiracMeasure, grid: &[Rational]) -> Rational {
    grid.iter()
        .map(|x| (a.tail_mass(x, Tail::Closed) - b.tail_mass(x, Tail::Closed)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Midpoints between consecutive distinct points, plus one point half a unit
/// beyond each end. Never hits any of the given points.
pub fn midpoint_grid<'a>(points: impl IntoIterator<Item = &'a Rational>) -> Vec<Rational> {
    let mut pts: Vec<Rational> = points.into_iter().cloned().collect();
    pts.sort();
    pts.dedup();
    let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
        return Vec::new();
    };
    let half = Rational::new(1.into(), 2.into());
    let mut grid = vec![first - &half];
    grid.extend(pts.windows(2).map(|w| (&w[0] + &w[1]) * &half));
    grid.push(last + &half);
    grid
}

/// Right-continuous decreasing step function `f(x) = ν((x, +∞))` of a
/// probability measure. Equal to 1 left of the first breakpoint and to
/// `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivalFn {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl SurvivalFn {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidInput(format!("survival function: {msg}")));
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return bad("need one value per breakpoint");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing");
        }
        if values.iter().any(|v| v.is_negative() || *v > Rational::one()) {
            return bad("values must lie in [0, 1]");
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return bad("values must be decreasing");
        }
        if !values.last().is_some_and(Zero::is_zero) {
            return bad("last value must be 0");
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self.breakpoints.iter().rposition(|b| b <= x) {
            None => Rational::one(),
            Some(i) => self.values[i].clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn half_half(a: i64, b: i64) -> DiracMeasure {
        DiracMeasure::new([(int(a), rat(1, 2)), (int(b), rat(1, 2))]).unwrap()
    }

    #[test]
    fn tail_mass_examples() {
        let d1 = DiracMeasure::dirac(int(1));
        assert_eq!(d1.tail_mass(&int(1), Tail::Closed), int(1));
        assert_eq!(d1.tail_mass(&int(1), Tail::Open), int(0));
        assert_eq!(half_half(0, 2).tail_mass(&rat(1, 2), Tail::Closed), rat(1, 2));
        assert_eq!(DiracMeasure::zero().tail_mass(&int(-5), Tail::Closed), int(0));
    }

    #[test]
    fn dominance_examples() {
        let d0 = DiracMeasure::dirac(int(0));
        let d1 = DiracMeasure::dirac(int(1));
        assert!(d1.dominates(&d0).unwrap());
        let spread = half_half(0, 2);
        assert!(!spread.dominates(&d1).unwrap());
        assert!(!d1.dominates(&spread).unwrap());
        assert!(spread.dominates(&spread).unwrap());
        let heavier = combine(&[(int(2), &d0)]).unwrap();
        assert!(matches!(d0.dominates(&heavier), Err(Error::UnequalTotals { .. })));
    }

    #[test]
    fn translate_and_dilate() {
        let nu = half_half(0, 1);
        assert_eq!(nu.translate(&int(0)), nu);
        assert_eq!(nu.translate(&int(2)), half_half(2, 3));
        assert_eq!(nu.translate(&int(1)).translate(&int(-1)), nu);
        assert_eq!(nu.dilate(&int(1)).unwrap(), nu);
        assert_eq!(DiracMeasure::dirac(int(2)).dilate(&rat(1, 2)).unwrap(), DiracMeasure::dirac(int(1)));
        assert!(nu.dilate(&int(0)).is_err());
        let n = 4;
        let lattice = DiracMeasure::uniform((0..=n).map(int));
        let scaled = lattice.dilate(&rat(1, n)).unwrap();
        assert_eq!(scaled, DiracMeasure::uniform((0..=n).map(|k| rat(k, n))));
    }

    #[test]
    fn combine_examples() {
        let nu = half_half(0, 1);
        assert_eq!(combine(&[(int(1), &nu)]).unwrap(), nu);
        let d0 = DiracMeasure::dirac(int(0));
        let d2 = DiracMeasure::dirac(int(2));
        assert_eq!(combine(&[(rat(1, 2), &d0), (rat(1, 2), &d0)]).unwrap(), d0);
        assert_eq!(
            combine(&[(rat(1, 4), &d0), (rat(3, 4), &d2)]).unwrap(),
            DiracMeasure::new([(int(0), rat(1, 4)), (int(2), rat(3, 4))]).unwrap()
        );
        assert!(combine(&[(int(-1), &d0)]).is_err());
    }

    #[test]
    fn sup_distance_examples() {
        let nu = half_half(0, 1);
        assert_eq!(cdf_sup_distance(&nu, &nu, &[int(0), rat(1, 3)]), int(0));
        let d0 = DiracMeasure::dirac(int(0));
        let d1 = DiracMeasure::dirac(int(1));
        assert_eq!(cdf_sup_distance(&d0, &d1, &[rat(1, 2)]), int(1));
        let three = DiracMeasure::uniform([int(0), rat(1, 2), int(1)]);
        let two = DiracMeasure::uniform([int(0), int(1)]);
        assert_eq!(cdf_sup_distance(&three, &two, &[rat(1, 4), rat(3, 4)]), rat(1, 6));
    }

    #[test]
    fn survival_function() {
        let nu = half_half(0, 1);
        let f = nu.survival();
        assert_eq!(f.eval(&int(-1)), int(1));
        assert_eq!(f.eval(&int(0)), rat(1, 2));
        assert_eq!(f.eval(&rat(1, 2)), rat(1, 2));
        assert_eq!(f.eval(&int(1)), int(0));
        assert!(SurvivalFn::new(vec![int(0)], vec![rat(1, 2)]).is_err());
        assert!(SurvivalFn::new(vec![int(0), int(1)], vec![int(0), rat(1, 2)]).is_err());
    }

    #[test]
    fn midpoints_avoid_points() {
        let grid = midpoint_grid(&[int(0), int(1), int(1)]);
        assert_eq!(grid, vec![rat(-1, 2), rat(1, 2), rat(3, 2)]);
    }

    #[test]
    fn json_and_csv() {
        let nu = DiracMeasure::new([(int(2), rat(3, 4)), (int(0), rat(1, 4))]).unwrap();
        let s = serde_json::to_string(&nu).unwrap();
        assert_eq!(s, r#"{"atoms":[["0/1","1/4"],["2/1","3/4"]]}"#);
        assert_eq!(serde_json::from_str::<DiracMeasure>(&s).unwrap(), nu);
        assert_eq!(nu.to_csv(), "position,mass\n0/1,1/4\n2/1,3/4\n");
    }
}
