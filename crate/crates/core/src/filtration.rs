//! R-filtrations of finite-dimensional rational vector spaces.
//!
//! A separated, exhaustive, left-continuous filtration of `Q^r` is the same
//! thing as a flag `0 ⊊ V¹ ⊊ ⋯ ⊊ Vⁿ = Q^r` together with strictly decreasing
//! jump values `a_1 > ⋯ > a_n`: `F_t = V^i` for `t ∈ ]a_{i+1}, a_i]`, `F_t = 0`
//! above `a_1` and `F_t = Q^r` below `a_n`. [`FilteredSpace`] stores exactly
//! that data, each stage as a reduced row basis, so two values compare equal
//! iff they describe the same filtration.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::measure::{combine, DiracMeasure};
use crate::rational::{format_rational, ExtendedRational, RatStr, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FilteredSpaceJson", into = "FilteredSpaceJson")]
pub struct FilteredSpace {
    dim: usize,
    flag: Vec<Matrix>,
    jumps: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct FilteredSpaceJson {
    dim: usize,
    flag: Vec<Vec<Vec<RatStr>>>,
    jumps: Vec<RatStr>,
}

fn to_json_matrix(m: &Matrix) -> Vec<Vec<RatStr>> {
    m.iter().map(|row| row.iter().map(RatStr::from).collect()).collect()
}

fn from_json_matrix(m: Vec<Vec<RatStr>>) -> Matrix {
    m.into_iter().map(|row| row.into_iter().map(|q| q.0).collect()).collect()
}

impl TryFrom<FilteredSpaceJson> for FilteredSpace {
    type Error = Error;
    fn try_from(json: FilteredSpaceJson) -> Result<Self> {
        FilteredSpace::new(
            json.dim,
            json.flag.into_iter().map(from_json_matrix).collect(),
            json.jumps.into_iter().map(|q| q.0).collect(),
        )
    }
}

impl From<FilteredSpace> for FilteredSpaceJson {
    fn from(space: FilteredSpace) -> Self {
        FilteredSpaceJson {
            dim: space.dim,
            flag: space.flag.iter().map(to_json_matrix).collect(),
            jumps: space.jumps.into_iter().map(RatStr).collect(),
        }
    }
}

impl FilteredSpace {
    /// Builds a filtration from a flag and its jump values. Stages must be
    /// nested and jumps non-increasing; repeated jumps and repeated subspaces
    /// are merged.
    pub fn new(dim: usize, flag: Vec<Matrix>, jumps: Vec<Rational>) -> Result<Self> {
        if flag.len() != jumps.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} stages but {} jumps",
                flag.len(),
                jumps.len()
            )));
        }
        if jumps.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidFiltration("jumps must be decreasing".into()));
        }
        for pair in flag.windows(2) {
            if pair[0].iter().any(|v| !linalg::in_row_space(&pair[1], v)) {
                return Err(Error::InvalidFiltration("stages are not nested".into()));
            }
        }
        Self::from_stages(dim, jumps.into_iter().zip(flag).collect())
    }

    /// The filtration `F_t = span{rows of every stage whose value is ≥ t}`.
    /// Stages may come in any order; the result must exhaust `Q^dim`.
    pub fn from_stages(dim: usize, mut stages: Vec<(Rational, Matrix)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFiltration("zero-dimensional space".into()));
        }
        for (_, m) in &stages {
            if let Some(row) = m.iter().find(|row| row.len() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        stages.sort_by(|a, b| b.0.cmp(&a.0));
        let mut flag: Vec<Matrix> = Vec::new();
        let mut jumps: Vec<Rational> = Vec::new();
        let mut acc: Matrix = Vec::new();
        let mut i = 0;
        while i < stages.len() {
            let value = stages[i].0.clone();
            while i < stages.len() && stages[i].0 == value {
                acc.extend(stages[i].1.iter().cloned());
                i += 1;
            }
            acc = linalg::row_space_basis(&acc);
            if acc.len() > flag.last().map_or(0, Vec::len) {
                flag.push(acc.clone());
                jumps.push(value);
            }
        }
        if acc.len() != dim {
            return Err(Error::InvalidFiltration(format!(
                "filtration is not exhaustive: stages span dimension {} of {dim}",
                acc.len()
            )));
        }
        Ok(Self { dim, flag, jumps })
    }

    /// The filtration for which `λ(v_i) = w_i` on a basis `v` of `Q^dim`.
    pub fn from_weighted_vectors(dim: usize, vectors: Vec<(Vector, Rational)>) -> Result<Self> {
        Self::from_stages(dim, vectors.into_iter().map(|(v, w)| (w, vec![v])).collect())
    }

    /// Coordinate filtration: `λ(e_i) = weights[i]` on the standard basis.
    pub fn from_coordinate_weights(weights: &[Rational]) -> Result<Self> {
        let dim = weights.len();
        let basis = linalg::identity(dim);
        Self::from_weighted_vectors(dim, basis.into_iter().zip(weights.iter().cloned()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flag(&self) -> &[Matrix] {
        &self.flag
    }

    pub fn jumps(&self) -> &[Rational] {
        &self.jumps
    }

    /// Cumulative stage dimensions `d_1 < ⋯ < d_n = dim`.
    pub fn dims(&self) -> Vec<usize> {
        self.flag.iter().map(Vec::len).collect()
    }

    /// Rank of `F_t`.
    pub fn rank_at(&self, t: &Rational) -> usize {
        self.jumps
            .iter()
            .zip(&self.flag)
            .rfind(|(a, _)| *a >= t)
            .map_or(0, |(_, m)| m.len())
    }

    fn check_len(&self, v: &[Rational]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok(())
    }

    /// `λ(v) = sup{t : v ∈ F_t}`: `+∞` exactly for `v = 0`, otherwise the
    /// jump of the first stage containing `v`.
    pub fn index_of(&self, v: &[Rational]) -> Result<ExtendedRational> {
        self.check_len(v)?;
        if linalg::is_zero(v) {
            return Ok(ExtendedRational::PosInfinity);
        }
        let i = self
            .flag
            .iter()
            .position(|stage| linalg::in_row_space(stage, v))
            .expect("last stage is the whole space");
        Ok(ExtendedRational::Finite(self.jumps[i].clone()))
    }

    /// `(f*G)_t = f^{-1}(G_t)` for an injective `f` into this space.
    pub fn inverse_image(&self, f: &LinearMap) -> Result<FilteredSpace> {
        if f.target_dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: f.target_dim });
        }
        f.require_injective()?;
        let stages = self
            .flag
            .iter()
            .zip(&self.jumps)
            .map(|(stage, a)| {
                // x·M ∈ rowspan(B)  ⟺  (x, y) in the left kernel of [M; -B]
                let mut stacked = f.matrix.clone();
                stacked.extend(stage.iter().map(|row| row.iter().map(|x| -x).collect::<Vector>()));
                let preimage: Matrix = linalg::left_kernel(&stacked, self.dim)
                    .into_iter()
                    .map(|mut c| {
                        c.truncate(f.source_dim);
                        c
                    })
                    .collect();
                (a.clone(), preimage)
            })
            .collect();
        FilteredSpace::from_stages(f.source_dim, stages)
    }

    /// Strong direct image along a surjection `p` out of this space. With
    /// finitely many jumps the left-continuous closure `∩_{s<t} p(F_s)`
    /// agrees with the stagewise image.
    pub fn strong_direct_image(&self, p: &LinearMap) -> Result<FilteredSpace> {
        if p.source_dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.source_dim });
        }
        p.require_surjective()?;
        let stages = self
            .flag
            .iter()
            .zip(&self.jumps)
            .map(|(stage, a)| (a.clone(), linalg::mat_mul(stage, &p.matrix, p.target_dim)))
            .collect();
        FilteredSpace::from_stages(p.target_dim, stages)
    }

    /// `Σ (d_i − d_{i−1})/dim · δ_{a_i}`.
    pub fn associated_measure(&self) -> DiracMeasure {
        let r = self.dim;
        let mut prev = 0;
        let atoms = self.flag.iter().zip(&self.jumps).map(|(stage, a)| {
            let d = stage.len();
            let mass = Rational::new((d - prev).into(), r.into());
            prev = d;
            (a.clone(), mass)
        });
        DiracMeasure::new(atoms.collect::<Vec<_>>()).expect("positive masses")
    }

    /// `(1/r) Σ δ_{λ(b_i)}` for a basis `b`.
    pub fn basis_measure(&self, basis: &[Vector]) -> Result<DiracMeasure> {
        if basis.len() != self.dim || linalg::rank(basis) != self.dim {
            return Err(Error::Singular);
        }
        let positions = basis
            .iter()
            .map(|b| match self.index_of(b)? {
                ExtendedRational::Finite(q) => Ok(q),
                _ => Err(Error::Singular),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiracMeasure::uniform(positions))
    }

    /// `#{b : λ(b) ≥ a_i} = d_i` at every jump `a_i`.
    pub fn is_maximal_basis(&self, basis: &[Vector]) -> Result<bool> {
        if basis.len() != self.dim || linalg::rank(basis) != self.dim {
            return Err(Error::Singular);
        }
        let indices = basis.iter().map(|b| self.index_of(b)).collect::<Result<Vec<_>>>()?;
        Ok(self.jumps.iter().zip(&self.flag).all(|(a, stage)| {
            let a = ExtendedRational::Finite(a.clone());
            indices.iter().filter(|l| **l >= a).count() == stage.len()
        }))
    }

    /// Upper unitriangular `A` such that the rows of `A·seed` form a maximal
    /// basis. Induction on the dimension: pass to the quotient by the last
    /// seed vector, solve there, then lift each vector through the coset
    /// `x + Q·e_last` to a representative of largest index.
    pub fn maximal_base(&self, seed: &[Vector]) -> Result<MaximalBase> {
        let r = self.dim;
        if seed.len() != r {
            return Err(Error::DimensionMismatch { expected: r, found: seed.len() });
        }
        for row in seed {
            self.check_len(row)?;
        }
        let seed_inv = linalg::inverse(seed)?;
        let change = self.maximal_change(seed, &seed_inv)?;
        let basis = linalg::mat_mul(&change, seed, r);
        Ok(MaximalBase { basis, change })
    }

    fn maximal_change(&self, seed: &[Vector], seed_inv: &[Vector]) -> Result<Matrix> {
        let r = self.dim;
        if r == 1 {
            return Ok(linalg::identity(1));
        }
        // x = c·seed  ↦  (c_1, …, c_{r-1})
        let projection = LinearMap::new(
            r,
            r - 1,
            seed_inv.iter().map(|row| row[..r - 1].to_vec()).collect(),
        )?;
        let quotient = self.strong_direct_image(&projection)?;
        let quotient_seed = linalg::identity(r - 1);
        let quotient_inv = linalg::identity(r - 1);
        let inner = quotient.maximal_change(&quotient_seed, &quotient_inv)?;

        let last = &seed[r - 1];
        let mut change = Vec::with_capacity(r);
        for row in inner {
            let x = linalg::vec_mat(&row, &seed[..r - 1], r);
            let t = self.best_shift(&x, last);
            let mut full = row;
            full.push(t);
            change.push(full);
        }
        let mut unit = linalg::zeros(r);
        unit[r - 1] = Rational::one();
        change.push(unit);
        Ok(change)
    }

    /// `t` maximizing `λ(x + t·e)`; `x` and `e` independent.
    fn best_shift(&self, x: &[Rational], e: &[Rational]) -> Rational {
        for stage in &self.flag {
            if linalg::in_row_space(stage, x) {
                return Rational::zero();
            }
            let mut rows = stage.clone();
            rows.push(e.to_vec());
            if let Some(c) = linalg::combination(&rows, x) {
                // x = y + c_e·e with y in the stage
                return -c.last().cloned().unwrap_or_else(Rational::zero);
            }
        }
        unreachable!("last stage is the whole space")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalBase {
    pub basis: Matrix,
    pub change: Matrix,
}

pub fn is_upper_unitriangular(m: &[Vector]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, x)| match j.cmp(&i) {
            std::cmp::Ordering::Less => x.is_zero(),
            std::cmp::Ordering::Equal => x.is_one(),
            std::cmp::Ordering::Greater => true,
        })
    })
}

/// A linear map `Q^source → Q^target`; row `i` of `matrix` is the image of
/// the `i`-th basis vector, so `f(x) = x·matrix`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LinearMapJson", into = "LinearMapJson")]
pub struct LinearMap {
    source_dim: usize,
    target_dim: usize,
    matrix: Matrix,
}

#[derive(Serialize, Deserialize)]
struct LinearMapJson {
    source_dim: usize,
    target_dim: usize,
    matrix: Vec<Vec<RatStr>>,
}

impl TryFrom<LinearMapJson> for LinearMap {
    type Error = Error;
    fn try_from(json: LinearMapJson) -> Result<Self> {
        LinearMap::new(json.source_dim, json.target_dim, from_json_matrix(json.matrix))
    }
}

impl From<LinearMap> for LinearMapJson {
    fn from(f: LinearMap) -> Self {
        LinearMapJson {
            source_dim: f.source_dim,
            target_dim: f.target_dim,
            matrix: to_json_matrix(&f.matrix),
        }
    }
}

impl LinearMap {
    pub fn new(source_dim: usize, target_dim: usize, matrix: Matrix) -> Result<Self> {
        if matrix.len() != source_dim {
            return Err(Error::DimensionMismatch { expected: source_dim, found: matrix.len() });
        }
        if let Some(row) = matrix.iter().find(|row| row.len() != target_dim) {
            return Err(Error::DimensionMismatch { expected: target_dim, found: row.len() });
        }
        Ok(Self { source_dim, target_dim, matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { source_dim: n, target_dim: n, matrix: linalg::identity(n) }
    }

    /// Inclusion of the row span of `basis` (independent rows) into `Q^dim`.
    pub fn inclusion(basis: Matrix, dim: usize) -> Result<Self> {
        Self::new(basis.len(), dim, basis)
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.matrix)
    }

    pub fn apply(&self, v: &[Rational]) -> Vector {
        linalg::vec_mat(v, &self.matrix, self.target_dim)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.target_dim != other.source_dim {
            return Err(Error::DimensionMismatch { expected: self.target_dim, found: other.source_dim });
        }
        LinearMap::new(
            self.source_dim,
            other.target_dim,
            linalg::mat_mul(&self.matrix, &other.matrix, other.target_dim),
        )
    }

    fn require_injective(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.source_dim {
            return Err(Error::NotInjective { rank, dim: self.source_dim });
        }
        Ok(())
    }

    fn require_surjective(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.target_dim {
            return Err(Error::NotSurjective { rank, dim: self.target_dim });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequenceMeasures {
    pub sub: DiracMeasure,
    pub mid: DiracMeasure,
    pub quot: DiracMeasure,
    pub identity_holds: bool,
}

/// For `0 → V' → V → V'' → 0` with the induced filtrations on both ends,
/// checks `ν_V = (rk V'/rk V) ν_{V'} + (rk V''/rk V) ν_{V''}` exactly.
pub fn exact_sequence_measures(
    sub: &LinearMap,
    quot: &LinearMap,
    mid: &FilteredSpace,
) -> Result<ExactSequenceMeasures> {
    let r = mid.dim();
    if sub.target_dim != r {
        return Err(Error::DimensionMismatch { expected: r, found: sub.target_dim });
    }
    if quot.source_dim != r {
        return Err(Error::DimensionMismatch { expected: r, found: quot.source_dim });
    }
    if sub.source_dim == 0 || quot.target_dim == 0 {
        return Err(Error::NotExact("both ends must be nonzero".into()));
    }
    if sub.source_dim + quot.target_dim != r {
        return Err(Error::NotExact(format!(
            "ranks {} + {} do not add up to {r}",
            sub.source_dim, quot.target_dim
        )));
    }
    if !sub.then(quot)?.matrix.iter().all(|row| linalg::is_zero(row)) {
        return Err(Error::NotExact("composition is not zero".into()));
    }
    let sub_space = mid.inverse_image(sub)?;
    let quot_space = mid.strong_direct_image(quot)?;
    let nu_sub = sub_space.associated_measure();
    let nu_quot = quot_space.associated_measure();
    let nu_mid = mid.associated_measure();
    let w_sub = Rational::new(sub.source_dim.into(), r.into());
    let w_quot = Rational::new(quot.target_dim.into(), r.into());
    let recombined = combine(&[(w_sub, &nu_sub), (w_quot, &nu_quot)])?;
    Ok(ExactSequenceMeasures {
        identity_holds: recombined == nu_mid,
        sub: nu_sub,
        mid: nu_mid,
        quot: nu_quot,
    })
}

impl std::fmt::Display for FilteredSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "dim {}:", self.dim)?;
        for (a, stage) in self.jumps.iter().zip(&self.flag) {
            write!(f, " [{} ↦ rank {}]", format_rational(a), stage.len())?;
        }
        Ok(())
    }
}
