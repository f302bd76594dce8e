//! Limits of almost sub- and super-additive sequences.
//!
//! Every "certified" bound here is certified only modulo the hypothesis the
//! caller asserts about the sequence; the pair checkers spot-verify that
//! hypothesis on a bounded set of pairs.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};

type FloatFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(u64) -> Rational + Send + Sync>;

/// `n ↦ a_n` for `n ≥ 1`. Evaluation must be deterministic; closures are
/// `Send + Sync`, so concurrent evaluation is always allowed.
#[derive(Clone)]
pub struct Sequence {
    name: String,
    float: FloatFn,
    exact: Option<ExactFn>,
    len: Option<u64>,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence")
            .field("name", &self.name)
            .field("exact", &self.exact.is_some())
            .field("len", &self.len)
            .finish()
    }
}

impl Sequence {
    pub fn from_fn(name: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), float: Arc::new(f), exact: None, len: None }
    }

    pub fn exact(name: impl Into<String>, f: impl Fn(u64) -> Rational + Send + Sync + 'static) -> Self {
        let exact: ExactFn = Arc::new(f);
        let inner = exact.clone();
        Self { name: name.into(), float: Arc::new(move |n| to_f64(&inner(n))), exact: Some(exact), len: None }
    }

    /// `a_n = values[n-1]`.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        let len = values.len() as u64;
        let values = Arc::new(values);
        Self {
            name: name.into(),
            float: Arc::new(move |n| values[(n - 1) as usize]),
            exact: None,
            len: Some(len),
        }
    }

    pub fn from_exact_values(name: impl Into<String>, values: Vec<Rational>) -> Self {
        let len = values.len() as u64;
        let values = Arc::new(values);
        let mut s = Self::exact(name, move |n| values[(n - 1) as usize].clone());
        s.len = Some(len);
        s
    }

    /// `a_n = c·n`.
    pub fn linear(c: Rational) -> Self {
        Self::exact(format!("{}*n", format_rational(&c)), move |n| &c * Rational::from_integer(n.into()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn value(&self, n: u64) -> f64 {
        (self.float)(n)
    }

    pub fn exact_value(&self, n: u64) -> Option<Rational> {
        self.exact.as_ref().map(|f| f(n))
    }

    fn check_n_max(&self, n_max: u64) -> Result<()> {
        if n_max < 1 {
            return Err(Error::OutOfRange { value: n_max.to_string(), range: "n_max >= 1".into() });
        }
        if let Some(len) = self.len {
            if n_max > len {
                return Err(Error::OutOfRange {
                    value: n_max.to_string(),
                    range: format!("n_max <= {len} (sequence length)"),
                });
            }
        }
        Ok(())
    }
}

/// Nonnegative error term `f`, optionally declared weakly increasing.
#[derive(Clone)]
pub struct ErrorFn {
    name: String,
    float: FloatFn,
    exact: Option<ExactFn>,
    monotone: bool,
}

impl fmt::Debug for ErrorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorFn")
            .field("name", &self.name)
            .field("exact", &self.exact.is_some())
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl ErrorFn {
    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn constant(c: Rational) -> Self {
        let name = format_rational(&c);
        Self::exact(name, true, move |_| c.clone())
    }

    pub fn exact(
        name: impl Into<String>,
        monotone: bool,
        f: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        let exact: ExactFn = Arc::new(f);
        let inner = exact.clone();
        Self {
            name: name.into(),
            float: Arc::new(move |n| to_f64(&inner(n))),
            exact: Some(exact),
            monotone,
        }
    }

    pub fn from_fn(name: impl Into<String>, monotone: bool, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), float: Arc::new(f), exact: None, monotone }
    }

    /// `⌈log₂(n+1)⌉`, the bit length of `n`.
    pub fn bit_length() -> Self {
        Self::exact("ceil(log2(n+1))", true, |n| Rational::from_integer((64 - n.leading_zeros()).into()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn value(&self, n: u64) -> f64 {
        (self.float)(n)
    }

    pub fn exact_value(&self, n: u64) -> Option<Rational> {
        self.exact.as_ref().map(|f| f(n))
    }

    /// Spot-checks `f ≥ 0` and, when declared, monotonicity on `1..=n`.
    fn validate(&self, n: u64) -> Result<()> {
        let mut prev = None;
        for k in 1..=n {
            let v = self.value(k);
            if v < 0.0 || v.is_nan() {
                return Err(Error::InvalidInput(format!("error function is negative at {k}")));
            }
            if self.monotone {
                if let Some((pk, pv)) = prev {
                    if v < pv {
                        return Err(Error::NonMonotone { prev: pk, n: k });
                    }
                }
            }
            prev = Some((k, v));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `a_{m+n} ≤ a_m + a_n + f(m) + f(n)`; certified upper bound.
    Sub,
    /// `a_{m+n} ≥ a_m + a_n − f(m) − f(n)`; certified lower bound.
    Super,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub mode: Mode,
    pub n_max: u64,
    /// Upper bound in sub mode, lower bound in super mode.
    pub bound: f64,
    pub bound_at: u64,
    pub estimate: f64,
    #[serde(skip)]
    pub exact_bound: Option<Rational>,
    #[serde(skip)]
    pub exact_estimate: Option<Rational>,
}

/// Sub mode: `min_{n ≤ n_max} (a_n + f(n))/n` and `a_{n_max}/n_max`.
/// Super mode: `max_{n ≤ n_max} (a_n − f(n))/n`, from the sub-mode bound
/// applied to `αn − a_n`.
pub fn fekete_bracket(a: &Sequence, f: &ErrorFn, mode: Mode, n_max: u64) -> Result<Bracket> {
    a.check_n_max(n_max)?;
    f.validate(n_max.min(1 << 16))?;
    let sign = match mode {
        Mode::Sub => 1.0,
        Mode::Super => -1.0,
    };
    let better = |cand: f64, best: f64| match mode {
        Mode::Sub => cand < best,
        Mode::Super => cand > best,
    };
    let mut bound = f64::NAN;
    let mut bound_at = 1;
    for n in 1..=n_max {
        let cand = (a.value(n) + sign * f.value(n)) / n as f64;
        if n == 1 || better(cand, bound) {
            bound = cand;
            bound_at = n;
        }
    }
    let estimate = a.value(n_max) / n_max as f64;

    let (exact_bound, exact_estimate) = match (&a.exact, &f.exact) {
        (Some(ae), Some(fe)) => {
            let mut best: Option<Rational> = None;
            for n in 1..=n_max {
                let nn = Rational::from_integer(n.into());
                let cand = match mode {
                    Mode::Sub => (ae(n) + fe(n)) / nn,
                    Mode::Super => (ae(n) - fe(n)) / nn,
                };
                let replace = match &best {
                    None => true,
                    Some(b) => match mode {
                        Mode::Sub => cand < *b,
                        Mode::Super => cand > *b,
                    },
                };
                if replace {
                    best = Some(cand);
                    bound_at = n;
                }
            }
            let est = ae(n_max) / Rational::from_integer(n_max.into());
            (best, Some(est))
        }
        _ => (None, None),
    };
    if let Some(b) = &exact_bound {
        bound = to_f64(b);
    }
    Ok(Bracket {
        mode,
        n_max,
        bound,
        bound_at,
        estimate: exact_estimate.as_ref().map_or(estimate, to_f64),
        exact_bound,
        exact_estimate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Violation {
    /// The pairwise hypothesis fails at `(m, n)`.
    Pair { m: u64, n: u64, lhs: f64, rhs: f64 },
    /// `a_n ≤ c₂ n` fails.
    Growth { n: u64, value: f64, bound: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Pair { m, n, lhs, rhs } => write!(f, "({m},{n}): {lhs} vs {rhs}"),
            Violation::Growth { n, value, bound } => write!(f, "a_{n} = {value} > {bound}"),
        }
    }
}

/// Pairs `n0 ≤ m ≤ n ≤ n_max/2` in order of increasing `m + n`, then `m`,
/// at most `budget` of them.
pub fn sampled_pairs(n_max: u64, n0: u64, budget: usize) -> Vec<(u64, u64)> {
    let half = n_max / 2;
    let n0 = n0.max(1);
    let mut out = Vec::new();
    if half < n0 {
        return out;
    }
    'outer: for s in 2 * n0..=2 * half {
        let lo = n0.max(s.saturating_sub(half));
        for m in lo..=s / 2 {
            if out.len() >= budget {
                break 'outer;
            }
            out.push((m, s - m));
        }
    }
    out
}

fn tolerance(lhs: f64, rhs: f64) -> f64 {
    1e-9 * (1.0 + lhs.abs() + rhs.abs())
}

/// Checks the pairwise hypothesis of `mode` on the sampled pairs; exact
/// comparison when both functions are exact.
pub fn check_pairs(a: &Sequence, f: &ErrorFn, mode: Mode, pairs: &[(u64, u64)]) -> Vec<Violation> {
    let exact = a.exact.as_ref().zip(f.exact.as_ref());
    pairs
        .iter()
        .filter_map(|&(m, n)| {
            let ok = match exact {
                Some((ae, fe)) => {
                    let lhs = ae(m + n);
                    let base = ae(m) + ae(n);
                    let slack = fe(m) + fe(n);
                    match mode {
                        Mode::Sub => lhs <= base + slack,
                        Mode::Super => lhs >= base - slack,
                    }
                }
                None => {
                    let lhs = a.value(m + n);
                    let rhs = a.value(m) + a.value(n);
                    let slack = f.value(m) + f.value(n);
                    match mode {
                        Mode::Sub => lhs <= rhs + slack + tolerance(lhs, rhs),
                        Mode::Super => lhs >= rhs - slack - tolerance(lhs, rhs),
                    }
                }
            };
            if ok {
                return None;
            }
            let lhs = a.value(m + n);
            let rhs = match mode {
                Mode::Sub => a.value(m) + a.value(n) + f.value(m) + f.value(n),
                Mode::Super => a.value(m) + a.value(n) - f.value(m) - f.value(n),
            };
            Some(Violation::Pair { m, n, lhs, rhs })
        })
        .collect()
}

fn violation_error(violations: &[Violation]) -> Error {
    let listed: Vec<String> = violations.iter().take(10).map(ToString::to_string).collect();
    Error::HypothesisViolation(format!(
        "{} violation(s): {}{}",
        violations.len(),
        listed.join("; "),
        if violations.len() > 10 { "; ..." } else { "" }
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantErrorReport {
    pub n_max: u64,
    pub estimate: f64,
    pub lower_bound: f64,
    pub pairs_checked: usize,
    #[serde(skip)]
    pub exact_estimate: Option<Rational>,
    #[serde(skip)]
    pub exact_lower_bound: Option<Rational>,
}

/// Hypothesis checks for `a_{m+n} ≥ a_m + a_n − c₁` and `a_n ≤ c₂ n`.
pub fn check_constant_error(
    a: &Sequence,
    c1: &Rational,
    c2: &Rational,
    n_max: u64,
    budget: usize,
) -> Result<(Vec<Violation>, usize)> {
    if c1.is_negative() || !c2.is_positive() {
        return Err(Error::InvalidInput("need c1 >= 0 and c2 > 0".into()));
    }
    a.check_n_max(n_max)?;
    let pairs = sampled_pairs(n_max, 1, budget);
    // a_{m+n} ≥ a_m + a_n − c1  is the super condition with f ≡ c1/2
    let half = ErrorFn::constant(c1 / Rational::from_integer(2.into()));
    let mut violations = check_pairs(a, &half, Mode::Super, &pairs);
    let c2f = to_f64(c2);
    for n in 1..=n_max {
        let over = match a.exact_value(n) {
            Some(v) => v > c2 * Rational::from_integer(n.into()),
            None => a.value(n) > c2f * n as f64 + tolerance(a.value(n), 0.0),
        };
        if over {
            violations.push(Violation::Growth { n, value: a.value(n), bound: c2f * n as f64 });
        }
    }
    Ok((violations, pairs.len()))
}

/// Estimate `a_{n_max}/n_max` and certified lower bound `max_n (a_n − c₁)/n`
/// for `a_{m+n} ≥ a_m + a_n − c₁`, `a_n ≤ c₂ n`. Any detected violation of
/// either hypothesis is an error naming the offending indices.
pub fn constant_error_limit(
    a: &Sequence,
    c1: &Rational,
    c2: &Rational,
    n_max: u64,
    budget: usize,
) -> Result<ConstantErrorReport> {
    let (violations, pairs_checked) = check_constant_error(a, c1, c2, n_max, budget)?;
    if !violations.is_empty() {
        return Err(violation_error(&violations));
    }
    let bracket = fekete_bracket(a, &ErrorFn::constant(c1.clone()), Mode::Super, n_max)?;
    Ok(ConstantErrorReport {
        n_max,
        estimate: bracket.estimate,
        lower_bound: bracket.bound,
        pairs_checked,
        exact_estimate: bracket.exact_estimate,
        exact_lower_bound: bracket.exact_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogSummable {
    pub alpha_max: u32,
    /// `Σ_{α=0}^{α_max} f(2^α)/2^α`.
    pub partial_sum: f64,
    /// `2^{−α_max} Σ_{i=0}^{α_max} f(2^i)`.
    pub cesaro: f64,
    #[serde(skip)]
    pub exact_partial_sum: Option<Rational>,
    #[serde(skip)]
    pub exact_cesaro: Option<Rational>,
}

pub fn log_summable_check(f: &ErrorFn, alpha_max: u32) -> Result<LogSummable> {
    if !f.monotone {
        return Err(Error::InvalidInput("error function must be declared monotone".into()));
    }
    if alpha_max > 62 {
        return Err(Error::OutOfRange { value: alpha_max.to_string(), range: "alpha_max <= 62".into() });
    }
    f.validate((1u64 << alpha_max).min(1 << 16))?;
    let dyadic: Vec<u64> = (0..=alpha_max).map(|a| 1u64 << a).collect();
    for w in dyadic.windows(2) {
        if f.value(w[1]) < f.value(w[0]) {
            return Err(Error::NonMonotone { prev: w[0], n: w[1] });
        }
    }
    let partial_sum = dyadic.iter().map(|&p| f.value(p) / p as f64).sum();
    let cesaro = dyadic.iter().map(|&p| f.value(p)).sum::<f64>() / (1u64 << alpha_max) as f64;
    let (exact_partial_sum, exact_cesaro) = match &f.exact {
        Some(fe) => {
            let pow = |p: u64| Rational::from_integer(p.into());
            let partial: Rational = dyadic.iter().map(|&p| fe(p) / pow(p)).sum();
            let total: Rational = dyadic.iter().map(|&p| fe(p)).sum();
            (Some(partial), Some(total / pow(1u64 << alpha_max)))
        }
        None => (None, None),
    };
    Ok(LogSummable {
        alpha_max,
        partial_sum: exact_partial_sum.as_ref().map_or(partial_sum, to_f64),
        cesaro: exact_cesaro.as_ref().map_or(cesaro, to_f64),
        exact_partial_sum,
        exact_cesaro,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicPoint {
    pub k: u32,
    /// `a_{2^k}/2^k`.
    pub at_power: f64,
    /// `a_{2^k − 1}/(2^k − 1)`.
    pub below_power: f64,
    /// `|a_{2^k}/2^k − a_{2^k−1}/(2^k−1)|`.
    pub oscillation: f64,
    /// `|a_{2^k}/2^k − a_{2^{k−1}}/2^{k−1}|`.
    pub cauchy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceDiagnostic {
    pub points: Vec<DyadicPoint>,
    pub tolerance: f64,
    /// Largest oscillation over `k ≥ 3` and where it occurs.
    pub max_oscillation: f64,
    pub witness_k: Option<u32>,
    /// Both oscillation and dyadic Cauchy gap within tolerance over the last
    /// three levels.
    pub converged: bool,
}

/// Compares `a_n/n` along `n = 2^k` with its neighbours `2^k − 1` and
/// `2^{k−1}` for `2^k ≤ n_max`.
pub fn convergence_diagnostic(a: &Sequence, n_max: u64, tolerance: f64) -> Result<ConvergenceDiagnostic> {
    a.check_n_max(n_max)?;
    let ratio = |n: u64| a.value(n) / n as f64;
    let k_max = 63 - n_max.leading_zeros();
    let points: Vec<DyadicPoint> = (1..=k_max)
        .map(|k| {
            let p = 1u64 << k;
            let at_power = ratio(p);
            let below_power = ratio(p - 1);
            DyadicPoint {
                k,
                at_power,
                below_power,
                oscillation: (at_power - below_power).abs(),
                cauchy: (at_power - ratio(p / 2)).abs(),
            }
        })
        .collect();
    let (witness_k, max_oscillation) = points
        .iter()
        .filter(|p| p.k >= 3)
        .fold((None, 0.0f64), |(wk, best), p| {
            if p.oscillation > best || wk.is_none() {
                (Some(p.k), p.oscillation.max(best))
            } else {
                (wk, best)
            }
        });
    let tail = &points[points.len().saturating_sub(3)..];
    let converged = !tail.is_empty() && tail.iter().all(|p| p.oscillation <= tolerance && p.cauchy <= tolerance);
    Ok(ConvergenceDiagnostic { points, tolerance, max_oscillation, witness_k, converged })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudoLimitReport {
    pub n_max: u64,
    pub estimate: f64,
    pub pairs_checked: usize,
    pub diagnostic: ConvergenceDiagnostic,
    #[serde(skip)]
    pub exact_estimate: Option<Rational>,
}

/// `a_{n_max}/n_max` under `a_{m+n} ≤ a_m + a_n + f(m) + f(n)` for
/// `m, n ≥ n0`, with `f` increasing and `Σ f(2^α)/2^α < ∞`, plus the dyadic
/// convergence diagnostic.
pub fn pseudo_limit(a: &Sequence, f: &ErrorFn, n_max: u64, n0: u64, budget: usize) -> Result<PseudoLimitReport> {
    if !f.monotone {
        return Err(Error::InvalidInput("error function must be declared monotone".into()));
    }
    a.check_n_max(n_max)?;
    f.validate(n_max.min(1 << 16))?;
    let pairs = sampled_pairs(n_max, n0, budget);
    let violations = check_pairs(a, f, Mode::Sub, &pairs);
    if !violations.is_empty() {
        return Err(violation_error(&violations));
    }
    let exact_estimate = a.exact_value(n_max).map(|v| v / Rational::from_integer(n_max.into()));
    Ok(PseudoLimitReport {
        n_max,
        estimate: exact_estimate.as_ref().map_or(a.value(n_max) / n_max as f64, to_f64),
        pairs_checked: pairs.len(),
        diagnostic: convergence_diagnostic(a, n_max, 1e-2)?,
        exact_estimate,
    })
}

/// `φ(n) = 2^{⌊log₂ n⌋}`: `φ(n)/n` oscillates between ½ and 1.
pub fn dyadic_floor(n: u64) -> u64 {
    if n == 0 {
        0
    } else {
        1u64 << (63 - n.leading_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn three_n_minus_sqrt() -> Sequence {
        Sequence::from_fn("3n - sqrt(n)", |n| 3.0 * n as f64 - (n as f64).sqrt())
    }

    #[test]
    fn super_bracket_for_sqrt_defect() {
        let b = fekete_bracket(&three_n_minus_sqrt(), &ErrorFn::zero(), Mode::Super, 100_000).unwrap();
        assert!(b.bound >= 2.996, "{}", b.bound);
        assert!((b.estimate - 3.0).abs() <= 1e-2);
        let pairs = sampled_pairs(2_000, 1, 50_000);
        assert!(check_pairs(&three_n_minus_sqrt(), &ErrorFn::zero(), Mode::Super, &pairs).is_empty());
    }

    #[test]
    fn linear_sequence_is_exact_in_both_modes() {
        let c = rat(7, 3);
        for mode in [Mode::Sub, Mode::Super] {
            for n_max in [1, 5, 64] {
                let b = fekete_bracket(&Sequence::linear(c.clone()), &ErrorFn::zero(), mode, n_max).unwrap();
                assert_eq!(b.exact_bound.as_ref(), Some(&c));
                assert_eq!(b.exact_estimate.as_ref(), Some(&c));
                assert_eq!(b.bound, to_f64(&c));
            }
        }
    }

    #[test]
    fn sub_bracket_with_log_error() {
        let a = Sequence::from_fn("n + log(n+1)", |n| n as f64 + ((n + 1) as f64).ln());
        let f = ErrorFn::from_fn("log(n+1)", true, |n| ((n + 1) as f64).ln());
        let b = fekete_bracket(&a, &f, Mode::Sub, 10_000).unwrap();
        assert!((b.bound - 1.0).abs() <= 1e-2, "{}", b.bound);
        assert!((b.estimate - 1.0).abs() <= 1e-2);
        assert!(check_pairs(&a, &f, Mode::Sub, &sampled_pairs(2_000, 1, 20_000)).is_empty());
    }

    #[test]
    fn super_bound_is_monotone_in_n_max() {
        let a = three_n_minus_sqrt();
        let mut prev = f64::NEG_INFINITY;
        for n_max in [1, 2, 3, 10, 100, 1000, 5000] {
            let b = fekete_bracket(&a, &ErrorFn::zero(), Mode::Super, n_max).unwrap();
            assert!(b.bound >= prev);
            assert!(b.estimate >= b.bound - 1e-12);
            prev = b.bound;
        }
    }

    #[test]
    fn bracket_rejects_zero_n_max() {
        assert!(fekete_bracket(&three_n_minus_sqrt(), &ErrorFn::zero(), Mode::Sub, 0).is_err());
        let short = Sequence::from_values("short", vec![1.0, 2.0]);
        assert!(fekete_bracket(&short, &ErrorFn::zero(), Mode::Sub, 3).is_err());
    }

    #[test]
    fn constant_error_examples() {
        let a = Sequence::exact("5n+2", |n| int(5 * n as i64 + 2));
        let r = constant_error_limit(&a, &int(2), &int(7), 1000, 100_000).unwrap();
        assert_eq!(r.exact_lower_bound, Some(int(5)));
        assert_eq!(r.exact_estimate, Some(rat(5 * 1000 + 2, 1000)));

        let r = constant_error_limit(&Sequence::linear(int(1)), &int(0), &int(1), 200, 100_000).unwrap();
        assert_eq!(r.exact_estimate, Some(int(1)));
    }

    #[test]
    fn constant_error_reports_injected_violation() {
        let mut values: Vec<Rational> = (1..=20).map(int).collect();
        values[6] = int(0); // a_7 far below a_3 + a_4 − c1
        let a = Sequence::from_exact_values("broken", values);
        let err = constant_error_limit(&a, &int(1), &int(2), 20, 1000).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(3,4)"), "{msg}");
        let (violations, _) = check_constant_error(&a, &int(1), &int(2), 20, 1000).unwrap();
        assert!(violations.contains(&Violation::Pair { m: 3, n: 4, lhs: 0.0, rhs: 6.0 }));
    }

    #[test]
    fn growth_violation_is_reported() {
        let a = Sequence::linear(int(3));
        let (violations, _) = check_constant_error(&a, &int(0), &int(2), 5, 100).unwrap();
        assert!(matches!(violations[0], Violation::Growth { n: 1, .. }));
    }

    #[test]
    fn log_summable_examples() {
        let r = log_summable_check(&ErrorFn::bit_length(), 10).unwrap();
        assert_eq!(r.exact_cesaro, Some(rat(66, 1024)));
        let z = log_summable_check(&ErrorFn::zero(), 8).unwrap();
        assert_eq!((z.partial_sum, z.cesaro), (0.0, 0.0));
        let ident = ErrorFn::exact("n", true, |n| int(n as i64));
        for alpha in [4, 8, 16] {
            let r = log_summable_check(&ident, alpha).unwrap();
            assert_eq!(r.exact_partial_sum, Some(int(alpha as i64 + 1)));
            assert!(r.cesaro >= 1.0);
        }
        let not_monotone = ErrorFn::exact("bad", false, |_| int(0));
        assert!(log_summable_check(&not_monotone, 4).is_err());
        let decreasing = ErrorFn::exact("decr", true, |n| rat(1, n as i64));
        assert!(matches!(log_summable_check(&decreasing, 4), Err(Error::NonMonotone { .. })));
    }

    #[test]
    fn pseudo_limit_examples() {
        let a = Sequence::from_fn("n - log(n+1)", |n| n as f64 - ((n + 1) as f64).ln());
        let f = ErrorFn::from_fn("log(n+1)", true, |n| ((n + 1) as f64).ln());
        let r = pseudo_limit(&a, &f, 1 << 14, 1, 20_000).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-2);
        assert!(r.diagnostic.converged);

        let r = pseudo_limit(&Sequence::linear(rat(5, 2)), &ErrorFn::zero(), 256, 1, 10_000).unwrap();
        assert_eq!(r.exact_estimate, Some(rat(5, 2)));

        let log2 = ErrorFn::from_fn("log2(n)", true, |n| (n as f64).log2());
        let a = Sequence::from_fn("n + log2(n)", |n| n as f64 + (n as f64).log2());
        assert!(pseudo_limit(&a, &log2, 4096, 1, 10_000).is_err());
        let r = pseudo_limit(&a, &log2, 1 << 14, 2, 20_000).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-2);
    }

    #[test]
    fn dyadic_oscillation_is_flagged() {
        let phi = Sequence::exact("phi", |n| int(dyadic_floor(n) as i64));
        let d = convergence_diagnostic(&phi, 1 << 12, 1e-2).unwrap();
        assert!(!d.converged);
        for p in d.points.iter().filter(|p| p.k >= 3) {
            assert!(p.oscillation >= 0.25);
        }
        assert!(d.max_oscillation >= 0.25);
        let lin = convergence_diagnostic(&Sequence::linear(int(2)), 1 << 10, 1e-2).unwrap();
        assert!(lin.converged);
    }

    #[test]
    fn pairs_are_ordered_and_bounded() {
        let pairs = sampled_pairs(8, 1, 100);
        assert_eq!(pairs[..4], [(1, 1), (1, 2), (1, 3), (2, 2)]);
        assert!(pairs.iter().all(|&(m, n)| m <= n && n <= 4));
        assert_eq!(sampled_pairs(1000, 1, 7).len(), 7);
        assert!(sampled_pairs(8, 2, 100).iter().all(|&(m, _)| m >= 2));
    }
}
