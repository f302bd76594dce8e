//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use hnpoly::bigraded::{convergence_certificate, BiSeries, Grid};
use hnpoly::bundles::two_line_gap;
use hnpoly::coupling::build_rho;
use hnpoly::filtration::{exact_sequence_measures, is_upper_unitriangular};
use hnpoly::graded::{self, ConcaveTestFn, DyadicFloorSequence, MonomialModel, Perturbation};
use hnpoly::limits::{self, ErrorFn, Mode, Sequence};
use hnpoly::polygon::polygon_of;
use hnpoly::rational::{int, rat, ExtendedRational};
use hnpoly::simplex::CdfMethod;
use hnpoly::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn coupling_sweep() -> Check {
    let start = Instant::now();
    let mut cases = 0;
    for d in 1..=4 {
        for r in [2u32, 3] {
            for code in 0..6u32.pow(r) {
                let n_vec: Vec<u32> = (0..r).map(|i| code / 6u32.pow(i) % 6).collect();
                let rho = build_rho(&n_vec, d, u128::MAX).map_err(|e| format!("d={d} n={n_vec:?}: {e}"))?;
                let report = rho.verify();
                if !report.all_pass() {
                    return Err(format!("d={d} n={n_vec:?}: {report:?}"));
                }
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), format!("{cases} cases exact, {}", secs(elapsed)))
}

fn exact_sequences() -> Check {
    let mut g = ChaCha8Rng::seed_from_u64(2);
    for case in 0..200 {
        let r = g.random_range(2..=6);
        let k = g.random_range(1..r);
        let mid = common::space(&mut g, r);
        let (sub, quot) = common::exact_triple(&mut g, r, k);
        let out = exact_sequence_measures(&sub, &quot, &mid).map_err(|e| format!("case {case}: {e}"))?;
        if !out.identity_holds {
            return Err(format!("case {case}: identity fails for {mid}"));
        }
    }
    Ok("200 triples, identity exact".into())
}

fn maximal_bases() -> Check {
    let mut g = ChaCha8Rng::seed_from_u64(3);
    for case in 0..200 {
        let r = g.random_range(1..=6);
        let space = common::space(&mut g, r);
        let seed = common::invertible(&mut g, r);
        let mb = space.maximal_base(&seed).map_err(|e| format!("case {case}: {e}"))?;
        if !is_upper_unitriangular(&mb.change) {
            return Err(format!("case {case}: change matrix not unitriangular"));
        }
        let indices: Vec<ExtendedRational> = mb.basis.iter().map(|b| space.index_of(b).unwrap()).collect();
        for (a, stage) in space.jumps().iter().zip(space.flag()) {
            let a = ExtendedRational::Finite(a.clone());
            let count = indices.iter().filter(|l| **l >= a).count();
            if count != stage.len() {
                return Err(format!("case {case}: {count} basis vectors at level {a:?}, stage rank {}", stage.len()));
            }
        }
    }
    Ok("200 cases, unitriangular and maximal".into())
}

fn polygon_functoriality() -> Check {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let mut dominance_pairs = 0;
    for case in 0..1000 {
        let nu = common::measure(&mut g, 7);
        let eps = rat(g.random_range(1..=20), g.random_range(1..=6));
        let a = common::small_rational(&mut g);
        let p = polygon_of(&nu).unwrap();
        if polygon_of(&nu.dilate(&eps).unwrap()).unwrap() != p.scale(&eps).unwrap() {
            return Err(format!("case {case}: scale"));
        }
        if polygon_of(&nu.translate(&a)).unwrap() != p.shear(&a) {
            return Err(format!("case {case}: shear"));
        }
        // half the time a raised copy, otherwise an independent measure
        let other = if case % 2 == 0 { common::raised(&mut g, &nu) } else { common::measure(&mut g, 7) };
        if other.dominates(&nu).unwrap() {
            dominance_pairs += 1;
            let q = polygon_of(&other).unwrap();
            for t in p.knots().iter().chain(q.knots()) {
                if q.eval(t).unwrap() < p.eval(t).unwrap() {
                    return Err(format!("case {case}: dominance not reflected at t={t}"));
                }
            }
        }
    }
    Ok(format!("1000 measures exact, {dominance_pairs} dominance pairs"))
}

fn two_line_limit() -> Check {
    let start = Instant::now();
    let mut details = Vec::new();
    for n in [8u64, 64, 512] {
        let (gap, bound) = two_line_gap(&int(0), &int(1), n, u128::MAX).map_err(|e| e.to_string())?;
        if gap > rat(2, n as i64) || gap > bound {
            return Err(format!("n={n}: gap {gap} > 2/n"));
        }
        details.push(format!("n={n} gap={gap}"));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("{}, {}", details.join(" "), secs(elapsed)))
}

fn partitions(n: u64, parts: usize, max: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![vec![]];
    }
    if parts == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn superadditivity() -> Check {
    let all: Vec<Vec<u64>> = (1..=12).flat_map(|n| partitions(n, 3, n)).collect();
    let f = ErrorFn::constant(int(2));
    let mut g = ChaCha8Rng::seed_from_u64(6);
    let mut rows = 0;
    for d in 1..=3usize {
        for seed in 0..4u64 {
            let base: Vec<Rational> = (0..d).map(|_| rat(g.random_range(-8..=8), 2)).collect();
            let model = MonomialModel::new(base, Perturbation::Seeded { bound: int(1), seed }).unwrap();
            let mut tests = vec![ConcaveTestFn::identity(), ConcaveTestFn::capped(int(1)), ConcaveTestFn::constant(int(3))];
            let lines: Vec<(Rational, Rational)> =
                (0..3).map(|_| (rat(g.random_range(0..=4), 2), rat(g.random_range(-4..=4), 2))).collect();
            let c = lines.iter().map(|l| l.0.clone()).max().unwrap();
            tests.push(ConcaveTestFn::new(lines, c).unwrap());
            for test in &tests {
                let report = graded::superadditivity_check(&model, test, &all, &f, u128::MAX).map_err(|e| e.to_string())?;
                if !report.precondition_verified {
                    return Err(format!("d={d} seed={seed}: {:?}", report.warning));
                }
                if let Some(row) = report.rows.iter().find(|r| !r.holds) {
                    return Err(format!("d={d} seed={seed}: fails at {:?}", row.parts));
                }
                rows += report.rows.len();
            }
        }
    }
    Ok(format!("{} partitions, {rows} inequalities exact", all.len()))
}

fn fekete() -> Check {
    let a = Sequence::from_fn("3n-sqrt(n)", |n| 3.0 * n as f64 - (n as f64).sqrt());
    let b = limits::fekete_bracket(&a, &ErrorFn::zero(), Mode::Super, 100_000).map_err(|e| e.to_string())?;
    if b.bound < 2.996 || (b.estimate - 3.0).abs() > 1e-2 {
        return Err(format!("bound {} estimate {}", b.bound, b.estimate));
    }
    let n_max = 1000u64;
    let c = Sequence::exact("5n+2", |n| Rational::from_integer((5 * n + 2).into()));
    let r = limits::constant_error_limit(&c, &int(2), &int(7), n_max, 100_000).map_err(|e| e.to_string())?;
    let expected = int(5) + rat(2, n_max as i64);
    if r.exact_estimate.as_ref() != Some(&expected) || r.lower_bound < 5.0 - 1e-12 {
        return Err(format!("estimate {:?} bound {}", r.exact_estimate, r.lower_bound));
    }
    Ok(format!("bound {:.6} estimate {:.6}; 5n+2 estimate {expected} bound {}", b.bound, b.estimate, r.lower_bound))
}

fn log_summable() -> Check {
    let f = ErrorFn::bit_length();
    let at10 = limits::log_summable_check(&f, 10).map_err(|e| e.to_string())?;
    if at10.exact_cesaro != Some(rat(66, 1024)) {
        return Err(format!("cesaro at 10 is {:?}", at10.exact_cesaro));
    }
    let mut prev = at10.exact_cesaro.unwrap();
    for alpha in 11..=20 {
        let next = limits::log_summable_check(&f, alpha).unwrap().exact_cesaro.unwrap();
        if next >= prev {
            return Err(format!("cesaro does not decrease at {alpha}"));
        }
        prev = next;
    }
    Ok(format!("cesaro(10) = 66/1024, cesaro(20) = {prev}"))
}

fn negative_control() -> Check {
    let r = graded::convergence_run(&DyadicFloorSequence, 1024, 1e-2).map_err(|e| e.to_string())?;
    let witness = r.dyadic.iter().filter(|row| row.k <= 10).find(|row| row.vs_below >= 0.25);
    match witness {
        Some(w) if !r.converged => Ok(format!("converged=false, k={} gap={}", w.k, w.vs_below)),
        _ => Err(format!("converged={} no witness ≥ 1/4", r.converged)),
    }
}

fn bigraded() -> Check {
    let p = BiSeries::with_unit_numerator(vec![0, 1]);
    let cert = convergence_certificate(&p, &[10, 100, 1000], &Grid::Auto, CdfMethod::ClosedForm, u128::MAX)
        .map_err(|e| e.to_string())?;
    for row in &cert.rows {
        if row.deviation > 1.0 / (row.n as f64 + 1.0) {
            return Err(format!("(0,1) n={}: deviation {}", row.n, row.deviation));
        }
    }
    let q = BiSeries::with_unit_numerator(vec![0, 1, 3]);
    let method = CdfMethod::MonteCarlo { seed: 20_240_601, samples: 1_000_000 };
    let run = || {
        convergence_certificate(&q, &[200], &Grid::Auto, method, u128::MAX)
            .map(|c| serde_json::to_string(&c).expect("serializes"))
    };
    let (first, second) = (run().map_err(|e| e.to_string())?, run().map_err(|e| e.to_string())?);
    if first != second {
        return Err("Monte Carlo report differs between runs".into());
    }
    let again: serde_json::Value = serde_json::from_str(&first).unwrap();
    let dev = again["rows"][0]["deviation"].as_f64().unwrap();
    let devs: Vec<String> = cert.rows.iter().map(|r| format!("{:.2e}", r.deviation)).collect();
    ensure(dev <= 0.02, format!("(0,1) deviations {}; (0,1,3) n=200 deviation {dev:.4}, byte-identical", devs.join(" ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("coupling exactness sweep", coupling_sweep),
        ("exact-sequence measure identity", exact_sequences),
        ("maximal-base criterion", maximal_bases),
        ("polygon functoriality and dominance", polygon_functoriality),
        ("two-line symmetric power limit", two_line_limit),
        ("superadditivity inequality", superadditivity),
        ("Fekete brackets", fekete),
        ("log-summable Cesàro mean", log_summable),
        ("dyadic floor negative control", negative_control),
        ("bigraded slice convergence", bigraded),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
