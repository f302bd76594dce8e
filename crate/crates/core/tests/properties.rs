mod common;

use hnpoly::filtration::{exact_sequence_measures, is_upper_unitriangular};
use hnpoly::linalg;
use hnpoly::measure::Tail;
use hnpoly::polygon::polygon_of;
use hnpoly::rational::rat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn exact_sequence_ranks_add(seed: u64, r in 2usize..=5, k_frac in 0.0f64..1.0) {
        let mut g = rng(seed);
        let k = 1 + ((r - 1) as f64 * k_frac) as usize;
        let k = k.min(r - 1);
        let mid = common::space(&mut g, r);
        let (sub, quot) = common::exact_triple(&mut g, r, k);
        let out = exact_sequence_measures(&sub, &quot, &mid).unwrap();
        prop_assert!(out.identity_holds);
        // rank V_t = rank V'_t + rank V''_t at every jump of V
        let sub_space = mid.inverse_image(&sub).unwrap();
        let quot_space = mid.strong_direct_image(&quot).unwrap();
        for t in mid.jumps() {
            prop_assert_eq!(mid.rank_at(t), sub_space.rank_at(t) + quot_space.rank_at(t));
        }
    }

    #[test]
    fn maximal_base_from_any_seed(seed: u64, r in 1usize..=5) {
        let mut g = rng(seed);
        let space = common::space(&mut g, r);
        let start = common::invertible(&mut g, r);
        let mb = space.maximal_base(&start).unwrap();
        prop_assert!(is_upper_unitriangular(&mb.change));
        prop_assert_eq!(linalg::mat_mul(&mb.change, &start, r), mb.basis.clone());
        // maximal bases are exactly those whose atoms reproduce ν_V
        prop_assert_eq!(space.basis_measure(&mb.basis).unwrap(), space.associated_measure());
        // and every other basis is dominated
        prop_assert!(space.associated_measure().dominates(&space.basis_measure(&start).unwrap()).unwrap());
    }

    #[test]
    fn dominance_is_a_partial_order(seed: u64) {
        let mut g = rng(seed);
        let a = common::measure(&mut g, 5);
        let b = common::raised(&mut g, &a);
        let c = common::raised(&mut g, &b);
        prop_assert!(a.dominates(&a).unwrap());
        prop_assert!(b.dominates(&a).unwrap());
        prop_assert!(c.dominates(&a).unwrap());
        if a.dominates(&b).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        for x in a.positions().chain(b.positions()) {
            prop_assert!(b.tail_mass(x, Tail::Closed) >= a.tail_mass(x, Tail::Closed));
        }
    }

    #[test]
    fn polygon_is_functorial(seed: u64, p in 1i64..20, q in 1i64..6, s in -10i64..10) {
        let mut g = rng(seed);
        let nu = common::measure(&mut g, 6);
        let (eps, a) = (rat(p, q), rat(s, 3));
        let base = polygon_of(&nu).unwrap();
        prop_assert_eq!(polygon_of(&nu.dilate(&eps).unwrap()).unwrap(), base.scale(&eps).unwrap());
        prop_assert_eq!(polygon_of(&nu.translate(&a)).unwrap(), base.shear(&a));
        prop_assert_eq!(base.to_measure(), nu);
    }

    #[test]
    fn dominance_orders_polygons(seed: u64) {
        let mut g = rng(seed);
        let lower = common::measure(&mut g, 6);
        let upper = common::raised(&mut g, &lower);
        let (pl, pu) = (polygon_of(&lower).unwrap(), polygon_of(&upper).unwrap());
        for t in pl.knots().iter().chain(pu.knots()) {
            prop_assert!(pu.eval(t).unwrap() >= pl.eval(t).unwrap());
        }
    }
}
