use proptest::prelude::*;

use num_rational::Ratio;

use ergowin::block::{Block, Grid};
use ergowin::codec::{build_dictionary, counting_bound_check};
use ergowin::group::{folner_set, BoxWindow, FiniteSubset, GroupElement, GroupId, Side};
use ergowin::marker::{construct_markers, verify_marker_uniqueness};
use ergowin::measure::{empirical_measure_depths, metric_measures, MetricParams};
use ergowin::perturb::dbar_estimate;
use ergowin::source::{rng, SourceSpec};
use ergowin::suite::{check_disjointify, counting_oracle};
use ergowin::tiling::{
    construct_quasitiling, construct_quasitiling_layers, disjointify, is_epsilon_disjoint,
    symbolic_decode, symbolic_encode, TilingParams,
};

fn h3() -> impl Strategy<Value = GroupElement> {
    (-6i64..6, -6i64..6, -20i64..20).prop_map(|(a, b, c)| GroupId::H3.element(&[a, b, c]).unwrap())
}

fn z2_window() -> impl Strategy<Value = (usize, usize, u64)> {
    (52usize..72, 1usize..3, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heisenberg_group_laws(x in h3(), y in h3(), z in h3()) {
        prop_assert_eq!((x * y) * z, x * (y * z));
        prop_assert!((x * x.inv()).is_identity());
        prop_assert!((x.inv() * x).is_identity());
    }

    #[test]
    fn folner_sets_are_symmetric(n in 0usize..4) {
        for g in [GroupId::Z1, GroupId::Z2, GroupId::H3] {
            let f = folner_set(g, n);
            prop_assert_eq!(f.inverse(), f.clone());
            prop_assert!(f.contains(&g.identity()));
        }
    }

    #[test]
    fn disjointify_invariants((side, k, seed) in z2_window(), eta in 0.05f64..0.3) {
        let w = BoxWindow::cube(GroupId::Z2, side).unwrap();
        let q = construct_quasitiling_layers(&w, &TilingParams::new(eta, k, seed).unwrap());
        if let Ok(q) = q {
            prop_assert!(check_disjointify(&q, eta).unwrap().holds());
        }
    }

    #[test]
    fn disjointify_commutes_with_translation((side, k, seed) in z2_window(), dx in -9i64..9, dy in -9i64..9) {
        let w = BoxWindow::cube(GroupId::Z2, side).unwrap();
        let q = construct_quasitiling_layers(&w, &TilingParams::new(0.1, k, seed).unwrap()).unwrap();
        let g = GroupId::Z2.element(&[dx, dy]).unwrap();
        let a = disjointify(&q.translate(g).unwrap(), None).unwrap();
        let b = disjointify(&q, None).unwrap().translate(g).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn symbolic_tiling_round_trip((side, k, seed) in z2_window()) {
        let w = BoxWindow::cube(GroupId::Z2, side).unwrap();
        let t = construct_quasitiling(&w, &TilingParams::new(0.2, k, seed).unwrap()).unwrap();
        prop_assert!(is_epsilon_disjoint(&t, 0.0).holds);
        let b = symbolic_encode(&t).unwrap();
        prop_assert_eq!(symbolic_decode(&b, &t.shapes, &t.window).unwrap(), t);
    }

    #[test]
    fn counting_matches_oracle(
        s_size in 1u64..120,
        d_size in 0u64..20,
        j in 0u64..5,
        s in 2u32..5,
        num in 0u64..30,
        den in 1u64..10,
    ) {
        let delta = Ratio::new(num, den);
        prop_assert_eq!(
            counting_bound_check(s_size, d_size, j, s, delta).holds,
            counting_oracle(s_size, d_size, j, s, delta)
        );
    }

    #[test]
    fn planted_marker_is_unique(seed in any::<u64>(), layers in 1usize..5, s in 2u32..4, i in 0usize..4) {
        let m = construct_markers(layers, 0.05, s, GroupId::Z2).unwrap();
        let i = i % m.count();
        let geo = m.geometry();
        let r = geo.neighbourhood.radius();
        let side = 2 * r as usize + 3;
        let w = BoxWindow::cube(GroupId::Z2, side).unwrap();
        let mut g = SourceSpec::uniform(s).sample_grid(&w, &mut rng(seed)).unwrap();
        let centre = GroupId::Z2.element(&[r + 1, r + 1]).unwrap();
        for x in geo.guard.iter() {
            if g.get(&(*x * centre)) == Some(1) {
                g.set(&(*x * centre), 2).unwrap();
            }
        }
        for (h, v) in m.block(i).iter() {
            g.set(&(h * centre), v).unwrap();
        }
        prop_assert!(verify_marker_uniqueness(&g, &m, centre).unwrap().holds());
    }

    #[test]
    fn dictionaries_are_injective(
        edges in proptest::collection::vec(proptest::collection::vec(0usize..12, 3..6), 1..6),
    ) {
        let shape = FiniteSubset::singleton(GroupId::Z1.identity());
        let bfam: Vec<Vec<u32>> = (0..edges.len() as u32).map(|b| vec![b + 1]).collect();
        let afam: Vec<Vec<u32>> = (0..12u32).map(|a| vec![a + 1]).collect();
        let k = edges.iter().map(|e| {
            let mut e = e.clone();
            e.sort();
            e.dedup();
            e.len()
        }).min().unwrap();
        if let Ok(d) = build_dictionary(&shape, 1, &bfam, &afam, &edges, k.min(bfam.len())) {
            d.check_injective().unwrap();
            prop_assert_eq!(d.len(), bfam.len());
            for b in &bfam {
                prop_assert_eq!(d.inverse()[d.image(b)], b.as_slice());
            }
        }
    }

    #[test]
    fn dbar_is_a_bounded_pseudometric(p in 0.05f64..0.95, q in 0.05f64..0.95, seed in any::<u64>()) {
        let w = BoxWindow::cube(GroupId::Z1, 3000).unwrap();
        let sample = |x: f64, s: u64| {
            let g = SourceSpec::bernoulli(&[x, 1.0 - x]).unwrap().sample_grid(&w, &mut rng(s)).unwrap();
            empirical_measure_depths(&g, [1]).unwrap()
        };
        let (a, b) = (sample(p, seed), sample(q, seed ^ 1));
        let ab = dbar_estimate(&a, &b, 1).unwrap().value;
        let ba = dbar_estimate(&b, &a, 1).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(dbar_estimate(&a, &a, 1).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn metric_is_symmetric(seed in any::<u64>()) {
        let w = BoxWindow::cube(GroupId::Z1, 500).unwrap();
        let m = |s: u64| {
            let g: Grid = SourceSpec::uniform(2).sample_grid(&w, &mut rng(s)).unwrap();
            empirical_measure_depths(&g, 0..=3).unwrap()
        };
        let (a, b) = (m(seed), m(seed.wrapping_add(1)));
        let p = MetricParams::new(3).unwrap();
        let d = metric_measures(&a, &b, p).unwrap();
        prop_assert!((d - metric_measures(&b, &a, p).unwrap()).abs() < 1e-12);
        prop_assert_eq!(metric_measures(&a, &a, p).unwrap(), 0.0);
    }

    #[test]
    fn translation_of_blocks(a in -5i64..5, b in -5i64..5) {
        let d = folner_set(GroupId::Z2, 1);
        let syms: Vec<u32> = (0..d.len() as u32).map(|i| i % 3 + 1).collect();
        let blk = Block::new(d.clone(), syms, 3).unwrap();
        let g = GroupId::Z2.element(&[a, b]).unwrap();
        let moved = blk.translate_right(g);
        prop_assert_eq!(moved.domain(), &d.translate(g, Side::Right));
        for (h, v) in blk.iter() {
            prop_assert_eq!(moved.get(&(h * g)), Some(v));
        }
    }
}
