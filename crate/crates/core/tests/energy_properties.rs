use std::f64::consts::PI;

use circlepack::energy::{container_depth, energy_at, pair_depth};
use circlepack::neighbor::{energy_gradient_full, energy_gradient_local, NeighborIndex};
use circlepack::{bfgs_minimize, random_layout, BfgsSettings, Centers, Layout, SolverRng};
use proptest::prelude::*;

fn layout_strategy(min_n: usize, max_n: usize) -> impl Strategy<Value = (Vec<f64>, f64)> {
    (min_n..=max_n, 1.0..8.0f64).prop_flat_map(|(n, radius)| {
        (prop::collection::vec(-(radius + 1.0)..(radius + 1.0), 2 * n), Just(radius))
    })
}

/// Squared depths over unordered pairs, counted twice, plus container terms.
fn brute_force(xy: &[f64], radius: f64) -> f64 {
    let pts: Vec<[f64; 2]> = xy.chunks(2).map(|c| [c[0], c[1]]).collect();
    let mut pairs = 0.0;
    let mut wall = 0.0;
    for (i, a) in pts.iter().enumerate() {
        let d = ((a[0] * a[0] + a[1] * a[1]).sqrt() + 1.0 - radius).max(0.0);
        wall += d * d;
        for b in &pts[i + 1..] {
            let d = (2.0 - ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).max(0.0);
            pairs += d * d;
        }
    }
    2.0 * pairs + wall
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn energy_is_nonnegative((xy, r) in layout_strategy(2, 50)) {
        prop_assert!(energy_at(&Centers::from_flat(xy).unwrap(), r).total >= 0.0);
    }

    #[test]
    fn pair_depth_is_symmetric(a in prop::array::uniform2(-5.0..5.0f64), b in prop::array::uniform2(-5.0..5.0f64)) {
        prop_assert_eq!(pair_depth(a, b).to_bits(), pair_depth(b, a).to_bits());
    }

    #[test]
    fn rotation_leaves_energy_unchanged((xy, r) in layout_strategy(1, 30), angle in 0.0..(2.0 * PI)) {
        let c = Centers::from_flat(xy).unwrap();
        let a = energy_at(&c, r).total;
        let b = energy_at(&c.rotated(angle), r).total;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn pairs_are_counted_twice((xy, r) in layout_strategy(1, 20)) {
        let lib = energy_at(&Centers::from_flat(xy.clone()).unwrap(), r).total;
        let want = brute_force(&xy, r);
        prop_assert!((lib - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn zero_energy_means_no_violation((xy, r) in layout_strategy(1, 12)) {
        let c = Centers::from_flat(xy).unwrap();
        let e = energy_at(&c, r);
        let violated = c.points().any(|p| container_depth(p, r) > 0.0)
            || c.points().enumerate().any(|(i, p)| c.points().skip(i + 1).any(|q| pair_depth(p, q) > 0.0));
        prop_assert_eq!(e.total == 0.0, !violated);
    }

    #[test]
    fn fresh_index_agrees_with_full((xy, r) in layout_strategy(2, 40)) {
        let layout = Layout::new(Centers::from_flat(xy).unwrap(), r).unwrap();
        let idx = NeighborIndex::for_layout(&layout, 1.0, 1.0);
        let (ef, gf) = energy_gradient_full(&layout);
        let (el, gl) = energy_gradient_local(&layout, &idx);
        prop_assert_eq!(ef.total.to_bits(), el.total.to_bits());
        prop_assert_eq!(gf.as_slice(), gl.as_slice());
    }

    #[test]
    fn larger_thresholds_keep_every_neighbor((xy, r) in layout_strategy(2, 40), d in 0.0..2.0f64, extra in 0.0..2.0f64) {
        let c = Centers::from_flat(xy).unwrap();
        let small = NeighborIndex::build(&c, r, d, d);
        let big = NeighborIndex::build(&c, r, d + extra, d + extra);
        for i in 0..c.n() {
            prop_assert!(small.neighbors(i).iter().all(|j| big.neighbors(i).contains(j)));
            prop_assert!(!small.container_adjacent(i) || big.container_adjacent(i));
        }
    }
}

#[test]
fn constructed_feasible_and_infeasible_layouts() {
    let hex: Vec<[f64; 2]> = std::iter::once([0.0, 0.0])
        .chain((0..6).map(|k| {
            let t = k as f64 * PI / 3.0;
            [2.0 * t.cos(), 2.0 * t.sin()]
        }))
        .collect();
    let at = |r: f64| energy_at(&Centers::from_points(&hex).unwrap(), r).total;
    assert!(at(3.0) < 1e-20);
    assert!(at(3.0 - 1e-3) > 0.0);
    let apart = Centers::from_points(&[[-1.5, 0.0], [1.5, 0.0]]).unwrap();
    assert_eq!(energy_at(&apart, 3.0).total, 0.0);
}

#[test]
fn neighbor_lists_stay_short_on_converged_layouts() {
    let table = circlepack::io::BestKnownTable::vendored();
    for (n, radius) in [(50, table.get(50).unwrap()), (100, table.get(100).unwrap()), (200, 15.4632)] {
        let mut rng = SolverRng::new(n as u64);
        let start = random_layout(n, radius, &mut rng).unwrap();
        let out = bfgs_minimize(start.centers(), radius, &BfgsSettings::default(), &mut rng);
        let idx = NeighborIndex::build(&out.centers, radius, 1.0, 1.0);
        assert!(idx.mean_len() <= 12.0, "n={n}: mean list length {}", idx.mean_len());
    }
}
