use circlepack::bfgs::{bfgs_minimize_observed, GRADIENT_TOLERANCE};
use circlepack::neighbor::energy_gradient_full;
use circlepack::{random_layout, BfgsSettings, Mode, OptimizeStatus, SolverRng};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (usize, f64, u64)> {
    (2usize..40, 0.7..1.3f64, any::<u64>()).prop_map(|(n, scale, seed)| (n, 1.0 + scale * (n as f64).sqrt(), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn energy_never_increases((n, r, seed) in instance(), full in any::<bool>()) {
        let mut rng = SolverRng::new(seed);
        let start = random_layout(n, r, &mut rng).unwrap();
        let mode = if full { Mode::Full } else { Mode::Local };
        let settings = BfgsSettings::default().with_mode(mode).with_max_iterations(400);
        let mut bad = None;
        let out = bfgs_minimize_observed(start.centers(), r, &settings, &mut rng, |rec| {
            if rec.energy_after > rec.energy_before && bad.is_none() {
                bad = Some((rec.iteration, rec.energy_before, rec.energy_after));
            }
        });
        prop_assert!(bad.is_none(), "{:?}", bad);
        prop_assert!(out.iterations <= 400);
    }

    #[test]
    fn applied_updates_satisfy_the_secant_equation((n, r, seed) in instance()) {
        let mut rng = SolverRng::new(seed);
        let start = random_layout(n, r, &mut rng).unwrap();
        let settings = BfgsSettings::full().with_max_iterations(60);
        let mut worst: f64 = 0.0;
        bfgs_minimize_observed(start.centers(), r, &settings, &mut rng, |rec| {
            let step_norm = rec.step.iter().map(|v| v * v).sum::<f64>().sqrt();
            // Near a minimum a step can shrink to a few ulps, where `y` is pure rounding.
            if rec.update_applied && step_norm > 1e-10 {
                let mut hy = vec![0.0; rec.step.len()];
                rec.inverse_hessian.apply(rec.gradient_change, &mut hy);
                let num: f64 = hy.iter().zip(rec.step).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let den: f64 = rec.step.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst = worst.max(num / den);
            }
        });
        prop_assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn infinite_thresholds_match_full_for_any_period((n, r, seed) in instance(), l in 1usize..30) {
        let start = random_layout(n, r, &mut SolverRng::new(seed)).unwrap();
        let full = BfgsSettings::full().with_max_iterations(80);
        let local = BfgsSettings { mode: Mode::Local, refresh_period: l, d1: f64::INFINITY, d2: f64::INFINITY, ..full };
        let trace = |s: &BfgsSettings| {
            let mut v = Vec::new();
            let out = bfgs_minimize_observed(start.centers(), r, s, &mut SolverRng::new(1), |rec| v.push(rec.coords.to_vec()));
            v.push(out.centers.into_vec());
            v
        };
        prop_assert_eq!(trace(&full), trace(&local));
    }

    #[test]
    fn default_thresholds_match_full_from_random_starts((n, r, seed) in instance()) {
        let start = random_layout(n, r, &mut SolverRng::new(seed)).unwrap();
        let full = BfgsSettings::full().with_max_iterations(300);
        let local = full.with_mode(Mode::Local);
        let run = |s: &BfgsSettings| {
            let out = circlepack::bfgs_minimize(start.centers(), r, s, &mut SolverRng::new(1));
            (out.centers.into_vec(), out.iterations, out.status)
        };
        prop_assert_eq!(run(&full), run(&local));
    }
}

#[test]
fn iteration_cap_is_honored() {
    let mut rng = SolverRng::new(3);
    let start = random_layout(30, 4.0, &mut rng).unwrap();
    for cap in [0, 1, 5, 17] {
        let settings = BfgsSettings::default().with_max_iterations(cap);
        let out = circlepack::bfgs_minimize(start.centers(), 4.0, &settings, &mut rng);
        assert!(out.iterations <= cap);
        if cap == 0 {
            assert_eq!(out.status, OptimizeStatus::IterationLimit);
        }
    }
}

#[test]
fn gradient_convergence_means_small_full_gradient() {
    let mut seen = 0;
    for seed in 0..30 {
        let mut rng = SolverRng::new(seed);
        let n = 20;
        let start = random_layout(n, 4.8, &mut rng).unwrap();
        let out = circlepack::bfgs_minimize(start.centers(), 4.8, &BfgsSettings::full(), &mut rng);
        if out.status == OptimizeStatus::GradientConverged {
            seen += 1;
            let layout = circlepack::Layout::new(out.centers, 4.8).unwrap();
            let (_, g) = energy_gradient_full(&layout);
            assert!(g.norm() < GRADIENT_TOLERANCE, "{}", g.norm());
        }
    }
    assert!(seen > 0, "no run stopped on the gradient test");
}

#[test]
fn rounding_floor_minimum_stops_early() {
    let n = 30;
    let r = circlepack::io::BestKnownTable::vendored().get(n).unwrap();
    let mut rng = SolverRng::new(3);
    let start = random_layout(n, r, &mut rng).unwrap();
    let out = circlepack::bfgs_minimize(start.centers(), r, &BfgsSettings::full(), &mut rng);
    assert_eq!(out.status, OptimizeStatus::Stalled);
    assert!(out.iterations < 1000, "{}", out.iterations);
    assert!(out.energy.total > 1e-10);
}
