use circlepack::io::{verify_layout, LayoutDocument, Violation};
use circlepack::svg::{render_svg, SvgOptions};
use circlepack::{global_search, is_feasible, Layout, SearchBudget, SolverRng};
use circlepack::search::SearchSettings;
use proptest::prelude::*;

proptest! {
    #[test]
    fn documents_round_trip(points in prop::collection::vec(prop::array::uniform2(-50.0..50.0f64), 1..30),
                            radius in 1.0..100.0f64, seed in proptest::option::of(any::<u64>())) {
        let layout = Layout::from_points(&points, radius).unwrap();
        let doc = LayoutDocument::from_layout(&layout, seed, "prop");
        let back = LayoutDocument::parse(&doc.to_text()).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_layout().unwrap(), layout);
    }
}

#[test]
fn verify_agrees_with_feasibility_on_solver_output() {
    let settings = SearchSettings::default();
    let table = circlepack::io::BestKnownTable::vendored();
    for k in 0..100 {
        let n = 3 + k % 12;
        let radius = table.get(n).unwrap() * 1.02;
        let mut rng = SolverRng::new(k as u64);
        let r = global_search(n, radius, SearchBudget::restarts(5), &settings, &mut rng);
        let doc = LayoutDocument::from_layout(&r.layout, Some(k as u64), "test");
        let verdict = verify_layout(&doc, 1e-9).unwrap();
        assert_eq!(verdict.pass(), is_feasible(&r.layout), "k={k}");
        assert!(verdict.pass(), "k={k}");
    }
}

#[test]
fn nudged_coordinate_gives_one_pair_violation() {
    let settings = SearchSettings::default();
    let r = global_search(2, 2.0, SearchBudget::restarts(5), &settings, &mut SolverRng::new(1));
    assert!(r.is_feasible());
    let mut doc = LayoutDocument::from_layout(&r.layout, Some(1), "test");
    assert!(verify_layout(&doc, 1e-9).unwrap().pass());
    // Move circle 0 by 0.01 toward circle 1, which is also toward the origin.
    let (dx, dy) = (doc.centers[1][0] - doc.centers[0][0], doc.centers[1][1] - doc.centers[0][1]);
    let len = dx.hypot(dy);
    doc.centers[0][0] += 0.01 * dx / len;
    doc.centers[0][1] += 0.01 * dy / len;
    let verdict = verify_layout(&doc, 1e-9).unwrap();
    let failing: Vec<&Violation> = verdict.failing().collect();
    assert!(!verdict.pass());
    assert_eq!(failing.len(), 1, "{failing:?}");
    assert!(matches!(failing[0], Violation::Pair { a: 0, b: 1, .. }));
    assert!((failing[0].depth() - 0.01).abs() < 1e-9);
}

#[test]
fn svg_is_byte_identical_across_runs() {
    let r = global_search(12, 4.1, SearchBudget::restarts(5), &SearchSettings::default(), &mut SolverRng::new(4));
    let opts = SvgOptions::default();
    let a = render_svg(&r.layout, &opts);
    let b = render_svg(&r.layout.clone(), &opts);
    assert_eq!(a.as_bytes(), b.as_bytes());
    assert_eq!(a.matches("<circle ").count(), 13);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    let layout = Layout::from_points(&[[-1.0, 0.0], [1.0, 0.0]], 2.0).unwrap();
    let written = circlepack::io::write_layout(&layout, Some(5), "test", &path).unwrap();
    assert_eq!(LayoutDocument::read_from(&path).unwrap(), written);
    assert!(LayoutDocument::read_from(&dir.path().join("missing")).is_err());
}
