//! One-stage instances: the program's optimum is the Dubins path.

use std::f64::consts::PI;

use mdi_core::nlp::{solve, SolverConfig};
use mdi_core::{dubins_shortest, OrientedPoint, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn solver_matches_dubins_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = SolverConfig::default();
    let mut checked = 0;
    while checked < 500 {
        let start: OrientedPoint<f64> = OrientedPoint::new(0.0, 0.0, rng.gen_range(-PI..PI));
        let end: OrientedPoint<f64> =
            OrientedPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-PI..PI));
        if end.x.hypot(end.y) < 1e-2 {
            continue;
        }
        let a = rng.gen_range(0.5..3.0);
        let spec = ProblemSpec::new(start, end, vec![], a);
        let best = solve(&spec, &config).unwrap().best().total_length();
        let dubins = dubins_shortest(start, end, a).unwrap().best.total;
        assert!((best - dubins).abs() < 1e-6, "{start:?} {end:?} a={a}: {best} vs {dubins}");
        checked += 1;
    }
}

#[test]
fn half_circle_is_a_single_arc() {
    let spec: ProblemSpec<f64> =
        ProblemSpec::new(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(0.0, 2.0, PI), vec![], 1.0);
    let outcome = solve(&spec, &SolverConfig::default()).unwrap();
    assert!((outcome.best().total_length() - PI).abs() < 1e-9);
    assert_eq!(outcome.best().word, "L");
}

#[test]
fn straight_line() {
    let spec: ProblemSpec<f64> =
        ProblemSpec::new(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(3.0, 0.0, 0.0), vec![], 1.0);
    let outcome = solve(&spec, &SolverConfig::default()).unwrap();
    assert!((outcome.best().total_length() - 3.0).abs() < 1e-12);
    assert_eq!(outcome.best().word, "S");
}
