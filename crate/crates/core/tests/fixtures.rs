//! Published solutions: feasibility, reported lengths and local reconvergence.

use mdi_core::nlp::{assemble, prune_and_refine, solve_local, SolverConfig};
use mdi_core::{fixtures, residuals, SubarcMatrix};

#[test]
fn published_matrices_are_feasible() {
    for f in fixtures::all() {
        let r = residuals(&f.spec(), &f.matrix());
        assert!(r.max_position() < 1e-8, "{}: position {:e}", f.name, r.max_position());
        assert!(r.r_sin.abs() < 1e-8 && r.r_cos.abs() < 1e-8, "{}: heading", f.name);
        assert!((f.matrix().total() - f.total_length).abs() < 1e-10, "{}: length", f.name);
    }
}

#[test]
fn published_lengths_are_the_reported_values() {
    let expected = [
        ("example1a", 3.415578858075),
        ("example1b", 3.859270768865),
        ("example1c", 4.258605346880),
        ("example1d", 4.298084620005),
        ("example1e", 4.678075540969),
        ("example1f", 4.762973480924),
        ("example2a", 6.278034550309),
        ("example2b", 6.488873243877),
        ("example2c", 6.729555454357),
        ("example2d", 6.933659387154),
        ("example3", 11.916212654286),
        ("example4", 7.467562181965),
    ];
    for (name, length) in expected {
        let f = fixtures::by_name(name).unwrap();
        assert!((f.matrix().total() - length).abs() < 1e-10, "{name}");
    }
}

#[test]
fn perturbed_fixtures_reconverge() {
    let config = SolverConfig::default();
    for f in fixtures::all() {
        let spec = f.spec();
        let rows: Vec<[f64; 5]> = f.xi.iter().map(|r| r.map(|v| if v > 0.0 { v + 1e-3 } else { v })).collect();
        let x0 = SubarcMatrix::new(rows).unwrap();
        let coarse = solve_local(&assemble(&spec), &x0, config.coarse_tol).unwrap();
        let (solution, _) = prune_and_refine(&spec, &coarse.xi, &config).unwrap();
        assert_eq!(solution.word, f.word, "{}", f.name);
        assert!((solution.total_length() - f.total_length).abs() < 1e-9, "{}: {}", f.name, solution.total_length());
    }
}

#[test]
fn clean_matrix_refinement_moves_length_below_coarse_tol() {
    let config = SolverConfig::default();
    for f in fixtures::all() {
        let (solution, _) = prune_and_refine(&f.spec(), &f.matrix(), &config).unwrap();
        assert!((solution.total_length() - f.total_length).abs() < config.coarse_tol, "{}", f.name);
    }
}
