//! Analytic constraint Jacobian against central differences.

use mdi_core::fixtures;
use mdi_core::nlp::assemble;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

fn max_relative_deviation(spec: &mdi_core::Problem, x: &[f64]) -> f64 {
    let inst = assemble(spec);
    let jac = inst.jacobian(x);
    let mut worst: f64 = 0.0;
    for v in 0..x.len() {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[v] += H;
        minus[v] -= H;
        let (cp, cm) = (inst.constraints(&plus), inst.constraints(&minus));
        for r in 0..cp.len() {
            let fd = (cp[r] - cm[r]) / (2.0 * H);
            let exact = jac[(r, v)];
            worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }
    worst
}

#[test]
fn jacobian_matches_central_differences() {
    let specs = [
        ("example1", fixtures::example1()),
        ("example2", fixtures::example2()),
        ("example3", fixtures::example3()),
        ("example4", fixtures::example4()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, spec) in specs {
        let n = 5 * spec.stage_count();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
            worst = worst.max(max_relative_deviation(&spec, &x));
        }
        assert!(worst < 1e-6, "{name}: {worst:e}");
    }
}

#[test]
fn jacobian_at_published_points() {
    for f in fixtures::all() {
        let worst = max_relative_deviation(&f.spec(), &f.matrix().flat());
        assert!(worst < 1e-6, "{}: {worst:e}", f.name);
    }
}
