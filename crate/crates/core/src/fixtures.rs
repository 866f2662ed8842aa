//! Published instances and their reported solutions, used as regression data.

use std::f64::consts::PI;

use crate::model::{OrientedPoint, ProblemSpec, SubarcMatrix, Waypoint};

/// A published solution: its problem, subarc matrix, word and reported length.
#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub word: &'static str,
    pub total_length: f64,
    pub xi: &'static [[f64; 5]],
    pub problem: fn() -> ProblemSpec<f64>,
}

impl Fixture {
    pub fn spec(&self) -> ProblemSpec<f64> {
        (self.problem)()
    }

    pub fn matrix(&self) -> SubarcMatrix<f64> {
        SubarcMatrix::new(self.xi.to_vec()).expect("published matrices are nonnegative")
    }
}

fn points(p: &[(f64, f64)]) -> Vec<Waypoint<f64>> {
    p.iter().map(|(x, y)| Waypoint::new(*x, *y)).collect()
}

/// Four nodes, `a = 3`.
pub fn example1() -> ProblemSpec<f64> {
    ProblemSpec::new(
        OrientedPoint::new(0.0, 0.0, -PI / 3.0),
        OrientedPoint::new(1.0, 1.0, -PI / 6.0),
        points(&[(-0.1, 0.3), (0.2, 0.8)]),
        3.0,
    )
}

/// Six nodes, `a = 3`.
pub fn example2() -> ProblemSpec<f64> {
    ProblemSpec::new(
        OrientedPoint::new(0.0, 0.0, -PI / 3.0),
        OrientedPoint::new(0.5, 0.0, -PI / 6.0),
        points(&[(-0.1, 0.3), (0.2, 0.8), (1.0, 1.0), (0.5, 0.5)]),
        3.0,
    )
}

/// Twenty nodes, `a = 5`.
pub fn example3() -> ProblemSpec<f64> {
    ProblemSpec::new(
        OrientedPoint::new(0.5, 1.2, 5.0 * PI / 6.0),
        OrientedPoint::new(2.5, 0.6, 0.0),
        points(&[
            (0.0, 0.8),
            (0.0, 0.4),
            (0.1, 0.0),
            (0.4, 0.2),
            (0.5, 0.5),
            (0.6, 1.0),
            (1.0, 0.8),
            (1.0, 0.0),
            (1.4, 0.2),
            (1.2, 1.0),
            (1.5, 1.2),
            (2.0, 1.5),
            (1.5, 0.8),
            (1.5, 0.0),
            (1.7, 0.6),
            (1.9, 1.0),
            (2.0, 0.5),
            (1.9, 0.0),
        ]),
        5.0,
    )
}

/// Twelve nodes on a lawnmower pattern, `a = 3`.
pub fn example4() -> ProblemSpec<f64> {
    ProblemSpec::new(
        OrientedPoint::new(0.5, 1.2, 5.0 * PI / 6.0),
        OrientedPoint::new(0.0, -0.5, 0.0),
        points(&[
            (0.0, 0.5),
            (0.5, 0.5),
            (1.0, 0.5),
            (1.5, 0.5),
            (2.0, 0.5),
            (2.0, 0.0),
            (1.5, 0.0),
            (1.0, 0.0),
            (0.5, 0.0),
            (0.0, 0.0),
        ]),
        3.0,
    )
}

/// Every published solution.
pub fn all() -> Vec<Fixture> {
    vec![
        Fixture { name: "example1a", word: "RSL|LSR|RSR", total_length: 3.415578858075, xi: EXAMPLE1A_XI, problem: example1 },
        Fixture { name: "example1b", word: "RLR|RL|LSR", total_length: 3.859270768865, xi: EXAMPLE1B_XI, problem: example1 },
        Fixture { name: "example1c", word: "RLR|RL|LR", total_length: 4.258605346880, xi: EXAMPLE1C_XI, problem: example1 },
        Fixture { name: "example1d", word: "LR|RSL|LSR", total_length: 4.298084620005, xi: EXAMPLE1D_XI, problem: example1 },
        Fixture { name: "example1e", word: "LSL|LR|RSR", total_length: 4.678075540969, xi: EXAMPLE1E_XI, problem: example1 },
        Fixture { name: "example1f", word: "LRL|LR|RSR", total_length: 4.762973480924, xi: EXAMPLE1F_XI, problem: example1 },
        Fixture {
            name: "example2a",
            word: "RSL|LSR|RSR|RSR|RLR",
            total_length: 6.278034550309,
            xi: EXAMPLE2A_XI,
            problem: example2,
        },
        Fixture {
            name: "example2b",
            word: "RSL|LSR|RSR|RLR|LR",
            total_length: 6.488873243877,
            xi: EXAMPLE2B_XI,
            problem: example2,
        },
        Fixture {
            name: "example2c",
            word: "RLR|RL|LSR|RSR|RLR",
            total_length: 6.729555454357,
            xi: EXAMPLE2C_XI,
            problem: example2,
        },
        Fixture {
            name: "example2d",
            word: "RLR|RL|LSR|RSR|LR",
            total_length: 6.933659387154,
            xi: EXAMPLE2D_XI,
            problem: example2,
        },
        Fixture {
            name: "example3",
            word: "LSL|LSR|RSL|LSL|LSL|LSR|RSR|RSL|LSL|LSR|RSL|LSR|RSL|LSL|LSL|LSR|RSR|RSL|LSR",
            total_length: 11.916212654286,
            xi: EXAMPLE3_XI,
            problem: example3,
        },
        Fixture {
            name: "example4",
            word: "LSL|LR|RSL|LSL|LSR|R|RSL|LSR|RSL|LSR|RLR",
            total_length: 7.467562181965,
            xi: EXAMPLE4_XI,
            problem: example4,
        },
    ]
}

/// Looks a fixture up by name, e.g. `example1a`.
pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}

const EXAMPLE1A_XI: &[[f64; 5]] = &[
    [0.0, 1.609029653347, 0.245373087450, 0.115596919495, 0.0],
    [0.115596919495, 0.0, 0.348770381640, 0.0, 0.122237275595],
    [0.0, 0.122237275595, 0.439185533812, 0.0, 0.297551811646],
];

const EXAMPLE1B_XI: &[[f64; 5]] = &[
    [0.0, 0.180338361465, 0.0, 1.671087869740, 0.449161039386],
    [0.0, 0.660606349458, 0.0, 0.040959265073, 0.0],
    [0.067722881739, 0.0, 0.474263660961, 0.0, 0.315131341041],
];

const EXAMPLE1C_XI: &[[f64; 5]] = &[
    [0.0, 0.014658731348, 0.0, 1.660436142087, 0.198370374835],
    [0.0, 1.348732850403, 0.0, 0.144567480729, 0.0],
    [0.411565513223, 0.480274254254, 0.0, 0.0, 0.0],
];

const EXAMPLE1D_XI: &[[f64; 5]] = &[
    [1.672596123844, 0.171799627570, 0.0, 0.0, 0.0],
    [0.0, 1.364187065025, 0.033930811053, 0.191279146930, 0.0],
    [0.191279146930, 0.0, 0.328377898745, 0.0, 0.344634799909],
];

const EXAMPLE1E_XI: &[[f64; 5]] = &[
    [1.131511003931, 0.0, 0.645570959740, 1.376095696461, 0.0],
    [0.475478947958, 0.161367871190, 0.0, 0.0, 0.0],
    [0.0, 0.326240580072, 0.335261312120, 0.0, 0.226549169496],
];

const EXAMPLE1F_XI: &[[f64; 5]] = &[
    [1.387975996662, 0.040303570540, 0.0, 0.442471697617, 0.0],
    [1.532395666196, 0.398410096474, 0.0, 0.0, 0.0],
    [0.0, 0.530782705179, 0.306214787566, 0.0, 0.124418960689],
];

const EXAMPLE2A_XI: &[[f64; 5]] = &[
    [0.0, 1.607146208885, 0.253152303916, 0.109461129478, 0.0],
    [0.109461129478, 0.0, 0.411866814272, 0.0, 0.063620967753],
    [0.0, 0.063620967753, 0.349008605883, 0.0, 0.551024831028],
    [0.0, 0.551024831028, 0.055775140041, 0.0, 0.362796821592],
    [0.0, 0.105078700947, 0.0, 1.425262495545, 0.259733602711],
];

const EXAMPLE2B_XI: &[[f64; 5]] = &[
    [0.0, 1.608655551819, 0.246889937788, 0.114406041268, 0.0],
    [0.114406041268, 0.0, 0.358542879421, 0.0, 0.113274189452],
    [0.0, 0.113274189452, 0.416609605051, 0.0, 0.341389286409],
    [0.0, 0.364397523143, 0.0, 0.045089419939, 0.908572347990],
    [1.499582819736, 0.243783411139, 0.0, 0.0, 0.0],
];

const EXAMPLE2C_XI: &[[f64; 5]] = &[
    [0.0, 0.185101731608, 0.0, 1.673440788217, 0.456049670642],
    [0.0, 0.622953488994, 0.0, 0.066834089291, 0.0],
    [0.121935127737, 0.0, 0.272852512220, 0.0, 0.565210311199],
    [0.0, 0.565210311199, 0.054452710847, 0.0, 0.357505055062],
    [0.0, 0.102754639709, 0.0, 1.426181573000, 0.259073444632],
];

const EXAMPLE2D_XI: &[[f64; 5]] = &[
    [0.0, 0.180848776168, 0.0, 1.671336709782, 0.449898895805],
    [0.0, 0.655840953047, 0.0, 0.044391479634, 0.0],
    [0.074776055868, 0.0, 0.439394036526, 0.0, 0.354344875528],
    [0.0, 0.354344875528, 0.088624145788, 0.0, 0.876492352605],
    [1.499582819736, 0.243783411139, 0.0, 0.0, 0.0],
];

const EXAMPLE3_XI: &[[f64; 5]] = &[
    [0.292683660485, 0.0, 0.354227249883, 0.066067208642, 0.0],
    [0.066067208642, 0.0, 0.314358037636, 0.0, 0.020629993182],
    [0.0, 0.020629993182, 0.158248660263, 0.281673366237, 0.0],
    [0.281673366237, 0.0, 0.105094394904, 0.017147975416, 0.0],
    [0.017147975416, 0.0, 0.262701065614, 0.036592830635, 0.0],
    [0.036592830635, 0.0, 0.278860332397, 0.0, 0.225886597060],
    [0.0, 0.225886597060, 0.151864534206, 0.0, 0.112422725874],
    [0.0, 0.112422725874, 0.488292307990, 0.245323671189, 0.0],
    [0.245323671189, 0.0, 0.131702140115, 0.125114048917, 0.0],
    [0.125114048917, 0.0, 0.565103190136, 0.0, 0.151217907866],
    [0.0, 0.151217907866, 0.164572410900, 0.054093591072, 0.0],
    [0.054093591072, 0.0, 0.281891534948, 0.0, 0.342811045871],
    [0.0, 0.342811045871, 0.568086259614, 0.061595474597, 0.0],
    [0.061595474597, 0.0, 0.510111126314, 0.348337479570, 0.0],
    [0.348337479569, 0.0, 0.386735718514, 0.003761723139, 0.0],
    [0.003761723139, 0.0, 0.178946350711, 0.0, 0.351310541702],
    [0.0, 0.351310541702, 0.216552941908, 0.0, 0.040835697925],
    [0.0, 0.040835697925, 0.212956892491, 0.349098604305, 0.0],
    [0.349098604305, 0.0, 0.378354575733, 0.0, 0.247028303126],
];

const EXAMPLE4_XI: &[[f64; 5]] = &[
    [0.517980939547, 0.0, 0.199236689725, 0.448783310430, 0.0],
    [0.444952611925, 0.098280826419, 0.0, 0.0, 0.0],
    [0.0, 0.102046764427, 0.396637972184, 0.002661244193, 0.0],
    [0.002661244193, 0.0, 0.426792526518, 0.071025820394, 0.0],
    [0.071025820394, 0.0, 0.085837912032, 0.0, 0.377944339773],
    [0.0, 0.565374719321, 0.0, 0.0, 0.0],
    [0.0, 0.377949440124, 0.085821641969, 0.071037130565, 0.0],
    [0.071037130565, 0.0, 0.426468907257, 0.0, 0.002973423917],
    [0.0, 0.002973423917, 0.467025768202, 0.030039625776, 0.0],
    [0.030039625776, 0.0, 0.237647474938, 0.0, 0.246307287638],
    [0.0, 0.052184608613, 0.0, 1.420667379008, 0.134146572224],
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::word_of;

    #[test]
    fn words_match_labels() {
        for f in all() {
            assert_eq!(word_of(&f.matrix(), 1e-9), f.word, "{}", f.name);
            assert_eq!(f.matrix().stages(), f.spec().stage_count(), "{}", f.name);
        }
    }
}
