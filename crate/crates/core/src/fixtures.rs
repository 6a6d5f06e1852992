//! Reference models shipped with the crate.

use num_complex::Complex64 as C64;

use crate::kernel::{BiPoly, Poly};
use crate::model::StepModel;

pub const M1_JSON: &str = include_str!("../../../fixtures/m1.json");
pub const M2_JSON: &str = include_str!("../../../fixtures/m2.json");
pub const M3_JSON: &str = include_str!("../../../fixtures/m3.json");
pub const SIMPLE_WALK_JSON: &str = include_str!("../../../fixtures/simple_walk.json");
pub const CONJUGATE_CUT_JSON: &str = include_str!("../../../fixtures/conjugate_cut.json");

/// Small-step model with a diagonal drift towards the origin.
pub fn m1() -> StepModel {
    StepModel::from_json(M1_JSON).expect("fixture parses")
}

/// Łukasiewicz model: unit west/south jumps, east/north jumps of size two.
pub fn m2() -> StepModel {
    StepModel::from_json(M2_JSON).expect("fixture parses")
}

/// Model with westward jumps of size two.
pub fn m3() -> StepModel {
    StepModel::from_json(M3_JSON).expect("fixture parses")
}

/// Simple symmetric walk (zero drift).
pub fn simple_walk() -> StepModel {
    StepModel::from_json(SIMPLE_WALK_JSON).expect("fixture parses")
}

/// Model with large south jumps whose y-plane has conjugate interior cuts
/// carrying valid curves.
pub fn conjugate_cut() -> StepModel {
    StepModel::from_json(CONJUGATE_CUT_JSON).expect("fixture parses")
}

pub fn by_name(name: &str) -> Option<StepModel> {
    match name.to_ascii_lowercase().as_str() {
        "m1" => Some(m1()),
        "m2" => Some(m2()),
        "m3" => Some(m3()),
        "simple-walk" | "simple_walk" => Some(simple_walk()),
        "conjugate-cut" | "conjugate_cut" => Some(conjugate_cut()),
        _ => None,
    }
}

/// `y² − x(x−1)(x−2)(x−3)(x−4)(x−5)`, a genus-two curve.
pub fn hyperelliptic() -> BiPoly {
    let roots: Vec<C64> = (0..6).map(|k| C64::new(k as f64, 0.0)).collect();
    let f = Poly::from_roots(&roots);
    let mut terms: Vec<(usize, usize, C64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, 0, -c))
        .collect();
    terms.push((0, 2, C64::new(1.0, 0.0)));
    BiPoly::from_terms(terms)
}
