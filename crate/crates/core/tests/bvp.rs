use std::f64::consts::PI;
use std::sync::OnceLock;

use quadwalk::bvp::conformal::max_difference;
use quadwalk::bvp::rh::solve_rh;
use quadwalk::bvp::{
    assemble_vector_bvp, conformal_gluing, conformal_map, derive_boundary_condition, identity_residual,
    solve_small_steps, vector_identity_residual, ConformalMethod, SolutionBundle, SolveOptions,
};
use quadwalk::curve::{analyse_plane, BoundaryCurve, Chart};
use quadwalk::oracle::{truncated_stationary, TruncatedSolution};
use quadwalk::{assemble_functional_equation, fixtures, Plane, StepModel, Tolerances, C64};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn m1_bundle() -> &'static SolutionBundle {
    static B: OnceLock<SolutionBundle> = OnceLock::new();
    B.get_or_init(|| {
        let fe = assemble_functional_equation(&fixtures::m1()).unwrap();
        solve_small_steps(&fe, &SolveOptions::default()).unwrap()
    })
}

fn m1_oracle() -> &'static TruncatedSolution {
    static O: OnceLock<TruncatedSolution> = OnceLock::new();
    O.get_or_init(|| truncated_stationary(&fixtures::m1(), 400, &tol()).unwrap())
}

fn y_curve(m: &StepModel) -> BoundaryCurve {
    let fe = assemble_functional_equation(m).unwrap();
    let a = analyse_plane(&fe.interior_gen, Plane::Y, 512, &tol()).unwrap();
    a.unique_curve().unwrap().clone()
}

#[test]
fn condition_identity_holds_by_substitution() {
    for m in [fixtures::m1(), fixtures::m2()] {
        let fe = assemble_functional_equation(&m).unwrap();
        let curve = y_curve(&m);
        let bc = derive_boundary_condition(&fe, &curve).unwrap();
        assert_eq!(bc.index, 0);
        assert!(identity_residual(&fe, &bc) < 1e-9, "{}", m.label());
        assert!(bc.antisymmetry_defect() < 1e-9);
    }
}

#[test]
fn condition_holds_for_the_oracle_series() {
    for m in [fixtures::m1(), fixtures::m2()] {
        let fe = assemble_functional_equation(&m).unwrap();
        let orc = truncated_stationary(&m, 400, &tol()).unwrap();
        let bc = derive_boundary_condition(&fe, &y_curve(&m)).unwrap();
        let a = fe.horizontal[0].anchor.0;
        let c: Vec<f64> = (a..400).map(|i| orc.get(i, 0)).collect();
        // The truncated series only converges inside its ratio radius.
        let radius = 0.95 * c[150] / c[151];
        let (worst, used) = bc.series_residual(&c, &[orc.get(0, 0)], radius);
        assert!(used > 100, "{used}");
        assert!(worst < 1e-5, "{}: {worst:e}", m.label());
    }
}

fn circle(n: usize, a: f64, b: f64) -> Vec<C64> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            C64::new(a * t.cos(), b * t.sin())
        })
        .collect()
}

#[test]
fn conformal_map_of_a_disk_is_a_scaling() {
    let o = C64::new(0.0, 0.0);
    let g = conformal_map(circle(256, 0.7, 0.7), Chart::Affine, o, ConformalMethod::DoubleLayer).unwrap();
    assert!(g.modulus_defect() < 1e-8);
    assert_eq!(g.winding(), 1);
    let q = C64::new(0.21, -0.14);
    assert!((g.eval(q).unwrap() - q / 0.7).norm() < 1e-10);
    assert!(g.eval(C64::new(2.0, 0.0)).is_err());
}

#[test]
fn both_methods_reproduce_a_known_map() {
    // The image of the unit circle under q + q²/5 is mapped back to q,
    // then by the disk automorphism sending the preimage of a to 0.
    let n = 256;
    let q: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
    let z: Vec<C64> = q.iter().map(|q| q + 0.2 * q * q).collect();
    let a = C64::new(0.3, 0.0);
    let qa = (-1.0 + (1.0f64 + 0.8 * a.re).sqrt()) / 0.4;
    for method in [ConformalMethod::DoubleLayer, ConformalMethod::KerzmanStein] {
        let g = conformal_map(z.clone(), Chart::Affine, a, method).unwrap();
        let err = g
            .w
            .iter()
            .zip(&q)
            .map(|(w, q)| (w - (q - qa) / (1.0 - qa * q)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{method:?}: {err:e}");
    }
}

#[test]
fn ellipse_methods_agree() {
    let o = C64::new(0.0, 0.0);
    let a = conformal_map(circle(512, 1.2, 0.8), Chart::Affine, o, ConformalMethod::DoubleLayer).unwrap();
    let b = conformal_map(circle(512, 1.2, 0.8), Chart::Affine, o, ConformalMethod::KerzmanStein).unwrap();
    assert!(a.modulus_defect() < 1e-8 && b.modulus_defect() < 1e-8);
    assert!(max_difference(&a, &b) < 1e-7, "{}", max_difference(&a, &b));
    // Real axis symmetry of the ellipse carries over to the map.
    let w = a.eval(C64::new(0.5, 0.3)).unwrap();
    let w_bar = a.eval(C64::new(0.5, -0.3)).unwrap();
    assert!((w - w_bar.conj()).norm() < 1e-10);
}

#[test]
fn conformal_map_of_the_m1_curve() {
    let c = y_curve(&fixtures::m1());
    let g = conformal_gluing(&c).unwrap();
    assert!(g.modulus_defect() < 1e-8);
    assert!(g.accuracy < 1e-8);
    assert!(g.centre.im.abs() < 1e-12);
    let w = g.eval(C64::new(0.2, 0.1)).unwrap();
    let w_bar = g.eval(C64::new(0.2, -0.1)).unwrap();
    assert!((w - w_bar.conj()).norm() < 1e-10);
}

#[test]
fn m1_solution_matches_the_oracle() {
    let s = m1_bundle();
    let o = m1_oracle();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            worst = worst.max((s.coefficient(i, j).unwrap() - o.get(i, j)).abs());
        }
    }
    assert!(worst < 1e-10, "{worst:e}");
    assert!((s.pi00 - 0.138706833822989).abs() < 1e-12);
    assert!((s.coefficient(2, 1).unwrap() - 0.0523307802).abs() < 1e-10);
    assert!((s.residual.total_mass - 1.0).abs() < 1e-4);
}

#[test]
fn m1_solution_invariants() {
    let s = m1_bundle();
    let r = &s.residual;
    assert!(r.grid_max_relative < 1e-10);
    assert!(r.kernel_max_relative < 1e-10);
    assert!(r.min_coefficient > 0.0);
    assert!(r.max_imag_coefficient < 1e-12);
    assert!(r.window_sum <= 1.0 + 1e-12 && r.window_sum > 0.999);
    for i in 0..=10 {
        for j in 0..=10 {
            let (a, b) = (s.coefficient(i, j).unwrap(), s.coefficient(j, i).unwrap());
            assert!((a - b).abs() < 1e-12, "mirror symmetry at ({i},{j})");
        }
    }
    let (last_n, last_change) = *s.refinement().last().unwrap();
    assert!(last_n >= tol().bvp_min_samples as usize);
    assert!(last_change < tol().bvp_refine);
}

#[test]
fn taylor_coefficients_do_not_depend_on_the_circle() {
    let s = m1_bundle();
    let a = s.taylor_x(0.5, 12).unwrap();
    let b = s.taylor_x(0.8, 12).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).norm() < 1e-8);
    }
    let o = m1_oracle();
    assert!((a[3].re - o.get(4, 0)).abs() < 1e-9);
}

#[test]
fn perturbing_the_solution_breaks_the_equation() {
    let s = m1_bundle();
    assert!(s.perturbed_residual(1e-3).unwrap() >= 1e-3);
}

#[test]
fn evaluators_inside_the_bidisk() {
    let s = m1_bundle();
    let o = m1_oracle();
    // π(x) = Σ_{i≥1} π_{i,0} x^{i−1}: the origin is an isolated scalar.
    let direct: f64 = (1..400).map(|i| o.get(i, 0) * 0.3f64.powi(i as i32 - 1)).sum();
    let pi_x = s.pi_x(C64::new(0.3, 0.0)).unwrap();
    assert!((pi_x.re - direct).abs() < 1e-9, "{pi_x} vs {direct}");
    assert!(s.pi_xy(C64::new(1.2, 0.0), C64::new(0.0, 0.0)).is_err());
}

#[test]
fn m2_has_no_holomorphic_solution_on_its_domain() {
    let fe = assemble_functional_equation(&fixtures::m2()).unwrap();
    let e = solve_small_steps(&fe, &SolveOptions::default()).unwrap_err();
    assert!(!e.is_model_error());
    assert!(e.to_string().contains("branch points inside the domain"), "{e}");

    // With the gate relaxed the defect is visible in the coefficients.
    let mut tol = tol();
    tol.set("fe_residual", 1.0).unwrap();
    let s = solve_small_steps(&fe, &SolveOptions { order: 10, tol }).unwrap();
    let o = truncated_stationary(&fixtures::m2(), 400, &Tolerances::default()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            worst = worst.max((s.coefficient(i, j).unwrap() - o.get(i, j)).abs());
        }
    }
    assert!(worst > 1e-5 && worst < 1e-2, "{worst:e}");
    assert!(s.residual.kernel_max_relative > 1e-4);
}

#[test]
fn simple_walk_is_not_ergodic() {
    let fe = assemble_functional_equation(&fixtures::simple_walk()).unwrap();
    let e = solve_small_steps(&fe, &SolveOptions::default()).unwrap_err();
    assert!(e.to_string().contains("not ergodic"), "{e}");
}

#[test]
fn scalar_solver_rejects_larger_negative_jumps() {
    let fe = assemble_functional_equation(&fixtures::m3()).unwrap();
    let e = solve_small_steps(&fe, &SolveOptions::default()).unwrap_err();
    assert!(matches!(e, quadwalk::Error::Unsupported(_)));
}

#[test]
fn vector_systems() {
    let m1 = assemble_functional_equation(&fixtures::m1()).unwrap();
    let c = y_curve(&fixtures::m1());
    let sys = assemble_vector_bvp(&m1, &[&c]).unwrap();
    assert_eq!(sys.size(), 1);
    assert!(vector_identity_residual(&m1, &[&c], &sys) < 1e-9);

    let fe = assemble_functional_equation(&fixtures::m3()).unwrap();
    let a = analyse_plane(&fe.interior_gen, Plane::X, 512, &tol()).unwrap();
    let curves: Vec<&BoundaryCurve> = a.suitable().filter_map(|c| c.curve.as_ref()).collect();
    let sys = assemble_vector_bvp(&fe, &curves).unwrap();
    assert_eq!(sys.size(), 2);
    assert_eq!(sys.conditions.len(), 2);
    assert!(vector_identity_residual(&fe, &curves, &sys) < 1e-9);
    assert!(assemble_vector_bvp(&fe, &curves[..1]).is_err());
}

#[test]
fn nonzero_index_is_rejected() {
    let n = 64;
    let b: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
    let e = solve_rh(&b, &vec![0.0; n]).unwrap_err();
    assert!(e.to_string().contains("index ≠ 0"));
}

#[test]
fn zero_index_problem_is_solved() {
    // B = 2 + cos θ, c = sin θ: Im(B φ) = c on the circle.
    let n = 128;
    let th: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let b: Vec<C64> = th.iter().map(|t| C64::new(2.0 + t.cos(), 0.3 * t.sin())).collect();
    let c: Vec<f64> = th.iter().map(|t| t.sin()).collect();
    let (p, h) = solve_rh(&b, &c).unwrap();
    for k in 0..n {
        assert!(((b[k] * p[k]).im - c[k]).abs() < 1e-12);
        assert!((b[k] * h[k]).im.abs() < 1e-12);
    }
}
