use quadwalk::model::StepDistribution;
use quadwalk::oracle::{
    hausdorff, monte_carlo, sweep_branch_points, truncated_stationary, truncated_stationary_unchecked,
    TruncatedChain,
};
use quadwalk::{assemble_functional_equation, fixtures, Plane, StepModel, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn m1_truncated_chain_is_accurate() {
    let m = fixtures::m1();
    let chain = TruncatedChain::new(&m, 60).unwrap();
    assert_eq!(chain.state_count(), 3600);
    assert!(chain.max_row_defect() < 1e-14);
    assert!(chain.is_irreducible());

    let big = truncated_stationary(&m, 400, &tol()).unwrap();
    assert!(big.tail_mass < 1e-8);
    assert!(big.min_entry >= -1e-15);
    // Frozen reference values.
    assert!((big.get(0, 0) - 0.138706833822989).abs() < 1e-12);
    assert!((big.get(1, 0) - 0.1450488079).abs() < 1e-10);
    assert!((big.get(1, 1) - 0.1511185832).abs() < 1e-10);
    assert!((big.get(2, 2) - 0.0245404585).abs() < 1e-10);

    let small = truncated_stationary(&m, 200, &tol()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            worst = worst.max((big.get(i, j) - small.get(i, j)).abs());
        }
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn mirror_symmetric_model_has_a_symmetric_table() {
    let sol = truncated_stationary(&fixtures::m1(), 200, &tol()).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            assert!((sol.get(i, j) - sol.get(j, i)).abs() < 1e-12);
        }
    }
}

#[test]
fn table_satisfies_the_functional_equation() {
    let m = fixtures::m2();
    let fe = assemble_functional_equation(&m).unwrap();
    let sol = truncated_stationary(&m, 400, &tol()).unwrap();
    assert!((sol.get(0, 0) - 0.199038712822106).abs() < 1e-12);
    let (r, scale) = fe.residual_for_table(
        &sol.pi,
        quadwalk::C64::new(0.4, 0.2),
        quadwalk::C64::new(-0.3, 0.5),
    );
    assert!(r.norm() < 1e-12 * scale.max(1.0));
}

fn zero_drift() -> StepModel {
    let mut m = fixtures::m1();
    m.interior = StepDistribution::new(vec![(1, 0, 0.25), (-1, 0, 0.25), (0, 1, 0.25), (0, -1, 0.25)]);
    m
}

#[test]
fn null_recurrent_walk_fails_the_tail_check() {
    let e = truncated_stationary(&zero_drift(), 80, &tol()).unwrap_err();
    assert!(e.to_string().contains("increase N"), "{e}");
    let raw = truncated_stationary_unchecked(&zero_drift(), 80, &tol()).unwrap();
    assert!(raw.tail_mass > 1e-3);
}

#[test]
fn reducible_truncation_is_reported() {
    let e = truncated_stationary(&fixtures::simple_walk(), 50, &tol()).unwrap_err();
    assert!(e.to_string().contains("reducible"), "{e}");
}

#[test]
fn monte_carlo_agrees_with_the_linear_solve() {
    let m = fixtures::m1();
    let exact = truncated_stationary(&m, 200, &tol()).unwrap();
    let mc = monte_carlo(&m, 10_000_000, 7).unwrap();
    assert_eq!(mc.recorded(), 9_000_000);
    let diff = (mc.frequency(0, 0) - exact.get(0, 0)).abs();
    assert!(diff < 3.0 * mc.origin_standard_error, "{diff} vs se {}", mc.origin_standard_error);
    assert!(mc.origin_standard_error < 1e-3);
    let total: u64 = mc.counts.values().sum();
    assert_eq!(total, mc.recorded());
}

#[test]
fn monte_carlo_is_reproducible() {
    let m = fixtures::m2();
    let a = monte_carlo(&m, 100_000, 42).unwrap();
    let b = monte_carlo(&m, 100_000, 42).unwrap();
    assert_eq!(a, b);
    let c = monte_carlo(&m, 100_000, 43).unwrap();
    assert_ne!(a.counts, c.counts);
    let empty = monte_carlo(&m, 0, 1).unwrap();
    assert!(empty.is_empty());
    assert_eq!(empty.frequency(0, 0), 0.0);
}

#[test]
fn sweep_matches_the_discriminant_on_m1() {
    let p = assemble_functional_equation(&fixtures::m1()).unwrap().interior_gen;
    for plane in [Plane::X, Plane::Y] {
        let sweep = sweep_branch_points(&p, plane, 25.0, 0.05, &tol());
        assert_eq!(sweep.len(), 4);
        let set = quadwalk::branch::find_branch_points(&p, plane, &tol()).unwrap();
        let ours: Vec<_> = set.points.iter().map(|b| b.location).collect();
        assert!(hausdorff(&ours, &sweep) < 1e-8);
    }
}

#[test]
fn hausdorff_distance() {
    use quadwalk::C64;
    let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let b = [C64::new(0.0, 0.5)];
    assert!((hausdorff(&a, &b) - 1.25f64.sqrt()).abs() < 1e-15);
    assert_eq!(hausdorff(&a, &a), 0.0);
}
