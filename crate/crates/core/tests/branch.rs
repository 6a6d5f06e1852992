use proptest::prelude::*;
use quadwalk::branch::{
    classify_branch_points, find_branch_points, genus, pair_cuts, zeros_inside_unit_circle,
    BranchPoint, CutKind, DiskPosition,
};
use quadwalk::kernel::{branch_count_bound, discriminant, BiPoly};
use quadwalk::model::{random_ergodic_small_step_model, random_model, random_small_step_model};
use quadwalk::{assemble_functional_equation, fixtures, oracle, Plane, StepModel, Tolerances, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kernel(m: &StepModel) -> BiPoly {
    assemble_functional_equation(m).unwrap().interior_gen
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn point(z: C64, position: DiskPosition) -> BranchPoint {
    BranchPoint {
        location: z,
        plane: Plane::X,
        multiplicity: 1,
        position,
        fiber_collision: None,
    }
}

#[test]
fn m1_has_four_real_branch_points_per_plane() {
    let p = kernel(&fixtures::m1());
    for plane in [Plane::X, Plane::Y] {
        let set = find_branch_points(&p, plane, &tol()).unwrap();
        assert_eq!(set.finite_count(), 4);
        assert!(set.finite_count() <= set.bound);
        assert!(set.points.iter().all(|b| b.location.im.abs() < 1e-8));
        assert_eq!(set.interior_count(), 2);
    }
}

#[test]
fn m1_frozen_interior_endpoints() {
    let p = kernel(&fixtures::m1());
    let set = find_branch_points(&p, Plane::Y, &tol()).unwrap();
    let mut inner: Vec<f64> = set
        .points
        .iter()
        .filter(|b| b.position == DiskPosition::Inside)
        .map(|b| b.location.re)
        .collect();
    inner.sort_by(f64::total_cmp);
    assert!((inner[0] - 0.17771210917484578).abs() < 1e-12);
    assert!((inner[1] - 0.7487563166856382).abs() < 1e-12);
}

#[test]
fn m2_respects_the_bound_and_matches_the_sweep() {
    let p = kernel(&fixtures::m2());
    for plane in [Plane::X, Plane::Y] {
        let set = find_branch_points(&p, plane, &tol()).unwrap();
        assert!(set.finite_count() <= 12, "{}", set.finite_count());
        assert_eq!(set.bound, 12);
        let ours: Vec<C64> = set.points.iter().map(|b| b.location).collect();
        let sweep = oracle::sweep_branch_points(&p, plane, 25.0, 0.05, &tol());
        assert_eq!(sweep.len(), ours.len());
        assert!(oracle::hausdorff(&ours, &sweep) < 1e-6);
    }
}

#[test]
fn m3_has_four_interior_x_points() {
    let p = kernel(&fixtures::m3());
    let set = find_branch_points(&p, Plane::X, &tol()).unwrap();
    assert_eq!(set.interior_count(), 4);
    let class = classify_branch_points(&set.points).unwrap();
    let cuts = pair_cuts(&class.interior, &tol()).unwrap();
    assert_eq!(cuts.len(), 2);
    assert!(cuts.iter().all(|c| c.kind == CutKind::Real));
}

#[test]
fn classification_partitions_by_modulus() {
    let pts = [
        point(C64::new(0.5, 0.0), DiskPosition::Inside),
        point(C64::new(2.0, 0.0), DiskPosition::Outside),
    ];
    let c = classify_branch_points(&pts).unwrap();
    assert_eq!(c.interior.len(), 1);
    assert_eq!(c.exterior.len(), 1);
    let on = [point(C64::new(0.0, 1.0), DiskPosition::OnCircle)];
    let e = classify_branch_points(&on).unwrap_err();
    assert!(e.to_string().contains("branch point on unit circle"));
    assert!(!e.is_model_error());
}

#[test]
fn cut_pairing() {
    let real = [
        point(C64::new(0.7, 0.0), DiskPosition::Inside),
        point(C64::new(0.2, 1e-13), DiskPosition::Inside),
    ];
    let cuts = pair_cuts(&real, &tol()).unwrap();
    assert_eq!(cuts.len(), 1);
    assert_eq!(cuts[0].kind, CutKind::Real);
    assert_eq!(cuts[0].start.location, C64::new(0.2, 0.0));

    let conj = [
        point(C64::new(0.1, 0.3), DiskPosition::Inside),
        point(C64::new(0.1, -0.3), DiskPosition::Inside),
    ];
    let cuts = pair_cuts(&conj, &tol()).unwrap();
    assert_eq!(cuts[0].kind, CutKind::Conjugate);

    let odd = [point(C64::new(0.3, 0.0), DiskPosition::Inside)];
    assert!(pair_cuts(&odd, &tol()).is_err());
    let lonely = [
        point(C64::new(0.1, 0.3), DiskPosition::Inside),
        point(C64::new(-0.4, -0.2), DiskPosition::Inside),
    ];
    assert!(pair_cuts(&lonely, &tol()).is_err());
}

#[test]
fn genus_of_the_fixtures() {
    assert_eq!(genus(&kernel(&fixtures::m1()), &tol()).unwrap().genus, 1);
    assert_eq!(genus(&fixtures::hyperelliptic(), &tol()).unwrap().genus, 2);
    let g2 = genus(&kernel(&fixtures::m2()), &tol()).unwrap();
    assert!(g2.genus > 1);
    assert_eq!(g2.over_x.genus, g2.over_y.genus);
}

#[test]
fn reducible_kernel_is_rejected() {
    // (y − x)(y + x) splits into two lines.
    let p = BiPoly::from_terms([(0, 2, C64::new(1.0, 0.0)), (2, 0, C64::new(-1.0, 0.0))]);
    assert!(genus(&p, &tol()).is_err());
}

#[test]
fn sweep_finds_the_ramification_of_a_square_root() {
    let p = BiPoly::from_terms([(0, 2, C64::new(1.0, 0.0)), (1, 0, C64::new(-1.0, 0.0))]);
    let pts = oracle::sweep_branch_points(&p, Plane::X, 2.0, 0.05, &tol());
    assert_eq!(pts.len(), 1);
    assert!(pts[0].norm() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn branch_counts_respect_the_lemma(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kernel(&random_model(&mut rng, 3));
        for plane in [Plane::X, Plane::Y] {
            let (i, j) = (p.x_degree(), p.y_degree());
            let lemma = match plane {
                Plane::Y => 2 * j * (i - 1),
                Plane::X => 2 * i * (j - 1),
            };
            prop_assert_eq!(branch_count_bound(&p, plane), lemma);
            let set = find_branch_points(&p, plane, &tol()).unwrap();
            prop_assert!(set.finite_count() <= lemma);
        }
    }

    #[test]
    fn small_step_branch_points_are_real(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kernel(&random_small_step_model(&mut rng));
        let set = find_branch_points(&p, Plane::Y, &tol()).unwrap();
        prop_assert_eq!(set.finite_count(), 4);
        for b in &set.points {
            prop_assert!(b.location.im.abs() < 1e-8, "{}", b.location);
        }
    }

    #[test]
    fn ergodic_small_steps_have_two_interior_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kernel(&random_ergodic_small_step_model(&mut rng));
        for plane in [Plane::X, Plane::Y] {
            let set = find_branch_points(&p, plane, &tol()).unwrap();
            prop_assert_eq!(set.interior_count(), 2);
            // Argument principle on the discriminant as an independent count.
            let n = zeros_inside_unit_circle(&discriminant(&p, plane).unwrap(), 4096);
            prop_assert_eq!(n, 2);
        }
    }

    #[test]
    fn branch_points_come_in_conjugate_pairs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kernel(&random_model(&mut rng, 2));
        let set = find_branch_points(&p, Plane::X, &tol()).unwrap();
        let pts: Vec<C64> = set.points.iter().map(|b| b.location).collect();
        for z in &pts {
            let d = pts.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-6 * z.norm().max(1.0), "{z} has no mirror ({d:e})");
        }
    }
}
