use quadwalk::branch::{find_branch_points, CutKind, CutSegment, DiskPosition};
use quadwalk::curve::{analyse_plane, automorphism_at, curve_distance, solve_fiber, trace_curve, Chart};
use quadwalk::{assemble_functional_equation, fixtures, BiPoly, Plane, StepModel, Tolerances, C64};

fn kernel(m: &StepModel) -> BiPoly {
    assemble_functional_equation(m).unwrap().interior_gen
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// The two real cuts of an M1 plane: interior first.
fn m1_cuts(p: &BiPoly, plane: Plane) -> (CutSegment, CutSegment) {
    let set = find_branch_points(p, plane, &tol()).unwrap();
    let mut pts = set.points.clone();
    pts.sort_by(|a, b| a.location.re.total_cmp(&b.location.re));
    let cut = |k: usize| CutSegment {
        start: pts[k].clone(),
        end: pts[k + 1].clone(),
        kind: CutKind::Real,
    };
    assert_eq!(pts[0].position, DiskPosition::Inside);
    (cut(0), cut(2))
}

#[test]
fn fibers_over_m1_cut_and_gap() {
    let p = kernel(&fixtures::m1());
    // Inside the y-cut the colliding x-roots are complex conjugates.
    let inside = solve_fiber(&p, Plane::Y, C64::new(0.4, 0.0), &tol()).unwrap();
    assert_eq!(inside.roots.len(), 2);
    assert!(inside.roots[0].im.abs() > 1e-3);
    assert!((inside.roots[0] - inside.roots[1].conj()).norm() < 1e-12);
    // Between the two cuts they are real.
    let between = solve_fiber(&p, Plane::Y, C64::new(1.5, 0.0), &tol()).unwrap();
    assert!(between.roots.iter().all(|r| r.im.abs() < 1e-12));
    assert!(!between.degenerate);
    // Over a branch point they collide.
    let b = C64::new(0.7487563166856382, 0.0);
    let at = solve_fiber(&p, Plane::Y, b, &tol()).unwrap();
    assert!((at.roots[0] - at.roots[1]).norm() < 1e-6);
}

#[test]
fn fiber_with_degree_drop_reports_infinity() {
    // x·y − 1 has no finite y-root over x = 0.
    let p = BiPoly::from_terms([(1, 1, C64::new(1.0, 0.0)), (0, 0, C64::new(-1.0, 0.0))]);
    let f = solve_fiber(&p, Plane::X, C64::new(0.0, 0.0), &tol()).unwrap();
    assert!(f.roots.is_empty());
    assert_eq!(f.at_infinity, 1);
}

#[test]
fn m1_interior_curve_contracts() {
    let p = kernel(&fixtures::m1());
    let (inner, _) = m1_cuts(&p, Plane::Y);
    let c = trace_curve(&p, &inner, 1024, &tol()).unwrap();
    assert_eq!(c.chart, Chart::Affine);
    assert_eq!(c.plane, Plane::X);
    assert!(c.closure_defect < 1e-8, "{}", c.closure_defect);
    assert!(c.involution_defect < 1e-8, "{}", c.involution_defect);
    assert!(c.conjugation_defect.unwrap() < 1e-7);
    assert!(c.kernel_residual < 1e-8);
    assert!(c.problems(&tol()).is_empty());
    assert!(c.encloses(C64::new(0.0, 0.0)));
    assert!(!c.self_intersecting);
}

#[test]
fn m1_the_two_components_are_disjoint() {
    let p = kernel(&fixtures::m1());
    let (inner, outer) = m1_cuts(&p, Plane::Y);
    let a = trace_curve(&p, &inner, 512, &tol()).unwrap();
    let b = trace_curve(&p, &outer, 512, &tol()).unwrap();
    assert!(b.closure_defect < 1e-8);
    assert!(curve_distance(&a, &b) > 1e-3);
}

#[test]
fn automorphism_is_conjugation_on_real_cuts() {
    let p = kernel(&fixtures::m1());
    let (inner, _) = m1_cuts(&p, Plane::X);
    let c = trace_curve(&p, &inner, 256, &tol()).unwrap();
    for k in [1, 17, 64, 100, 200] {
        let t = c.t(k);
        let a = automorphism_at(&p, &c, t).unwrap();
        assert!((a - t.conj()).norm() < 1e-9, "{a} vs {}", t.conj());
        assert!((automorphism_at(&p, &c, a).unwrap() - t).norm() < 1e-9);
    }
    // The images of the cut endpoints are fixed points.
    for k in [0, c.len() / 2] {
        assert_eq!(c.partner_index(k), k);
        assert!((automorphism_at(&p, &c, c.t(k)).unwrap() - c.t(k)).norm() < 1e-7);
    }
    assert!(automorphism_at(&p, &c, C64::new(5.0, 5.0)).is_err());
}

#[test]
fn curves_over_conjugate_cuts_are_not_mirror_images() {
    let p = kernel(&fixtures::conjugate_cut());
    let a = analyse_plane(&p, Plane::Y, 1024, &tol()).unwrap();
    let conj: Vec<_> = a
        .suitable()
        .filter(|c| c.cut.kind == CutKind::Conjugate)
        .collect();
    assert_eq!(conj.len(), 2);
    for c in conj {
        let curve = c.curve.as_ref().unwrap();
        assert!(curve.conjugation_defect.is_none());
        assert!(curve.involution_defect < 1e-8);
        let off = (0..curve.len())
            .map(|k| (curve.t(curve.partner_index(k)) - curve.t(k).conj()).norm())
            .fold(0.0, f64::max);
        assert!(off > 1e-3, "{off}");
    }
}

#[test]
fn validated_interior_counts() {
    // 2I⁻ in the x-plane and 2J⁻ in the y-plane.
    for (m, nx, ny) in [
        (fixtures::m1(), 2, 2),
        (fixtures::m2(), 2, 2),
        (fixtures::m3(), 4, 2),
    ] {
        let p = kernel(&m);
        let x = analyse_plane(&p, Plane::X, 1024, &tol()).unwrap();
        let y = analyse_plane(&p, Plane::Y, 1024, &tol()).unwrap();
        assert_eq!((x.validated_count(), y.validated_count()), (nx, ny), "{}", m.label());
    }
    let p = kernel(&fixtures::conjugate_cut());
    assert_eq!(analyse_plane(&p, Plane::Y, 1024, &tol()).unwrap().validated_count(), 6);
}

#[test]
fn curve_through_infinity_uses_an_inverted_chart() {
    let p = kernel(&fixtures::m2());
    let a = analyse_plane(&p, Plane::Y, 1024, &tol()).unwrap();
    let c = a.unique_curve().unwrap();
    assert!(matches!(c.chart, Chart::Inverted { .. }));
    assert!(c.closure_defect < 1e-8 && c.involution_defect < 1e-8);
}

#[test]
fn tracing_is_deterministic() {
    let p = kernel(&fixtures::m1());
    let (inner, _) = m1_cuts(&p, Plane::Y);
    let a = trace_curve(&p, &inner, 300, &tol()).unwrap();
    let b = trace_curve(&p, &inner, 300, &tol()).unwrap();
    assert_eq!(a.z, b.z);
    assert_eq!(a.len(), 300);
}

#[test]
fn interpolated_points_lie_on_the_kernel() {
    let p = kernel(&fixtures::m1());
    let (inner, _) = m1_cuts(&p, Plane::Y);
    let c = trace_curve(&p, &inner, 512, &tol()).unwrap();
    let th: Vec<f64> = (0..37).map(|k| 0.011 + k as f64 * 0.17).collect();
    for q in c.points_at(&p, &th) {
        assert!(p.eval(q.t, q.l).norm() < 1e-12);
        assert!(p.eval(q.alpha, q.l).norm() < 1e-12);
        assert!((q.alpha - q.t.conj()).norm() < 1e-9);
    }
}
