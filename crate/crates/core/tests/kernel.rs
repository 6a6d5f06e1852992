use proptest::prelude::*;
use quadwalk::fixtures;
use quadwalk::kernel::{discriminant, resultant, resultant_by_interpolation, BiPoly, Plane, Poly};
use quadwalk::model::{random_model_with_bounds, JumpBounds};
use quadwalk::{assemble_functional_equation, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kernel(m: &quadwalk::StepModel) -> BiPoly {
    assemble_functional_equation(m).unwrap().interior_gen
}

#[test]
fn degrees_of_the_reference_kernels() {
    let p1 = kernel(&fixtures::m1());
    assert_eq!((p1.x_degree(), p1.y_degree()), (2, 2));
    let p2 = kernel(&fixtures::m2());
    assert_eq!((p2.x_degree(), p2.y_degree()), (3, 3));
}

#[test]
fn coefficient_splitting() {
    let xy = BiPoly::from_terms([(1, 1, c(1.0))]);
    let a = xy.coeffs_in_y();
    assert!(a[0].is_zero());
    assert_eq!(a[1].coeffs(), &[c(0.0), c(1.0)]);

    let p = kernel(&fixtures::m1());
    let b = p.coeffs_in_x();
    assert_eq!(b.len(), 3);
    assert!(b.iter().all(|q| q.degree().unwrap_or(0) <= 2));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = p.coeffs_in_y();
    for _ in 0..100 {
        let x = C64::from_polar(rng.random::<f64>().sqrt(), rng.random::<f64>() * 6.3);
        let y = C64::from_polar(rng.random::<f64>().sqrt(), rng.random::<f64>() * 6.3);
        let rebuilt: C64 = a
            .iter()
            .enumerate()
            .map(|(j, aj)| aj.eval(x) * y.powu(j as u32))
            .sum();
        assert!((rebuilt - p.eval(x, y)).norm() < 1e-13);
    }
}

#[test]
fn hand_resultant() {
    // Res_y(y² − x, 2y) = 4·(−x) up to sign.
    let p = vec![Poly::from_real(&[0.0, -1.0]), Poly::zero(), Poly::one()];
    let q = vec![Poly::zero(), Poly::constant(c(2.0))];
    let r = resultant(&p, &q).unwrap();
    assert_eq!(r.degree(), Some(1));
    assert!((r.coeff(1).norm() - 4.0).abs() < 1e-14);
    assert!(r.coeff(0).norm() < 1e-14);
}

#[test]
fn m1_discriminant_is_the_quadratic_formula_one() {
    let p = kernel(&fixtures::m1());
    let d = discriminant(&p, Plane::Y).unwrap();
    let b = p.coeffs_in_x();
    let q = |y: C64| b[1].eval(y).powu(2) - 4.0 * b[2].eval(y) * b[0].eval(y);
    let ratio0 = d.eval(c(0.37)) / q(c(0.37));
    for y in [c(-2.0), C64::new(0.1, 0.4), c(3.0), C64::new(-0.7, -1.2)] {
        let r = d.eval(y) / q(y);
        assert!((r - ratio0).norm() < 1e-10 * ratio0.norm(), "{r} vs {ratio0}");
    }
}

#[test]
fn m1_constant_term() {
    let p = kernel(&fixtures::m1());
    assert!((p.coeff(0, 0) - c(0.15)).norm() < 1e-15);
    assert!(p.eval(c(1.0), c(1.0)).norm() < 1e-12);
}

#[test]
fn discriminant_degree_respects_the_lemma() {
    let b = JumpBounds {
        i_minus: 2,
        i_plus: 2,
        j_minus: 2,
        j_plus: 2,
        i_zero: 2,
        j_zero: 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = kernel(&random_model_with_bounds(&mut rng, b));
        for plane in [Plane::X, Plane::Y] {
            let d = discriminant(&p, plane).unwrap();
            let (i, j) = (p.x_degree(), p.y_degree());
            let bound = match plane {
                Plane::Y => 2 * j * (i - 1),
                Plane::X => 2 * i * (j - 1),
            };
            assert!(d.degree().unwrap_or(0) <= bound);
        }
    }
}

#[test]
fn evaluation_is_linear() {
    let p1 = kernel(&fixtures::m1());
    let p2 = kernel(&fixtures::m2());
    let (x, y) = (C64::new(0.3, -0.8), C64::new(-1.1, 0.25));
    let s = p1.add(&p2.scale(c(2.5)));
    assert!((s.eval(x, y) - p1.eval(x, y) - 2.5 * p2.eval(x, y)).norm() < 1e-14);
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> Poly {
    Poly::new(
        (0..=deg)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect(),
    )
}

fn min_chordal_gap(p: &BiPoly, x: C64) -> f64 {
    let r = p.fiber_at_x(x).roots();
    // Roots lost to a degree drop sit at infinity.
    let at_infinity = p.y_degree() - r.len();
    if at_infinity > 1 {
        return 0.0;
    }
    let mut g = f64::INFINITY;
    if at_infinity == 1 {
        g = r.iter().map(|z| 1.0 / (1.0 + z.norm_sqr()).sqrt()).fold(g, f64::min);
    }
    for a in 0..r.len() {
        for b in a + 1..r.len() {
            // Chordal distance, so collisions at infinity count.
            let d = (r[a] - r[b]).norm() / ((1.0 + r[a].norm_sqr()) * (1.0 + r[b].norm_sqr())).sqrt();
            g = g.min(d);
        }
    }
    g
}

fn check_discriminant_roots(max_jump: u32, simple: f64, clustered: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let p = kernel(&quadwalk::model::random_model(&mut rng, max_jump));
        let roots = discriminant(&p, Plane::X).unwrap().roots();
        for &x0 in &roots {
            if x0.norm() > 50.0 {
                continue;
            }
            // A root error e shows up as a gap of order sqrt(e), and multiple
            // roots are only located to about the square root of precision.
            let many = roots.iter().filter(|r| (**r - x0).norm() < 1e-4).count() > 1;
            let tol = if many { clustered } else { simple };
            let g = min_chordal_gap(&p, x0);
            assert!(g < tol, "gap {g} at {x0}");
        }
        assert!(min_chordal_gap(&p, C64::new(0.123, 0.456)) > 1e-2 * simple.sqrt());
    }
}

#[test]
fn discriminant_roots_are_multiple_fibers() {
    check_discriminant_roots(1, 1e-5, 1e-2);
    check_discriminant_roots(2, 1e-2, 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resultant_detects_common_roots(seed in any::<u64>(), planted in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let lin = Poly::new(vec![-root, c(1.0)]);
        let (mut f, mut g) = (random_poly(&mut rng, 3), random_poly(&mut rng, 2));
        if planted {
            f = &f * &lin;
            g = &g * &lin;
        }
        let scale = f.max_abs().powi(g.coeffs().len() as i32 - 1) * g.max_abs().powi(f.coeffs().len() as i32 - 1);
        let fc: Vec<Poly> = f.coeffs().iter().map(|&a| Poly::constant(a)).collect();
        let gc: Vec<Poly> = g.coeffs().iter().map(|&a| Poly::constant(a)).collect();
        let r = resultant(&fc, &gc).unwrap().coeff(0).norm();
        if planted {
            prop_assert!(r < 1e-9 * scale);
        } else {
            prop_assert!(r > 1e-9 * scale);
        }
    }

    #[test]
    fn resultant_paths_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = kernel(&quadwalk::model::random_model(&mut rng, 2));
        let a = p.coeffs_in_y();
        let b: Vec<Poly> = a.iter().skip(1).enumerate().map(|(k, q)| q.scale(c((k + 1) as f64))).collect();
        let bound = 2 * p.x_degree() * p.y_degree();
        let r1 = resultant(&a, &b).unwrap();
        let r2 = resultant_by_interpolation(&a, &b, bound).unwrap();
        let scale = r1.max_abs().max(1e-300);
        for x in [c(0.3), C64::new(-0.5, 0.7), c(1.4)] {
            prop_assert!((r1.eval(x) - r2.eval(x)).norm() < 1e-8 * scale * (1.0 + x.norm()).powi(bound as i32));
        }
    }
}
