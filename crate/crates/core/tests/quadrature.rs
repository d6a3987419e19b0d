use std::f64::consts::{E, PI};

use proptest::prelude::*;

use relgeo_core::geometry::curvature_bundle;
use relgeo_core::quadrature::{
    build_grid, divergence_identity_check, gauss_legendre, integral_formula_eval, integrate, integrate_refined,
    rect_grid, profile_evidence, AreaElement, PowerProfile,
};
use relgeo_core::relative::{FunctionOfHK, ManhartF, RelativeNormalField};
use relgeo_core::surface::Rect;
use relgeo_core::{builtin_surface, GeomError, SurfaceDescriptor, SurfacePatch};

fn sphere(r: f64) -> SurfacePatch {
    builtin_surface(&SurfaceDescriptor::sphere(r, [0.0; 3])).unwrap()
}

fn ellipsoid(a: f64, b: f64, c: f64) -> SurfacePatch {
    builtin_surface(&SurfaceDescriptor::ellipsoid(a, b, c)).unwrap()
}

#[test]
fn curvature_energy_and_relative_area_on_spheres() {
    let s = sphere(1.0);
    let grid = build_grid(&s, 32).unwrap();
    for alpha in [-1.0, 0.25, 2.0] {
        let f = ManhartF::new(alpha);
        let energy = integrate(&s, &grid, &|u, v| {
            let b = curvature_bundle(&s, u, v)?;
            f.value(b.mean, b.gauss)
        }, AreaElement::Euclidean)
        .unwrap();
        assert!((energy - 4.0 * PI).abs() < 1e-10);
        let field = RelativeNormalField(&f);
        let area = integrate(&s, &grid, &|_, _| Ok(1.0), AreaElement::Relative(&field)).unwrap();
        assert!((area - 4.0 * PI).abs() < 1e-10);
    }
    // y = N/2 on the radius-2 sphere
    let s2 = sphere(2.0);
    let f = ManhartF::new(0.5);
    let field = RelativeNormalField(&f);
    let area = integrate(&s2, &build_grid(&s2, 32).unwrap(), &|_, _| Ok(1.0), AreaElement::Relative(&field)).unwrap();
    assert!((area - 8.0 * PI).abs() < 1e-10);
}

#[test]
fn sphere_integrals_are_chart_independent() {
    // ∫ x² = 4π/3, ∫ yz = 0, ∫ eˣ = 2π(e − 1/e) over the unit sphere
    let want = 4.0 * PI / 3.0 + 2.0 * PI * (E - 1.0 / E);
    for pole_axis in 0..3 {
        let s = builtin_surface(&SurfaceDescriptor::Sphere {
            radius: 1.0,
            center: [0.0; 3],
            pole_axis,
        })
        .unwrap();
        let g = |u: f64, v: f64| {
            let p = s.position(u, v)?;
            Ok(p[0] * p[0] + p[1] * p[2] + p[0].exp())
        };
        let got = integrate_refined(&s, 24, &g, AreaElement::Euclidean).unwrap();
        assert!(got.converged, "{got:?}");
        assert!((got.value - want).abs() < 1e-10, "pole {pole_axis}: {got:?}");
    }
}

#[test]
fn refinement_flags_unresolved_integrands() {
    let s = sphere(1.0);
    let sharp = |u: f64, v: f64| Ok((40.0 * (u.cos() * v.sin())).cos());
    let r = integrate_refined(&s, 6, &sharp, AreaElement::Euclidean).unwrap();
    assert!(!r.converged, "{r:?}");
    let r = integrate_refined(&s, 24, &|_, _| Ok(1.0), AreaElement::Euclidean).unwrap();
    assert!(r.converged);
}

#[test]
fn integral_formula_on_prolate_ellipsoid() {
    let e = ellipsoid(1.0, 1.0, 1.5);
    let r = integral_formula_eval(&e, &build_grid(&e, 48).unwrap(), 1.0, None).unwrap();
    assert!(r.residual <= 1e-7, "{r:?}");
    assert!(r.nonnegative && r.rhs1 + r.rhs2 > 0.0);
}

#[test]
fn gauss_bonnet_on_prolate_ellipsoid() {
    let e = ellipsoid(1.0, 1.0, 1.5);
    let r = integrate_refined(&e, 48, &|u, v| Ok(curvature_bundle(&e, u, v)?.gauss), AreaElement::Euclidean).unwrap();
    assert!((r.value - 4.0 * PI).abs() < 1e-10, "{r:?}");
}

#[test]
fn non_convex_and_invalid_inputs_are_rejected() {
    let t = builtin_surface(&SurfaceDescriptor::torus(2.0, 0.7)).unwrap();
    let g = build_grid(&t, 16).unwrap();
    assert!(matches!(integral_formula_eval(&t, &g, 0.0, None), Err(GeomError::NotConvex { .. })));
    let e = ellipsoid(1.0, 1.2, 1.5);
    let g = build_grid(&e, 8).unwrap();
    assert!(integral_formula_eval(&e, &g, 1.5, None).is_err());
    let p = builtin_surface(&SurfaceDescriptor::paraboloid(1.0, 1.0)).unwrap();
    assert!(divergence_identity_check(&p, &build_grid(&p, 8).unwrap(), None).is_err());
    assert!(build_grid(&e, 3).is_err());
}

#[test]
fn profile_evidence_sphere_profiles() {
    for r in [0.8, 1.5] {
        let s = sphere(r);
        let g = build_grid(&s, 16).unwrap();
        let flat = PowerProfile { scale: r, exponent: 0.0 };
        let rep = profile_evidence(&s, &g, &flat, 0.5, Some([0.0; 3])).unwrap();
        assert!(rep.defect_vanishes && !rep.contradiction && !rep.profile_increasing);
        assert_eq!(rep.ties, g.nodes.len());
        assert_eq!(rep.hypothetical_lhs, None);
        let inv = PowerProfile { scale: 1.0, exponent: -1.0 };
        let rep = profile_evidence(&s, &g, &inv, 0.0, Some([0.0; 3])).unwrap();
        assert!(rep.defect_vanishes && !rep.contradiction && rep.ties == 0, "{rep:?}");
        assert!(rep.rhs_sum.abs() < 1e-12);
    }
}

#[test]
fn profile_evidence_ellipsoid_contradiction() {
    let e = ellipsoid(1.0, 1.0, 1.3);
    let g = build_grid(&e, 32).unwrap();
    let inv = PowerProfile { scale: 1.0, exponent: -1.0 };
    for sigma in [-1.0, 0.0, 1.0] {
        let rep = profile_evidence(&e, &g, &inv, sigma, None).unwrap();
        assert!(!rep.defect_vanishes && !rep.profile_increasing);
        assert!(rep.hypothetical_lhs.unwrap() < 0.0 && rep.rhs_sum > 0.0);
        assert!(rep.contradiction, "{rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rect_weights_are_positive_and_sum_to_measure(
        u0 in -3.0..3.0f64, du in 0.01..4.0f64, v0 in -3.0..3.0f64, dv in 0.01..4.0f64, n in 4usize..40,
    ) {
        let r = Rect { u0, u1: u0 + du, v0, v1: v0 + dv };
        let g = rect_grid(&r, n);
        prop_assert!(g.weights.iter().all(|w| *w > 0.0));
        prop_assert!((g.weight_sum() - du * dv).abs() <= 1e-13 * du * dv);
        prop_assert!(g.nodes.iter().all(|p| p[0] > u0 && p[0] < u0 + du && p[1] > v0 && p[1] < v0 + dv));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree(n in 1usize..40, k in 0usize..80) {
        prop_assume!(k < 2 * n);
        let (x, w) = gauss_legendre(n);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
        let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        prop_assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn ellipsoid_integrands_are_nonnegative(
        a in 0.5..2.0f64, b in 0.5..2.0f64, c in 0.5..2.0f64, sigma in -1.0..1.0f64,
        ox in -0.2..0.2f64, oy in -0.2..0.2f64, oz in -0.2..0.2f64,
    ) {
        let e = ellipsoid(a, b, c);
        let r = integral_formula_eval(&e, &build_grid(&e, 16).unwrap(), sigma, Some([ox, oy, oz])).unwrap();
        prop_assert!(r.nonnegative, "{:?}", r);
        prop_assert!(r.rhs1 >= 0.0 && r.rhs2 >= 0.0);
    }

    #[test]
    fn divergence_identity_holds(a in 0.7..1.5f64, b in 0.7..1.5f64, c in 0.7..1.5f64) {
        let e = ellipsoid(a, b, c);
        let r = divergence_identity_check(&e, &build_grid(&e, 40).unwrap(), None).unwrap();
        prop_assert!(r.max_pointwise < 1e-10, "{:?}", r);
        prop_assert!(r.integral_residual < 1e-6 && r.minkowski_residual < 1e-6, "{:?}", r);
    }
}
