//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use relgeo_core::geometry::curvature_bundle;
use relgeo_core::linalg::{norm, scale, sub};
use relgeo_core::quadrature::{
    build_grid, divergence_identity_check, integral_formula_eval, integrate_refined, observed_order, AreaElement,
};
use relgeo_core::relative::{
    relative_mean_curvature, relative_normal, support_function, unit_normal, AutoDiffF, ManhartF,
};
use relgeo_core::surface::{Domain, GaussianHeight, Orientation, ParaboloidFamilySpec};
use relgeo_core::variational::{
    densities, quartic_expansion_check, EQ9_PROBE_RADIUS, manhart_identity_report, pde_residuals, separation_scan, sphere_condition_check,
    SmoothBump,
};
use relgeo_core::{builtin_surface, SurfaceDescriptor, SurfacePatch};

const ALPHAS: [f64; 5] = [-1.0, 0.0, 0.25, 0.5, 2.0];
// keeps t·φ·f small against the bump's curvature scale so the t-stencil is
// asymptotic; the graph cap has f = 1/K ≈ 10 at α = −1 and gets a tenth
const BUMP_AMPLITUDE: f64 = 0.05;
const SUPPORT_GRID: usize = 128;

struct Case {
    name: &'static str,
    patch: SurfacePatch,
    samples: Vec<[f64; 2]>,
    bump: SmoothBump,
}

fn ellipsoid() -> SurfacePatch {
    builtin_surface(&SurfaceDescriptor::ellipsoid(1.0, 1.2, 1.5)).unwrap()
}

fn cases() -> Vec<Case> {
    let mut rng = StdRng::seed_from_u64(7);
    let ell = Case {
        name: "ellipsoid",
        patch: ellipsoid(),
        samples: (0..200)
            .map(|_| [rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..2.0 * PI)])
            .collect(),
        bump: SmoothBump::new([1.0, 1.0], 0.4, BUMP_AMPLITUDE),
    };
    let height = GaussianHeight {
        amplitude: 0.3,
        center: [0.0, 0.0],
        width: 1.0,
    };
    let graph = builtin_surface(&SurfaceDescriptor::graph(height, Domain::rect(-1.0, 1.0, -1.0, 1.0)))
        .unwrap()
        .with_orientation(Orientation::Negative);
    let cap = Case {
        name: "graph cap",
        patch: graph,
        samples: (0..200)
            .map(|_| {
                let r = 0.6 * rng.gen_range(0.0f64..1.0).sqrt();
                let a = rng.gen_range(0.0..2.0 * PI);
                [r * a.cos(), r * a.sin()]
            })
            .collect(),
        bump: SmoothBump::new([0.1, -0.05], 0.4, 0.1 * BUMP_AMPLITUDE),
    };
    let saddle = Case {
        name: "saddle",
        patch: builtin_surface(&SurfaceDescriptor::paraboloid(1.0, -1.0)).unwrap(),
        samples: (0..200)
            .map(|_| [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)])
            .collect(),
        bump: SmoothBump::new([0.35, 0.1], 0.3, BUMP_AMPLITUDE),
    };
    vec![ell, cap, saddle]
}

fn report(n: usize, ok: bool, detail: String) -> bool {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn manhart_equivalence(cases: &[Case]) -> bool {
    let mut worst_point: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut failing = Vec::new();
    for case in cases {
        for &alpha in &ALPHAS {
            let f = ManhartF::new(alpha);
            let mut pair_point: f64 = 0.0;
            let mut max_phi: f64 = 0.0;
            for p in &case.samples {
                let d = densities(&case.patch, p[0], p[1], &f).unwrap();
                let (a, b) = (d.phi * (1.0 - alpha), d.psi);
                pair_point = pair_point.max((a - b).abs() / (a.abs() + b.abs() + 1e-12));
                max_phi = max_phi.max(d.phi.abs());
            }
            let r = manhart_identity_report(&case.patch, Arc::new(case.bump), alpha, SUPPORT_GRID, false).unwrap();
            let identity = if r.residuals.step_sensitive { f64::INFINITY } else { r.residuals.identity };
            println!(
                "  {} alpha={alpha}: pointwise {pair_point:.2e} max|phi| {max_phi:.2e} dF_fd={:.10e} dArea={:.10e} \
                 ratio={:.8} identity={identity:.2e} step_change={:.1e}",
                case.name,
                r.df_fd,
                r.darea_analytic,
                r.ratio(),
                r.residuals.step_change
            );
            if pair_point > 1e-7 || identity > 1e-4 {
                failing.push(format!("{} alpha={alpha} (max|phi| {max_phi:.1e}, |dF_fd| {:.1e})", case.name, r.df_fd.abs()));
            }
            worst_point = worst_point.max(pair_point);
            worst_identity = worst_identity.max(identity);
        }
    }
    let mut detail = format!("pointwise {worst_point:.2e} (<= 1e-7), variation {worst_identity:.2e} (<= 1e-4)");
    if !failing.is_empty() {
        // On z = (x² − y²)/2 with α = 1/4 both densities vanish identically, so
        // the relative residuals compare roundoff with roundoff.
        detail.push_str(&format!("; failing pairs: {}", failing.join(", ")));
    }
    report(1, failing.is_empty(), detail)
}

fn non_manhart_separation(cases: &[Case]) -> bool {
    let fs: [(&str, AutoDiffF); 2] = [
        ("f=u", AutoDiffF::new(|u, _| *u)),
        ("f=uv", AutoDiffF::new(|u, v| *u * *v)),
    ];
    let mut worst = f64::INFINITY;
    let mut detail = String::new();
    for (name, f) in &fs {
        let mut samples = Vec::new();
        for case in cases.iter().filter(|c| c.name != "graph cap") {
            for p in &case.samples {
                // f vanishes where H = 0 on the saddle; such points lie outside the domain of f
                if let Ok(d) = densities(&case.patch, p[0], p[1], f) {
                    samples.push((d.phi, d.psi));
                }
            }
        }
        let s = separation_scan(&samples, -10.0, 10.0, 0.01);
        detail.push_str(&format!("{name}: margin {:.3} at C={:.2} over {} samples; ", s.margin, s.best_c, samples.len()));
        worst = worst.min(s.margin);
        if samples.len() < 300 {
            worst = 0.0;
        }
    }
    report(2, worst >= 0.1, format!("{detail}(>= 0.1)"))
}

fn frozen_field(ellipsoid: &SurfacePatch) -> bool {
    let bump = SmoothBump::new([1.0, 1.0], 0.4, BUMP_AMPLITUDE);
    let mut worst: f64 = 0.0;
    for alpha in [-1.0, 0.5] {
        let r = manhart_identity_report(ellipsoid, Arc::new(bump), alpha, SUPPORT_GRID, true).unwrap();
        println!(
            "  alpha={alpha}: dArea_fd={:.10e} dArea_analytic={:.10e}",
            r.darea_fd.unwrap(),
            r.darea_analytic
        );
        worst = worst.max(r.residuals.frozen.unwrap());
    }
    report(3, worst <= 1e-3, format!("relative mismatch {worst:.2e} (<= 1e-3)"))
}

fn quartic_coefficients() -> bool {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mut l = || {
            let m = rng.gen_range(0.5..3.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        };
        let (l1, l2) = (l(), l());
        let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = quartic_expansion_check(&ParaboloidFamilySpec { l1, l2, a, b, c, t: 0.0 }, EQ9_PROBE_RADIUS).unwrap();
        let dh = [6.0 * a + b, b + 6.0 * c];
        let dk = [12.0 * a * l2 + 2.0 * b * l1, 2.0 * b * l2 + 12.0 * c * l1];
        for k in 0..2 {
            for (fit, want) in [(r.dh[k], dh[k]), (r.dk[k], dk[k]), (r.dh_family[k], dh[k]), (r.dk_family[k], dk[k])] {
                worst = worst.max((fit - want).abs());
            }
        }
    }
    report(4, worst <= 1e-4, format!("max coefficient error {worst:.2e} (<= 1e-4)"))
}

fn pde_system() -> bool {
    let grid: Vec<f64> = (0..10).map(|i| 0.5 + 2.5 * i as f64 / 9.0).collect();
    let (mut res, mut equiv, mut expo): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &alpha in &ALPHAS {
        let f = ManhartF::new(alpha);
        let c = 1.0 / (1.0 - alpha);
        for &l1 in &grid {
            for &l2 in &grid {
                let r = pde_residuals(&f, c, l1, l2).unwrap();
                res = res.max(r.max_abs());
                equiv = equiv.max(r.equivalence);
            }
        }
        let s = sphere_condition_check(&f, c, &grid).unwrap();
        expo = expo.max((s.exponent_fitted - 2.0 * alpha).abs()).max((s.exponent_expected - 2.0 * alpha).abs());
    }
    report(
        5,
        res <= 1e-10 && equiv <= 1e-10 && expo <= 1e-10,
        format!("residual {res:.2e}, equivalence {equiv:.2e}, exponent {expo:.2e} (all <= 1e-10)"),
    )
}

fn integral_formula(ellipsoid: &SurfacePatch) -> bool {
    let mut sphere_worst: f64 = 0.0;
    for r in [1.0, 1.5] {
        let s = builtin_surface(&SurfaceDescriptor::sphere(r, [0.3, -0.1, 0.2])).unwrap();
        let grid = build_grid(&s, 24).unwrap();
        for sigma in [-1.0, 0.0, 1.0] {
            let e = integral_formula_eval(&s, &grid, sigma, None).unwrap();
            sphere_worst = sphere_worst.max(e.lhs.abs()).max(e.rhs1.abs()).max(e.rhs2.abs());
        }
    }
    let mut ell_residual: f64 = 0.0;
    let mut nonnegative = true;
    let mut min_order = f64::INFINITY;
    for sigma in [-1.0, 0.0, 1.0] {
        let mut levels = Vec::new();
        for n in [8, 16, 32, 64] {
            let e = integral_formula_eval(ellipsoid, &build_grid(ellipsoid, n).unwrap(), sigma, None).unwrap();
            levels.push(e.residual);
            if n == 64 {
                ell_residual = ell_residual.max(e.residual);
                nonnegative &= e.nonnegative;
            }
        }
        let order = observed_order(&levels, 1e-13).unwrap_or(0.0);
        let shown: Vec<String> = levels.iter().map(|r| format!("{r:.2e}")).collect();
        println!("  sigma={sigma}: residuals [{}] observed order {order:.1}", shown.join(", "));
        min_order = min_order.min(order);
    }
    let div = divergence_identity_check(ellipsoid, &build_grid(ellipsoid, 32).unwrap(), None).unwrap();
    report(
        6,
        sphere_worst <= 1e-9 && ell_residual <= 1e-7 && min_order >= 4.0 && nonnegative && div.max_pointwise <= 1e-9,
        format!(
            "spheres {sphere_worst:.2e} (<= 1e-9), ellipsoid {ell_residual:.2e} (<= 1e-7), order {min_order:.1} (>= 4), \
             nonnegative {nonnegative}, divergence {:.2e} (<= 1e-9)",
            div.max_pointwise
        ),
    )
}

fn geometry_substrate(ellipsoid: &SurfacePatch) -> bool {
    let closed = [
        builtin_surface(&SurfaceDescriptor::sphere(1.3, [0.0; 3])).unwrap(),
        ellipsoid.clone(),
        builtin_surface(&SurfaceDescriptor::torus(2.0, 0.7)).unwrap(),
    ];
    let mut gb: f64 = 0.0;
    for s in &closed {
        let expect = 2.0 * PI * s.euler_characteristic().unwrap() as f64;
        let k = |u: f64, v: f64| Ok(curvature_bundle(s, u, v)?.gauss);
        let i = integrate_refined(s, 48, &k, AreaElement::Euclidean).unwrap();
        gb = gb.max((i.value - expect).abs());
        if !i.converged {
            gb = f64::INFINITY;
        }
    }
    let s2 = builtin_surface(&SurfaceDescriptor::sphere(2.0, [0.0; 3])).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let mut sphere_err: f64 = 0.0;
    for _ in 0..50 {
        let (u, v) = (rng.gen_range(0.1..PI - 0.1), rng.gen_range(0.0..2.0 * PI));
        let b = curvature_bundle(&s2, u, v).unwrap();
        let rho = support_function(&s2, u, v, &[0.0; 3]).unwrap().rho;
        sphere_err = sphere_err
            .max((b.mean - 0.5).abs() / 0.5)
            .max((b.gauss - 0.25).abs() / 0.25)
            .max((rho - 2.0).abs() / 2.0);
    }
    let mut para_err: f64 = 0.0;
    for _ in 0..100 {
        let (l1, l2) = (rng.gen_range(0.5..3.0), rng.gen_range(-3.0..3.0));
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(l1, l2)).unwrap();
        let (x, y) = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let w = 1.0 + (l1 * x).powi(2) + (l2 * y).powi(2);
        let k = l1 * l2 / (w * w);
        let h = (l1 * (1.0 + (l2 * y).powi(2)) + l2 * (1.0 + (l1 * x).powi(2))) / (2.0 * w.powf(1.5));
        let b = curvature_bundle(&p, x, y).unwrap();
        para_err = para_err.max((b.mean - h).abs()).max((b.gauss - k).abs());
    }
    report(
        7,
        gb <= 1e-8 && sphere_err <= 4.0 * f64::EPSILON && para_err <= 1e-10,
        format!(
            "Gauss-Bonnet {gb:.2e} (<= 1e-8), sphere(2) {sphere_err:.2e} (<= 4 eps), paraboloid {para_err:.2e} (<= 1e-10)"
        ),
    )
}

fn sphere_criticality() -> bool {
    let mut rng = StdRng::seed_from_u64(11);
    let (mut spread, mut tangential): (f64, f64) = (0.0, 0.0);
    for r in [0.7, 1.5] {
        let s = builtin_surface(&SurfaceDescriptor::sphere(r, [0.2, 0.0, -0.4])).unwrap();
        for alpha in [-1.0, -0.5, 0.0] {
            let f = ManhartF::new(alpha);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..200 {
                let (u, v) = (rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.0..2.0 * PI));
                let h = relative_mean_curvature(&s, u, v, &f).unwrap();
                lo = lo.min(h);
                hi = hi.max(h);
                let y = relative_normal(&s, u, v, &f).unwrap();
                let n = unit_normal(&s, u, v).unwrap();
                tangential = tangential.max(norm(&sub(&y.y, &scale(&n, y.normal_part))));
            }
            spread = spread.max(hi - lo);
        }
    }
    report(
        8,
        spread <= 1e-10 && tangential <= 1e-12,
        format!("H_y spread {spread:.2e} (<= 1e-10), tangential part {tangential:.2e} (<= 1e-12)"),
    )
}

fn main() -> ExitCode {
    let cases = cases();
    let ell = ellipsoid();
    let results = [
        manhart_equivalence(&cases),
        non_manhart_separation(&cases),
        frozen_field(&ell),
        quartic_coefficients(),
        pde_system(),
        integral_formula(&ell),
        geometry_substrate(&ell),
        sphere_criticality(),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
