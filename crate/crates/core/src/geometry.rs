//! Pointwise Euclidean invariants and calculus with respect to either the
//! first or the second fundamental form.
//!
//! [`LocalGeometry`] keeps every quantity as a Taylor expansion about the
//! evaluation point, so parameter derivatives of curvatures come from the
//! chain rule on chart jets rather than from re-differencing.

use crate::error::{GeomError, Result};
use crate::linalg::{Mat2, Vec3};
use crate::relative::{compose_hk, FunctionOfHK};
use crate::surface::{Jet, Rect, SurfacePatch};
use crate::taylor::{tcross, td_du, td_dv, tdot, tscale, tvalue, Taylor, TVec3};

/// Symmetric 2×2 matrix of expansions.
pub type TMat2 = [[Taylor; 2]; 2];

/// Taylor expansions of the frame, forms and curvatures about one point.
///
/// For a chart jet of order `p`, the frame, normal and first form have
/// order `p - 1`; the second form and the curvatures have order `p - 2`.
#[derive(Clone, Copy, Debug)]
pub struct LocalGeometry {
    pub position: TVec3,
    pub frame: [TVec3; 2],
    pub normal: TVec3,
    /// `|ξ_u × ξ_v|`.
    pub area_density: Taylor,
    pub first: TMat2,
    pub second: TMat2,
    pub mean: Taylor,
    pub gauss: Taylor,
}

/// Builds the local expansions from a chart jet of order at least 2.
pub fn local_geometry(jet: &Jet, sign: f64, u: f64, v: f64) -> Result<LocalGeometry> {
    if jet.order() < 2 {
        return Err(GeomError::UnsupportedOrder {
            requested: 2,
            available: jet.order(),
        });
    }
    let pos = *jet.expansion();
    let xu = td_du(&pos);
    let xv = td_dv(&pos);
    let e = tdot(&xu, &xu);
    let f = tdot(&xu, &xv);
    let g = tdot(&xv, &xv);
    let det = e * g - f * f;
    if !(det.value() > 1e-14 * (e.value() * g.value()).max(f64::MIN_POSITIVE)) {
        return Err(GeomError::DegenerateMetric { u, v });
    }
    let raw = tcross(&xu, &xv);
    let w = det.sqrt();
    let normal = tscale(&raw, &(w.recip() * sign));
    let xuu = td_du(&xu);
    let xuv = td_dv(&xu);
    let xvv = td_dv(&xv);
    let l = tdot(&xuu, &normal);
    let m = tdot(&xuv, &normal);
    let n = tdot(&xvv, &normal);
    let e2 = e.truncate(l.order());
    let f2 = f.truncate(l.order());
    let g2 = g.truncate(l.order());
    let inv_det = det.truncate(l.order()).recip();
    let mean = (e2 * n - f2 * m * 2.0 + g2 * l) * inv_det * 0.5;
    let gauss = (l * n - m * m) * inv_det;
    let out = LocalGeometry {
        position: pos,
        frame: [xu, xv],
        normal,
        area_density: w,
        first: [[e, f], [f, g]],
        second: [[l, m], [m, n]],
        mean,
        gauss,
    };
    if !(mean.is_finite() && gauss.is_finite()) {
        return Err(GeomError::NonFinite { u, v });
    }
    Ok(out)
}

/// Local expansions of `patch` at `(u, v)` from a chart jet of order `order`.
pub fn local_geometry_at(patch: &SurfacePatch, u: f64, v: f64, order: usize) -> Result<LocalGeometry> {
    let jet = patch.jet(u, v, order)?;
    local_geometry(&jet, patch.sign(), u, v)
}

impl LocalGeometry {
    /// Maps parameter components of a tangent vector into space.
    pub fn push_forward(&self, x: &[f64; 2]) -> Vec3 {
        let a = tvalue(&self.frame[0]);
        let b = tvalue(&self.frame[1]);
        [
            a[0] * x[0] + b[0] * x[1],
            a[1] * x[0] + b[1] * x[1],
            a[2] * x[0] + b[2] * x[1],
        ]
    }
}

/// Christoffel symbols `Γ[k][i][j] = Γ^k_ij` in parameter coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    pub const ZERO: Christoffel = Christoffel([[[0.0; 2]; 2]; 2]);

    /// Levi-Civita symbols of a (pseudo-)metric whose components carry first partials.
    pub fn of_metric(g: &TMat2) -> Option<Christoffel> {
        let val = Mat2([[g[0][0].value(), g[0][1].value()], [g[1][0].value(), g[1][1].value()]]);
        let inv = val.inverse()?;
        // dg[k][i][j] = ∂_k g_ij
        let mut dg = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dg[0][i][j] = g[i][j].partial(1, 0);
                dg[1][i][j] = g[i][j].partial(0, 1);
            }
        }
        let mut out = [[[0.0; 2]; 2]; 2];
        for (k, gk) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += inv.0[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gk[i][j] = 0.5 * s;
                }
            }
        }
        Some(Christoffel(out))
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    /// `Γ(X, Y)^k = Γ^k_ij X^i Y^j`.
    pub fn contract(&self, x: &[f64; 2], y: &[f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *o += self.0[k][i][j] * x[i] * y[j];
                }
            }
        }
        out
    }

    /// `X ↦ Γ(V, X)` as a matrix acting on parameter components.
    pub fn partial_apply(&self, x: &[f64; 2]) -> Mat2 {
        let mut m = [[0.0; 2]; 2];
        for (k, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[k][0][j] * x[0] + self.0[k][1][j] * x[1];
            }
        }
        Mat2(m)
    }

    pub fn sub(&self, other: &Christoffel) -> Christoffel {
        let mut out = self.0;
        for (k, ok) in out.iter_mut().enumerate() {
            for (i, oi) in ok.iter_mut().enumerate() {
                for (j, x) in oi.iter_mut().enumerate() {
                    *x -= other.0[k][i][j];
                }
            }
        }
        Christoffel(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Which fundamental form serves as metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    First,
    Second,
}

/// Values of the classical invariants at one point.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureBundle {
    pub u: f64,
    pub v: f64,
    pub position: Vec3,
    pub frame: [Vec3; 2],
    pub normal: Vec3,
    pub area_density: f64,
    pub first: Mat2,
    pub second: Mat2,
    /// `I⁻¹ II`, acting on parameter components.
    pub shape: Mat2,
    pub mean: f64,
    pub gauss: f64,
    pub christoffel_first: Christoffel,
    /// `None` when II is degenerate at the point.
    pub christoffel_second: Option<Christoffel>,
}

impl CurvatureBundle {
    /// Needs local expansions of order at least 1 in the second form.
    pub fn from_local(lg: &LocalGeometry, u: f64, v: f64) -> Result<CurvatureBundle> {
        let val = |m: &TMat2| Mat2([[m[0][0].value(), m[0][1].value()], [m[1][0].value(), m[1][1].value()]]);
        let first = val(&lg.first);
        let second = val(&lg.second);
        let inv = first.inverse().ok_or(GeomError::DegenerateMetric { u, v })?;
        let christoffel_first = Christoffel::of_metric(&lg.first).ok_or(GeomError::DegenerateMetric { u, v })?;
        let christoffel_second = if second_nondegenerate(&second) && lg.second[0][0].order() >= 1 {
            Christoffel::of_metric(&lg.second)
        } else {
            None
        };
        Ok(CurvatureBundle {
            u,
            v,
            position: tvalue(&lg.position),
            frame: [tvalue(&lg.frame[0]), tvalue(&lg.frame[1])],
            normal: tvalue(&lg.normal),
            area_density: lg.area_density.value(),
            first,
            second,
            shape: inv.mul(&second),
            mean: lg.mean.value(),
            gauss: lg.gauss.value(),
            christoffel_first,
            christoffel_second,
        })
    }

    pub fn second_nondegenerate(&self) -> bool {
        self.christoffel_second.is_some()
    }

    pub fn metric(&self, metric: Metric) -> &Mat2 {
        match metric {
            Metric::First => &self.first,
            Metric::Second => &self.second,
        }
    }

    pub fn metric_inverse(&self, metric: Metric) -> Result<Mat2> {
        self.metric(metric).inverse().ok_or_else(|| self.degenerate(metric))
    }

    pub fn christoffel(&self, metric: Metric) -> Result<&Christoffel> {
        match metric {
            Metric::First => Ok(&self.christoffel_first),
            Metric::Second => self.christoffel_second.as_ref().ok_or_else(|| self.degenerate(metric)),
        }
    }

    /// Inner product of parameter-component vectors.
    pub fn inner(&self, metric: Metric, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        self.metric(metric).form(x, y)
    }

    pub fn push_forward(&self, x: &[f64; 2]) -> Vec3 {
        let [a, b] = &self.frame;
        [
            a[0] * x[0] + b[0] * x[1],
            a[1] * x[0] + b[1] * x[1],
            a[2] * x[0] + b[2] * x[1],
        ]
    }

    fn degenerate(&self, metric: Metric) -> GeomError {
        match metric {
            Metric::First => GeomError::DegenerateMetric { u: self.u, v: self.v },
            Metric::Second => GeomError::DegenerateSecondForm { u: self.u, v: self.v },
        }
    }
}

fn second_nondegenerate(ii: &Mat2) -> bool {
    let m = &ii.0;
    let scale = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[0][1] + m[1][1] * m[1][1];
    ii.det().abs() > 1e-12 * scale && scale > 0.0
}

/// Invariants at `(u, v)`; uses order-3 jets.
pub fn curvature_bundle(patch: &SurfacePatch, u: f64, v: f64) -> Result<CurvatureBundle> {
    let lg = local_geometry_at(patch, u, v, 3)?;
    CurvatureBundle::from_local(&lg, u, v)
}

/// Value, gradient and Hessian (in parameter partials) of a scalar field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarFieldJet {
    pub value: f64,
    pub d1: [f64; 2],
    pub d2: Mat2,
}

impl ScalarFieldJet {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            d1: [0.0; 2],
            d2: Mat2::ZERO,
        }
    }

    /// Reads value and partials through order 2 off an expansion.
    pub fn from_taylor(t: &Taylor) -> Result<Self> {
        if t.order() < 2 {
            return Err(GeomError::UnsupportedOrder {
                requested: 2,
                available: t.order(),
            });
        }
        Ok(Self {
            value: t.value(),
            d1: [t.partial(1, 0), t.partial(0, 1)],
            d2: Mat2::symmetric(t.partial(2, 0), t.partial(1, 1), t.partial(0, 2)),
        })
    }
}

/// A scalar field on parameter space given in closed form over Taylor numbers.
pub trait ScalarField: Send + Sync {
    fn eval(&self, u: &Taylor, v: &Taylor) -> Taylor;

    /// Parameter box outside which the field vanishes identically.
    fn support(&self) -> Option<Rect> {
        None
    }
}

impl<F> ScalarField for F
where
    F: Fn(&Taylor, &Taylor) -> Taylor + Send + Sync,
{
    fn eval(&self, u: &Taylor, v: &Taylor) -> Taylor {
        self(u, v)
    }
}

/// Expansion of `field` about `(u, v)` to the given order.
pub fn field_expansion(field: &dyn ScalarField, u: f64, v: f64, order: usize) -> Taylor {
    field.eval(&Taylor::var_u(u, order), &Taylor::var_v(v, order))
}

/// Fields accepted by [`scalar_field_jet`].
#[derive(Clone, Copy)]
pub enum CurvatureField<'a> {
    Mean,
    Gauss,
    OfCurvatures(&'a dyn FunctionOfHK),
    Custom(&'a dyn ScalarField),
}

/// Value and parameter partials through order 2 of a curvature-derived field.
///
/// Curvature fields need order-4 chart jets.
pub fn scalar_field_jet(patch: &SurfacePatch, u: f64, v: f64, field: CurvatureField<'_>) -> Result<ScalarFieldJet> {
    let t = match field {
        CurvatureField::Custom(f) => field_expansion(f, u, v, 2),
        _ => {
            let lg = local_geometry_at(patch, u, v, 4)?;
            match field {
                CurvatureField::Mean => lg.mean,
                CurvatureField::Gauss => lg.gauss,
                CurvatureField::OfCurvatures(f) => compose_hk(f, &lg.mean, &lg.gauss, u, v)?,
                CurvatureField::Custom(_) => unreachable!(),
            }
        }
    };
    ScalarFieldJet::from_taylor(&t)
}

/// Gradient with respect to the chosen metric, in parameter components.
pub fn grad(metric: Metric, bundle: &CurvatureBundle, fjet: &ScalarFieldJet) -> Result<[f64; 2]> {
    Ok(bundle.metric_inverse(metric)?.apply(&fjet.d1))
}

/// Hessian operator `V ↦ ∇_V grad φ` and its trace, the Laplacian.
pub fn hessian_laplacian(metric: Metric, bundle: &CurvatureBundle, fjet: &ScalarFieldJet) -> Result<(Mat2, f64)> {
    let inv = bundle.metric_inverse(metric)?;
    let gamma = bundle.christoffel(metric)?;
    let hess = covariant_hessian(gamma, fjet);
    let op = inv.mul(&hess);
    Ok((op, op.trace()))
}

/// Covariant Hessian `∂_ij φ − Γ^k_ij ∂_k φ` as a bilinear form.
pub fn covariant_hessian(gamma: &Christoffel, fjet: &ScalarFieldJet) -> Mat2 {
    let mut h = fjet.d2.0;
    for (i, row) in h.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x -= gamma.get(0, i, j) * fjet.d1[0] + gamma.get(1, i, j) * fjet.d1[1];
        }
    }
    Mat2(h)
}

/// `L = Γ^II − Γ^I`.
pub fn difference_tensor(bundle: &CurvatureBundle) -> Result<Christoffel> {
    Ok(bundle.christoffel(Metric::Second)?.sub(&bundle.christoffel_first))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relative::ConstantF;
    use crate::surface::{builtin_surface, Domain, SurfaceDescriptor};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sphere_bundle() {
        let p = builtin_surface(&SurfaceDescriptor::sphere(2.0, [0.0; 3])).unwrap();
        let b = curvature_bundle(&p, 1.1, 0.4).unwrap();
        assert!(close(b.mean, 0.5, 1e-14) && close(b.gauss, 0.25, 1e-14));
        assert!(b.shape.sub(&Mat2::IDENTITY.scaled(0.5)).max_abs() < 1e-13);
        assert!(difference_tensor(&b).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn paraboloid_at_origin() {
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(2.0, 3.0)).unwrap();
        let b = curvature_bundle(&p, 0.0, 0.0).unwrap();
        assert_eq!(b.first, Mat2::IDENTITY);
        assert_eq!(b.second, Mat2::diag(2.0, 3.0));
        assert_eq!((b.mean, b.gauss), (2.5, 6.0));
        assert_eq!(difference_tensor(&b).unwrap(), Christoffel::ZERO);
        let k = scalar_field_jet(&p, 0.0, 0.0, CurvatureField::Gauss).unwrap();
        assert_eq!(k.d1, [0.0, 0.0]);
        let g = grad(
            Metric::Second,
            &b,
            &ScalarFieldJet {
                value: 0.0,
                d1: [2.0, 3.0],
                d2: Mat2::ZERO,
            },
        )
        .unwrap();
        assert!(close(g[0], 1.0, 1e-15) && close(g[1], 1.0, 1e-15));
    }

    #[test]
    fn paraboloid_off_origin_closed_form() {
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(1.0, 1.0)).unwrap();
        let b = curvature_bundle(&p, 1.0, 0.0).unwrap();
        assert!(close(b.gauss, 0.25, 1e-15));
        assert!(close(b.mean, 3.0 / (4.0 * 2f64.sqrt()), 1e-15));
    }

    #[test]
    fn laplacian_of_x_squared_on_paraboloid() {
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(2.0, 3.0)).unwrap();
        let b = curvature_bundle(&p, 0.0, 0.0).unwrap();
        let x2 = |x: &Taylor, _: &Taylor| *x * *x;
        let j = scalar_field_jet(&p, 0.0, 0.0, CurvatureField::Custom(&x2)).unwrap();
        let (_, lap) = hessian_laplacian(Metric::Second, &b, &j).unwrap();
        assert!(close(lap, 1.0, 1e-15));
    }

    #[test]
    fn flat_laplacian() {
        let plane = SurfacePatch::analytic(
            PlaneChart,
            Domain::rect(-1.0, 1.0, -1.0, 1.0),
            crate::surface::Orientation::Positive,
        );
        let b = curvature_bundle(&plane, 0.2, 0.3).unwrap();
        let r2 = |x: &Taylor, y: &Taylor| *x * *x + *y * *y;
        let j = scalar_field_jet(&plane, 0.2, 0.3, CurvatureField::Custom(&r2)).unwrap();
        let (_, lap) = hessian_laplacian(Metric::First, &b, &j).unwrap();
        assert!(close(lap, 4.0, 1e-14));
        let uf = |x: &Taylor, _: &Taylor| *x;
        let j = scalar_field_jet(&plane, 0.2, 0.3, CurvatureField::Custom(&uf)).unwrap();
        assert_eq!(grad(Metric::First, &b, &j).unwrap(), [1.0, 0.0]);
        assert!(!b.second_nondegenerate());
        assert!(grad(Metric::Second, &b, &j).is_err());
    }

    struct PlaneChart;
    impl crate::surface::AnalyticChart for PlaneChart {
        fn eval(&self, u: &Taylor, v: &Taylor) -> TVec3 {
            [*u, *v, Taylor::zero(u.order())]
        }
    }

    #[test]
    fn difference_tensor_on_paraboloid_matches_closed_form() {
        // II = Id / w with w = sqrt(1 + x² + y²) is conformal; the graph
        // Christoffels are h_ij h_k / (1 + |∇h|²).
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(1.0, 1.0)).unwrap();
        let b = curvature_bundle(&p, 0.5, 0.0).unwrap();
        let l = difference_tensor(&b).unwrap();
        let expect = Christoffel([[[-0.6, 0.0], [0.0, -0.2]], [[0.0, -0.2], [-0.2, 0.0]]]);
        assert!(l.sub(&expect).max_abs() < 1e-14, "{l:?}");
    }

    #[test]
    fn constant_function_of_curvatures_has_flat_jet() {
        let p = builtin_surface(&SurfaceDescriptor::ellipsoid(1.0, 1.2, 1.5)).unwrap();
        let c = ConstantF(2.5);
        let j = scalar_field_jet(&p, 0.9, 2.0, CurvatureField::OfCurvatures(&c)).unwrap();
        assert_eq!(j, ScalarFieldJet::constant(2.5));
    }
}
