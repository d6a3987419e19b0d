//! Relative normals `y = f(H, K) N − grad_II f(H, K)` and the relative
//! invariants built from them, plus support functions and the
//! normal-matching correspondence between a surface and a convex gauge.

use alloc::boxed::Box;
use core::f64::consts::PI;

use crate::error::{GeomError, Result};
use crate::geometry::{
    grad, hessian_laplacian, local_geometry, local_geometry_at, CurvatureBundle, LocalGeometry, Metric,
    ScalarFieldJet,
};
use crate::linalg::{cross, dot, norm, scale, sub, Mat2, Vec3};
use crate::surface::{SurfaceKind, SurfacePatch};
use crate::taylor::{tadd, tscale, tsub, tvalue, Taylor, TVec3};

/// Value and partials through order 3 of `f(u, v)` at one point, where
/// `u` stands for `H` and `v` for `K`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HkPartials {
    pub f: f64,
    pub fu: f64,
    pub fv: f64,
    pub fuu: f64,
    pub fuv: f64,
    pub fvv: f64,
    pub fuuu: f64,
    pub fuuv: f64,
    pub fuvv: f64,
    pub fvvv: f64,
}

impl HkPartials {
    pub fn constant(f: f64) -> Self {
        Self { f, ..Self::default() }
    }

    /// Reads the partials off an expansion of order at least 3.
    pub fn from_taylor(t: &Taylor) -> Self {
        Self {
            f: t.value(),
            fu: t.partial(1, 0),
            fv: t.partial(0, 1),
            fuu: t.partial(2, 0),
            fuv: t.partial(1, 1),
            fvv: t.partial(0, 2),
            fuuu: t.partial(3, 0),
            fuuv: t.partial(2, 1),
            fuvv: t.partial(1, 2),
            fvvv: t.partial(0, 3),
        }
    }

    /// Order-3 expansion in the displacements `(δu, δv)`.
    pub fn expansion(&self) -> Taylor {
        let p = *self;
        Taylor::from_partials(3, |i, j| match (i, j) {
            (0, 0) => p.f,
            (1, 0) => p.fu,
            (0, 1) => p.fv,
            (2, 0) => p.fuu,
            (1, 1) => p.fuv,
            (0, 2) => p.fvv,
            (3, 0) => p.fuuu,
            (2, 1) => p.fuuv,
            (1, 2) => p.fuvv,
            _ => p.fvvv,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f: c * self.f,
            fu: c * self.fu,
            fv: c * self.fv,
            fuu: c * self.fuu,
            fuv: c * self.fuv,
            fvv: c * self.fvv,
            fuuu: c * self.fuuu,
            fuuv: c * self.fuuv,
            fuvv: c * self.fuvv,
            fvvv: c * self.fvvv,
        }
    }
}

/// A smooth function `f(u, v)` of mean and Gaussian curvature.
pub trait FunctionOfHK: Send + Sync {
    /// Domain guard; outside it [`partials`](Self::partials) fails.
    fn in_domain(&self, u: f64, v: f64) -> bool;

    fn partials(&self, u: f64, v: f64) -> Result<HkPartials>;

    fn value(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.partials(u, v)?.f)
    }
}

/// `f(H, K)` composed along the curvature expansions, truncated at order 3.
pub fn compose_hk(f: &dyn FunctionOfHK, h: &Taylor, k: &Taylor, u: f64, v: f64) -> Result<Taylor> {
    let p = f.partials(h.value(), k.value())?;
    let out = p.expansion().substitute(h, k).with_value(p.f);
    if !out.is_finite() {
        return Err(GeomError::NonFinite { u, v });
    }
    Ok(out)
}

/// `f_u(H, K)` and `f_v(H, K)` composed along the curvature expansions (order ≤ 2).
fn compose_first_partials(f: &dyn FunctionOfHK, h: &Taylor, k: &Taylor) -> Result<(Taylor, Taylor)> {
    let e = f.partials(h.value(), k.value())?.expansion();
    Ok((e.d_du().substitute(h, k), e.d_dv().substitute(h, k)))
}

/// The family `q_i |v|^α` with one constant per curvature region:
/// `q1` for `u > 0, v > 0`, `q2` for `u <= 0, v > 0`, `q3` for `v < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManhartF {
    pub alpha: f64,
    pub q: [f64; 3],
}

impl ManhartF {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, q: [1.0; 3] }
    }

    pub fn with_q(alpha: f64, q: [f64; 3]) -> Self {
        Self { alpha, q }
    }

    fn region_constant(&self, u: f64, v: f64) -> f64 {
        if v < 0.0 {
            self.q[2]
        } else if u > 0.0 {
            self.q[0]
        } else {
            self.q[1]
        }
    }
}

impl FunctionOfHK for ManhartF {
    fn in_domain(&self, u: f64, v: f64) -> bool {
        v != 0.0 && u.is_finite() && v.is_finite()
    }

    fn partials(&self, u: f64, v: f64) -> Result<HkPartials> {
        if !self.in_domain(u, v) {
            return Err(GeomError::DomainGuard { h: u, k: v });
        }
        let q = self.region_constant(u, v);
        let a = self.alpha;
        let s = v.signum();
        let av = v.abs();
        let p = |e: f64| libm::pow(av, e);
        Ok(HkPartials {
            f: q * p(a),
            fv: q * a * p(a - 1.0) * s,
            fvv: q * a * (a - 1.0) * p(a - 2.0),
            fvvv: q * a * (a - 1.0) * (a - 2.0) * p(a - 3.0) * s,
            ..HkPartials::default()
        })
    }
}

/// `f ≡ c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantF(pub f64);

impl FunctionOfHK for ConstantF {
    fn in_domain(&self, _u: f64, _v: f64) -> bool {
        true
    }

    fn partials(&self, _u: f64, _v: f64) -> Result<HkPartials> {
        Ok(HkPartials::constant(self.0))
    }
}

/// `c · g`.
pub struct ScaledF<'a> {
    pub factor: f64,
    pub inner: &'a dyn FunctionOfHK,
}

impl FunctionOfHK for ScaledF<'_> {
    fn in_domain(&self, u: f64, v: f64) -> bool {
        self.inner.in_domain(u, v)
    }

    fn partials(&self, u: f64, v: f64) -> Result<HkPartials> {
        Ok(self.inner.partials(u, v)?.scaled(self.factor))
    }
}

type TaylorFn = dyn Fn(&Taylor, &Taylor) -> Taylor + Send + Sync;

/// A closed-form `f` over Taylor numbers; partials come from forward-mode
/// differentiation. The guard requires a finite, nonzero value.
pub struct AutoDiffF {
    f: Box<TaylorFn>,
}

impl AutoDiffF {
    pub fn new(f: impl Fn(&Taylor, &Taylor) -> Taylor + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f) }
    }

    fn expand(&self, u: f64, v: f64) -> Taylor {
        (self.f)(&Taylor::var_u(u, 3), &Taylor::var_v(v, 3))
    }
}

impl FunctionOfHK for AutoDiffF {
    fn in_domain(&self, u: f64, v: f64) -> bool {
        let t = self.expand(u, v);
        t.is_finite() && t.value() != 0.0
    }

    fn partials(&self, u: f64, v: f64) -> Result<HkPartials> {
        let t = self.expand(u, v);
        if !(t.is_finite() && t.value() != 0.0) {
            return Err(GeomError::DomainGuard { h: u, k: v });
        }
        Ok(HkPartials::from_taylor(&t))
    }
}

/// Relative normal at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeNormalSample {
    pub y: Vec3,
    /// `f(H, K) = ⟨y, N⟩`.
    pub normal_part: f64,
    /// `−grad_II f(H, K)` in parameter components.
    pub tangential_part: [f64; 2],
}

/// Jets of the curvature fields and of `f`, `f_u`, `f_v` composed with them.
#[derive(Clone, Copy, Debug)]
pub struct RelativePoint {
    pub bundle: CurvatureBundle,
    pub partials: HkPartials,
    pub mean: ScalarFieldJet,
    pub gauss: ScalarFieldJet,
    pub f: ScalarFieldJet,
    pub fu: ScalarFieldJet,
    pub fv: ScalarFieldJet,
}

/// All second-order data around `(u, v)`; uses order-4 chart jets.
pub fn relative_point(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<RelativePoint> {
    let lg = local_geometry_at(patch, u, v, 4)?;
    relative_point_from_local(&lg, u, v, f)
}

pub fn relative_point_from_local(lg: &LocalGeometry, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<RelativePoint> {
    let bundle = CurvatureBundle::from_local(lg, u, v)?;
    if !bundle.second_nondegenerate() {
        return Err(GeomError::DegenerateSecondForm { u, v });
    }
    let partials = f.partials(lg.mean.value(), lg.gauss.value())?;
    let fc = compose_hk(f, &lg.mean, &lg.gauss, u, v)?;
    let (fu, fv) = compose_first_partials(f, &lg.mean, &lg.gauss)?;
    Ok(RelativePoint {
        bundle,
        partials,
        mean: ScalarFieldJet::from_taylor(&lg.mean)?,
        gauss: ScalarFieldJet::from_taylor(&lg.gauss)?,
        f: ScalarFieldJet::from_taylor(&fc)?,
        fu: ScalarFieldJet::from_taylor(&fu)?,
        fv: ScalarFieldJet::from_taylor(&fv)?,
    })
}

impl RelativePoint {
    pub fn grad_ii_f(&self) -> Result<[f64; 2]> {
        grad(Metric::Second, &self.bundle, &self.f)
    }

    pub fn normal_sample(&self) -> Result<RelativeNormalSample> {
        let g = self.grad_ii_f()?;
        let t = [-g[0], -g[1]];
        let y = crate::linalg::add(&scale(&self.bundle.normal, self.f.value), &self.bundle.push_forward(&t));
        Ok(RelativeNormalSample {
            y,
            normal_part: self.f.value,
            tangential_part: t,
        })
    }

    /// `f A + Hs^II_f − L(grad_II f, ·)`.
    pub fn shape_operator(&self) -> Result<Mat2> {
        let b = &self.bundle;
        let g = self.grad_ii_f()?;
        let (hs, _) = hessian_laplacian(Metric::Second, b, &self.f)?;
        let l = crate::geometry::difference_tensor(b)?;
        Ok(b.shape.scaled(self.f.value).add(&hs).sub(&l.partial_apply(&g)))
    }

    /// `f H + ½ Δ_II f − ¼ d log|K| (grad_II f)`.
    pub fn mean_curvature(&self) -> Result<f64> {
        let b = &self.bundle;
        let k = self.gauss.value;
        if k == 0.0 {
            return Err(GeomError::VanishingGaussCurvature { u: b.u, v: b.v });
        }
        let g = self.grad_ii_f()?;
        let (_, lap) = hessian_laplacian(Metric::Second, b, &self.f)?;
        let dlogk = (self.gauss.d1[0] * g[0] + self.gauss.d1[1] * g[1]) / k;
        Ok(self.f.value * b.mean + 0.5 * lap - 0.25 * dlogk)
    }
}

/// `y = f(H, K) N − grad_II f(H, K)` at `(u, v)`.
pub fn relative_normal(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<RelativeNormalSample> {
    let lg = local_geometry_at(patch, u, v, 3)?;
    let bundle = CurvatureBundle::from_local(&lg, u, v)?;
    if !bundle.second_nondegenerate() {
        return Err(GeomError::DegenerateSecondForm { u, v });
    }
    let fc = compose_hk(f, &lg.mean, &lg.gauss, u, v)?;
    let fjet = ScalarFieldJet {
        value: fc.value(),
        d1: [fc.partial(1, 0), fc.partial(0, 1)],
        d2: Mat2::ZERO,
    };
    let g = grad(Metric::Second, &bundle, &fjet)?;
    let t = [-g[0], -g[1]];
    Ok(RelativeNormalSample {
        y: crate::linalg::add(&scale(&bundle.normal, fjet.value), &bundle.push_forward(&t)),
        normal_part: fjet.value,
        tangential_part: t,
    })
}

/// Expansion of the relative normal field about the point.
///
/// Its order is `min(order of H, 3) − 1`; a chart jet of order 5 yields a
/// second-order expansion.
pub fn relative_normal_expansion(lg: &LocalGeometry, f: &dyn FunctionOfHK, u: f64, v: f64) -> Result<TVec3> {
    let fc = compose_hk(f, &lg.mean, &lg.gauss, u, v)?;
    let order = fc.order();
    if order == 0 {
        return Err(GeomError::UnsupportedOrder {
            requested: 3,
            available: 2,
        });
    }
    let o = order - 1;
    let [[l, m], [_, n]] = lg.second;
    let (l, m, n) = (l.truncate(o), m.truncate(o), n.truncate(o));
    let det = l * n - m * m;
    if !second_form_invertible(det.value(), l.value(), m.value(), n.value()) {
        return Err(GeomError::DegenerateSecondForm { u, v });
    }
    let inv_det = det.recip();
    let du = fc.d_du();
    let dv = fc.d_dv();
    let g0 = (n * du - m * dv) * inv_det;
    let g1 = (l * dv - m * du) * inv_det;
    let xu = lg.frame[0].map(|c| c.truncate(o));
    let xv = lg.frame[1].map(|c| c.truncate(o));
    let nn = lg.normal.map(|c| c.truncate(o));
    let tangential = tadd(&tscale(&xu, &g0), &tscale(&xv, &g1));
    Ok(tsub(&tscale(&nn, &fc.truncate(o)), &tangential))
}

fn second_form_invertible(det: f64, l: f64, m: f64, n: f64) -> bool {
    det.abs() > 1e-12 * (l * l + 2.0 * m * m + n * n)
}

/// Relative shape operator `A_y = −D y` in parameter components.
pub fn relative_shape_operator(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<Mat2> {
    relative_point(patch, u, v, f)?.shape_operator()
}

/// Relative shape operator from the derivative of the expanded relative
/// normal field, `A_y e_j = −I⁻¹ ⟨ξ_k, ∂_j y⟩`. Independent of the
/// Christoffel route; used as a cross-check.
pub fn relative_shape_operator_direct(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<Mat2> {
    let lg = local_geometry_at(patch, u, v, 4)?;
    let y = relative_normal_expansion(&lg, f, u, v)?;
    let dy = [
        [y[0].partial(1, 0), y[1].partial(1, 0), y[2].partial(1, 0)],
        [y[0].partial(0, 1), y[1].partial(0, 1), y[2].partial(0, 1)],
    ];
    let frame = [tvalue(&lg.frame[0]), tvalue(&lg.frame[1])];
    let mut rhs = [[0.0; 2]; 2];
    for (k, row) in rhs.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = -dot(&frame[k], &dy[j]);
        }
    }
    let first = Mat2([
        [lg.first[0][0].value(), lg.first[0][1].value()],
        [lg.first[1][0].value(), lg.first[1][1].value()],
    ]);
    let inv = first.inverse().ok_or(GeomError::DegenerateMetric { u, v })?;
    Ok(inv.mul(&Mat2(rhs)))
}

/// Relative mean curvature `H_y` by the closed formula in `f`, `Δ_II f` and `d log|K|`.
pub fn relative_mean_curvature(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<f64> {
    relative_point(patch, u, v, f)?.mean_curvature()
}

/// `⟨y, N⟩ |ξ_u × ξ_v|`, the relative area density with respect to `du dv`
/// after normalizing by the orientation, so `y = N` gives the Euclidean density.
pub fn relative_area_element(patch: &SurfacePatch, u: f64, v: f64, y: &Vec3) -> Result<f64> {
    let jet = patch.jet(u, v, 1)?;
    let xu = jet.partial(1, 0);
    let xv = jet.partial(0, 1);
    relative_area_from_frame(&xu, &xv, patch.sign(), y, u, v)
}

pub(crate) fn relative_area_from_frame(xu: &Vec3, xv: &Vec3, sign: f64, y: &Vec3, u: f64, v: f64) -> Result<f64> {
    let c = cross(xu, xv);
    let w = norm(&c);
    if w == 0.0 {
        return Err(GeomError::DegenerateMetric { u, v });
    }
    let d = sign * dot(y, &c);
    if d.abs() <= 1e-12 * norm(y) * w {
        return Err(GeomError::NotTransversal { u, v });
    }
    Ok(d)
}

/// Oriented unit normal; uses order-1 jets only.
pub fn unit_normal(patch: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
    let jet = patch.jet(u, v, 1)?;
    let c = cross(&jet.partial(1, 0), &jet.partial(0, 1));
    let w = norm(&c);
    if !(w > 0.0) {
        return Err(GeomError::DegenerateMetric { u, v });
    }
    Ok(scale(&c, patch.sign() / w))
}

/// Support function value and the tangential part of the position vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportSample {
    /// `ρ = ⟨P, −N⟩` with `P` measured from the origin.
    pub rho: f64,
    /// `Pᵗ` in space.
    pub tangential: Vec3,
    /// `Pᵗ` in parameter components.
    pub tangential_params: [f64; 2],
}

pub fn support_function(patch: &SurfacePatch, u: f64, v: f64, origin: &Vec3) -> Result<SupportSample> {
    let jet = patch.jet(u, v, 1)?;
    let xu = jet.partial(1, 0);
    let xv = jet.partial(0, 1);
    let c = cross(&xu, &xv);
    let w = norm(&c);
    if !(w > 0.0) {
        return Err(GeomError::DegenerateMetric { u, v });
    }
    let n = scale(&c, patch.sign() / w);
    let p = sub(&jet.position(), origin);
    let rho = -dot(&p, &n);
    let tangential = crate::linalg::add(&p, &scale(&n, rho));
    let first = Mat2::symmetric(dot(&xu, &xu), dot(&xu, &xv), dot(&xv, &xv));
    let inv = first.inverse().ok_or(GeomError::DegenerateMetric { u, v })?;
    let tangential_params = inv.apply(&[dot(&p, &xu), dot(&p, &xv)]);
    Ok(SupportSample {
        rho,
        tangential,
        tangential_params,
    })
}

const INVERSION_TOL: f64 = 1e-12;
const INVERSION_MAX_ITER: usize = 50;
const INVERSION_GRID: usize = 32;

fn require_ovaloid(patch: &SurfacePatch) -> Result<()> {
    if patch.kind().is_ovaloid() {
        Ok(())
    } else {
        Err(GeomError::InvalidArgument(
            "Gauss map inversion needs a built-in sphere or ellipsoid".into(),
        ))
    }
}

fn normalize_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = libm::fmod(theta, 2.0 * PI);
    let mut p = phi;
    if t < 0.0 {
        t += 2.0 * PI;
    }
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    p = libm::fmod(p, 2.0 * PI);
    if p < 0.0 {
        p += 2.0 * PI;
    }
    (t, p)
}

/// Gauss-Newton on `N(θ, φ) = n`. Returns the best point and its residual.
fn newton_normal(patch: &SurfacePatch, n: &Vec3, start: (f64, f64)) -> (f64, f64, f64) {
    let (mut t, mut p) = start;
    let mut best = (t, p, f64::INFINITY);
    for _ in 0..INVERSION_MAX_ITER {
        let Ok(lg) = patch.jet(t, p, 2).and_then(|j| local_geometry(&j, patch.sign(), t, p)) else {
            break;
        };
        let nv = tvalue(&lg.normal);
        let r = sub(&nv, n);
        let res = norm(&r);
        if res < best.2 {
            best = (t, p, res);
        }
        if res <= INVERSION_TOL {
            break;
        }
        let jt = [lg.normal[0].partial(1, 0), lg.normal[1].partial(1, 0), lg.normal[2].partial(1, 0)];
        let jp = [lg.normal[0].partial(0, 1), lg.normal[1].partial(0, 1), lg.normal[2].partial(0, 1)];
        let a = dot(&jt, &jt);
        let b = dot(&jt, &jp);
        let c = dot(&jp, &jp);
        let damp = 1e-14 * (a + c);
        let m = Mat2::symmetric(a + damp, b, c + damp);
        let Some(inv) = m.inverse() else { break };
        let step = inv.apply(&[-dot(&jt, &r), -dot(&jp, &r)]);
        let (nt, np) = normalize_angles(t + step[0], p + step[1]);
        t = nt;
        p = np;
    }
    best
}

/// Parameters where the ovaloid's oriented unit normal equals `n`.
///
/// Starts Gauss-Newton at the spherical angles of `−n`; falls back to a
/// coarse grid search when that stalls. Pole normals return `φ = 0`.
pub fn gauss_map_inverse(ovaloid: &SurfacePatch, n: &Vec3) -> Result<(f64, f64)> {
    let m = -ovaloid.sign();
    let d = scale(n, m);
    let theta = libm::acos(d[2].clamp(-1.0, 1.0));
    let phi = libm::atan2(d[1], d[0]);
    gauss_map_inverse_from(ovaloid, n, normalize_angles(theta, phi))
}

/// As [`gauss_map_inverse`] with a caller-supplied starting point.
pub fn gauss_map_inverse_from(ovaloid: &SurfacePatch, n: &Vec3, start: (f64, f64)) -> Result<(f64, f64)> {
    require_ovaloid(ovaloid)?;
    let len = norm(n);
    if !((len - 1.0).abs() < 1e-9) {
        return Err(GeomError::InvalidArgument("normal must have unit length".into()));
    }
    let n = &scale(n, 1.0 / len);
    for theta in [0.0, PI] {
        if (pole_normal(ovaloid, theta)?.iter().zip(n).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max) <= INVERSION_TOL {
            return Ok((theta, 0.0));
        }
    }
    let (t, p, res) = newton_normal(ovaloid, n, start);
    if res <= INVERSION_TOL {
        return Ok((t, p));
    }
    let mut seed = (t, p, res);
    let mut grid_best = f64::INFINITY;
    for i in 0..INVERSION_GRID {
        let th = PI * (i as f64 + 0.5) / INVERSION_GRID as f64;
        for j in 0..INVERSION_GRID {
            let ph = 2.0 * PI * j as f64 / INVERSION_GRID as f64;
            if let Ok(nv) = unit_normal(ovaloid, th, ph) {
                let r = norm(&sub(&nv, n));
                if r < grid_best {
                    grid_best = r;
                    seed = (th, ph, r);
                }
            }
        }
    }
    let (t2, p2, res2) = newton_normal(ovaloid, n, (seed.0, seed.1));
    if res2 <= INVERSION_TOL {
        return Ok((t2, p2));
    }
    Err(GeomError::Inversion { residual: res.min(res2) })
}

/// Normal at a pole of the polar chart, from symmetric samples around it.
fn pole_normal(patch: &SurfacePatch, theta: f64) -> Result<Vec3> {
    let delta = 1e-4;
    let t = if theta == 0.0 { delta } else { theta - delta };
    let mut acc = [0.0; 3];
    for k in 0..4 {
        let nv = unit_normal(patch, t, k as f64 * 0.5 * PI)?;
        acc = crate::linalg::add(&acc, &nv);
    }
    Ok(scale(&acc, 1.0 / norm(&acc)))
}

/// A vector field along a surface, evaluated at chart parameters.
pub trait VectorField: Send + Sync {
    fn at(&self, patch: &SurfacePatch, u: f64, v: f64) -> Result<Vec3>;
}

/// `y = N`.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitNormal;

impl VectorField for UnitNormal {
    fn at(&self, patch: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
        unit_normal(patch, u, v)
    }
}

/// `y = −(P − origin)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinusPosition {
    pub origin: Vec3,
}

impl VectorField for MinusPosition {
    fn at(&self, patch: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
        Ok(sub(&self.origin, &patch.position(u, v)?))
    }
}

/// `y = f(H, K) N − grad_II f(H, K)`.
#[derive(Clone, Copy)]
pub struct RelativeNormalField<'a>(pub &'a dyn FunctionOfHK);

impl VectorField for RelativeNormalField<'_> {
    fn at(&self, patch: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
        Ok(relative_normal(patch, u, v, self.0)?.y)
    }
}

/// The gauge field at the gauge point whose oriented normal matches the
/// target's normal at `(u, v)`, as a free vector.
pub fn peterson_transfer(gauge: &SurfacePatch, y_on_gauge: &dyn VectorField, target: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
    let n = unit_normal(target, u, v)?;
    let (a, b) = gauss_map_inverse(gauge, &n)?;
    y_on_gauge.at(gauge, a, b)
}

/// As [`peterson_transfer`], with Newton started at `start` on the gauge.
pub fn peterson_transfer_from(
    gauge: &SurfacePatch,
    y_on_gauge: &dyn VectorField,
    target: &SurfacePatch,
    u: f64,
    v: f64,
    start: (f64, f64),
) -> Result<Vec3> {
    let n = unit_normal(target, u, v)?;
    let (a, b) = gauss_map_inverse_from(gauge, &n, start)?;
    y_on_gauge.at(gauge, a, b)
}

/// `F(N) |ξ_u × ξ_v|` with `F` evaluated at the target's oriented unit normal.
pub fn anisotropic_area_density(target: &SurfacePatch, u: f64, v: f64, gauge_support: &dyn Fn(&Vec3) -> f64) -> Result<f64> {
    let jet = target.jet(u, v, 1)?;
    let c = cross(&jet.partial(1, 0), &jet.partial(0, 1));
    let w = norm(&c);
    if !(w > 0.0) {
        return Err(GeomError::DegenerateMetric { u, v });
    }
    let n = scale(&c, target.sign() / w);
    Ok(gauge_support(&n) * w)
}

/// Support function `h(n) = sqrt(a² n₁² + b² n₂² + c² n₃²)` of a centered ellipsoid.
pub fn ellipsoid_support(semi_axes: &[f64; 3], n: &Vec3) -> f64 {
    let [a, b, c] = semi_axes;
    libm::sqrt(a * a * n[0] * n[0] + b * b * n[1] * n[1] + c * c * n[2] * n[2])
}

/// Support function of a built-in ovaloid gauge about its center.
pub fn gauge_support(kind: &SurfaceKind, n: &Vec3) -> Option<f64> {
    match kind {
        SurfaceKind::Sphere { radius, .. } => Some(*radius),
        SurfaceKind::Ellipsoid { semi_axes } => Some(ellipsoid_support(semi_axes, n)),
        _ => None,
    }
}
