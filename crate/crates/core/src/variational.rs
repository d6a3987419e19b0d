//! Euler-Lagrange densities of curvature energies, normal variations of
//! `H` and `K`, deformation families and finite-difference first
//! variations, and the algebraic conditions singling out the power family.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{GeomError, Result};
use crate::geometry::{
    covariant_hessian, field_expansion, grad, hessian_laplacian, local_geometry, local_geometry_at, CurvatureBundle,
    Metric, ScalarField, ScalarFieldJet,
};
use crate::linalg::{least_squares, Vec3};
use crate::quadrature::{pairwise_sum, rect_grid, QuadratureGrid};
use crate::relative::{
    gauss_map_inverse_from, relative_area_from_frame, relative_normal, relative_normal_expansion, relative_point,
    FunctionOfHK, ManhartF, RelativePoint,
};
use crate::surface::{
    builtin_surface, Chart, Jet, ParaboloidFamilySpec, Rect, SurfaceDescriptor, SurfaceKind, SurfacePatch,
};
use crate::taylor::{tadd, tscale, ttruncate, Taylor};

/// `A exp(1 − 1/(1 − s²))` for `s < 1`, zero beyond, with `s` the scaled
/// parameter distance from `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothBump {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

impl SmoothBump {
    pub fn new(center: [f64; 2], radius: f64, amplitude: f64) -> Self {
        Self {
            center,
            radius,
            amplitude,
        }
    }
}

impl ScalarField for SmoothBump {
    fn eval(&self, u: &Taylor, v: &Taylor) -> Taylor {
        let du = *u - self.center[0];
        let dv = *v - self.center[1];
        let s2 = (du * du + dv * dv) / (self.radius * self.radius);
        if s2.value() >= 1.0 {
            return Taylor::zero(u.order().min(v.order()));
        }
        let inner = (-(s2) + 1.0).recip();
        (-inner + 1.0).exp().scale(self.amplitude)
    }

    fn support(&self) -> Option<Rect> {
        Some(Rect::around(self.center, self.radius))
    }
}

/// `a x⁴ + b x² y² + c y⁴` in the chart parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticField {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ScalarField for QuarticField {
    fn eval(&self, x: &Taylor, y: &Taylor) -> Taylor {
        let x2 = *x * *x;
        let y2 = *y * *y;
        (x2 * x2).scale(self.a) + (x2 * y2).scale(self.b) + (y2 * y2).scale(self.c)
    }
}

/// `Σ cᵢ φᵢ`.
#[derive(Clone)]
pub struct FieldSum(pub Vec<(f64, Arc<dyn ScalarField>)>);

impl ScalarField for FieldSum {
    fn eval(&self, u: &Taylor, v: &Taylor) -> Taylor {
        let mut acc = Taylor::zero(u.order().min(v.order()));
        for (c, f) in &self.0 {
            acc += f.eval(u, v).scale(*c);
        }
        acc
    }

    fn support(&self) -> Option<Rect> {
        let mut out: Option<Rect> = None;
        for (_, f) in &self.0 {
            let r = f.support()?;
            out = Some(match out {
                None => r,
                Some(o) => Rect {
                    u0: o.u0.min(r.u0),
                    u1: o.u1.max(r.u1),
                    v0: o.v0.min(r.v0),
                    v1: o.v1.max(r.v1),
                },
            });
        }
        out
    }
}

/// Direction of a deformation `μ_t = ξ + t φ d`, with `d` taken on the undeformed surface.
#[derive(Clone)]
pub enum DeformationMode {
    EuclideanNormal,
    RelativeNormal(Arc<dyn FunctionOfHK>),
}

#[derive(Clone)]
pub struct DeformationSpec {
    pub bump: Arc<dyn ScalarField>,
    pub mode: DeformationMode,
    /// Base step `h` of the t-stencil.
    pub step: f64,
}

impl DeformationSpec {
    /// Step `h = 1e-3` times the support diameter (or `1e-3` without support).
    pub fn new(bump: Arc<dyn ScalarField>, mode: DeformationMode) -> Self {
        let scale = bump.support().map(|r| r.diameter()).unwrap_or(1.0);
        Self {
            bump,
            mode,
            step: 1e-3 * scale,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    /// `[−2h, −h, h, 2h]`.
    pub fn t_schedule(&self) -> [f64; 4] {
        let h = self.step;
        [-2.0 * h, -h, h, 2.0 * h]
    }

    fn check_support(&self, patch: &SurfacePatch) -> Result<()> {
        if let Some(r) = self.bump.support() {
            if !patch.domain().contains_strictly(&r) {
                return Err(GeomError::InvalidArgument(
                    "bump support must lie strictly inside the chart domain".into(),
                ));
            }
        }
        Ok(())
    }
}

struct DeformedChart {
    base: SurfacePatch,
    bump: Arc<dyn ScalarField>,
    mode: DeformationMode,
    t: f64,
}

impl DeformedChart {
    fn outside_support(&self, u: f64, v: f64) -> bool {
        match self.bump.support() {
            Some(r) => u <= r.u0 || u >= r.u1 || v <= r.v0 || v >= r.v1,
            None => false,
        }
    }
}

impl Chart for DeformedChart {
    fn jet(&self, u: f64, v: f64, order: usize) -> Result<Jet> {
        if self.t == 0.0 || self.outside_support(u, v) {
            return self.base.jet(u, v, order);
        }
        let phi = field_expansion(self.bump.as_ref(), u, v, order);
        if (0..=order).all(|d| (0..=d).all(|j| phi.coeff(d - j, j) == 0.0)) {
            return self.base.jet(u, v, order);
        }
        let amp = phi.scale(self.t);
        match &self.mode {
            DeformationMode::EuclideanNormal => {
                let jet = self.base.jet(u, v, (order + 1).max(2))?;
                let lg = local_geometry(&jet, self.base.sign(), u, v)?;
                let pos = ttruncate(jet.expansion(), order);
                let n = ttruncate(&lg.normal, order);
                Ok(Jet::new(tadd(&pos, &tscale(&n, &amp))))
            }
            DeformationMode::RelativeNormal(f) => {
                if order > 2 {
                    return Err(GeomError::UnsupportedOrder {
                        requested: order,
                        available: 2,
                    });
                }
                let jet = self.base.jet(u, v, order + 3)?;
                let lg = local_geometry(&jet, self.base.sign(), u, v)?;
                let y = ttruncate(&relative_normal_expansion(&lg, f.as_ref(), u, v)?, order);
                let pos = ttruncate(jet.expansion(), order);
                Ok(Jet::new(tadd(&pos, &tscale(&y, &amp))))
            }
        }
    }

    fn max_order(&self) -> usize {
        match self.mode {
            DeformationMode::EuclideanNormal => self.base.max_jet_order().saturating_sub(1),
            DeformationMode::RelativeNormal(_) => self.base.max_jet_order().saturating_sub(3).min(2),
        }
    }
}

fn deformed_patch(patch: &SurfacePatch, spec: &DeformationSpec, t: f64) -> SurfacePatch {
    let chart = DeformedChart {
        base: patch.clone(),
        bump: spec.bump.clone(),
        mode: spec.mode.clone(),
        t,
    };
    SurfacePatch::new(Arc::new(chart), *patch.domain(), patch.orientation(), patch.is_closed(), SurfaceKind::Deformed)
}

/// Sample points of the support used for the degeneracy check.
fn support_samples(patch: &SurfacePatch, spec: &DeformationSpec) -> Vec<[f64; 2]> {
    let r = spec.bump.support().unwrap_or_else(|| {
        let d = patch.domain();
        let pad = |a: f64, b: f64| (a + 0.05 * (b - a), b - 0.05 * (b - a));
        let (u0, u1) = pad(d.u.min, d.u.max);
        let (v0, v1) = pad(d.v.min, d.v.max);
        Rect { u0, u1, v0, v1 }
    });
    let n = 9;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let a = (i as f64 + 0.5) / n as f64;
            let b = (j as f64 + 0.5) / n as f64;
            out.push([r.u0 + a * (r.u1 - r.u0), r.v0 + b * (r.v1 - r.v0)]);
        }
    }
    out
}

fn forms_det(patch: &SurfacePatch, u: f64, v: f64) -> Result<(f64, f64)> {
    let lg = local_geometry_at(patch, u, v, 2)?;
    let d1 = lg.first[0][0].value() * lg.first[1][1].value() - lg.first[0][1].value() * lg.first[0][1].value();
    let d2 = lg.second[0][0].value() * lg.second[1][1].value() - lg.second[0][1].value() * lg.second[0][1].value();
    Ok((d1, d2))
}

fn deformation_ok(patch: &SurfacePatch, deformed: &SurfacePatch, samples: &[[f64; 2]]) -> bool {
    samples.iter().all(|p| {
        let Ok((b1, b2)) = forms_det(patch, p[0], p[1]) else {
            return true;
        };
        match forms_det(deformed, p[0], p[1]) {
            Ok((d1, d2)) => d1 > 1e-3 * b1 && (b2 == 0.0 || (d2 * b2 > 0.0 && d2.abs() > 1e-3 * b2.abs())),
            Err(_) => false,
        }
    })
}

/// The deformed surface `μ_t`; jets compose the base jets with the bump analytically.
pub fn deform(patch: &SurfacePatch, spec: &DeformationSpec, t: f64) -> Result<SurfacePatch> {
    spec.check_support(patch)?;
    if t == 0.0 {
        return Ok(patch.clone());
    }
    let samples = support_samples(patch, spec);
    let out = deformed_patch(patch, spec, t);
    if deformation_ok(patch, &out, &samples) {
        return Ok(out);
    }
    let mut s = t;
    for _ in 0..40 {
        s *= 0.5;
        if deformation_ok(patch, &deformed_patch(patch, spec, s), &samples) {
            return Err(GeomError::StepTooLarge {
                t,
                suggested: s.abs(),
            });
        }
    }
    Err(GeomError::StepTooLarge { t, suggested: 0.0 })
}

/// Gradients, Laplacians and cross terms of `H` and `K` at one point.
struct CurvatureCalculus {
    ii_hh: f64,
    ii_hk: f64,
    ii_kk: f64,
    i_hh: f64,
    i_hk: f64,
    i_kk: f64,
    lap_ii_h: f64,
    lap_ii_k: f64,
    lap_h: f64,
    lap_k: f64,
}

impl CurvatureCalculus {
    fn new(rp: &RelativePoint) -> Result<Self> {
        let b = &rp.bundle;
        let gh2 = grad(Metric::Second, b, &rp.mean)?;
        let gk2 = grad(Metric::Second, b, &rp.gauss)?;
        let gh1 = grad(Metric::First, b, &rp.mean)?;
        let gk1 = grad(Metric::First, b, &rp.gauss)?;
        let d = |j: &ScalarFieldJet, g: &[f64; 2]| j.d1[0] * g[0] + j.d1[1] * g[1];
        Ok(Self {
            ii_hh: d(&rp.mean, &gh2),
            ii_hk: d(&rp.mean, &gk2),
            ii_kk: d(&rp.gauss, &gk2),
            i_hh: d(&rp.mean, &gh1),
            i_hk: d(&rp.mean, &gk1),
            i_kk: d(&rp.gauss, &gk1),
            lap_ii_h: hessian_laplacian(Metric::Second, b, &rp.mean)?.1,
            lap_ii_k: hessian_laplacian(Metric::Second, b, &rp.gauss)?.1,
            lap_h: hessian_laplacian(Metric::First, b, &rp.mean)?.1,
            lap_k: hessian_laplacian(Metric::First, b, &rp.gauss)?.1,
        })
    }
}

/// Both densities at a point, each by two routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Densities {
    /// Expanded in `f`-partials and curvature derivatives.
    pub phi: f64,
    /// `−2 H_y`.
    pub phi_from_mean: f64,
    /// Expanded in `f`-partials and curvature derivatives.
    pub psi: f64,
    /// `f_u(2H² − K) + 2HK f_v − 2fH + ½ Δ(f_u) + K tr_II Hess(f_v)`.
    pub psi_compact: f64,
}

pub fn densities_at(rp: &RelativePoint) -> Result<Densities> {
    let b = &rp.bundle;
    let (h, k) = (b.mean, b.gauss);
    if k == 0.0 {
        return Err(GeomError::VanishingGaussCurvature { u: b.u, v: b.v });
    }
    let p = &rp.partials;
    let c = CurvatureCalculus::new(rp)?;
    let phi = -2.0 * p.f * h - p.fu * c.lap_ii_h - p.fv * c.lap_ii_k - p.fuu * c.ii_hh
        + (p.fu / (2.0 * k) - 2.0 * p.fuv) * c.ii_hk
        + (p.fv / (2.0 * k) - p.fvv) * c.ii_kk;
    let psi = p.fu * (2.0 * h * h - k) + 2.0 * h * k * p.fv - 2.0 * p.f * h
        + 0.5 * p.fuuu * c.i_hh
        + p.fuuv * c.i_hk
        + 0.5 * p.fuvv * c.i_kk
        + k * p.fuuv * c.ii_hh
        + (2.0 * k * p.fuvv + 0.5 * p.fuv) * c.ii_hk
        + (k * p.fvvv + 0.5 * p.fvv) * c.ii_kk
        + 0.5 * p.fuu * c.lap_h
        + 0.5 * p.fuv * c.lap_k
        + k * p.fuv * c.lap_ii_h
        + k * p.fvv * c.lap_ii_k;
    let (_, lap_fu) = hessian_laplacian(Metric::First, b, &rp.fu)?;
    let hess_fv = covariant_hessian(&b.christoffel_first, &rp.fv);
    let ii_inv = b.metric_inverse(Metric::Second)?;
    let psi_compact = p.fu * (2.0 * h * h - k) + 2.0 * h * k * p.fv - 2.0 * p.f * h
        + 0.5 * lap_fu
        + k * ii_inv.mul(&hess_fv).trace();
    Ok(Densities {
        phi,
        phi_from_mean: -2.0 * rp.mean_curvature()?,
        psi,
        psi_compact,
    })
}

pub fn densities(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<Densities> {
    densities_at(&relative_point(patch, u, v, f)?)
}

/// `Φ`, the density of the first variation of relative area per unit of `φ f`.
pub fn phi_density(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<f64> {
    Ok(densities(patch, u, v, f)?.phi)
}

/// `Ψ`, the density of the first variation of `∫ f(H, K) dΩ` per unit normal displacement.
pub fn psi_density(patch: &SurfacePatch, u: f64, v: f64, f: &dyn FunctionOfHK) -> Result<f64> {
    Ok(densities(patch, u, v, f)?.psi)
}

/// `|Φ (1 − α) − Ψ| / (|Φ| + |Ψ| + 1e-12)` for the power family.
pub fn manhart_closure_residual(patch: &SurfacePatch, u: f64, v: f64, alpha: f64) -> Result<f64> {
    let d = densities(patch, u, v, &ManhartF::new(alpha))?;
    Ok((d.phi * (1.0 - alpha) - d.psi).abs() / (d.phi.abs() + d.psi.abs() + 1e-12))
}

/// First-order variations `(δH, δK)` under the normal displacement `ψ N`:
/// `δH = ½ Δψ + (2H² − K) ψ`, `δK = 2KHψ + K Δ_II ψ + ½ II(∇_II ψ, ∇_II K)`.
pub fn curvature_variation(patch: &SurfacePatch, u: f64, v: f64, psi: &dyn ScalarField) -> Result<(f64, f64)> {
    let lg = local_geometry_at(patch, u, v, 3)?;
    let b = CurvatureBundle::from_local(&lg, u, v)?;
    curvature_variation_at(&b, &[lg.gauss.partial(1, 0), lg.gauss.partial(0, 1)], psi)
}

fn curvature_variation_at(b: &CurvatureBundle, dk: &[f64; 2], psi: &dyn ScalarField) -> Result<(f64, f64)> {
    if b.gauss == 0.0 {
        return Err(GeomError::VanishingGaussCurvature { u: b.u, v: b.v });
    }
    let j = ScalarFieldJet::from_taylor(&field_expansion(psi, b.u, b.v, 2))?;
    let (h, k) = (b.mean, b.gauss);
    let (_, lap) = hessian_laplacian(Metric::First, b, &j)?;
    let (_, lap2) = hessian_laplacian(Metric::Second, b, &j)?;
    let g = grad(Metric::Second, b, &j)?;
    let dh = 0.5 * lap + (2.0 * h * h - k) * j.value;
    let dk = 2.0 * k * h * j.value + k * lap2 + 0.5 * (dk[0] * g[0] + dk[1] * g[1]);
    Ok((dh, dk))
}

/// Fitted quadratic coefficients of `δH` and `δK` near the origin of the
/// paraboloid under the quartic normal deformation, against the closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticFitReport {
    /// Coefficients of `x²` and `y²` in `δH`, from [`curvature_variation`].
    pub dh: [f64; 2],
    pub dk: [f64; 2],
    /// The same coefficients from t-differences of the deformed family.
    pub dh_family: [f64; 2],
    pub dk_family: [f64; 2],
    /// `(6a + b, b + 6c)`.
    pub dh_expected: [f64; 2],
    /// `(12aℓ₂ + 2bℓ₁, 2bℓ₂ + 12cℓ₁)`.
    pub dk_expected: [f64; 2],
    /// Largest absolute deviation of either route.
    pub max_deviation: f64,
}

fn fit_quadratic(samples: &[([f64; 2], f64)], r: f64) -> Result<[f64; 2]> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|(p, _)| {
            let (s, t) = (p[0] / r, p[1] / r);
            alloc::vec![1.0, s * s, t * t, s * t, s * s * s * s, s * s * t * t, t * t * t * t]
        })
        .collect();
    let rhs: Vec<f64> = samples.iter().map(|(_, y)| *y).collect();
    let c = least_squares(&rows, &rhs, 7).ok_or_else(|| GeomError::InvalidArgument("rank-deficient fit".into()))?;
    Ok([c[1] / (r * r), c[2] / (r * r)])
}

/// Probe radius for [`quartic_expansion_check`]; the fit error scales as `r⁴`.
pub const EQ9_PROBE_RADIUS: f64 = 3e-3;

pub fn quartic_expansion_check(spec: &ParaboloidFamilySpec, probe_radius: f64) -> Result<QuarticFitReport> {
    spec.validate()?;
    if !(probe_radius > 0.0) {
        return Err(GeomError::InvalidArgument("probe radius must be positive".into()));
    }
    let base = builtin_surface(&SurfaceDescriptor::paraboloid(spec.l1, spec.l2))?;
    let psi = QuarticField {
        a: spec.a,
        b: spec.b,
        c: spec.c,
    };
    let h = 1e-3;
    let fam = |t: f64| -> Result<SurfacePatch> {
        builtin_surface(&SurfaceDescriptor::paraboloid_family(ParaboloidFamilySpec { t, ..*spec }))
    };
    let stencil: Vec<(f64, SurfacePatch)> = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)]
        .iter()
        .map(|(k, w)| Ok((*w, fam(k * h)?)))
        .collect::<Result<_>>()?;
    let n = 9;
    let mut dh_s = Vec::new();
    let mut dk_s = Vec::new();
    let mut dh_f = Vec::new();
    let mut dk_f = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = probe_radius * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let y = probe_radius * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
            let (dh, dk) = curvature_variation(&base, x, y, &psi)?;
            dh_s.push(([x, y], dh));
            dk_s.push(([x, y], dk));
            let (mut fh, mut fk) = (0.0, 0.0);
            for (w, p) in &stencil {
                let lg = local_geometry_at(p, x, y, 2)?;
                fh += w * lg.mean.value();
                fk += w * lg.gauss.value();
            }
            dh_f.push(([x, y], fh / (12.0 * h)));
            dk_f.push(([x, y], fk / (12.0 * h)));
        }
    }
    let (a, b, c, l1, l2) = (spec.a, spec.b, spec.c, spec.l1, spec.l2);
    let dh_expected = [6.0 * a + b, b + 6.0 * c];
    let dk_expected = [12.0 * a * l2 + 2.0 * b * l1, 2.0 * b * l2 + 12.0 * c * l1];
    let report = QuarticFitReport {
        dh: fit_quadratic(&dh_s, probe_radius)?,
        dk: fit_quadratic(&dk_s, probe_radius)?,
        dh_family: fit_quadratic(&dh_f, probe_radius)?,
        dk_family: fit_quadratic(&dk_f, probe_radius)?,
        dh_expected,
        dk_expected,
        max_deviation: 0.0,
    };
    let mut dev: f64 = 0.0;
    for k in 0..2 {
        for (got, want) in [
            (report.dh[k], dh_expected[k]),
            (report.dk[k], dk_expected[k]),
            (report.dh_family[k], dh_expected[k]),
            (report.dk_family[k], dk_expected[k]),
        ] {
            dev = dev.max((got - want).abs());
        }
    }
    Ok(QuarticFitReport {
        max_deviation: dev,
        ..report
    })
}

/// Functionals whose first variation is taken by differencing in `t`.
#[derive(Clone, Copy)]
pub enum Functional {
    /// `∫ f(H̃, K̃) dΩ̃`, each deformed surface with its own curvatures.
    CurvatureEnergy,
    /// Relative area of `μ_t(M)` for the field `N_f` of `M` itself,
    /// carried over by normal matching; needs `M` to be a built-in ovaloid.
    RelativeAreaFrozen,
}

/// A t-differenced first variation with its half-step companion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdVariation {
    pub value: f64,
    pub half_step: f64,
    pub step: f64,
}

impl FdVariation {
    /// Richardson extrapolation `D(h/2) + (D(h/2) − D(h)) / 15` of the 4th-order stencil.
    pub fn extrapolated(&self) -> f64 {
        self.half_step + (self.half_step - self.value) / 15.0
    }

    /// `|D(h) − D(h/2)| / |D(h/2)|`.
    pub fn step_change(&self) -> f64 {
        (self.value - self.half_step).abs() / self.half_step.abs().max(f64::MIN_POSITIVE)
    }
}

fn functional_value(
    functional: Functional,
    base: &SurfacePatch,
    deformed: &SurfacePatch,
    grid: &QuadratureGrid,
    f: &dyn FunctionOfHK,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(grid.nodes.len());
    for (p, w) in grid.nodes.iter().zip(&grid.weights) {
        let (u, v) = (p[0], p[1]);
        let val = match functional {
            Functional::CurvatureEnergy => {
                let lg = local_geometry_at(deformed, u, v, 2)?;
                f.value(lg.mean.value(), lg.gauss.value())? * lg.area_density.value()
            }
            Functional::RelativeAreaFrozen => {
                let jet = deformed.jet(u, v, 1)?;
                let xu = jet.partial(1, 0);
                let xv = jet.partial(0, 1);
                let c = crate::linalg::cross(&xu, &xv);
                let n = crate::linalg::scale(&c, deformed.sign() / crate::linalg::norm(&c));
                let (a, b) = gauss_map_inverse_from(base, &n, (u, v))?;
                let y = relative_normal(base, a, b, f)?.y;
                relative_area_from_frame(&xu, &xv, deformed.sign(), &y, u, v)?
            }
        };
        terms.push(w * val);
    }
    Ok(pairwise_sum(&terms))
}

fn support_grid(patch: &SurfacePatch, spec: &DeformationSpec, resolution: usize) -> Result<QuadratureGrid> {
    let r = spec.bump.support().ok_or_else(|| {
        GeomError::InvalidArgument("first variations need a bump with compact support".into())
    })?;
    spec.check_support(patch)?;
    Ok(rect_grid(&r, resolution))
}

/// 4th-order central difference `(−A(2h) + 8A(h) − 8A(−h) + A(−2h)) / 12h`
/// of the chosen functional, plus the same at `h/2`.
pub fn fd_first_variation(
    functional: Functional,
    patch: &SurfacePatch,
    spec: &DeformationSpec,
    f: &dyn FunctionOfHK,
    resolution: usize,
) -> Result<FdVariation> {
    if matches!(functional, Functional::RelativeAreaFrozen) && !patch.kind().is_ovaloid() {
        return Err(GeomError::InvalidArgument(
            "frozen relative area needs a built-in ovaloid as gauge".into(),
        ));
    }
    let grid = support_grid(patch, spec, resolution)?;
    let diff = |h: f64| -> Result<f64> {
        let mut acc = [0.0; 4];
        for (slot, k) in acc.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            let d = deform(patch, spec, k * h)?;
            *slot = functional_value(functional, patch, &d, &grid, f)?;
        }
        Ok((acc[0] - 8.0 * acc[1] + 8.0 * acc[2] - acc[3]) / (12.0 * h))
    };
    Ok(FdVariation {
        value: diff(spec.step)?,
        half_step: diff(0.5 * spec.step)?,
        step: spec.step,
    })
}

/// `∫ φ f Ψ dΩ` and `−2 ∫ φ H_y dΩ_y` over the bump support.
pub fn analytic_variations(
    patch: &SurfacePatch,
    bump: &dyn ScalarField,
    f: &dyn FunctionOfHK,
    grid: &QuadratureGrid,
) -> Result<(f64, f64)> {
    let mut df = Vec::with_capacity(grid.nodes.len());
    let mut da = Vec::with_capacity(grid.nodes.len());
    for (p, w) in grid.nodes.iter().zip(&grid.weights) {
        let (u, v) = (p[0], p[1]);
        let phi = field_expansion(bump, u, v, 0).value();
        if phi == 0.0 {
            continue;
        }
        let rp = relative_point(patch, u, v, f)?;
        let d = densities_at(&rp)?;
        let b = &rp.bundle;
        let dens = rp.f.value * b.area_density;
        df.push(w * phi * d.psi * dens);
        da.push(w * phi * d.phi_from_mean * dens);
    }
    Ok((pairwise_sum(&df), pairwise_sum(&da)))
}

/// Outcome of comparing the two first variations for the power family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationReport {
    pub alpha: f64,
    /// `1 / (1 − α)`.
    pub c_expected: f64,
    /// Extrapolated from the steps `h` and `h/2`.
    pub df_fd: f64,
    pub df_fd_step: f64,
    pub df_fd_half_step: f64,
    pub df_analytic: f64,
    /// `df_analytic` on the grid of half the resolution.
    pub df_analytic_coarse: f64,
    pub darea_analytic: f64,
    pub darea_fd: Option<f64>,
    pub residuals: VariationResiduals,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationResiduals {
    /// `|dArea_analytic − dF_fd / (1 − α)| / |dF_fd|`.
    pub identity: f64,
    /// `|dF_fd − dF_analytic| / |dF_analytic|`.
    pub fd_vs_analytic: f64,
    /// `|dArea_fd − dArea_analytic| / |dArea_analytic|`.
    pub frozen: Option<f64>,
    /// Relative change of the raw stencil between steps `h` and `h/2`.
    pub step_change: f64,
    /// `step_change` exceeds a tenth of [`IDENTITY_BUDGET`].
    pub step_sensitive: bool,
    /// Relative change of `dF_analytic` between grid resolutions.
    pub grid_change: f64,
}

impl VariationReport {
    /// `dArea_analytic / dF_fd`, to compare with `c_expected`.
    pub fn ratio(&self) -> f64 {
        self.darea_analytic / self.df_fd
    }
}

/// Relative budget for the variation identity.
pub const IDENTITY_BUDGET: f64 = 1e-4;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Checks `δArea_y = δF / (1 − α)` for `f = |K|^α` and the deformation `φ N_f`.
pub fn manhart_identity_report(
    patch: &SurfacePatch,
    bump: Arc<dyn ScalarField>,
    alpha: f64,
    resolution: usize,
    with_frozen: bool,
) -> Result<VariationReport> {
    if alpha == 1.0 {
        return Err(GeomError::InvalidArgument("alpha must differ from 1".into()));
    }
    let f = Arc::new(ManhartF::new(alpha));
    let spec = DeformationSpec::new(bump.clone(), DeformationMode::RelativeNormal(f.clone()));
    let fd = fd_first_variation(Functional::CurvatureEnergy, patch, &spec, f.as_ref(), resolution)?;
    let grid = support_grid(patch, &spec, resolution)?;
    let (df_analytic, darea_analytic) = analytic_variations(patch, bump.as_ref(), f.as_ref(), &grid)?;
    let coarse = support_grid(patch, &spec, (resolution / 2).max(4))?;
    let (df_analytic_coarse, _) = analytic_variations(patch, bump.as_ref(), f.as_ref(), &coarse)?;
    let darea_fd = if with_frozen {
        Some(fd_first_variation(Functional::RelativeAreaFrozen, patch, &spec, f.as_ref(), resolution)?.extrapolated())
    } else {
        None
    };
    let c = 1.0 / (1.0 - alpha);
    let df_fd = fd.extrapolated();
    Ok(VariationReport {
        alpha,
        c_expected: c,
        df_fd,
        df_fd_step: fd.value,
        df_fd_half_step: fd.half_step,
        df_analytic,
        df_analytic_coarse,
        darea_analytic,
        darea_fd,
        residuals: VariationResiduals {
            identity: (darea_analytic - c * df_fd).abs() / df_fd.abs().max(f64::MIN_POSITIVE),
            fd_vs_analytic: rel(df_fd, df_analytic),
            frozen: darea_fd.map(|d| rel(d, darea_analytic)),
            step_change: fd.step_change(),
            step_sensitive: fd.step_change() > 0.1 * IDENTITY_BUDGET,
            grid_change: rel(df_analytic_coarse, df_analytic),
        },
    })
}

/// Left minus right sides of the three conditions on `f`, in the
/// principal-curvature form and in the `(u, v)` form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeResiduals {
    pub u: f64,
    pub v: f64,
    pub principal_form: [f64; 3],
    pub curvature_form: [f64; 3],
    /// Largest mismatch between the `(u, v)` form and the matching
    /// combinations of the principal form, scaled by the term size.
    pub equivalence: f64,
}

impl PdeResiduals {
    pub fn max_abs(&self) -> f64 {
        self.curvature_form.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Residuals at `u = (ℓ₁ + ℓ₂)/2`, `v = ℓ₁ℓ₂`.
pub fn pde_residuals(f: &dyn FunctionOfHK, c: f64, l1: f64, l2: f64) -> Result<PdeResiduals> {
    if l1 * l2 == 0.0 {
        return Err(GeomError::InvalidArgument("principal curvatures must be nonzero".into()));
    }
    let u = 0.5 * (l1 + l2);
    let v = l1 * l2;
    let p = f.partials(u, v)?;
    let (fu, fv, fuu, fuv, fvv) = (p.fu, p.fv, p.fuu, p.fuv, p.fvv);
    let principal = [
        (-12.0 / l1 * fu - 24.0 * l2 / l1 * fv) - (6.0 * c * fuu + 24.0 * c * l2 * fuv + 24.0 * c * l2 * l2 * fvv),
        (-(2.0 / l1 + 2.0 / l2) * fu - 8.0 * fv) - (2.0 * c * fuu + 4.0 * c * (l1 + l2) * fuv + 8.0 * c * l1 * l2 * fvv),
        (-12.0 / l2 * fu - 24.0 * l1 / l2 * fv) - (6.0 * c * fuu + 24.0 * c * l1 * fuv + 24.0 * c * l1 * l1 * fvv),
    ];
    let curvature = [
        (-2.0 * u / v * fu + (4.0 - 8.0 * u * u / v) * fv)
            - (c * fuu + 4.0 * c * u * fuv + 8.0 * c * (u * u - 0.5 * v) * fvv),
        (-2.0 * u / v * fu - 4.0 * fv) - (c * fuu + 4.0 * c * u * fuv + 4.0 * c * v * fvv),
        (-2.0 * fu - 4.0 * u * fv) - (c * u * fuu + 4.0 * c * v * fuv + 4.0 * c * u * v * fvv),
    ];
    let combos = [
        (principal[0] + principal[2]) / 12.0,
        principal[1] / 2.0,
        (l1 * principal[0] + l2 * principal[2]) / 12.0,
    ];
    let size = [fu, fv, fuu, fuv, fvv]
        .iter()
        .fold(1.0, |m: f64, x| m.max(x.abs()))
        * (1.0 + u.abs() + v.abs() + (u * u / v).abs() + (u / v).abs())
        * (1.0 + c.abs());
    let equivalence = (0..3).fold(0.0, |m: f64, k| m.max((curvature[k] - combos[k]).abs())) / size;
    Ok(PdeResiduals {
        u,
        v,
        principal_form: principal,
        curvature_form: curvature,
        equivalence,
    })
}

/// Power-law fit of `f(x, x²)`, the restriction of `f` to spheres of radius `1/x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereConditionReport {
    /// `2 (C − 1) / C`.
    pub exponent_expected: f64,
    /// Slope of a free least-squares fit of `log f` against `log x`.
    pub exponent_fitted: f64,
    /// `q₁` fitted with the expected exponent.
    pub q1: f64,
    /// `max |f(x, x²) / (q₁ x^e) − 1|` with the expected exponent.
    pub max_deviation: f64,
}

pub fn sphere_condition_check(f: &dyn FunctionOfHK, c: f64, x_grid: &[f64]) -> Result<SphereConditionReport> {
    if c == 0.0 {
        return Err(GeomError::InvalidArgument("C must be nonzero".into()));
    }
    if x_grid.len() < 2 || x_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(GeomError::InvalidArgument("x grid needs at least two positive values".into()));
    }
    let e = 2.0 * (c - 1.0) / c;
    let mut logs = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let val = f.value(x, x * x)?;
        if !(val > 0.0) {
            return Err(GeomError::InvalidArgument("f(x, x²) must be positive for the log fit".into()));
        }
        logs.push((libm::log(x), libm::log(val)));
    }
    let log_q = logs.iter().map(|(lx, lf)| lf - e * lx).sum::<f64>() / logs.len() as f64;
    let q1 = libm::exp(log_q);
    let max_deviation = logs
        .iter()
        .map(|(lx, lf)| (libm::exp(lf - log_q - e * lx) - 1.0).abs())
        .fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = logs.iter().map(|(lx, _)| alloc::vec![1.0, *lx]).collect();
    let rhs: Vec<f64> = logs.iter().map(|(_, lf)| *lf).collect();
    let fit = least_squares(&rows, &rhs, 2).ok_or_else(|| GeomError::InvalidArgument("x grid is degenerate".into()))?;
    Ok(SphereConditionReport {
        exponent_expected: e,
        exponent_fitted: fit[1],
        q1,
        max_deviation,
    })
}

/// Best constant `C` for `Φ = C Ψ` over a set of samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationReport {
    pub best_c: f64,
    /// `min over C of max_i |Φᵢ − C Ψᵢ| / (|Φᵢ| + |C Ψᵢ| + 1e-12)`.
    pub margin: f64,
}

/// Scans `C` over `[c_min, c_max]` with the given step.
pub fn separation_scan(samples: &[(f64, f64)], c_min: f64, c_max: f64, step: f64) -> SeparationReport {
    let n = libm::round((c_max - c_min) / step) as usize;
    let mut best = SeparationReport {
        best_c: c_min,
        margin: f64::INFINITY,
    };
    for i in 0..=n {
        let c = c_min + i as f64 * step;
        let r = samples
            .iter()
            .map(|(phi, psi)| (phi - c * psi).abs() / (phi.abs() + (c * psi).abs() + 1e-12))
            .fold(0.0, f64::max);
        if r < best.margin {
            best = SeparationReport { best_c: c, margin: r };
        }
    }
    best
}

/// Displacement of a deformed point relative to the base, for diagnostics.
pub fn displacement(base: &SurfacePatch, deformed: &SurfacePatch, u: f64, v: f64) -> Result<Vec3> {
    Ok(crate::linalg::sub(&deformed.position(u, v)?, &base.position(u, v)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relative::{AutoDiffF, ConstantF};

    fn unit_sphere() -> SurfacePatch {
        builtin_surface(&SurfaceDescriptor::sphere(1.0, [0.0; 3])).unwrap()
    }

    #[test]
    fn sphere_densities() {
        let s = unit_sphere();
        for alpha in [-1.0, 0.25, 2.0] {
            let d = densities(&s, 1.0, 1.0, &ManhartF::new(alpha)).unwrap();
            assert!((d.phi + 2.0).abs() < 1e-12, "{d:?}");
            assert!((d.psi - (2.0 * alpha - 2.0)).abs() < 1e-12, "{d:?}");
        }
        let fu = AutoDiffF::new(|u: &Taylor, _: &Taylor| *u);
        let d = densities(&s, 1.0, 1.0, &fu).unwrap();
        assert!((d.psi + 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_routes_agree_on_ellipsoid() {
        let e = builtin_surface(&SurfaceDescriptor::ellipsoid(1.0, 1.2, 1.5)).unwrap();
        let f = AutoDiffF::new(|u: &Taylor, v: &Taylor| (*u * *u + *v).sqrt() * (*v).exp());
        let d = densities(&e, 0.9, 2.2, &f).unwrap();
        assert!((d.phi - d.phi_from_mean).abs() < 1e-10 * d.phi.abs(), "{d:?}");
        assert!((d.psi - d.psi_compact).abs() < 1e-10 * d.psi.abs(), "{d:?}");
    }

    #[test]
    fn unit_sphere_curvature_variation() {
        let one = |u: &Taylor, _: &Taylor| Taylor::constant(1.0, u.order());
        let (dh, dk) = curvature_variation(&unit_sphere(), 1.2, 0.3, &one).unwrap();
        assert!((dh - 1.0).abs() < 1e-13 && (dk - 2.0).abs() < 1e-13);
    }

    #[test]
    fn deform_at_zero_is_identity() {
        let s = unit_sphere();
        let spec = DeformationSpec::new(
            Arc::new(SmoothBump::new([1.0, 1.0], 0.3, 1.0)),
            DeformationMode::RelativeNormal(Arc::new(ManhartF::new(0.5))),
        );
        let d = deform(&s, &spec, 0.0).unwrap();
        assert_eq!(d.jet(1.05, 0.95, 4).unwrap(), s.jet(1.05, 0.95, 4).unwrap());
    }

    #[test]
    fn euclidean_deformation_moves_inward() {
        let s = unit_sphere();
        let bump = SmoothBump::new([1.0, 1.0], 0.3, 1.0);
        let spec = DeformationSpec::new(Arc::new(bump), DeformationMode::EuclideanNormal);
        let d = deform(&s, &spec, 0.01).unwrap();
        let phi = field_expansion(&bump, 1.05, 0.95, 0).value();
        let r = crate::linalg::norm(&d.position(1.05, 0.95).unwrap());
        assert!((r - (1.0 - 0.01 * phi)).abs() < 1e-14);
    }

    #[test]
    fn family_matches_deformed_paraboloid() {
        let spec = ParaboloidFamilySpec {
            l1: 1.5,
            l2: 0.7,
            a: 1.0,
            b: -2.0,
            c: 0.5,
            t: 0.05,
        };
        let fam = builtin_surface(&SurfaceDescriptor::paraboloid_family(spec)).unwrap();
        let base = builtin_surface(&SurfaceDescriptor::paraboloid(1.5, 0.7)).unwrap();
        let ds = DeformationSpec::new(
            Arc::new(QuarticField {
                a: 1.0,
                b: -2.0,
                c: 0.5,
            }),
            DeformationMode::EuclideanNormal,
        );
        let d = deform(&base, &ds, 0.05).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3)] {
            let (a, b) = (fam.jet(x, y, 4).unwrap(), d.jet(x, y, 4).unwrap());
            for (i, j) in [(0, 0), (1, 0), (2, 1), (0, 4)] {
                let (p, q) = (a.partial(i, j), b.partial(i, j));
                assert!((0..3).all(|k| (p[k] - q[k]).abs() < 1e-13), "({i},{j})");
            }
        }
    }

    #[test]
    fn step_too_large_is_reported() {
        let s = unit_sphere();
        let spec = DeformationSpec::new(Arc::new(SmoothBump::new([1.0, 1.0], 0.3, 1.0)), DeformationMode::EuclideanNormal);
        match deform(&s, &spec, 50.0) {
            Err(GeomError::StepTooLarge { suggested, .. }) => assert!(suggested > 0.0 && suggested < 50.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_area_variation() {
        let s = unit_sphere();
        let bump = SmoothBump::new([1.2, 2.0], 0.4, 1.0);
        let spec = DeformationSpec::new(Arc::new(bump), DeformationMode::EuclideanNormal);
        let fd = fd_first_variation(Functional::CurvatureEnergy, &s, &spec, &ConstantF(1.0), 24).unwrap();
        let grid = rect_grid(&bump.support().unwrap(), 24);
        let mut acc = Vec::new();
        for (p, w) in grid.nodes.iter().zip(&grid.weights) {
            let phi = field_expansion(&bump, p[0], p[1], 0).value();
            acc.push(-2.0 * w * phi * libm::sin(p[0]));
        }
        let want = pairwise_sum(&acc);
        assert!((fd.value - want).abs() < 1e-8 * want.abs(), "{} vs {}", fd.value, want);
    }

    #[test]
    fn pde_examples() {
        for alpha in [-1.0, 0.25, 0.5, 2.0] {
            let r = pde_residuals(&ManhartF::new(alpha), 1.0 / (1.0 - alpha), 1.0, 2.0).unwrap();
            assert!(r.max_abs() < 1e-12, "{r:?}");
            assert!(r.principal_form.iter().all(|x| x.abs() < 1e-11));
            assert!(r.equivalence < 1e-14);
        }
        let fu = AutoDiffF::new(|u: &Taylor, _: &Taylor| *u);
        let r = pde_residuals(&fu, 3.0, 1.0, 2.0).unwrap();
        assert!((r.curvature_form[0] + 2.0 * r.u / r.v).abs() < 1e-14);
        assert!(r.equivalence < 1e-14);
    }

    #[test]
    fn sphere_condition_examples() {
        let xs: Vec<f64> = (1..=10).map(|i| 0.3 * i as f64).collect();
        let r = sphere_condition_check(&ManhartF::new(0.25), 1.0 / 0.75, &xs).unwrap();
        assert!((r.exponent_fitted - 0.5).abs() < 1e-12 && r.max_deviation < 1e-12);
        let fu = AutoDiffF::new(|u: &Taylor, _: &Taylor| *u);
        let r = sphere_condition_check(&fu, 2.0, &xs).unwrap();
        assert!((r.exponent_fitted - 1.0).abs() < 1e-12 && r.max_deviation < 1e-12);
    }

    #[test]
    fn quartic_small_cases() {
        let r = quartic_expansion_check(
            &ParaboloidFamilySpec {
                l1: 1.0,
                l2: 1.0,
                a: 1.0,
                b: 0.0,
                c: 0.0,
                t: 0.0,
            },
            1e-2,
        )
        .unwrap();
        assert!(r.max_deviation < 1e-4, "{r:?}");
        let r = quartic_expansion_check(
            &ParaboloidFamilySpec {
                l1: 1.0,
                l2: 2.0,
                a: 0.0,
                b: 1.0,
                c: 0.0,
                t: 0.0,
            },
            1e-2,
        )
        .unwrap();
        // δK ≈ 2b(ℓ1 s² + ℓ2 t²) near the vertex
        assert!((r.dk[0] - 2.0).abs() < 1e-4 && (r.dk[1] - 4.0).abs() < 1e-4, "{r:?}");
    }
}
