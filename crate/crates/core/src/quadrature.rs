//! Tensor-product quadrature on chart domains and the closed-surface
//! integral identities for ovaloids.
//!
//! Non-periodic axes use Gauss-Legendre nodes, periodic axes the
//! trapezoid rule. On polar charts the nodes avoid the poles, where the
//! parametrization degenerates. Sums are pairwise in node order, so
//! results are reproducible bit for bit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{GeomError, Result};
use crate::geometry::{local_geometry_at, CurvatureBundle, LocalGeometry};
use crate::linalg::{dot, Vec3};
use crate::relative::{relative_area_element, VectorField};
use crate::surface::{Axis, Rect, SurfacePatch};
use crate::taylor::{tdot, tsub, Taylor, TVec3};

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Integration rule along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRule {
    GaussLegendre(usize),
    Trapezoid(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub rules: [AxisRule; 2],
    pub resolution: usize,
}

impl QuadratureGrid {
    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

fn axis_rule(axis: &Axis, n: usize) -> (AxisRule, Vec<f64>, Vec<f64>) {
    let len = axis.length();
    if axis.periodic {
        let h = len / n as f64;
        let x = (0..n).map(|i| axis.min + i as f64 * h).collect();
        (AxisRule::Trapezoid(n), x, alloc::vec![h; n])
    } else {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * len;
        let mid = 0.5 * (axis.min + axis.max);
        (
            AxisRule::GaussLegendre(n),
            x.iter().map(|t| mid + half * t).collect(),
            w.iter().map(|t| half * t).collect(),
        )
    }
}

fn tensor(a: (AxisRule, Vec<f64>, Vec<f64>), b: (AxisRule, Vec<f64>, Vec<f64>), n: usize) -> QuadratureGrid {
    let mut nodes = Vec::with_capacity(a.1.len() * b.1.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (u, wu) in a.1.iter().zip(&a.2) {
        for (v, wv) in b.1.iter().zip(&b.2) {
            nodes.push([*u, *v]);
            weights.push(wu * wv);
        }
    }
    QuadratureGrid {
        nodes,
        weights,
        rules: [a.0, b.0],
        resolution: n,
    }
}

/// Grid with `resolution` nodes per axis over the patch domain.
pub fn build_grid(patch: &SurfacePatch, resolution: usize) -> Result<QuadratureGrid> {
    if resolution < 4 {
        return Err(GeomError::InvalidArgument("grid resolution must be at least 4".into()));
    }
    let d = patch.domain();
    Ok(tensor(axis_rule(&d.u, resolution), axis_rule(&d.v, resolution), resolution))
}

/// Gauss-Legendre grid on a parameter box.
pub fn rect_grid(rect: &Rect, resolution: usize) -> QuadratureGrid {
    tensor(
        axis_rule(&Axis::new(rect.u0, rect.u1), resolution),
        axis_rule(&Axis::new(rect.v0, rect.v1), resolution),
        resolution,
    )
}

/// Pairwise (cascade) summation in slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Area element multiplying the integrand.
#[derive(Clone, Copy)]
pub enum AreaElement<'a> {
    Euclidean,
    Relative(&'a dyn VectorField),
}

/// `Σ wᵢ g(uᵢ, vᵢ) dΩ(uᵢ, vᵢ)`.
pub fn integrate(
    patch: &SurfacePatch,
    grid: &QuadratureGrid,
    integrand: &dyn Fn(f64, f64) -> Result<f64>,
    element: AreaElement<'_>,
) -> Result<f64> {
    Ok(integrate_with_abs(patch, grid, integrand, element)?.0)
}

/// The integral and the integral of the absolute integrand.
fn integrate_with_abs(
    patch: &SurfacePatch,
    grid: &QuadratureGrid,
    integrand: &dyn Fn(f64, f64) -> Result<f64>,
    element: AreaElement<'_>,
) -> Result<(f64, f64)> {
    let mut terms = Vec::with_capacity(grid.nodes.len());
    let mut abs = Vec::with_capacity(grid.nodes.len());
    for (p, w) in grid.nodes.iter().zip(&grid.weights) {
        let (u, v) = (p[0], p[1]);
        let dens = match element {
            AreaElement::Euclidean => {
                let jet = patch.jet(u, v, 1)?;
                crate::linalg::norm(&crate::linalg::cross(&jet.partial(1, 0), &jet.partial(0, 1)))
            }
            AreaElement::Relative(y) => relative_area_element(patch, u, v, &y.at(patch, u, v)?)?,
        };
        let val = integrand(u, v)?;
        if !val.is_finite() {
            return Err(GeomError::NonFinite { u, v });
        }
        terms.push(w * val * dens);
        abs.push((w * val * dens).abs());
    }
    Ok((pairwise_sum(&terms), pairwise_sum(&abs)))
}

/// Integral at two resolutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinedIntegral {
    /// Value at twice the requested resolution.
    pub value: f64,
    /// Value at the requested resolution.
    pub coarse: f64,
    pub change: f64,
    /// `change ≤ 1e-8 · max(|I|, ∫|g| dΩ)`.
    pub converged: bool,
}

pub const REFINEMENT_TOL: f64 = 1e-8;

pub fn integrate_refined(
    patch: &SurfacePatch,
    resolution: usize,
    integrand: &dyn Fn(f64, f64) -> Result<f64>,
    element: AreaElement<'_>,
) -> Result<RefinedIntegral> {
    let coarse = integrate(patch, &build_grid(patch, resolution)?, integrand, element)?;
    let (value, abs) = integrate_with_abs(patch, &build_grid(patch, 2 * resolution)?, integrand, element)?;
    let change = (value - coarse).abs();
    Ok(RefinedIntegral {
        value,
        coarse,
        change,
        converged: change <= REFINEMENT_TOL * value.abs().max(abs),
    })
}

/// Mean of the grid node positions.
pub fn node_centroid(patch: &SurfacePatch, grid: &QuadratureGrid) -> Result<Vec3> {
    let mut acc = [Vec::new(), Vec::new(), Vec::new()];
    for p in &grid.nodes {
        let x = patch.position(p[0], p[1])?;
        for k in 0..3 {
            acc[k].push(x[k]);
        }
    }
    let n = grid.nodes.len() as f64;
    Ok([pairwise_sum(&acc[0]) / n, pairwise_sum(&acc[1]) / n, pairwise_sum(&acc[2]) / n])
}

fn origin_or_centroid(patch: &SurfacePatch, grid: &QuadratureGrid, origin: Option<Vec3>) -> Result<Vec3> {
    match origin {
        Some(o) => Ok(o),
        None => node_centroid(patch, grid),
    }
}

fn require_closed(patch: &SurfacePatch) -> Result<()> {
    if patch.is_closed() {
        Ok(())
    } else {
        Err(GeomError::InvalidArgument("closed surface required".into()))
    }
}

/// Position, support function and `Pᵗ` with their first-order expansions.
struct PointData {
    lg: LocalGeometry,
    bundle: CurvatureBundle,
    /// `P − origin`, order ≥ 1.
    p: TVec3,
    rho: f64,
    /// Parameter components of `Pᵗ`, order ≥ 1.
    pt: [Taylor; 2],
}

fn point_data(patch: &SurfacePatch, u: f64, v: f64, origin: &Vec3, order: usize) -> Result<PointData> {
    let lg = local_geometry_at(patch, u, v, order)?;
    let bundle = CurvatureBundle::from_local(&lg, u, v)?;
    let o = lg.frame[0][0].order();
    let off = origin.map(|c| Taylor::constant(c, o));
    let p = tsub(&lg.position.map(|c| c.truncate(o)), &off);
    let a = tdot(&p, &lg.frame[0]);
    let b = tdot(&p, &lg.frame[1]);
    let [[e, f], [_, g]] = lg.first;
    let inv_det = (e * g - f * f).recip();
    let pt = [(g * a - f * b) * inv_det, (e * b - f * a) * inv_det];
    let n = crate::taylor::tvalue(&lg.normal);
    let rho = -dot(&crate::taylor::tvalue(&p), &n);
    Ok(PointData { lg, bundle, p, rho, pt })
}

/// `div Pᵗ = (1/W) ∂_i (W Pᵗ^i)`.
fn divergence(d: &PointData) -> f64 {
    let w = d.lg.area_density;
    let a = (w * d.pt[0]).partial(1, 0);
    let b = (w * d.pt[1]).partial(0, 1);
    (a + b) / w.value()
}

/// Residuals of `div Pᵗ = 2 − 2ρH` and of its integrated form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceReport {
    pub origin: Vec3,
    pub max_pointwise: f64,
    /// `|∫⟨P, grad φ⟩ dΩ − 2∫(ρH − 1) φ dΩ|` for a non-constant test `φ`,
    /// relative to the integral of the absolute integrand.
    pub integral_residual: f64,
    /// `|∫ρH dΩ − Area| / Area`, the case `φ = 1`.
    pub minkowski_residual: f64,
}

pub fn divergence_identity_check(ovaloid: &SurfacePatch, grid: &QuadratureGrid, origin: Option<Vec3>) -> Result<DivergenceReport> {
    require_closed(ovaloid)?;
    let o = origin_or_centroid(ovaloid, grid, origin)?;
    let dir = [0.3, -0.2, 0.5];
    let mut max_pointwise: f64 = 0.0;
    let (mut lhs, mut rhs, mut abs, mut rho_h, mut area) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (node, w) in grid.nodes.iter().zip(&grid.weights) {
        let d = point_data(ovaloid, node[0], node[1], &o, 3)?;
        let h = d.bundle.mean;
        max_pointwise = max_pointwise.max((divergence(&d) - (2.0 - 2.0 * d.rho * h)).abs());
        // test field φ = ⟨P, a⟩ + |P|²
        let dirt = dir.map(|c| Taylor::constant(c, d.p[0].order()));
        let phi = tdot(&d.p, &dirt) + tdot(&d.p, &d.p);
        let dphi = [phi.partial(1, 0), phi.partial(0, 1)];
        let pt = [d.pt[0].value(), d.pt[1].value()];
        let wa = w * d.bundle.area_density;
        let l = wa * (dphi[0] * pt[0] + dphi[1] * pt[1]);
        let r = wa * 2.0 * (d.rho * h - 1.0) * phi.value();
        lhs.push(l);
        rhs.push(r);
        abs.push(l.abs() + r.abs());
        rho_h.push(wa * d.rho * h);
        area.push(wa);
    }
    let area = pairwise_sum(&area);
    Ok(DivergenceReport {
        origin: o,
        max_pointwise,
        integral_residual: (pairwise_sum(&lhs) - pairwise_sum(&rhs)).abs() / pairwise_sum(&abs).max(f64::MIN_POSITIVE),
        minkowski_residual: (pairwise_sum(&rho_h) - area).abs() / area,
    })
}

/// Both sides of the integral formula for `g = H^σ √K^(1−σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralFormulaReport {
    pub sigma: f64,
    pub origin: Vec3,
    /// `½ ∫⟨P, grad g⟩ dΩ`.
    pub lhs: f64,
    /// `∫ ρ √K^(1−σ) (H^(1+σ) − √K^(1+σ)) dΩ`.
    pub rhs1: f64,
    /// `∫ H^σ (H^(1−σ) − √K^(1−σ)) dΩ`.
    pub rhs2: f64,
    /// `|lhs − rhs1 − rhs2|`.
    pub residual: f64,
    /// Smallest pointwise integrands of `rhs1` and `rhs2`.
    pub min_integrand: [f64; 2],
    /// Both integrands are nonnegative at every node, up to `1e-12`.
    pub nonnegative: bool,
}

/// `exp(a log H + b log K)` along the expansions, under `H, K > 0`.
fn curvature_power(h: &Taylor, k: &Taylor, a: f64, b: f64) -> Taylor {
    (h.ln().scale(a) + k.ln().scale(b)).exp()
}

fn convex_guard(d: &PointData, u: f64, v: f64) -> Result<()> {
    let (h, k) = (d.bundle.mean, d.bundle.gauss);
    if h > 0.0 && k > 0.0 {
        Ok(())
    } else {
        Err(GeomError::NotConvex { u, v, h, k })
    }
}

pub fn integral_formula_eval(ovaloid: &SurfacePatch, grid: &QuadratureGrid, sigma: f64, origin: Option<Vec3>) -> Result<IntegralFormulaReport> {
    require_closed(ovaloid)?;
    if !(-1.0..=1.0).contains(&sigma) {
        return Err(GeomError::InvalidArgument("sigma must lie in [-1, 1]".into()));
    }
    let o = origin_or_centroid(ovaloid, grid, origin)?;
    let (mut lhs, mut r1, mut r2) = (Vec::new(), Vec::new(), Vec::new());
    let mut min_integrand = [f64::INFINITY; 2];
    let mut nonnegative = true;
    for (node, w) in grid.nodes.iter().zip(&grid.weights) {
        let (u, v) = (node[0], node[1]);
        let d = point_data(ovaloid, u, v, &o, 3)?;
        convex_guard(&d, u, v)?;
        let g = curvature_power(&d.lg.mean, &d.lg.gauss, sigma, 0.5 * (1.0 - sigma));
        let pt = [d.pt[0].value(), d.pt[1].value()];
        let dg = g.partial(1, 0) * pt[0] + g.partial(0, 1) * pt[1];
        let (h, k) = (d.bundle.mean, d.bundle.gauss);
        let pw = |x: f64, e: f64| libm::exp(e * libm::log(x));
        let sk = libm::sqrt(k);
        let i1 = d.rho * pw(sk, 1.0 - sigma) * (pw(h, 1.0 + sigma) - pw(sk, 1.0 + sigma));
        let i2 = pw(h, sigma) * (pw(h, 1.0 - sigma) - pw(sk, 1.0 - sigma));
        let scale = d.rho.abs() * h.abs() + h.abs();
        if i1 < -1e-12 * scale || i2 < -1e-12 * scale {
            nonnegative = false;
        }
        min_integrand[0] = min_integrand[0].min(i1);
        min_integrand[1] = min_integrand[1].min(i2);
        let wa = w * d.bundle.area_density;
        lhs.push(0.5 * wa * dg);
        r1.push(wa * i1);
        r2.push(wa * i2);
    }
    let (lhs, rhs1, rhs2) = (pairwise_sum(&lhs), pairwise_sum(&r1), pairwise_sum(&r2));
    Ok(IntegralFormulaReport {
        sigma,
        origin: o,
        lhs,
        rhs1,
        rhs2,
        residual: (lhs - rhs1 - rhs2).abs(),
        min_integrand,
        nonnegative,
    })
}

/// Observed order `log₂(r_n / r_2n)` for residuals on doubling resolutions,
/// using the last pair whose finer residual is above `floor`.
pub fn observed_order(residuals: &[f64], floor: f64) -> Option<f64> {
    residuals
        .windows(2)
        .rev()
        .find(|w| w[1] > floor && w[0] > 0.0)
        .map(|w| libm::log2(w[0] / w[1]))
}

/// A function of one positive variable together with its derivative.
pub trait Profile: Send + Sync {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
}

/// `scale · s^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerProfile {
    pub scale: f64,
    pub exponent: f64,
}

impl Profile for PowerProfile {
    fn value(&self, s: f64) -> f64 {
        self.scale * libm::pow(s, self.exponent)
    }

    fn derivative(&self, s: f64) -> f64 {
        if self.exponent == 0.0 {
            0.0
        } else {
            self.scale * self.exponent * libm::pow(s, self.exponent - 1.0)
        }
    }
}

/// Evidence that `ρ = f(H^σ √K^(1−σ))` with decreasing `f` forces a sphere.
///
/// If the relation held, `grad ρ = A Pᵗ` would give
/// `⟨Pᵗ, grad g⟩ = II(Pᵗ, Pᵗ) / f'(g) ≤ 0`, so the left side of the
/// integral formula would be `≤ 0` while the right side is `≥ 0` and
/// vanishes only on spheres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileEvidenceReport {
    pub sigma: f64,
    /// Extremes of `ρ − f(g)` over the nodes.
    pub defect_min: f64,
    pub defect_max: f64,
    /// `rhs1 + rhs2` of the integral formula.
    pub rhs_sum: f64,
    /// `½ ∫ II(Pᵗ, Pᵗ) / f'(g) dΩ`; `None` when `f' = 0` somewhere.
    pub hypothetical_lhs: Option<f64>,
    /// Nodes where `f'(g) = 0`.
    pub ties: usize,
    /// `f` increased between some pair of sampled arguments.
    pub profile_increasing: bool,
    /// The defect vanishes within `1e-10` at every node.
    pub defect_vanishes: bool,
    /// The hypothetical substitution contradicts the integral formula.
    pub contradiction: bool,
}

pub fn profile_evidence(
    ovaloid: &SurfacePatch,
    grid: &QuadratureGrid,
    profile: &dyn Profile,
    sigma: f64,
    origin: Option<Vec3>,
) -> Result<ProfileEvidenceReport> {
    let formula = integral_formula_eval(ovaloid, grid, sigma, origin)?;
    let o = formula.origin;
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut hyp = Vec::new();
    let mut ties = 0;
    let mut samples = Vec::new();
    for (node, w) in grid.nodes.iter().zip(&grid.weights) {
        let (u, v) = (node[0], node[1]);
        let d = point_data(ovaloid, u, v, &o, 3)?;
        let (h, k) = (d.bundle.mean, d.bundle.gauss);
        let g = libm::exp(sigma * libm::log(h) + 0.5 * (1.0 - sigma) * libm::log(k));
        let defect = d.rho - profile.value(g);
        dmin = dmin.min(defect);
        dmax = dmax.max(defect);
        samples.push(g);
        let fp = profile.derivative(g);
        let pt = [d.pt[0].value(), d.pt[1].value()];
        if fp == 0.0 {
            ties += 1;
        } else {
            hyp.push(0.5 * w * d.bundle.area_density * d.bundle.second.form(&pt, &pt) / fp);
        }
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    let profile_increasing = samples.windows(2).any(|s| profile.value(s[1]) > profile.value(s[0]) + 1e-14);
    let hypothetical_lhs = if ties == 0 { Some(pairwise_sum(&hyp)) } else { None };
    let rhs_sum = formula.rhs1 + formula.rhs2;
    let defect_vanishes = dmin.abs().max(dmax.abs()) <= 1e-10;
    let contradiction = !defect_vanishes && rhs_sum > 1e-10 && hypothetical_lhs.is_some_and(|l| l < 1e-10);
    Ok(ProfileEvidenceReport {
        sigma,
        defect_min: dmin,
        defect_max: dmax,
        rhs_sum,
        hypothetical_lhs,
        ties,
        profile_increasing,
        defect_vanishes,
        contradiction,
    })
}
