//! Parametric charts with high-order derivative access and the built-in
//! surface families.
//!
//! Every built-in chart is written once over [`Taylor`] numbers; its jets
//! are exact partial derivatives of the closed form. Black-box position
//! evaluators get central-difference jets through [`fd_jet`].

use alloc::format;
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{GeomError, Result};
use crate::linalg::Vec3;
use crate::taylor::{coeff_count, index, tadd, tscale, tvalue, Taylor, TVec3, MAX_ORDER};

/// Value and parameter partials of a chart at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    coords: TVec3,
}

impl Jet {
    pub fn new(coords: TVec3) -> Self {
        let order = coords[0].order().min(coords[1].order()).min(coords[2].order());
        Self {
            coords: [
                coords[0].truncate(order),
                coords[1].truncate(order),
                coords[2].truncate(order),
            ],
        }
    }

    pub fn order(&self) -> usize {
        self.coords[0].order()
    }

    pub fn position(&self) -> Vec3 {
        tvalue(&self.coords)
    }

    /// `∂u^i ∂v^j ξ`; zero beyond the jet order.
    pub fn partial(&self, i: usize, j: usize) -> Vec3 {
        [
            self.coords[0].partial(i, j),
            self.coords[1].partial(i, j),
            self.coords[2].partial(i, j),
        ]
    }

    pub fn expansion(&self) -> &TVec3 {
        &self.coords
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet::new(self.coords.map(|c| c.truncate(order)))
    }
}

impl From<TVec3> for Jet {
    fn from(coords: TVec3) -> Self {
        Jet::new(coords)
    }
}

/// One parameter interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn new(min: f64, max: f64) -> Self {
        Self {
            min,
            max,
            periodic: false,
        }
    }

    pub fn periodic(min: f64, max: f64) -> Self {
        Self {
            min,
            max,
            periodic: true,
        }
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }
}

/// Parameter rectangle of a chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub u: Axis,
    pub v: Axis,
}

impl Domain {
    pub fn rect(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Self {
            u: Axis::new(u0, u1),
            v: Axis::new(v0, v1),
        }
    }

    pub fn diameter(&self) -> f64 {
        libm::hypot(self.u.length(), self.v.length())
    }

    pub fn measure(&self) -> f64 {
        self.u.length() * self.v.length()
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.u.periodic || (u >= self.u.min && u <= self.u.max))
            && (self.v.periodic || (v >= self.v.min && v <= self.v.max))
    }

    /// True when `rect` sits strictly inside every non-periodic axis.
    pub fn contains_strictly(&self, rect: &Rect) -> bool {
        let inside = |axis: &Axis, lo: f64, hi: f64| {
            if axis.periodic {
                hi - lo < axis.length()
            } else {
                lo > axis.min && hi < axis.max
            }
        };
        inside(&self.u, rect.u0, rect.u1) && inside(&self.v, rect.v0, rect.v1)
    }
}

/// Axis-aligned box in parameter space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Rect {
    pub fn around(center: [f64; 2], half_width: f64) -> Self {
        Self {
            u0: center[0] - half_width,
            u1: center[0] + half_width,
            v0: center[1] - half_width,
            v1: center[1] + half_width,
        }
    }

    pub fn diameter(&self) -> f64 {
        libm::hypot(self.u1 - self.u0, self.v1 - self.v0)
    }
}

/// Sign applied to the raw normal `ξ_u × ξ_v / |ξ_u × ξ_v|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// Jet provider behind a [`SurfacePatch`].
pub trait Chart: Send + Sync {
    fn jet(&self, u: f64, v: f64, order: usize) -> Result<Jet>;

    /// Highest jet order this chart can deliver.
    fn max_order(&self) -> usize {
        MAX_ORDER
    }
}

/// A chart given in closed form over Taylor numbers.
pub trait AnalyticChart: Send + Sync {
    fn eval(&self, u: &Taylor, v: &Taylor) -> TVec3;
}

struct Analytic<C>(C);

impl<C: AnalyticChart> Chart for Analytic<C> {
    fn jet(&self, u: f64, v: f64, order: usize) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(GeomError::UnsupportedOrder {
                requested: order,
                available: MAX_ORDER,
            });
        }
        let coords = self.0.eval(&Taylor::var_u(u, order), &Taylor::var_v(v, order));
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite { u, v });
        }
        Ok(Jet::new(coords))
    }
}

/// Height function of a graph chart `(x, y) ↦ (x, y, h(x, y))`.
pub trait GraphHeight: Send + Sync {
    fn height(&self, x: &Taylor, y: &Taylor) -> Taylor;
}

impl<F> GraphHeight for F
where
    F: Fn(&Taylor, &Taylor) -> Taylor + Send + Sync,
{
    fn height(&self, x: &Taylor, y: &Taylor) -> Taylor {
        self(x, y)
    }
}

/// `h = ½ l1 x² + ½ l2 y²`.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticHeight {
    pub l1: f64,
    pub l2: f64,
}

impl GraphHeight for QuadraticHeight {
    fn height(&self, x: &Taylor, y: &Taylor) -> Taylor {
        (*x * *x).scale(0.5 * self.l1) + (*y * *y).scale(0.5 * self.l2)
    }
}

/// `h = A exp(-((x - x0)² + (y - y0)²) / w²)`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianHeight {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: f64,
}

impl GraphHeight for GaussianHeight {
    fn height(&self, x: &Taylor, y: &Taylor) -> Taylor {
        let dx = *x - self.center[0];
        let dy = *y - self.center[1];
        (-(dx * dx + dy * dy) / (self.width * self.width))
            .exp()
            .scale(self.amplitude)
    }
}

struct GraphChart {
    height: Arc<dyn GraphHeight>,
}

impl AnalyticChart for GraphChart {
    fn eval(&self, u: &Taylor, v: &Taylor) -> TVec3 {
        [*u, *v, self.height.height(u, v)]
    }
}

struct SphereChart {
    radius: f64,
    center: Vec3,
    pole_axis: usize,
}

impl AnalyticChart for SphereChart {
    fn eval(&self, theta: &Taylor, phi: &Taylor) -> TVec3 {
        let st = theta.sin();
        let local = [st * phi.cos(), st * phi.sin(), theta.cos()];
        // cyclic permutation keeps the chart handedness
        let p = self.pole_axis;
        let mut out = [Taylor::zero(theta.order()); 3];
        out[p] = local[2];
        out[(p + 1) % 3] = local[0];
        out[(p + 2) % 3] = local[1];
        for (k, x) in out.iter_mut().enumerate() {
            *x = x.scale(self.radius) + self.center[k];
        }
        out
    }
}

struct EllipsoidChart {
    semi_axes: [f64; 3],
}

impl AnalyticChart for EllipsoidChart {
    fn eval(&self, theta: &Taylor, phi: &Taylor) -> TVec3 {
        let st = theta.sin();
        let [a, b, c] = self.semi_axes;
        [
            (st * phi.cos()).scale(a),
            (st * phi.sin()).scale(b),
            theta.cos().scale(c),
        ]
    }
}

struct TorusChart {
    major: f64,
    minor: f64,
}

impl AnalyticChart for TorusChart {
    fn eval(&self, u: &Taylor, v: &Taylor) -> TVec3 {
        let ring = v.cos().scale(self.minor) + self.major;
        [ring * u.cos(), ring * u.sin(), v.sin().scale(self.minor)]
    }
}

/// Parameters of the quartic deformation family of the paraboloid
/// `z = ½ l1 x² + ½ l2 y²` along its undeformed upward unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaboloidFamilySpec {
    pub l1: f64,
    pub l2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t: f64,
}

impl ParaboloidFamilySpec {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.l1, self.l2, self.a, self.b, self.c, self.t];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidDescriptor("non-finite paraboloid parameter".into()));
        }
        if self.l1 * self.l2 == 0.0 {
            return Err(GeomError::InvalidDescriptor(
                "paraboloid requires l1 * l2 != 0".into(),
            ));
        }
        Ok(())
    }

    /// `a x⁴ + b x² y² + c y⁴`.
    pub fn quartic(&self, x: &Taylor, y: &Taylor) -> Taylor {
        let x2 = *x * *x;
        let y2 = *y * *y;
        (x2 * x2).scale(self.a) + (x2 * y2).scale(self.b) + (y2 * y2).scale(self.c)
    }
}

struct ParaboloidFamilyChart {
    spec: ParaboloidFamilySpec,
}

impl AnalyticChart for ParaboloidFamilyChart {
    fn eval(&self, x: &Taylor, y: &Taylor) -> TVec3 {
        let s = &self.spec;
        let base = [*x, *y, QuadraticHeight { l1: s.l1, l2: s.l2 }.height(x, y)];
        if s.t == 0.0 {
            return base;
        }
        let gx = x.scale(-s.l1);
        let gy = y.scale(-s.l2);
        let w = (gx * gx + gy * gy + 1.0).sqrt();
        let inv = w.recip();
        let normal = [gx * inv, gy * inv, inv];
        let amp = s.quartic(x, y).scale(s.t);
        tadd(&base, &tscale(&normal, &amp))
    }
}

/// Black-box position evaluator.
pub trait PositionChart: Send + Sync {
    fn position(&self, u: f64, v: f64) -> Vec3;
}

impl<F> PositionChart for F
where
    F: Fn(f64, f64) -> Vec3 + Send + Sync,
{
    fn position(&self, u: f64, v: f64) -> Vec3 {
        self(u, v)
    }
}

/// Highest order [`fd_jet`] supports.
pub const FD_MAX_ORDER: usize = 4;

/// Central stencils (offsets, weights) for the k-th derivative, second-order accurate.
fn stencil(k: usize) -> (&'static [i32], &'static [f64]) {
    match k {
        0 => (&[0], &[1.0]),
        1 => (&[-1, 1], &[-0.5, 0.5]),
        2 => (&[-1, 0, 1], &[1.0, -2.0, 1.0]),
        3 => (&[-2, -1, 1, 2], &[-0.5, 1.0, -1.0, 0.5]),
        _ => (&[-2, -1, 0, 1, 2], &[1.0, -4.0, 6.0, -4.0, 1.0]),
    }
}

/// Step used for derivatives of total order `k`: `ε^(1/(k+2)) · scale`.
pub fn fd_step(k: usize, scale: f64) -> f64 {
    libm::pow(f64::EPSILON, 1.0 / (k as f64 + 2.0)) * scale
}

/// Central-difference jet of a black-box chart.
///
/// Derivatives of total order `k` use the step [`fd_step`] with the domain
/// diameter as scale; every partial has truncation error `O(h²)`.
pub fn fd_jet(chart: &dyn PositionChart, domain: &Domain, u: f64, v: f64, order: usize) -> Result<Jet> {
    if order > FD_MAX_ORDER {
        return Err(GeomError::UnsupportedOrder {
            requested: order,
            available: FD_MAX_ORDER,
        });
    }
    let scale = domain.diameter();
    let reach = match order {
        0 => 0.0,
        1 | 2 => 1.0,
        _ => 2.0,
    };
    let h_max = (0..=order)
        .map(|k| fd_step(k, scale))
        .fold(0.0, f64::max);
    let check = |axis: &Axis, x: f64| axis.periodic || (x - reach * h_max >= axis.min && x + reach * h_max <= axis.max);
    if order > 0 && !(check(&domain.u, u) && check(&domain.v, v)) {
        return Err(GeomError::Boundary { u, v });
    }
    let mut comps = [Taylor::zero(order); 3];
    let mut partials = [[0.0f64; 3]; coeff_count(FD_MAX_ORDER)];
    for d in 0..=order {
        let h = fd_step(d, scale);
        for j in 0..=d {
            let i = d - j;
            let (ou, wu) = stencil(i);
            let (ov, wv) = stencil(j);
            let mut acc = [0.0; 3];
            for (a, &wa) in ou.iter().zip(wu) {
                for (b, &wb) in ov.iter().zip(wv) {
                    let p = chart.position(u + *a as f64 * h, v + *b as f64 * h);
                    let w = wa * wb;
                    for k in 0..3 {
                        acc[k] += w * p[k];
                    }
                }
            }
            let denom = libm::pow(h, d as f64);
            partials[index(i, j)] = acc.map(|x| x / denom);
        }
    }
    for (k, comp) in comps.iter_mut().enumerate() {
        *comp = Taylor::from_partials(order, |i, j| partials[index(i, j)][k]);
    }
    if comps.iter().any(|c| !c.is_finite()) {
        return Err(GeomError::NonFinite { u, v });
    }
    Ok(Jet::new(comps))
}

struct FdChart {
    positions: Arc<dyn PositionChart>,
    domain: Domain,
}

impl Chart for FdChart {
    fn jet(&self, u: f64, v: f64, order: usize) -> Result<Jet> {
        fd_jet(self.positions.as_ref(), &self.domain, u, v, order)
    }

    fn max_order(&self) -> usize {
        FD_MAX_ORDER
    }
}

/// What a patch represents; used for preconditions and reporting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceKind {
    Sphere { radius: f64, center: Vec3 },
    Ellipsoid { semi_axes: [f64; 3] },
    Paraboloid { l1: f64, l2: f64 },
    ParaboloidFamily(ParaboloidFamilySpec),
    Graph,
    Torus { major: f64, minor: f64 },
    Deformed,
    Custom,
}

impl SurfaceKind {
    /// Closed, strictly convex built-ins accepted as gauge ovaloids.
    pub fn is_ovaloid(&self) -> bool {
        matches!(self, SurfaceKind::Sphere { .. } | SurfaceKind::Ellipsoid { .. })
    }
}

/// A parametric chart over a parameter rectangle with an orientation.
#[derive(Clone)]
pub struct SurfacePatch {
    chart: Arc<dyn Chart>,
    domain: Domain,
    orientation: Orientation,
    closed: bool,
    kind: SurfaceKind,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("closed", &self.closed)
            .finish()
    }
}

impl SurfacePatch {
    pub fn new(chart: Arc<dyn Chart>, domain: Domain, orientation: Orientation, closed: bool, kind: SurfaceKind) -> Self {
        Self {
            chart,
            domain,
            orientation,
            closed,
            kind,
        }
    }

    pub fn analytic(chart: impl AnalyticChart + 'static, domain: Domain, orientation: Orientation) -> Self {
        Self::new(Arc::new(Analytic(chart)), domain, orientation, false, SurfaceKind::Custom)
    }

    /// Patch whose jets come from central differences of `positions`.
    pub fn from_positions(positions: Arc<dyn PositionChart>, domain: Domain, orientation: Orientation, closed: bool) -> Self {
        Self::new(
            Arc::new(FdChart { positions, domain }),
            domain,
            orientation,
            closed,
            SurfaceKind::Custom,
        )
    }

    /// The same surface, but with jets from central differences of this
    /// patch's positions. Keeps the kind so ovaloid preconditions still apply.
    pub fn fd_companion(&self) -> SurfacePatch {
        let chart = self.chart.clone();
        let positions = move |u: f64, v: f64| -> Vec3 {
            chart
                .jet(u, v, 0)
                .map(|j| j.position())
                .unwrap_or([f64::NAN; 3])
        };
        let mut patch = Self::from_positions(Arc::new(positions), self.domain, self.orientation, self.closed);
        patch.kind = self.kind;
        patch
    }

    pub fn jet(&self, u: f64, v: f64, order: usize) -> Result<Jet> {
        let available = self.chart.max_order();
        if order > available {
            return Err(GeomError::UnsupportedOrder {
                requested: order,
                available,
            });
        }
        self.chart.jet(u, v, order)
    }

    pub fn position(&self, u: f64, v: f64) -> Result<Vec3> {
        Ok(self.jet(u, v, 0)?.position())
    }

    pub fn max_jet_order(&self) -> usize {
        self.chart.max_order()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn sign(&self) -> f64 {
        self.orientation.sign()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_kind(mut self, kind: SurfaceKind) -> Self {
        self.kind = kind;
        self
    }

    /// Euler characteristic of closed built-ins.
    pub fn euler_characteristic(&self) -> Option<i32> {
        match self.kind {
            SurfaceKind::Sphere { .. } | SurfaceKind::Ellipsoid { .. } => Some(2),
            SurfaceKind::Torus { .. } => Some(0),
            _ => None,
        }
    }
}

/// Built-in surface families.
#[derive(Clone)]
pub enum SurfaceDescriptor {
    /// `pole_axis` selects which coordinate axis the polar angle is measured from.
    Sphere { radius: f64, center: Vec3, pole_axis: usize },
    Ellipsoid { semi_axes: [f64; 3] },
    Paraboloid { l1: f64, l2: f64, domain: Option<Domain> },
    ParaboloidFamily { spec: ParaboloidFamilySpec, domain: Option<Domain> },
    Graph { height: Arc<dyn GraphHeight>, domain: Domain },
    Torus { major: f64, minor: f64 },
}

impl SurfaceDescriptor {
    pub fn sphere(radius: f64, center: Vec3) -> Self {
        SurfaceDescriptor::Sphere {
            radius,
            center,
            pole_axis: 2,
        }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        SurfaceDescriptor::Ellipsoid { semi_axes: [a, b, c] }
    }

    pub fn paraboloid(l1: f64, l2: f64) -> Self {
        SurfaceDescriptor::Paraboloid { l1, l2, domain: None }
    }

    pub fn paraboloid_family(spec: ParaboloidFamilySpec) -> Self {
        SurfaceDescriptor::ParaboloidFamily { spec, domain: None }
    }

    pub fn graph(height: impl GraphHeight + 'static, domain: Domain) -> Self {
        SurfaceDescriptor::Graph {
            height: Arc::new(height),
            domain,
        }
    }

    pub fn torus(major: f64, minor: f64) -> Self {
        SurfaceDescriptor::Torus { major, minor }
    }
}

impl fmt::Debug for SurfaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceDescriptor::Sphere { radius, center, pole_axis } => {
                write!(f, "Sphere(r={radius}, center={center:?}, pole={pole_axis})")
            }
            SurfaceDescriptor::Ellipsoid { semi_axes } => write!(f, "Ellipsoid({semi_axes:?})"),
            SurfaceDescriptor::Paraboloid { l1, l2, .. } => write!(f, "Paraboloid({l1}, {l2})"),
            SurfaceDescriptor::ParaboloidFamily { spec, .. } => write!(f, "ParaboloidFamily({spec:?})"),
            SurfaceDescriptor::Graph { domain, .. } => write!(f, "Graph({domain:?})"),
            SurfaceDescriptor::Torus { major, minor } => write!(f, "Torus({major}, {minor})"),
        }
    }
}

fn default_graph_domain() -> Domain {
    Domain::rect(-1.0, 1.0, -1.0, 1.0)
}

fn sphere_domain() -> Domain {
    Domain {
        u: Axis::new(0.0, PI),
        v: Axis::periodic(0.0, 2.0 * PI),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(GeomError::InvalidDescriptor(format!("{name} must be positive, got {x}")))
    }
}

/// Builds the patch for a built-in descriptor.
///
/// Spheres and ellipsoids use the chart `(θ, φ) ∈ [0, π] × [0, 2π)` and
/// default to the inward normal, so that `H > 0`, `K > 0` and the support
/// function about the center is positive. Graph-type surfaces default to
/// the upward normal.
pub fn builtin_surface(desc: &SurfaceDescriptor) -> Result<SurfacePatch> {
    match desc {
        SurfaceDescriptor::Sphere { radius, center, pole_axis } => {
            positive("sphere radius", *radius)?;
            if *pole_axis > 2 {
                return Err(GeomError::InvalidDescriptor(format!("pole axis {pole_axis} out of range")));
            }
            let chart = SphereChart {
                radius: *radius,
                center: *center,
                pole_axis: *pole_axis,
            };
            Ok(SurfacePatch::new(
                Arc::new(Analytic(chart)),
                sphere_domain(),
                Orientation::Negative,
                true,
                SurfaceKind::Sphere {
                    radius: *radius,
                    center: *center,
                },
            ))
        }
        SurfaceDescriptor::Ellipsoid { semi_axes } => {
            for (k, a) in semi_axes.iter().enumerate() {
                positive(["semi-axis a", "semi-axis b", "semi-axis c"][k], *a)?;
            }
            Ok(SurfacePatch::new(
                Arc::new(Analytic(EllipsoidChart { semi_axes: *semi_axes })),
                sphere_domain(),
                Orientation::Negative,
                true,
                SurfaceKind::Ellipsoid { semi_axes: *semi_axes },
            ))
        }
        SurfaceDescriptor::Paraboloid { l1, l2, domain } => {
            let spec = ParaboloidFamilySpec {
                l1: *l1,
                l2: *l2,
                a: 0.0,
                b: 0.0,
                c: 0.0,
                t: 0.0,
            };
            spec.validate()?;
            Ok(SurfacePatch::new(
                Arc::new(Analytic(GraphChart {
                    height: Arc::new(QuadraticHeight { l1: *l1, l2: *l2 }),
                })),
                domain.unwrap_or_else(default_graph_domain),
                Orientation::Positive,
                false,
                SurfaceKind::Paraboloid { l1: *l1, l2: *l2 },
            ))
        }
        SurfaceDescriptor::ParaboloidFamily { spec, domain } => {
            spec.validate()?;
            Ok(SurfacePatch::new(
                Arc::new(Analytic(ParaboloidFamilyChart { spec: *spec })),
                domain.unwrap_or_else(default_graph_domain),
                Orientation::Positive,
                false,
                SurfaceKind::ParaboloidFamily(*spec),
            ))
        }
        SurfaceDescriptor::Graph { height, domain } => {
            if !(domain.u.length() > 0.0 && domain.v.length() > 0.0) {
                return Err(GeomError::InvalidDescriptor("graph domain is empty".into()));
            }
            Ok(SurfacePatch::new(
                Arc::new(Analytic(GraphChart { height: height.clone() })),
                *domain,
                Orientation::Positive,
                false,
                SurfaceKind::Graph,
            ))
        }
        SurfaceDescriptor::Torus { major, minor } => {
            positive("torus major radius", *major)?;
            positive("torus minor radius", *minor)?;
            if minor >= major {
                return Err(GeomError::InvalidDescriptor(
                    "torus minor radius must be below the major radius".into(),
                ));
            }
            Ok(SurfacePatch::new(
                Arc::new(Analytic(TorusChart {
                    major: *major,
                    minor: *minor,
                })),
                Domain {
                    u: Axis::periodic(0.0, 2.0 * PI),
                    v: Axis::periodic(0.0, 2.0 * PI),
                },
                Orientation::Negative,
                true,
                SurfaceKind::Torus {
                    major: *major,
                    minor: *minor,
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, sub};

    #[test]
    fn sphere_positions_lie_on_sphere() {
        let p = builtin_surface(&SurfaceDescriptor::sphere(2.0, [1.0, -1.0, 0.5])).unwrap();
        for &(t, f) in &[(0.3, 0.1), (1.2, 4.0), (2.9, 6.0)] {
            let x = p.position(t, f).unwrap();
            assert!((norm(&sub(&x, &[1.0, -1.0, 0.5])) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pole_axis_variants_stay_on_sphere() {
        for axis in 0..3 {
            let p = builtin_surface(&SurfaceDescriptor::Sphere {
                radius: 1.5,
                center: [0.0; 3],
                pole_axis: axis,
            })
            .unwrap();
            let x = p.position(0.0, 0.0).unwrap();
            let mut pole = [0.0; 3];
            pole[axis] = 1.5;
            assert!(norm(&sub(&x, &pole)) < 1e-14, "axis {axis}: {x:?}");
        }
    }

    #[test]
    fn paraboloid_second_partials() {
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(2.0, 3.0)).unwrap();
        let j = p.jet(0.0, 0.0, 2).unwrap();
        assert_eq!(j.position(), [0.0, 0.0, 0.0]);
        assert_eq!(j.partial(2, 0)[2], 2.0);
        assert_eq!(j.partial(0, 2)[2], 3.0);
    }

    #[test]
    fn family_quartic_vanishes_at_origin() {
        let spec = ParaboloidFamilySpec {
            l1: 1.0,
            l2: 1.0,
            a: 1.0,
            b: 0.0,
            c: 0.0,
            t: 0.01,
        };
        let p = builtin_surface(&SurfaceDescriptor::paraboloid_family(spec)).unwrap();
        assert_eq!(p.position(0.0, 0.0).unwrap(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn family_at_zero_t_is_the_paraboloid() {
        let spec = ParaboloidFamilySpec {
            l1: 1.3,
            l2: -0.7,
            a: 2.0,
            b: -1.0,
            c: 0.5,
            t: 0.0,
        };
        let fam = builtin_surface(&SurfaceDescriptor::paraboloid_family(spec)).unwrap();
        let par = builtin_surface(&SurfaceDescriptor::paraboloid(1.3, -0.7)).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-0.5, 0.7), (0.9, -0.9)] {
            assert_eq!(fam.jet(x, y, 5).unwrap(), par.jet(x, y, 5).unwrap());
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(builtin_surface(&SurfaceDescriptor::sphere(0.0, [0.0; 3])).is_err());
        assert!(builtin_surface(&SurfaceDescriptor::ellipsoid(1.0, -1.0, 1.0)).is_err());
        assert!(builtin_surface(&SurfaceDescriptor::paraboloid(0.0, 1.0)).is_err());
        assert!(builtin_surface(&SurfaceDescriptor::torus(1.0, 2.0)).is_err());
    }

    #[test]
    fn fd_jet_of_plane_has_no_curvature() {
        let plane = |u: f64, v: f64| [u, v, 0.0];
        let dom = Domain::rect(-1.0, 1.0, -1.0, 1.0);
        let j = fd_jet(&plane, &dom, 0.3, -0.2, 4).unwrap();
        for d in 2..=4 {
            for i in 0..=d {
                let p = j.partial(i, d - i);
                assert!(p.iter().all(|x| x.abs() < 1e-6), "order ({i},{}) = {p:?}", d - i);
            }
        }
        assert!((j.partial(1, 0)[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fd_jet_boundary_error() {
        let plane = |u: f64, v: f64| [u, v, 0.0];
        let dom = Domain::rect(0.0, 1.0, 0.0, 1.0);
        assert!(matches!(fd_jet(&plane, &dom, 0.0, 0.5, 2), Err(GeomError::Boundary { .. })));
        assert!(fd_jet(&plane, &dom, 0.0, 0.5, 0).is_ok());
    }

    #[test]
    fn fd_jet_matches_analytic_paraboloid() {
        let p = builtin_surface(&SurfaceDescriptor::paraboloid(2.0, 3.0)).unwrap();
        let fd = p.fd_companion();
        let a = p.jet(0.3, -0.2, 2).unwrap();
        let b = fd.jet(0.3, -0.2, 2).unwrap();
        for (i, j) in [(2, 0), (1, 1), (0, 2)] {
            let (x, y) = (a.partial(i, j), b.partial(i, j));
            for k in 0..3 {
                assert!((x[k] - y[k]).abs() < 1e-6, "({i},{j}) {x:?} vs {y:?}");
            }
        }
    }
}
