//! Scenario files: JSON, validated before any numerics run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use relgeo_core::relative::{AutoDiffF, ConstantF, FunctionOfHK, ManhartF};
use relgeo_core::surface::{Domain, GaussianHeight, Orientation};
use relgeo_core::{builtin_surface, GeomError, SurfaceDescriptor, SurfacePatch, Taylor};

use crate::error::CliError;
use crate::expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Identity,
    Pde,
    Sphere,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Identity => "identity",
            Command::Pde => "pde",
            Command::Sphere => "sphere",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    Identity(IdentityScenario),
    Pde(PdeScenario),
    Sphere(SphereScenario),
}

impl Scenario {
    pub fn command(&self) -> Command {
        match self {
            Scenario::Identity(_) => Command::Identity,
            Scenario::Pde(_) => Command::Pde,
            Scenario::Sphere(_) => Command::Sphere,
        }
    }

    pub fn common(&self) -> Common {
        let (grid, tolerances, outputs) = match self {
            Scenario::Identity(s) => (s.grid, &s.tolerances, &s.outputs),
            Scenario::Pde(s) => (s.grid, &s.tolerances, &s.outputs),
            Scenario::Sphere(s) => (s.grid, &s.tolerances, &s.outputs),
        };
        Common {
            grid,
            tolerances: tolerances.clone(),
            outputs: outputs.clone(),
        }
    }
}

/// Keys shared by every scenario kind.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub grid: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityScenario {
    pub surface: SurfaceSpec,
    pub f: FSpec,
    #[serde(default)]
    pub deformation: Option<BumpSpec>,
    /// Also difference the relative area with the field frozen by normal matching.
    #[serde(default)]
    pub frozen: bool,
    #[serde(default)]
    pub grid: Option<usize>,
    /// Overrides of named tolerances; names must be known to the command.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeScenario {
    pub f: FSpec,
    pub l_grid: LGrid,
    /// `C` for the residual sweep; defaults to `1/(1−α)` for the power family.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub c_scan: Option<CScan>,
    /// Sphere-condition abscissae `x = 1/r`; defaults to 10 points in `[0.5, 3]`.
    #[serde(default)]
    pub x_grid: Option<Vec<f64>>,
    /// Defaults to `solution` for the power family and `separation` otherwise.
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub grid: Option<usize>,
    /// Overrides of named tolerances; names must be known to the command.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// The system is solved: residuals vanish.
    Solution,
    /// No `C` solves it: the separation margin stays above its floor.
    Separation,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereScenario {
    pub surface: SurfaceSpec,
    /// Power-family `f` for the relative-normal checks.
    #[serde(default)]
    pub f: Option<FSpec>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Support-function origin; the node centroid when absent.
    #[serde(default)]
    pub origin: Option<[f64; 3]>,
    #[serde(default)]
    pub grid: Option<usize>,
    /// Overrides of named tolerances; names must be known to the command.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_sigmas() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationSpec {
    Inward,
    Outward,
    Up,
    Down,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Sphere {
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "default_pole_axis")]
        pole_axis: usize,
        #[serde(default)]
        orientation: Option<OrientationSpec>,
    },
    Ellipsoid {
        semi_axes: [f64; 3],
        #[serde(default)]
        orientation: Option<OrientationSpec>,
    },
    Paraboloid {
        l1: f64,
        l2: f64,
        /// `[u0, u1, v0, v1]`.
        #[serde(default)]
        domain: Option<[f64; 4]>,
        #[serde(default)]
        orientation: Option<OrientationSpec>,
    },
    GaussianGraph {
        amplitude: f64,
        #[serde(default)]
        center: [f64; 2],
        width: f64,
        domain: [f64; 4],
        #[serde(default)]
        orientation: Option<OrientationSpec>,
    },
    Torus {
        major: f64,
        minor: f64,
    },
}

fn default_pole_axis() -> usize {
    2
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<SurfacePatch, CliError> {
        let (desc, orientation, closed) = match self {
            SurfaceSpec::Sphere {
                radius,
                center,
                pole_axis,
                orientation,
            } => (
                SurfaceDescriptor::Sphere {
                    radius: *radius,
                    center: *center,
                    pole_axis: *pole_axis,
                },
                *orientation,
                true,
            ),
            SurfaceSpec::Ellipsoid {
                semi_axes,
                orientation,
            } => (
                SurfaceDescriptor::Ellipsoid {
                    semi_axes: *semi_axes,
                },
                *orientation,
                true,
            ),
            SurfaceSpec::Paraboloid {
                l1,
                l2,
                domain,
                orientation,
            } => (
                SurfaceDescriptor::Paraboloid {
                    l1: *l1,
                    l2: *l2,
                    domain: domain.map(rect_domain),
                },
                *orientation,
                false,
            ),
            SurfaceSpec::GaussianGraph {
                amplitude,
                center,
                width,
                domain,
                orientation,
            } => (
                SurfaceDescriptor::graph(
                    GaussianHeight {
                        amplitude: *amplitude,
                        center: *center,
                        width: *width,
                    },
                    rect_domain(*domain),
                ),
                *orientation,
                false,
            ),
            SurfaceSpec::Torus { major, minor } => {
                (SurfaceDescriptor::torus(*major, *minor), None, true)
            }
        };
        let patch = builtin_surface(&desc).map_err(CliError::from_geom)?;
        // builtin closed surfaces face inward, graphs face up
        let flip = match (orientation, closed) {
            (None | Some(OrientationSpec::Inward), true)
            | (None | Some(OrientationSpec::Up), false) => false,
            (Some(OrientationSpec::Outward), true) | (Some(OrientationSpec::Down), false) => true,
            (Some(o), _) => {
                let shape = if closed { "closed surfaces" } else { "graphs" };
                return Err(CliError::Schema(format!(
                    "orientation {o:?} does not apply to {shape}"
                )));
            }
        };
        Ok(if flip {
            let o = match patch.orientation() {
                Orientation::Positive => Orientation::Negative,
                Orientation::Negative => Orientation::Positive,
            };
            patch.with_orientation(o)
        } else {
            patch
        })
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, SurfaceSpec::Sphere { .. })
    }
}

fn rect_domain(d: [f64; 4]) -> Domain {
    Domain::rect(d[0], d[1], d[2], d[3])
}

/// A curvature function `f(u, v)` with `u` for `H` and `v` for `K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FSpec {
    /// `q_i |v|^α`, with `q = [q₊, q₋, q₀]` by the sign of `(u, v)`.
    Manhart {
        alpha: f64,
        #[serde(default)]
        q: Option<[f64; 3]>,
    },
    Constant {
        value: f64,
    },
    Expr {
        expr: String,
    },
}

impl FSpec {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            FSpec::Manhart { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn FunctionOfHK>, CliError> {
        Ok(match self {
            FSpec::Manhart { alpha, q } => {
                if !alpha.is_finite() {
                    return Err(CliError::Schema("alpha must be finite".into()));
                }
                if let Some(q) = q {
                    if q.iter().any(|x| !x.is_finite() || *x == 0.0) {
                        return Err(CliError::Schema(
                            "q entries must be finite and nonzero".into(),
                        ));
                    }
                }
                Arc::new(ManhartF::with_q(*alpha, q.unwrap_or([1.0; 3])))
            }
            FSpec::Constant { value } => {
                if !value.is_finite() || *value == 0.0 {
                    return Err(CliError::Schema(
                        "constant f must be finite and nonzero".into(),
                    ));
                }
                Arc::new(ConstantF(*value))
            }
            FSpec::Expr { expr } => {
                let e = expr::parse(expr)
                    .map_err(|e| CliError::Schema(format!("f expression: {e}")))?;
                Arc::new(AutoDiffF::new(move |u: &Taylor, v: &Taylor| e.eval(u, v)))
            }
        })
    }
}

/// Compact-support bump `φ` in chart parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_radius() -> f64 {
    0.4
}

fn default_amplitude() -> f64 {
    0.05
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self {
            center: None,
            radius: default_radius(),
            amplitude: default_amplitude(),
        }
    }
}

/// Principal curvature pairs: either explicit lists or a square grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LGrid {
    Values { l1: Vec<f64>, l2: Vec<f64> },
    Range { min: f64, max: f64, n: usize },
}

impl LGrid {
    /// All `(ℓ₁, ℓ₂)` pairs, `ℓ₁` outer.
    pub fn pairs(&self) -> Result<Vec<(f64, f64)>, CliError> {
        let (a, b) = match self {
            LGrid::Values { l1, l2 } => (l1.clone(), l2.clone()),
            LGrid::Range { min, max, n } => {
                if !(min.is_finite() && max.is_finite()) || (*n > 1 && max <= min) {
                    return Err(CliError::Schema(
                        "l_grid range needs finite min < max".into(),
                    ));
                }
                let pts = linspace(*min, *max, *n);
                (pts.clone(), pts)
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(CliError::Schema("l_grid is empty".into()));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite() || *x == 0.0) {
            return Err(CliError::Schema(
                "principal curvatures must be finite and nonzero".into(),
            ));
        }
        Ok(a.iter()
            .flat_map(|x| b.iter().map(move |y| (*x, *y)))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CScan {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for CScan {
    fn default() -> Self {
        Self {
            min: -10.0,
            max: 10.0,
            step: 0.01,
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

/// Rejects a power exponent of 1, where `C = 1/(1−α)` is undefined.
pub fn check_alpha(f: &FSpec) -> Result<(), CliError> {
    if f.alpha() == Some(1.0) {
        return Err(CliError::Schema("alpha must differ from 1".into()));
    }
    Ok(())
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::from_geom(e)
    }
}
