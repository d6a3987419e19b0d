use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use relgeo_core::geometry::curvature_bundle;
use relgeo_core::linalg::{norm, scale, sub, Vec3};
use relgeo_core::quadrature::{build_grid, divergence_identity_check, integral_formula_eval};
use relgeo_core::relative::{
    relative_mean_curvature, relative_normal, support_function, unit_normal,
};
use relgeo_core::variational::{
    manhart_identity_report, pde_residuals, separation_scan, sphere_condition_check,
    DeformationMode, DeformationSpec, SmoothBump,
};

use crate::error::CliError;
use crate::report::{status_of, Bound, Check, Ledger, Report, Table};
use crate::scenario::{
    check_alpha, linspace, CScan, Command, Expectation, FSpec, IdentityScenario, LGrid,
    PdeScenario, Scenario, SphereScenario,
};

/// Global flags.
#[derive(Clone, Debug)]
pub struct Options {
    pub grid: Option<usize>,
    pub tolerance_scale: f64,
    pub emit_csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            grid: None,
            tolerance_scale: 1.0,
            emit_csv: None,
            json: None,
        }
    }
}

pub struct Outcome {
    pub json: String,
    pub table: Table,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn finish<R: Serialize>(report: Report<R>, table: Table) -> Outcome {
    Outcome {
        json: report.to_json(),
        passed: report.passed(),
        checks: report.checks.clone(),
        table,
    }
}

pub fn run(command: Command, scenario: &Scenario, opts: &Options) -> Result<Outcome, CliError> {
    if scenario.command() != command {
        return Err(CliError::Schema(format!(
            "scenario is of kind `{}`, not `{}`",
            scenario.command().name(),
            command.name()
        )));
    }
    match scenario {
        Scenario::Identity(s) => identity(s, opts),
        Scenario::Pde(s) => pde(s, opts),
        Scenario::Sphere(s) => sphere(s, opts),
    }
}

fn resolution(flag: Option<usize>, file: Option<usize>, default: usize) -> Result<usize, CliError> {
    let n = flag.or(file).unwrap_or(default);
    if n < 4 {
        return Err(CliError::Schema(format!(
            "grid resolution must be at least 4, got {n}"
        )));
    }
    Ok(n)
}

#[derive(Serialize)]
struct IdentityResults {
    alpha: f64,
    expected: f64,
    ratio: f64,
    bump: ResolvedBump,
    #[serde(rename = "dF_fd")]
    df_fd: f64,
    #[serde(rename = "dF_fd_step")]
    df_fd_step: f64,
    #[serde(rename = "dF_fd_half_step")]
    df_fd_half_step: f64,
    #[serde(rename = "dF_analytic")]
    df_analytic: f64,
    #[serde(rename = "dF_analytic_coarse")]
    df_analytic_coarse: f64,
    #[serde(rename = "dArea_analytic")]
    darea_analytic: f64,
    #[serde(rename = "dArea_fd")]
    darea_fd: Option<f64>,
    residuals: IdentityResiduals,
}

#[derive(Serialize)]
struct ResolvedBump {
    center: [f64; 2],
    radius: f64,
    amplitude: f64,
    step: f64,
}

#[derive(Serialize)]
struct IdentityResiduals {
    identity: f64,
    fd_vs_analytic: f64,
    frozen: Option<f64>,
    step_change: f64,
    step_sensitive: bool,
    grid_change: f64,
}

fn identity(s: &IdentityScenario, opts: &Options) -> Result<Outcome, CliError> {
    check_alpha(&s.f)?;
    let alpha = match &s.f {
        FSpec::Manhart { alpha, q: None } => *alpha,
        FSpec::Manhart { q: Some(_), .. } => {
            return Err(CliError::Schema(
                "identity runs use the power family with q = 1".into(),
            ));
        }
        _ => {
            return Err(CliError::Schema(
                "identity runs need f of kind `manhart`".into(),
            ))
        }
    };
    if !alpha.is_finite() {
        return Err(CliError::Schema("alpha must be finite".into()));
    }
    let mut known = vec![
        ("identity", Bound::Max, 1e-4),
        ("fd_vs_analytic", Bound::Max, 1e-4),
    ];
    if s.frozen {
        known.push(("frozen", Bound::Max, 1e-3));
    }
    let ledger = Ledger::new(&known, &s.tolerances, opts.tolerance_scale)?;
    let grid = resolution(opts.grid, s.grid, 128)?;
    let patch = s.surface.build()?;
    let b = s.deformation.unwrap_or_default();
    let d = patch.domain();
    let center = b
        .center
        .unwrap_or([0.5 * (d.u.min + d.u.max), 0.5 * (d.v.min + d.v.max)]);
    if !(b.radius.is_finite() && b.radius > 0.0) || !(b.amplitude.is_finite() && b.amplitude != 0.0)
    {
        return Err(CliError::Schema(
            "bump radius must be positive and amplitude nonzero".into(),
        ));
    }
    let bump = Arc::new(SmoothBump::new(center, b.radius, b.amplitude));
    let step = DeformationSpec::new(bump.clone(), DeformationMode::EuclideanNormal).step;
    let r = manhart_identity_report(&patch, bump, alpha, grid, s.frozen)?;
    let mut checks = vec![
        ledger.check("identity", r.residuals.identity),
        ledger.check("fd_vs_analytic", r.residuals.fd_vs_analytic),
    ];
    if let Some(fr) = r.residuals.frozen {
        checks.push(ledger.check("frozen", fr));
    }
    let mut table = Table::new(&[
        "alpha",
        "c_expected",
        "df_fd",
        "df_analytic",
        "darea_analytic",
        "ratio",
        "identity",
        "fd_vs_analytic",
        "step_change",
    ]);
    table.push(vec![
        alpha,
        r.c_expected,
        r.df_fd,
        r.df_analytic,
        r.darea_analytic,
        r.ratio(),
        r.residuals.identity,
        r.residuals.fd_vs_analytic,
        r.residuals.step_change,
    ]);
    let results = IdentityResults {
        alpha,
        expected: r.c_expected,
        ratio: r.ratio(),
        bump: ResolvedBump {
            center,
            radius: b.radius,
            amplitude: b.amplitude,
            step,
        },
        df_fd: r.df_fd,
        df_fd_step: r.df_fd_step,
        df_fd_half_step: r.df_fd_half_step,
        df_analytic: r.df_analytic,
        df_analytic_coarse: r.df_analytic_coarse,
        darea_analytic: r.darea_analytic,
        darea_fd: r.darea_fd,
        residuals: IdentityResiduals {
            identity: r.residuals.identity,
            fd_vs_analytic: r.residuals.fd_vs_analytic,
            frozen: r.residuals.frozen,
            step_change: r.residuals.step_change,
            step_sensitive: r.residuals.step_sensitive,
            grid_change: r.residuals.grid_change,
        },
    };
    let status = status_of(&checks);
    Ok(finish(
        Report {
            schema: crate::report::SCHEMA,
            command: Command::Identity,
            status,
            surface: Some(s.surface.clone()),
            f: Some(s.f.clone()),
            grid: Some(grid),
            tolerances: ledger,
            checks,
            results,
        },
        table,
    ))
}

#[derive(Serialize)]
struct PdeResults {
    expect: Expectation,
    /// `C` used for the per-node residuals.
    c: f64,
    nodes: usize,
    max_residual: f64,
    max_equivalence: f64,
    separation: Separation,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere_condition: Option<SphereCondition>,
}

#[derive(Serialize)]
struct Separation {
    c_scan: CScan,
    best_c: f64,
    margin: f64,
}

#[derive(Serialize)]
struct SphereCondition {
    exponent_expected: f64,
    exponent_fitted: f64,
    exponent_error: f64,
    q1: f64,
    max_deviation: f64,
}

fn pde(s: &PdeScenario, opts: &Options) -> Result<Outcome, CliError> {
    check_alpha(&s.f)?;
    let f = s.f.build()?;
    let alpha = s.f.alpha();
    let expect = s.expect.unwrap_or(if alpha.is_some() {
        Expectation::Solution
    } else {
        Expectation::Separation
    });
    let known: &[(&str, Bound, f64)] = match expect {
        Expectation::Solution => &[
            ("pde_residual", Bound::Max, 1e-10),
            ("equivalence", Bound::Max, 1e-10),
            ("sphere_exponent", Bound::Max, 1e-10),
        ],
        Expectation::Separation => &[
            ("separation_margin", Bound::Min, 0.1),
            ("equivalence", Bound::Max, 1e-10),
        ],
    };
    let ledger = Ledger::new(known, &s.tolerances, opts.tolerance_scale)?;
    let grid = match (&s.l_grid, opts.grid) {
        (LGrid::Range { min, max, .. }, Some(n)) => LGrid::Range {
            min: *min,
            max: *max,
            n,
        },
        (g, _) => g.clone(),
    };
    let pairs = grid.pairs()?;
    let scan = s.c_scan.unwrap_or_default();
    if !(scan.step > 0.0 && scan.min.is_finite() && scan.max >= scan.min) {
        return Err(CliError::Schema(
            "c_scan needs min <= max and a positive step".into(),
        ));
    }
    let given_c = s.c.or(alpha.map(|a| 1.0 / (1.0 - a)));
    if expect == Expectation::Solution && given_c.is_none() {
        return Err(CliError::Schema(
            "`c` is required to test a solution of a non-power f".into(),
        ));
    }
    if let Some(c) = given_c {
        if !c.is_finite() || c == 0.0 {
            return Err(CliError::Schema("`c` must be finite and nonzero".into()));
        }
    }
    // residual(C) = L − C·R per equation; L at C = 0, R from C = 1
    let mut samples = Vec::with_capacity(3 * pairs.len());
    for &(l1, l2) in &pairs {
        let r0 = pde_residuals(f.as_ref(), 0.0, l1, l2)?.curvature_form;
        let r1 = pde_residuals(f.as_ref(), 1.0, l1, l2)?.curvature_form;
        samples.extend((0..3).map(|k| (r0[k], r0[k] - r1[k])));
    }
    let sep = separation_scan(&samples, scan.min, scan.max, scan.step);
    let c = given_c.unwrap_or(sep.best_c);
    let mut table = Table::new(&[
        "l1",
        "l2",
        "u",
        "v",
        "residual_1",
        "residual_2",
        "residual_3",
        "equivalence",
    ]);
    let (mut max_res, mut max_eq): (f64, f64) = (0.0, 0.0);
    for &(l1, l2) in &pairs {
        let r = pde_residuals(f.as_ref(), c, l1, l2)?;
        max_res = max_res.max(r.max_abs());
        max_eq = max_eq.max(r.equivalence);
        let cf = r.curvature_form;
        table.push(vec![l1, l2, r.u, r.v, cf[0], cf[1], cf[2], r.equivalence]);
    }
    let mut checks = Vec::new();
    let mut sphere_condition = None;
    match expect {
        Expectation::Solution => {
            checks.push(ledger.check("pde_residual", max_res));
            checks.push(ledger.check("equivalence", max_eq));
            let xs = s.x_grid.clone().unwrap_or_else(|| linspace(0.5, 3.0, 10));
            let sc = sphere_condition_check(f.as_ref(), c, &xs)?;
            let err = (sc.exponent_fitted - sc.exponent_expected).abs();
            checks.push(ledger.check("sphere_exponent", err));
            sphere_condition = Some(SphereCondition {
                exponent_expected: sc.exponent_expected,
                exponent_fitted: sc.exponent_fitted,
                exponent_error: err,
                q1: sc.q1,
                max_deviation: sc.max_deviation,
            });
        }
        Expectation::Separation => {
            checks.push(ledger.check("separation_margin", sep.margin));
            checks.push(ledger.check("equivalence", max_eq));
        }
    }
    let results = PdeResults {
        expect,
        c,
        nodes: pairs.len(),
        max_residual: max_res,
        max_equivalence: max_eq,
        separation: Separation {
            c_scan: scan,
            best_c: sep.best_c,
            margin: sep.margin,
        },
        sphere_condition,
    };
    let status = status_of(&checks);
    Ok(finish(
        Report {
            schema: crate::report::SCHEMA,
            command: Command::Pde,
            status,
            surface: None,
            f: Some(s.f.clone()),
            grid: None,
            tolerances: ledger,
            checks,
            results,
        },
        table,
    ))
}

#[derive(Serialize)]
struct SphereResults {
    origin: Vec3,
    integral_formula: Vec<FormulaRow>,
    divergence: DivergenceRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_normal: Option<RelativeNormalRow>,
}

#[derive(Serialize)]
struct FormulaRow {
    sigma: f64,
    lhs: f64,
    rhs1: f64,
    rhs2: f64,
    residual: f64,
    min_integrand: [f64; 2],
    nonnegative: bool,
}

#[derive(Serialize)]
struct DivergenceRow {
    max_pointwise: f64,
    integral_residual: f64,
    minkowski_residual: f64,
}

#[derive(Serialize)]
struct RelativeNormalRow {
    mean_curvature_min: f64,
    mean_curvature_max: f64,
    spread: f64,
    max_tangential: f64,
    /// Constancy is asserted only on spheres.
    checked: bool,
}

fn sphere(s: &SphereScenario, opts: &Options) -> Result<Outcome, CliError> {
    if s.sigmas.is_empty() || s.sigmas.iter().any(|x| !(-1.0..=1.0).contains(x)) {
        return Err(CliError::Schema(
            "sigmas must be a nonempty list in [-1, 1]".into(),
        ));
    }
    let round = s.surface.is_sphere();
    let mut known = vec![
        ("integral_formula", Bound::Max, 1e-7),
        ("divergence", Bound::Max, 1e-9),
    ];
    if round {
        known.push(("sphere_zero", Bound::Max, 1e-9));
        if s.f.is_some() {
            known.push(("mean_spread", Bound::Max, 1e-10));
            known.push(("tangential", Bound::Max, 1e-12));
        }
    }
    let ledger = Ledger::new(&known, &s.tolerances, opts.tolerance_scale)?;
    let grid = resolution(opts.grid, s.grid, 64)?;
    let f = s.f.as_ref().map(|f| f.build()).transpose()?;
    let patch = s.surface.build()?;
    let qgrid = build_grid(&patch, grid)?;
    let mut rows = Vec::new();
    for &sigma in &s.sigmas {
        let r = integral_formula_eval(&patch, &qgrid, sigma, s.origin)?;
        rows.push((
            r.origin,
            FormulaRow {
                sigma,
                lhs: r.lhs,
                rhs1: r.rhs1,
                rhs2: r.rhs2,
                residual: r.residual,
                min_integrand: r.min_integrand,
                nonnegative: r.nonnegative,
            },
        ));
    }
    let origin = rows[0].0;
    let rows: Vec<FormulaRow> = rows.into_iter().map(|(_, r)| r).collect();
    let div = divergence_identity_check(&patch, &qgrid, Some(origin))?;

    let mut header = vec!["u", "v", "weight", "mean", "gauss", "rho"];
    if f.is_some() {
        header.extend(["relative_mean", "tangential"]);
    }
    let mut table = Table::new(&header);
    let (mut lo, mut hi, mut tang) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (node, w) in qgrid.nodes.iter().zip(&qgrid.weights) {
        let (u, v) = (node[0], node[1]);
        let b = curvature_bundle(&patch, u, v)?;
        let rho = support_function(&patch, u, v, &origin)?.rho;
        let mut row = vec![u, v, *w, b.mean, b.gauss, rho];
        if let Some(f) = &f {
            let h = relative_mean_curvature(&patch, u, v, f.as_ref())?;
            let y = relative_normal(&patch, u, v, f.as_ref())?;
            let n = unit_normal(&patch, u, v)?;
            let t = norm(&sub(&y.y, &scale(&n, y.normal_part)));
            lo = lo.min(h);
            hi = hi.max(h);
            tang = tang.max(t);
            row.extend([h, t]);
        }
        table.push(row);
    }

    let max_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.residual));
    let mut checks = vec![
        ledger.check("integral_formula", max_residual),
        Check::flag("nonnegative", rows.iter().all(|r| r.nonnegative)),
        ledger.check("divergence", div.max_pointwise),
    ];
    if round {
        let zero = rows.iter().fold(0.0f64, |m, r| {
            m.max(r.lhs.abs()).max(r.rhs1.abs()).max(r.rhs2.abs())
        });
        checks.push(ledger.check("sphere_zero", zero));
        if f.is_some() {
            checks.push(ledger.check("mean_spread", hi - lo));
            checks.push(ledger.check("tangential", tang));
        }
    }
    let results = SphereResults {
        origin,
        integral_formula: rows,
        divergence: DivergenceRow {
            max_pointwise: div.max_pointwise,
            integral_residual: div.integral_residual,
            minkowski_residual: div.minkowski_residual,
        },
        relative_normal: f.as_ref().map(|_| RelativeNormalRow {
            mean_curvature_min: lo,
            mean_curvature_max: hi,
            spread: hi - lo,
            max_tangential: tang,
            checked: round,
        }),
    };
    let status = status_of(&checks);
    Ok(finish(
        Report {
            schema: crate::report::SCHEMA,
            command: Command::Sphere,
            status,
            surface: Some(s.surface.clone()),
            f: s.f.clone(),
            grid: Some(grid),
            tolerances: ledger,
            checks,
            results,
        },
        table,
    ))
}
