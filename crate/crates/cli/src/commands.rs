//! The four subcommands, each turning a validated [`RunConfig`] into a table.

use crate::config::{Command, ConfigError, Preset, RunConfig};
use crate::table::{Cell, Table};
use fraclap::constants::{big_c_quadrature, dydares_constant, ConstantsBundle, FracOrder, Regime};
use fraclap::error::Error;
use fraclap::field::{Decay, ScalarField, Smoothness};
use fraclap::geometry::Point;
use fraclap::kernels::{
    fundamental_solution, green_closed, green_definition, poisson_kernel, s_mean_kernel, KernelContext,
};
use fraclap::quadrature::{LocalBound, QuadResult, QuadSpec};
use fraclap::solver::{dirichlet_solve, residual_check};
use fraclap::verify::{run_identities, KernelGrid, VerifyOptions};
use rayon::prelude::*;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Failure of a whole command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments outside the domain; exit 2.
    Config(String),
    /// Quadrature or series non-convergence, non-finite samples; exit 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(_) | Error::BudgetExceeded { .. } | Error::NonFiniteSample(_) | Error::Pole(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// A finished table plus what the caller needs for the exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Lines for stderr.
    pub notes: Vec<String>,
    /// Exit status when the table was produced: 0, 1 (failed identity) or
    /// 3 (an unconverged solve row).
    pub status: i32,
}

impl Outcome {
    fn ok(table: Table, notes: Vec<String>) -> Self {
        Self { table, notes, status: 0 }
    }
}

/// Validates `cfg` and dispatches on its command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cfg.command.expect("validated") {
        Command::Constants => cmd_constants(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn quad_spec(cfg: &RunConfig) -> Result<QuadSpec, CliError> {
    let rel = cfg.tolerances.rel.unwrap_or(DEFAULT_REL_TOL);
    let abs = cfg.tolerances.abs.unwrap_or(DEFAULT_ABS_TOL);
    Ok(QuadSpec::new(rel, abs)?)
}

fn coord_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn coord_cells(p: &Point) -> Vec<Cell> {
    p.coords().iter().map(|&c| Cell::Num(c)).collect()
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Super => "super",
        Regime::Sub => "sub",
        Regime::Critical => "critical",
    }
}

fn order_notes(order: &FracOrder) -> Vec<String> {
    order.conditioning_warning().into_iter().collect()
}

/// One row per (n, s): the constants, and C(n,s) by closed form and by quadrature.
pub fn cmd_constants(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let orders = cfg.orders.clone().unwrap_or_else(|| vec![(cfg.dim(), cfg.order())]);
    let mut table =
        Table::new(["n", "s", "regime", "a", "c", "k", "kappa", "C_closed", "C_quadrature", "abs_diff"]);
    let rows: Vec<(ConstantsBundle, f64)> = orders
        .par_iter()
        .map(|&(n, s)| {
            let bundle = ConstantsBundle::new(FracOrder::new(n, s)?)?;
            Ok((bundle, big_c_quadrature(n, s)?))
        })
        .collect::<Result<_, Error>>()?;
    let mut notes = Vec::new();
    for (b, quad) in rows {
        notes.extend(order_notes(&b.order));
        table.push(vec![
            b.order.n().into(),
            b.order.s().into(),
            regime_name(b.order.regime()).into(),
            b.a.into(),
            b.c.into(),
            b.k.into(),
            b.kappa.into(),
            b.big_c.into(),
            quad.into(),
            (b.big_c - quad).abs().into(),
        ]);
    }
    Ok(Outcome::ok(table, notes))
}

/// Kernel values at each evaluation point, one column per selector.
///
/// Two-point kernels take the grid point as their first free argument and
/// the anchor as the other: P_r(point, anchor) and G(anchor, point). The
/// Green function is extended by zero outside the ball. Points where a
/// kernel is undefined get an empty cell and a note in the status column.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (n, s, r) = (cfg.dim(), cfg.order(), cfg.radius());
    let ctx = KernelContext::new(n, s, r)?;
    let spec = quad_spec(cfg)?;
    let anchor = match &cfg.anchor {
        Some(c) => Point::new(c)?,
        None => Point::origin(n),
    };
    let needs_interior_anchor = cfg.fields.iter().any(|f| f != "phi" && f != "smean");
    if needs_interior_anchor && ctx.gap(&anchor) <= 0.0 {
        return Err(CliError::Config("the anchor must lie inside the ball".into()));
    }
    let points = cfg.eval_points();
    let rows: Vec<Vec<Result<f64, Error>>> = points
        .par_iter()
        .map(|p| cfg.fields.iter().map(|f| eval_field(&ctx, f, &anchor, p, &spec)).collect())
        .collect();

    let mut table = Table::new(coord_columns(n).into_iter().chain(cfg.fields.iter().cloned()).chain(["status".into()]));
    for (p, vals) in points.iter().zip(rows) {
        let mut row = coord_cells(p);
        let mut status = Vec::new();
        for (f, v) in cfg.fields.iter().zip(vals) {
            match v {
                Ok(v) => row.push(v.into()),
                Err(e) => match CliError::from(e.clone()) {
                    CliError::Numerical(_) => return Err(e.into()),
                    CliError::Config(_) => {
                        row.push(Cell::Null);
                        status.push(format!("{f}: {}", short_reason(&e)));
                    }
                },
            }
        }
        row.push(if status.is_empty() { "ok".into() } else { status.join("; ").into() });
        table.push(row);
    }
    Ok(Outcome::ok(table, order_notes(&ctx.order)))
}

fn short_reason(e: &Error) -> &'static str {
    match e {
        Error::DiagonalSingularity => "diagonal",
        Error::Singularity(_) => "singular",
        Error::Regime(_) => "undefined in regime",
        _ => "outside domain",
    }
}

fn eval_field(ctx: &KernelContext, field: &str, anchor: &Point, p: &Point, spec: &QuadSpec) -> Result<f64, Error> {
    let outside = ctx.gap(p) <= 0.0;
    match field {
        "phi" => fundamental_solution(ctx, p),
        "smean" => s_mean_kernel(ctx, p),
        "poisson" => poisson_kernel(ctx, p, anchor),
        "green_closed" if outside => Ok(0.0),
        "green_closed" => Ok(green_closed(ctx, anchor, p)?.value),
        "green_definition" if outside => Ok(0.0),
        "green_definition" => green_definition(ctx, anchor, p, spec)?.require(),
        other => Err(Error::Domain(format!("unknown field '{other}'"))),
    }
}

/// Forcing field for a preset, and the exact solution when one is known.
fn preset_forcing(preset: &Preset, n: usize, s: f64, r: f64) -> Result<(ScalarField<'static>, Option<f64>), Error> {
    let bounded = |f: ScalarField<'static>, b: f64| f.with_decay(Decay::Bounded(b)).with_smoothness(Smoothness::Smooth);
    Ok(match preset.clone() {
        Preset::Constant { value } => {
            let k = dydares_constant(n, s)?;
            (bounded(ScalarField::new(move |_| value), value.abs()), Some(value / k))
        }
        Preset::Dydares => {
            let k = dydares_constant(n, s)?;
            (bounded(ScalarField::new(move |_| k), k), Some(1.0))
        }
        Preset::Gaussian { amplitude, width } => {
            let f = ScalarField::new(move |p: &Point| amplitude * (-p.norm_sq() / (width * width)).exp());
            (bounded(f, amplitude.abs()), None)
        }
        Preset::Polynomial { coefficients } => {
            // the solver only samples |y| < r; the field is cut off there
            let f = ScalarField::new(move |p: &Point| {
                let t = p.norm();
                if t < r {
                    coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
                } else {
                    0.0
                }
            });
            (f.with_decay(Decay::Compact(r)).with_smoothness(Smoothness::Continuous), None)
        }
    })
}

/// u on the evaluation points for the preset forcing with zero exterior data.
///
/// Constant forcing c has the exact solution (c/K)(r² − |x|²)₊^s with K the
/// dydares constant; for those presets an `exact` column is added. The
/// `residual` column (n = 1) applies the pointwise fractional Laplacian to
/// the computed u and compares with the forcing.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (n, s, r) = (cfg.dim(), cfg.order(), cfg.radius());
    let ctx = KernelContext::new(n, s, r)?;
    let spec = quad_spec(cfg)?;
    let preset = cfg.preset.as_ref().expect("validated");
    let (h, scale) = preset_forcing(preset, n, s, r)?;
    let points = cfg.eval_points();
    let results: Vec<QuadResult> =
        points.par_iter().map(|p| dirichlet_solve(&ctx, &h, p, &spec)).collect::<Result<_, Error>>()?;

    let residuals = if cfg.residual { Some(residuals(cfg, &ctx, &h, &points, &spec)?) } else { None };

    let mut cols = coord_columns(n);
    cols.extend(["u", "error_estimate", "converged"].map(String::from));
    if scale.is_some() {
        cols.extend(["exact", "abs_error"].map(String::from));
    }
    if residuals.is_some() {
        cols.push("residual".into());
    }
    let mut table = Table::new(cols);
    let mut status = 0;
    for (i, (p, q)) in points.iter().zip(&results).enumerate() {
        let mut row = coord_cells(p);
        row.extend([q.value.into(), q.error_estimate.into(), q.converged.into()]);
        if let Some(k) = scale {
            let exact = k * ctx.gap(p).max(0.0).powf(s);
            row.extend([exact.into(), (q.value - exact).abs().into()]);
        }
        if let Some(res) = &residuals {
            row.push(res[i].into());
        }
        if !q.converged {
            status = 3;
        }
        table.push(row);
    }
    let mut notes = order_notes(&ctx.order);
    if status != 0 {
        notes.push("some points did not reach the requested tolerance".into());
    }
    Ok(Outcome { table, notes, status })
}

/// Residual |(−Δ)^s u − h| at each interior point at least 5% of r inside
/// the sphere; `None` elsewhere.
fn residuals(
    cfg: &RunConfig,
    ctx: &KernelContext,
    h: &ScalarField<'static>,
    points: &[Point],
    spec: &QuadSpec,
) -> Result<Vec<Option<f64>>, Error> {
    let r = cfg.radius();
    let margin = 0.05 * r;
    let inner_spec = QuadSpec::new(spec.rel_tol, spec.abs_tol)?;
    let u = {
        let (ctx, h, inner_spec) = (ctx.clone(), h.clone(), inner_spec.clone());
        ScalarField::fallible(move |p: &Point| dirichlet_solve(&ctx, &h, p, &inner_spec)?.require())
            .with_decay(Decay::Compact(r))
            .with_smoothness(Smoothness::Continuous)
    };
    let probes: Vec<Point> = points.iter().filter(|p| r - p.norm() >= margin).cloned().collect();
    let mut out = vec![None; points.len()];
    if probes.is_empty() {
        return Ok(out);
    }
    // second derivative of the computed u, by central differences at each probe
    let m = probes
        .iter()
        .map(|p| {
            let step = 0.5 * margin;
            let e = Point::on_axis(1, step);
            let d2 = (u.eval(&p.add(&e))? - 2.0 * u.eval(p)? + u.eval(&p.sub(&e))?) / (step * step);
            Ok(d2.abs())
        })
        .collect::<Result<Vec<f64>, Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let bound = LocalBound { delta: 0.5 * margin, second_derivative_bound: 2.0 * m };
    let report = residual_check(ctx, h, &u, &probes, &bound, &QuadSpec::new(1e-7, 1e-9)?)?;
    let mut res = report.residuals.expect("residual rows").into_iter();
    for (slot, p) in out.iter_mut().zip(points) {
        if r - p.norm() >= margin {
            *slot = res.next().map(|(_, v)| v);
        }
    }
    Ok(out)
}

/// The identity battery as a pass/fail table; status 1 when any row fails.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut grid = KernelGrid::default();
    if let Some(orders) = &cfg.orders {
        grid.orders = orders.clone();
    } else if cfg.n.is_some() || cfg.s.is_some() {
        grid.orders = vec![(cfg.dim(), cfg.order())];
    }
    if let Some(r) = cfg.r {
        grid.radii = vec![r];
    }
    if let Some(f) = &cfg.x_fractions {
        grid.x_fractions = f.clone();
    }
    let opts = VerifyOptions { filter: cfg.identities.clone(), tol_override: cfg.tolerances.identity, grid };
    let rows = run_identities(&opts)?;
    let mut table = Table::new(["name", "params", "lhs", "rhs", "abs_err", "rel_err", "tol", "pass"]);
    let failed = rows.iter().filter(|r| !r.pass).count();
    for row in rows {
        table.push(vec![
            row.name.into(),
            row.params.into(),
            row.lhs.into(),
            row.rhs.into(),
            row.abs_err.into(),
            row.rel_err.into(),
            row.tol.into(),
            row.pass.into(),
        ]);
    }
    let total = table.rows.len();
    let notes = vec![format!("{} of {total} identities passed", total - failed)];
    Ok(Outcome { table, notes, status: if failed > 0 { 1 } else { 0 } })
}
