//! Identity battery: every kernel normalisation, integral identity and
//! special-function relation the toolkit relies on, evaluated on fixed
//! grids with an independent left- and right-hand side.

use crate::constants::{big_c_const, big_c_quadrature, k_const, FracOrder, Regime};
use crate::error::{Error, Result};
use crate::geometry::{distance_identity, inversion_gap_identity, inversion_jacobian, kelvin_invert, Point};
use crate::kernels::{fundamental_solution, s_mean_kernel, KernelContext};
use crate::quadrature::{
    alternating_sum, integrate_ball_about, integrate_exterior, integrate_exterior_focused, integrate_interval,
    integrate_nodes, QuadResult, QuadSpec,
};
use crate::specfun::{gamma, hyp2f1, hyp2f1_connection, hyp2f1_series, sine_moment, sin_pi, wallis};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Identity names in report order.
pub const IDENTITIES: &[&str] = &[
    "Ir",
    "Ip",
    "If",
    "Ifu",
    "Ipu",
    "log_arcsine",
    "sphere_angle",
    "sphere_measure",
    "beta_ratio",
    "sine_moment",
    "boundary_integral_limit",
    "gamma_duplication",
    "gamma_reflection",
    "hyp2f1_elementary",
    "hyp2f1_quadratic",
    "hyp2f1_connection",
    "inversion_gap",
    "inversion_distance",
    "inversion_jacobian",
    "c_two_routes",
];

/// Tolerance for identities whose left side is a kernel normalisation.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Tolerance for other quadrature-backed identities.
pub const QUADRATURE_TOL: f64 = 1e-5;
/// Tolerance for closed-form and special-function identities.
pub const CLOSED_FORM_TOL: f64 = 1e-8;

/// One evaluated identity.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRow {
    pub name: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    /// |lhs − rhs|/|rhs|, or the absolute error when rhs = 0.
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Replacement for the default (n, s, r, x) grid of the kernel identities.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGrid {
    pub orders: Vec<(usize, f64)>,
    pub radii: Vec<f64>,
    /// Interior points as multiples of r along e₁.
    pub x_fractions: Vec<f64>,
}

impl Default for KernelGrid {
    fn default() -> Self {
        let mut orders = Vec::new();
        for n in 1..=3 {
            for s in [0.25, 0.5, 0.75] {
                orders.push((n, s));
            }
        }
        Self { orders, radii: vec![1.0, 2.0], x_fractions: vec![0.0, 0.5] }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    /// Exact identity names to run; all when `None`.
    pub filter: Option<Vec<String>>,
    /// Replaces every identity tolerance.
    pub tol_override: Option<f64>,
    pub grid: KernelGrid,
}

type Eval = Box<dyn Fn() -> Result<(f64, f64)> + Send + Sync>;

struct Task {
    name: &'static str,
    params: String,
    tol: f64,
    eval: Eval,
}

fn task(name: &'static str, params: String, tol: f64, eval: impl Fn() -> Result<(f64, f64)> + Send + Sync + 'static) -> Task {
    Task { name, params, tol, eval: Box::new(eval) }
}

fn spec() -> QuadSpec {
    QuadSpec::new(1e-10, 1e-13).expect("valid tolerances")
}

fn done(r: QuadResult) -> Result<f64> {
    r.require()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Points along e₁ as `on_axis` puts them along eₙ; n = 1 coincides.
fn e1(n: usize, t: f64) -> Point {
    let mut c = vec![0.0; n];
    c[0] = t;
    Point::new(&c).expect("finite coordinates")
}

fn kernel_tasks(grid: &KernelGrid, out: &mut Vec<Task>) {
    for &(n, s) in &grid.orders {
        for &r in &grid.radii {
            let params = format!("n={n} s={} r={}", fmt(s), fmt(r));
            out.push(task("Ir", params, NORMALIZATION_TOL, move || {
                let ctx = KernelContext::new(n, s, r)?;
                let q = spec().with_right(-s).with_decay(-(n as f64) - 2.0 * s);
                let v = integrate_exterior(
                    |smp| s_mean_kernel(&ctx, &smp.point).unwrap_or(f64::NAN),
                    &ctx.domain,
                    &q,
                    &Point::origin(n),
                )?;
                Ok((done(v)?, 1.0))
            }));
        }
    }
    for &(n, s) in &grid.orders {
        for &r in &grid.radii {
            for &f in &grid.x_fractions {
                let params = format!("n={n} s={} r={} x={}", fmt(s), fmt(r), fmt(f * r));
                out.push(task("Ip", params, NORMALIZATION_TOL, move || {
                    let ctx = KernelContext::new(n, s, r)?;
                    let x = e1(n, f * r);
                    let inner = ctx.gap(&x);
                    let c = ctx.constants.c;
                    let q = spec().with_right(-s).with_decay(-(n as f64) - 2.0 * s);
                    let v = integrate_exterior(
                        |smp| c * (inner / smp.gap).powf(s) * smp.rho.powi(-(n as i32)),
                        &ctx.domain,
                        &q,
                        &x,
                    )?;
                    Ok((done(v)?, 1.0))
                }));
            }
        }
    }
    for &(n, s) in &grid.orders {
        for &r in &grid.radii {
            for &f in &grid.x_fractions {
                let params = format!("n={n} s={} r={} x={}", fmt(s), fmt(r), fmt(f * r));
                out.push(task("If", params, NORMALIZATION_TOL, move || {
                    let ctx = KernelContext::new(n, s, r)?;
                    let x = e1(n, f * r);
                    let q = spec().with_left(2.0 * s - n as f64).with_right(-s);
                    let v = integrate_ball_about(
                        |smp| smp.gap.powf(-s) * smp.rho.powf(2.0 * s - n as f64),
                        &ctx.domain,
                        &x,
                        &q,
                    )?;
                    Ok((ctx.constants.c * done(v)?, 1.0))
                }));
            }
        }
    }
    for &(n, s) in &grid.orders {
        for &r in &grid.radii {
            for t in [1.5, 3.0] {
                let params = format!("n={n} s={} r={} x={}", fmt(s), fmt(r), fmt(t * r));
                out.push(task("Ifu", params, QUADRATURE_TOL, move || {
                    let ctx = KernelContext::new(n, s, r)?;
                    let x = e1(n, t * r);
                    let v = focused(&ctx, &Point::origin(n), &x, |smp| {
                        s_mean_kernel(&ctx, &smp.point).unwrap_or(f64::NAN)
                    })?;
                    Ok((v, fundamental_solution(&ctx, &x)?))
                }));
            }
        }
    }
    for &(n, s) in &grid.orders {
        for &r in &grid.radii {
            for &f in &grid.x_fractions {
                let params = format!("n={n} s={} r={} x0={} x={}", fmt(s), fmt(r), fmt(f * r), fmt(-1.5 * r));
                out.push(task("Ipu", params, QUADRATURE_TOL, move || {
                    let ctx = KernelContext::new(n, s, r)?;
                    let x0 = e1(n, f * r);
                    let x = e1(n, -1.5 * r);
                    let inner = ctx.gap(&x0);
                    let c = ctx.constants.c;
                    let v = focused(&ctx, &x0, &x, |smp| c * (inner / smp.gap).powf(s) * smp.rho.powi(-(n as i32)))?;
                    Ok((v, fundamental_solution(&ctx, &x.sub(&x0))?))
                }));
            }
        }
    }
}

/// ∫_{ℝⁿ∖B_r} K(y)Φ(x − y) dy for exterior x, where `kernel` sees samples
/// whose `rho` is the distance to the inversion centre.
fn focused<K>(ctx: &KernelContext, center: &Point, x: &Point, kernel: K) -> Result<f64>
where
    K: Fn(&crate::quadrature::Sample) -> f64,
{
    let (n, s) = (ctx.n(), ctx.s());
    let mut q = spec().with_right(-s);
    if ctx.regime() == Regime::Super {
        q.left_exponent = Some(2.0 * s - n as f64);
    }
    let v = integrate_exterior_focused(
        |smp| {
            // the focused pull-back reports distances to the focus; recover
            // the distance to the inversion centre from the point itself
            let to_center = crate::quadrature::Sample { rho: smp.point.dist(center), ..smp.clone() };
            let phi = fundamental_solution(ctx, &x.sub(&smp.point)).unwrap_or(f64::NAN);
            kernel(&to_center) * phi
        },
        &ctx.domain,
        &q,
        center,
        x,
    )?;
    done(v)
}

fn analytic_tasks(out: &mut Vec<Task>) {
    for a in [0.0, 0.5, 1.0, 1.5, 3.0] {
        out.push(task("log_arcsine", format!("a={}", fmt(a)), CLOSED_FORM_TOL, move || {
            // log and inverse-square-root endpoints: left to the tanh-sinh fallback
            let q = spec();
            // |v − a|, 1 + v and 1 − v are all formed from endpoint distances
            let w = |d: f64, plus: f64, minus: f64| d.ln() * (plus * minus).powf(-0.5);
            let lhs = if a.abs() < 1.0 {
                let left = integrate_nodes(|n| w(n.from_right, n.from_left, (1.0 - a) + n.from_right), -1.0, a, &q);
                let right = integrate_nodes(|n| w(n.from_left, (1.0 + a) + n.from_left, n.from_right), a, 1.0, &q);
                done(left?)? + done(right?)?
            } else {
                let g = |n: crate::quadrature::Node| {
                    let d = if a > 0.0 { n.from_right + (a - 1.0) } else { n.from_left - (a + 1.0) };
                    w(d, n.from_left, n.from_right)
                };
                done(integrate_nodes(g, -1.0, 1.0, &q)?)?
            };
            let rhs = if a.abs() <= 1.0 {
                -PI * 2f64.ln()
            } else {
                PI * (a.abs() + (a * a - 1.0).sqrt()).ln() - PI * 2f64.ln()
            };
            Ok((lhs, rhs))
        }));
    }
    for tau in [1.1, 2.0, 5.0] {
        let n = 3;
        out.push(task("sphere_angle", format!("n={n} tau={}", fmt(tau)), CLOSED_FORM_TOL, move || {
            let lhs = integrate_interval(
                |t| t.sin().powi(n - 2) * (tau * tau - 2.0 * tau * t.cos() + 1.0).powf(-0.5 * n as f64),
                0.0,
                PI,
                &spec(),
            )?;
            let rhs = wallis((n - 2) as u32) / (tau.powi(n - 2) * (tau * tau - 1.0));
            Ok((done(lhs)?, rhs))
        }));
    }
    for n in 2..=8u32 {
        out.push(task("sphere_measure", format!("n={n}"), CLOSED_FORM_TOL, move || {
            let lhs = PI * (1..=n - 2).map(wallis).product::<f64>();
            let h = 0.5 * n as f64;
            Ok((lhs, PI.powf(h) / gamma(h)?))
        }));
    }
    for (alpha, beta) in [(0.5, 0.3), (0.5, 1.0), (2.0, 0.3), (2.0, 1.0)] {
        for s in [0.25, 0.5, 0.75] {
            let params = format!("alpha={} beta={} s={}", fmt(alpha), fmt(beta), fmt(s));
            out.push(task("beta_ratio", params, CLOSED_FORM_TOL, move || {
                let q = spec().with_left(-s).with_right(s - 1.0);
                let lhs = integrate_nodes(
                    |nd| nd.from_right.powf(s - 1.0) * nd.from_left.powf(-s) / (beta + nd.x),
                    0.0,
                    alpha,
                    &q,
                )?;
                let rhs = PI / sin_pi(s) * (alpha + beta).powf(s - 1.0) * beta.powf(-s);
                Ok((done(lhs)?, rhs))
            }));
        }
    }
    for s in [0.1, 0.25, 0.4, 0.5] {
        out.push(task("sine_moment", format!("s={}", fmt(s)), QUADRATURE_TOL, move || {
            Ok((sine_moment_quadrature(s)?, sine_moment(s)?))
        }));
    }
}

/// ∫₀^∞ t^{2s−2} sin t dt: a Jacobi-weighted first half period, then an
/// accelerated alternating sum over the remaining half periods.
fn sine_moment_quadrature(s: f64) -> Result<f64> {
    let e = 2.0 * s - 2.0;
    let head = integrate_interval(|t| t.powf(e) * t.sin(), 0.0, PI, &spec().with_left(e + 1.0))?;
    let halves: Vec<f64> = (1..=40)
        .map(|k| {
            let lo = k as f64 * PI;
            integrate_interval(|t| t.powf(e) * t.sin().abs(), lo, lo + PI, &spec()).and_then(done)
        })
        .collect::<Result<_>>()?;
    // sin is negative on the first half period after π
    Ok(done(head)? - alternating_sum(&halves))
}

fn constant_tasks(grid: &KernelGrid, out: &mut Vec<Task>) {
    for &(n, s) in &grid.orders {
        if FracOrder::new(n, s).map(|o| o.regime() != Regime::Super).unwrap_or(true) {
            continue;
        }
        let params = format!("n={n} s={}", fmt(s));
        out.push(task("boundary_integral_limit", params, QUADRATURE_TOL, move || {
            let h = 0.5 * n as f64;
            let q = spec().with_left(s - 1.0).with_decay(s - 1.0 - h);
            let v = integrate_interval(|t| t.powf(s - 1.0) * (1.0 + t).powf(-h), 0.0, f64::INFINITY, &q)?;
            Ok((k_const(n, s)? * done(v)?, 1.0))
        }));
    }
    for n in 1..=3usize {
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            out.push(task("c_two_routes", format!("n={n} s={}", fmt(s)), NORMALIZATION_TOL, move || {
                Ok((big_c_quadrature(n, s)?, big_c_const(n, s)?))
            }));
        }
    }
}

fn special_tasks(out: &mut Vec<Task>) {
    for k in 1..=10 {
        let x = 0.5 * k as f64;
        out.push(task("gamma_duplication", format!("x={}", fmt(x)), CLOSED_FORM_TOL, move || {
            Ok((gamma(0.5 + x)? / gamma(2.0 * x)?, PI.sqrt() * 2f64.powf(1.0 - 2.0 * x) / gamma(x)?))
        }));
    }
    out.push(task("gamma_duplication", "x=0.1".into(), CLOSED_FORM_TOL, || {
        Ok((gamma(0.6)? / gamma(0.2)?, PI.sqrt() * 2f64.powf(0.8) / gamma(0.1)?))
    }));
    for k in 1..=9 {
        let s = 0.1 * k as f64;
        out.push(task("gamma_reflection", format!("s={}", fmt(s)), CLOSED_FORM_TOL, move || {
            Ok((gamma(s)? * gamma(1.0 - s)?, PI / sin_pi(s)))
        }));
    }
    for (a, b) in [(0.7, 1.3), (-0.3, 0.4), (1.5, 2.2)] {
        for w in [-0.9, -0.3, 0.4, 0.8] {
            let params = format!("a={} b={} w={}", fmt(a), fmt(b), fmt(w));
            out.push(task("hyp2f1_elementary", params, CLOSED_FORM_TOL, move || {
                Ok((hyp2f1(a, b, b, w)?, (1.0 - w).powf(-a)))
            }));
        }
    }
    for a in [0.3, 0.7, 1.2] {
        for w in [-0.6, 0.2, 0.5, 0.8] {
            let params = format!("a={} w={}", fmt(a), fmt(w));
            out.push(task("hyp2f1_quadratic", params, CLOSED_FORM_TOL, move || {
                let rhs = 0.5 * ((1.0 + w).powf(-2.0 * a) + (1.0 - w).powf(-2.0 * a));
                Ok((hyp2f1(a, a + 0.5, 0.5, w * w)?, rhs))
            }));
        }
    }
    for (a, b, c) in [(0.5, 0.3, 1.7), (1.2, 0.7, 2.6), (0.25, 1.5, 3.1)] {
        for w in [0.3, 0.6, 0.8] {
            let params = format!("a={} b={} c={} w={}", fmt(a), fmt(b), fmt(c), fmt(w));
            out.push(task("hyp2f1_connection", params, CLOSED_FORM_TOL, move || {
                Ok((hyp2f1_connection(a, b, c, w)?, hyp2f1_series(a, b, c, w)?))
            }));
        }
    }
}

fn geometry_samples() -> Vec<(Point, f64, Point, Point)> {
    let mut v = Vec::new();
    for n in 1..=3usize {
        for r in [1.0, 2.0] {
            for x0f in [0.0, 0.3] {
                let x0 = e1(n, x0f * r);
                let mut y = vec![0.0; n];
                let mut x = vec![0.0; n];
                for i in 0..n {
                    y[i] = r * (0.9 - 0.5 * i as f64);
                    x[i] = r * (-0.4 + 0.3 * i as f64);
                }
                v.push((x0, r, Point::new(&x).expect("finite"), Point::new(&y).expect("finite")));
            }
        }
    }
    v
}

fn describe(x0: &Point, r: f64, y: &Point) -> String {
    let c = |p: &Point| p.coords().iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";");
    format!("n={} r={} x0=[{}] y=[{}]", y.dim(), fmt(r), c(x0), c(y))
}

fn geometry_tasks(out: &mut Vec<Task>) {
    for (x0, r, x, y) in geometry_samples() {
        let params = describe(&x0, r, &y);
        let (a, b) = (x0.clone(), y.clone());
        out.push(task("inversion_gap", params.clone(), CLOSED_FORM_TOL, move || inversion_gap_identity(&a, r, &b)));
        let (a, b, c) = (x0.clone(), x.clone(), y.clone());
        out.push(task("inversion_distance", params.clone(), CLOSED_FORM_TOL, move || distance_identity(&a, r, &b, &c)));
        out.push(task("inversion_jacobian", params, CLOSED_FORM_TOL, move || {
            Ok((inversion_jacobian(&x0, r, &y)?, fd_jacobian(&x0, r, &y)?))
        }));
    }
}

/// |det DK(y)| by Richardson-extrapolated central differences.
fn fd_jacobian(x0: &Point, r: f64, y: &Point) -> Result<f64> {
    let n = y.dim();
    let h = 1e-3 * y.dist(x0);
    let column = |j: usize, h: f64| -> Result<Vec<f64>> {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let e = Point::new(&e)?;
        let plus = kelvin_invert(x0, r, &y.offset(h, &e))?;
        let minus = kelvin_invert(x0, r, &y.offset(-h, &e))?;
        Ok((0..n).map(|i| (plus[i] - minus[i]) / (2.0 * h)).collect())
    };
    let mut m = vec![vec![0.0; n]; n];
    for (j, col) in m.iter_mut().enumerate() {
        let coarse = column(j, h)?;
        let fine = column(j, 0.5 * h)?;
        for i in 0..n {
            col[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
        }
    }
    let det = match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => return Err(Error::Domain("finite-difference Jacobian supports n ≤ 3".into())),
    };
    Ok(det.abs())
}

fn all_tasks(grid: &KernelGrid) -> Vec<Task> {
    let mut out = Vec::new();
    kernel_tasks(grid, &mut out);
    analytic_tasks(&mut out);
    constant_tasks(grid, &mut out);
    special_tasks(&mut out);
    geometry_tasks(&mut out);
    out
}

/// Evaluates the selected identities in parallel; rows come back in the
/// fixed order of [`IDENTITIES`] and grid enumeration.
pub fn run_identities(opts: &VerifyOptions) -> Result<Vec<IdentityRow>> {
    if let Some(names) = &opts.filter {
        if let Some(bad) = names.iter().find(|n| !IDENTITIES.contains(&n.as_str())) {
            return Err(Error::Domain(format!("unknown identity '{bad}'")));
        }
    }
    for &(n, s) in &opts.grid.orders {
        FracOrder::new(n, s)?;
    }
    if let Some(r) = opts.grid.radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if let Some(f) = opts.grid.x_fractions.iter().find(|f| !(f.abs() < 1.0)) {
        return Err(Error::Domain(format!("interior fraction must lie in (-1, 1), got {f}")));
    }
    let mut tasks: Vec<Task> = all_tasks(&opts.grid)
        .into_iter()
        .filter(|t| opts.filter.as_ref().is_none_or(|f| f.iter().any(|n| n == t.name)))
        .collect();
    tasks.sort_by_key(|t| IDENTITIES.iter().position(|n| *n == t.name));
    tasks
        .par_iter()
        .map(|t| {
            let (lhs, rhs) = (t.eval)()?;
            let abs_err = (lhs - rhs).abs();
            let rel_err = if rhs == 0.0 { abs_err } else { abs_err / rhs.abs() };
            let tol = opts.tol_override.unwrap_or(t.tol);
            Ok(IdentityRow {
                name: t.name.to_string(),
                params: t.params.clone(),
                lhs,
                rhs,
                abs_err,
                rel_err,
                tol,
                pass: rel_err <= tol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(name: &str) -> VerifyOptions {
        VerifyOptions { filter: Some(vec![name.into()]), ..Default::default() }
    }

    #[test]
    fn analytic_identities_pass() {
        for name in ["log_arcsine", "sphere_angle", "sphere_measure", "beta_ratio", "sine_moment"] {
            for row in run_identities(&only(name)).unwrap() {
                assert!(row.pass, "{row:?}");
            }
        }
    }

    #[test]
    fn special_and_geometry_pass() {
        for name in IDENTITIES[11..19].iter() {
            let rows = run_identities(&only(name)).unwrap();
            assert!(!rows.is_empty());
            for row in rows {
                assert!(row.pass, "{row:?}");
            }
        }
    }

    #[test]
    fn unknown_filter_is_rejected() {
        assert!(run_identities(&only("nope")).is_err());
    }

    #[test]
    fn impossible_tolerance_fails() {
        let opts = VerifyOptions { tol_override: Some(1e-30), ..only("sphere_angle") };
        assert!(run_identities(&opts).unwrap().iter().any(|r| !r.pass));
    }
}
