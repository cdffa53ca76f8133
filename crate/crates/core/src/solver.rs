//! Representation-formula solvers on B_r: the Poisson extension of exterior
//! data, the Green convolution of interior forcing, the s-mean average and
//! a residual check through the pointwise fractional Laplacian.

use crate::constants::{FracOrder, Regime};
use crate::error::{Error, Result};
use crate::field::{Decay, ErrorSlot, ScalarField};
use crate::geometry::Point;
use crate::kernels::{green_closed, green_off_diagonal, s_mean_kernel, KernelContext};
use crate::quadrature::{
    frac_laplacian_pointwise, integrate_exterior, integrate_pieces, integrate_sphere, ray, LocalBound, Node,
    QuadResult, QuadSpec,
};
use rayon::prelude::*;

/// Fraction of dist(x, ∂B_r) used as the radius of the diagonal neighbourhood.
pub const DIAGONAL_SPLIT: f64 = 0.1;

/// Point values with optional residuals and per-point quadrature diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub values: Vec<(Point, f64)>,
    pub residuals: Option<Vec<(Point, f64)>>,
    pub diagnostics: Vec<QuadResult>,
}

impl SolveReport {
    pub fn max_residual(&self) -> Option<f64> {
        self.residuals.as_ref().map(|r| r.iter().map(|p| p.1).fold(0.0, f64::max))
    }

    pub fn converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }
}

/// Decay exponent of f·K at infinity, where the kernel K decays like
/// |y|^{−n−2s}; `None` when f has compact support.
fn exterior_decay(field: &ScalarField<'_>, order: &FracOrder) -> Result<Option<f64>> {
    let (n, s) = (order.n() as f64, order.s());
    match field.decay {
        None => Err(Error::Domain("exterior data must declare a decay class".into())),
        Some(Decay::Compact(_)) => Ok(None),
        Some(Decay::Bounded(_)) => Ok(Some(-n - 2.0 * s)),
        Some(Decay::PowerLaw { exponent, .. }) => {
            if exponent < 2.0 * s {
                Ok(Some(exponent - n - 2.0 * s))
            } else {
                Err(Error::Divergence(format!("growth |y|^{exponent} is not integrable against |y|^(-n-2s)")))
            }
        }
    }
}

/// u(x) = ∫_{ℝⁿ∖B_r} P_r(y, x) g(y) dy for |x| < r, and g(x) otherwise.
pub fn poisson_extend(ctx: &KernelContext, g: &ScalarField<'_>, x: &Point, spec: &QuadSpec) -> Result<QuadResult> {
    x.check_dim(ctx.n())?;
    let inner = ctx.gap(x);
    if inner <= 0.0 {
        return Ok(QuadResult::exact(g.eval(x)?));
    }
    let mut q = spec.plain().with_right(-ctx.s());
    q.decay_exponent = exterior_decay(g, &ctx.order)?;
    let (c, s, n) = (ctx.constants.c, ctx.s(), ctx.n() as i32);
    let slot = ErrorSlot::default();
    let r = integrate_exterior(
        |smp| c * (inner / smp.gap).powf(s) * smp.rho.powi(-n) * slot.value(g.eval(&smp.point)),
        &ctx.domain,
        &q,
        x,
    );
    slot.finish(r)
}

/// u(x) = ∫_{B_r} h(y) G(x, y) dy, zero for |x| ≥ r.
///
/// Polar coordinates about x; each ray is split at ρ₀ = 0.1·dist(x, ∂B_r).
/// The inner piece carries the |x − y|^{2s−n} singularity of G as a Jacobi
/// weight, the outer piece the (r² − |y|²)^s decay of G at the sphere.
pub fn dirichlet_solve(ctx: &KernelContext, h: &ScalarField<'_>, x: &Point, spec: &QuadSpec) -> Result<QuadResult> {
    x.check_dim(ctx.n())?;
    let power = ctx.gap(x);
    if power <= 0.0 {
        return Ok(QuadResult::exact(0.0));
    }
    let (n, s) = (ctx.n(), ctx.s());
    let rho0 = DIAGONAL_SPLIT * (ctx.r() - x.norm());
    let left = match ctx.regime() {
        Regime::Super => Some(2.0 * s - 1.0),
        // bounded on the diagonal, or only logarithmic
        Regime::Sub | Regime::Critical => None,
    };
    let axis = (x.norm() > 0.0).then_some(x);
    integrate_sphere(n, axis, spec, |dir, inner| {
        let (rho_max, _) = ray(x, dir, power);
        let mut q = inner.plain();
        q.left_exponent = left;
        q.right_exponent = Some(s);
        integrate_pieces(
            |node: Node| {
                let rho = node.from_left;
                let y = x.offset(rho, dir);
                let g = match ctx.gap(&y) {
                    gy if rho > 0.0 && gy > 0.0 => green_off_diagonal(ctx, power, gy, rho)?.value,
                    _ => green_closed(ctx, x, &y)?.value,
                };
                Ok(QuadResult::exact(h.eval(&y)? * g * rho.powi(n as i32 - 1)))
            },
            &[0.0, rho0, rho_max],
            &q,
        )
    })
}

/// (A_ρ ∗ u)(x) = ∫_{|y|>ρ} A_ρ(y) u(x − y) dy.
pub fn s_mean_average(
    order: &FracOrder,
    u: &ScalarField<'_>,
    x: &Point,
    rho: f64,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("averaging radius must be positive, got {rho}")));
    }
    let ctx = KernelContext::new(order.n(), order.s(), rho)?;
    x.check_dim(order.n())?;
    let mut q = spec.plain().with_right(-order.s());
    q.decay_exponent = exterior_decay(u, order)?;
    let slot = ErrorSlot::default();
    let r = integrate_exterior(
        |smp| {
            let kernel = ctx.constants.c
                * rho.powf(2.0 * order.s())
                * smp.gap.powf(-order.s())
                * smp.rho.powi(-(order.n() as i32));
            kernel * slot.value(u.eval(&x.sub(&smp.point)))
        },
        &ctx.domain,
        &q,
        &Point::origin(order.n()),
    );
    slot.finish(r)
}

/// Pointwise value of A_ρ for callers that want the kernel itself.
pub fn s_mean_weight(order: &FracOrder, rho: f64, y: &Point) -> Result<f64> {
    s_mean_kernel(&KernelContext::new(order.n(), order.s(), rho)?, y)
}

/// Evaluates u at each probe and reports |(−Δ)^s u − h| there.
///
/// Probes must keep a distance of at least `bound.delta` from the sphere.
pub fn residual_check(
    ctx: &KernelContext,
    h: &ScalarField<'_>,
    u: &ScalarField<'_>,
    probes: &[Point],
    bound: &LocalBound,
    spec: &QuadSpec,
) -> Result<SolveReport> {
    for p in probes {
        p.check_dim(ctx.n())?;
        if ctx.r() - p.norm() < bound.delta {
            return Err(Error::Domain("probe points need a margin of delta from the sphere".into()));
        }
    }
    let rows: Vec<(f64, f64, QuadResult)> = probes
        .par_iter()
        .map(|p| {
            let lap = frac_laplacian_pointwise(u, p, &ctx.order, bound, spec)?;
            Ok((u.eval(p)?, (lap.value - h.eval(p)?).abs(), lap))
        })
        .collect::<Result<_>>()?;
    Ok(SolveReport {
        values: probes.iter().cloned().zip(rows.iter().map(|r| r.0)).collect(),
        residuals: Some(probes.iter().cloned().zip(rows.iter().map(|r| r.1)).collect()),
        diagnostics: rows.into_iter().map(|r| r.2).collect(),
    })
}

/// [`dirichlet_solve`] over a list of points, in parallel, in input order.
pub fn solve_grid(ctx: &KernelContext, h: &ScalarField<'_>, points: &[Point], spec: &QuadSpec) -> Result<SolveReport> {
    let results: Vec<QuadResult> =
        points.par_iter().map(|p| dirichlet_solve(ctx, h, p, spec)).collect::<Result<_>>()?;
    Ok(SolveReport {
        values: points.iter().cloned().zip(results.iter().map(|r| r.value)).collect(),
        residuals: None,
        diagnostics: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Smoothness;

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-9, 1e-11).unwrap()
    }

    fn constant(v: f64) -> ScalarField<'static> {
        ScalarField::new(move |_| v).with_decay(Decay::Bounded(v.abs())).with_smoothness(Smoothness::Smooth)
    }

    #[test]
    fn poisson_of_one_is_one() {
        for &(n, s) in &[(1usize, 0.5), (2, 0.3), (1, 0.8)] {
            let ctx = KernelContext::new(n, s, 1.5).unwrap();
            let u = poisson_extend(&ctx, &constant(1.0), &Point::on_axis(n, 0.4), &spec()).unwrap();
            assert!((u.value - 1.0).abs() < 1e-8, "n={n} s={s}: {u:?}");
        }
    }

    #[test]
    fn poisson_outside_returns_data() {
        let ctx = KernelContext::new(1, 0.5, 1.0).unwrap();
        let g = ScalarField::new(|p: &Point| p[0]).with_decay(Decay::PowerLaw { exponent: 0.5, scale: 1.0 });
        let u = poisson_extend(&ctx, &g, &Point::on_axis(1, 2.0), &spec()).unwrap();
        assert_eq!(u.value, 2.0);
    }

    #[test]
    fn poisson_rejects_growth() {
        let ctx = KernelContext::new(1, 0.25, 1.0).unwrap();
        let g = ScalarField::new(|p: &Point| p[0]).with_decay(Decay::PowerLaw { exponent: 1.0, scale: 1.0 });
        let r = poisson_extend(&ctx, &g, &Point::origin(1), &spec());
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn dirichlet_zero_and_outside() {
        let ctx = KernelContext::new(2, 0.5, 1.0).unwrap();
        let u = dirichlet_solve(&ctx, &constant(0.0), &Point::on_axis(2, 0.2), &spec()).unwrap();
        assert_eq!(u.value, 0.0);
        let u = dirichlet_solve(&ctx, &constant(1.0), &Point::on_axis(2, 1.2), &spec()).unwrap();
        assert_eq!(u.value, 0.0);
    }

    #[test]
    fn dirichlet_reproduces_torsion_profile_critical() {
        let ctx = KernelContext::new(1, 0.5, 1.0).unwrap();
        let u = dirichlet_solve(&ctx, &constant(1.0), &Point::origin(1), &spec()).unwrap();
        assert!((u.value - 1.0).abs() < 1e-7, "{u:?}");
    }

    #[test]
    fn s_mean_of_constant() {
        let order = FracOrder::new(2, 0.4).unwrap();
        let r = s_mean_average(&order, &constant(3.0), &Point::on_axis(2, 0.3), 0.7, &spec()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-8);
    }
}
