//! The fundamental solution Φ, the s-mean kernel A_r, the Poisson kernel
//! P_r and the Green function G of the ball B_r.

use crate::constants::{ConstantsBundle, FracOrder, Regime};
use crate::error::{Error, Result};
use crate::field::ErrorSlot;
use crate::geometry::{BallDomain, Point};
use crate::quadrature::{integrate_exterior, QuadResult, QuadSpec};
use crate::specfun::boundary_integral;
use std::f64::consts::PI;

/// |x − z| below this multiple of r counts as the diagonal.
pub const DIAGONAL_EPS: f64 = 1e-10;

/// (n, s, r) with the constants for (n, s) computed once.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelContext {
    pub order: FracOrder,
    pub domain: BallDomain,
    pub constants: ConstantsBundle,
}

impl KernelContext {
    pub fn new(n: usize, s: f64, r: f64) -> Result<Self> {
        let order = FracOrder::new(n, s)?;
        Ok(Self { order, domain: BallDomain::new(n, r)?, constants: ConstantsBundle::new(order)? })
    }

    pub fn n(&self) -> usize {
        self.order.n()
    }

    pub fn s(&self) -> f64 {
        self.order.s()
    }

    pub fn r(&self) -> f64 {
        self.domain.radius()
    }

    pub fn regime(&self) -> Regime {
        self.order.regime()
    }

    /// r² − |x|², exact in sign and free of cancellation near the sphere.
    pub fn gap(&self, x: &Point) -> f64 {
        let (r, t) = (self.r(), x.norm());
        (r - t) * (r + t)
    }

    fn interior(&self, x: &Point, what: &str) -> Result<f64> {
        x.check_dim(self.n())?;
        let g = self.gap(x);
        if g > 0.0 {
            Ok(g)
        } else {
            Err(Error::Domain(format!("{what} must lie inside the ball")))
        }
    }
}

/// Green function value with the auxiliary ratio r₀ and a diagonal flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenEval {
    pub value: f64,
    /// +∞ on the diagonal.
    pub r0: f64,
    pub diagonal: bool,
}

/// Φ(x) = a|x|^{2s−n}, or −(1/π) log|x| when n = 2s.
pub fn fundamental_solution(ctx: &KernelContext, x: &Point) -> Result<f64> {
    x.check_dim(ctx.n())?;
    let t = x.norm();
    let a = ctx.constants.a;
    match ctx.regime() {
        Regime::Critical if t > 0.0 => Ok(a * t.ln()),
        Regime::Sub => Ok(a * t.powf(2.0 * ctx.s() - 1.0)),
        _ if t > 0.0 => Ok(a * t.powf(2.0 * ctx.s() - ctx.n() as f64)),
        _ => Err(Error::Singularity("fundamental solution at the origin".into())),
    }
}

/// A_r(y): zero on the closed ball, c r^{2s}(|y|² − r²)^{−s}|y|^{−n} outside.
pub fn s_mean_kernel(ctx: &KernelContext, y: &Point) -> Result<f64> {
    y.check_dim(ctx.n())?;
    let gap = -ctx.gap(y);
    if gap <= 0.0 {
        return Ok(0.0);
    }
    let s = ctx.s();
    Ok(ctx.constants.c * ctx.r().powf(2.0 * s) * gap.powf(-s) * y.norm().powi(-(ctx.n() as i32)))
}

/// P_r(y, x) = c((r² − |x|²)/(|y|² − r²))^s |x − y|^{−n} for |x| < r < |y|.
pub fn poisson_kernel(ctx: &KernelContext, y: &Point, x: &Point) -> Result<f64> {
    let inner = ctx.interior(x, "x")?;
    y.check_dim(ctx.n())?;
    let outer = -ctx.gap(y);
    if !(outer > 0.0) {
        return Err(Error::Domain("y must lie outside the closed ball".into()));
    }
    Ok(poisson_from_gaps(ctx, inner, outer, x.dist(y)))
}

fn poisson_from_gaps(ctx: &KernelContext, inner: f64, outer: f64, dist: f64) -> f64 {
    ctx.constants.c * (inner / outer).powf(ctx.s()) * dist.powi(-(ctx.n() as i32))
}

/// r₀(x, z) = (r² − |x|²)(r² − |z|²)/(r²|x − z|²).
pub fn r0(ctx: &KernelContext, x: &Point, z: &Point) -> Result<f64> {
    let gx = ctx.interior(x, "x")?;
    let gz = ctx.interior(z, "z")?;
    let d = x.dist(z);
    if d == 0.0 {
        return Err(Error::Singularity("r0 is undefined for x = z".into()));
    }
    let r = ctx.r();
    Ok(gx * gz / (r * r * d * d))
}

/// Closed-form Green function of B_r.
///
/// Within `DIAGONAL_EPS·r` of the diagonal the SUB regime returns the limit
/// κ(1,s)(s − 1/2)^{−1}(r² − x²)^{2s−1}r^{1−2s}; the other regimes fail
/// with `DiagonalSingularity`.
pub fn green_closed(ctx: &KernelContext, x: &Point, z: &Point) -> Result<GreenEval> {
    let gx = ctx.interior(x, "x")?;
    let gz = ctx.interior(z, "z")?;
    let (s, r) = (ctx.s(), ctx.r());
    let d = x.dist(z);
    let kappa = ctx.constants.kappa;
    if d < DIAGONAL_EPS * r {
        return match ctx.regime() {
            Regime::Sub => Ok(GreenEval {
                value: kappa / (s - 0.5) * gx.powf(2.0 * s - 1.0) * r.powf(1.0 - 2.0 * s),
                r0: f64::INFINITY,
                diagonal: true,
            }),
            _ => Err(Error::DiagonalSingularity),
        };
    }
    green_off_diagonal(ctx, gx, gz, d)
}

/// G from the gaps r² − |x|², r² − |z|² and the distance d > 0, without the
/// diagonal guard; callers that know d exactly use this near the diagonal.
pub(crate) fn green_off_diagonal(ctx: &KernelContext, gx: f64, gz: f64, d: f64) -> Result<GreenEval> {
    let (n, s, r) = (ctx.n(), ctx.s(), ctx.r());
    let ratio = gx * gz / (r * r * d * d);
    let value = match ctx.regime() {
        // log((r² − xz + √((r²−x²)(r²−z²)))/(r|z−x|)) = asinh(√r₀)
        Regime::Critical => ratio.sqrt().asinh() / PI,
        _ => ctx.constants.kappa * d.powf(2.0 * s - n as f64) * boundary_integral(n, s, ratio)?,
    };
    Ok(GreenEval { value, r0: ratio, diagonal: false })
}

/// G(x, z) = Φ(x − z) − ∫_{ℝⁿ∖B_r} Φ(z − y)P_r(y, x) dy.
///
/// The exterior integral is pulled back by inversion about x, which turns
/// P_r into c|y* − x|^{2s−n}(r² − |y*|²)^{−s} and leaves the integrand
/// regular at x.
pub fn green_definition(ctx: &KernelContext, x: &Point, z: &Point, spec: &QuadSpec) -> Result<QuadResult> {
    let inner = ctx.interior(x, "x")?;
    ctx.interior(z, "z")?;
    if x.dist(z) < DIAGONAL_EPS * ctx.r() {
        return Err(Error::DiagonalSingularity);
    }
    let direct = fundamental_solution(ctx, &x.sub(z))?;
    let slot = ErrorSlot::default();
    let q = spec.plain().with_right(-ctx.s());
    let harmonic = integrate_exterior(
        |smp| {
            let phi = slot.value(fundamental_solution(ctx, &z.sub(&smp.point)));
            phi * poisson_from_gaps(ctx, inner, smp.gap, smp.rho)
        },
        &ctx.domain,
        &q,
        x,
    );
    let harmonic = slot.finish(harmonic)?;
    Ok(QuadResult { value: direct - harmonic.value, ..harmonic })
}
