//! Normalisation constants a, c, k, κ, C and ω_n, the regime split, and an
//! independent quadrature route to C(n, s).

use crate::error::{Error, Result};
use crate::quadrature::{alternating_sum, integrate_interval, integrate_nodes, QuadSpec};
use crate::specfun::{beta, cos_pi, gamma, sin_pi, wallis};
use std::f64::consts::PI;

/// |s − 1/2| at or below which n = 1 is treated as the logarithmic case.
pub const CRITICAL_WINDOW: f64 = 1e-12;

/// |s − 1/2| below which n = 1 results carry a conditioning warning.
pub const CONDITIONING_WINDOW: f64 = 1e-3;

/// Allowed relative disagreement between the two routes to κ(1, s).
pub const KAPPA_CROSS_CHECK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// n > 2s
    Super,
    /// n < 2s, which forces n = 1 and s > 1/2
    Sub,
    /// n = 2s, i.e. n = 1 and s = 1/2
    Critical,
}

/// Dimension n ≥ 1 and order s ∈ (0, 1) with their regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder {
    n: usize,
    s: f64,
    regime: Regime,
}

impl FracOrder {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("order s must lie in (0, 1), got {s}")));
        }
        let regime = if n == 1 && (s - 0.5).abs() <= CRITICAL_WINDOW {
            Regime::Critical
        } else if (n as f64) < 2.0 * s {
            Regime::Sub
        } else {
            Regime::Super
        };
        Ok(Self { n, s, regime })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Set when n = 1 and s is close to, but not at, 1/2, where a(1, s)
    /// grows like 1/cos(πs).
    pub fn conditioning_warning(&self) -> Option<String> {
        let d = (self.s - 0.5).abs();
        (self.n == 1 && d > CRITICAL_WINDOW && d < CONDITIONING_WINDOW).then(|| {
            format!("n = 1, s = {}: constants are ill-conditioned this close to s = 1/2", self.s)
        })
    }
}

/// Constant of the fundamental solution.
pub fn a_const(n: usize, s: f64) -> Result<f64> {
    let o = FracOrder::new(n, s)?;
    Ok(match o.regime {
        Regime::Critical => -1.0 / PI,
        Regime::Sub => 1.0 / (2.0 * cos_pi(s) * gamma(2.0 * s)?),
        Regime::Super => {
            let h = 0.5 * n as f64;
            gamma(h - s)? / (4f64.powf(s) * PI.powf(h) * gamma(s)?)
        }
    })
}

/// Constant of the s-mean and Poisson kernels.
pub fn c_const(n: usize, s: f64) -> Result<f64> {
    FracOrder::new(n, s)?;
    let h = 0.5 * n as f64;
    Ok(gamma(h)? * sin_pi(s) / PI.powf(h + 1.0))
}

/// Normaliser of the Green-function boundary integral.
pub fn k_const(n: usize, s: f64) -> Result<f64> {
    let o = FracOrder::new(n, s)?;
    match o.regime {
        Regime::Critical => Err(Error::Regime("k(n, s) is undefined for n = 2s".into())),
        Regime::Super => {
            let h = 0.5 * n as f64;
            Ok(gamma(h)? / (gamma(h - s)? * gamma(s)?))
        }
        Regime::Sub => Ok(c_const(1, s)? * PI.sqrt() * gamma(-s)? * gamma(s + 1.0)?
            / (gamma(0.5 - s)? * gamma(s)?)),
    }
}

/// Prefactor of the closed-form Green function.
pub fn kappa_const(n: usize, s: f64) -> Result<f64> {
    let o = FracOrder::new(n, s)?;
    match o.regime {
        Regime::Critical => Ok(1.0 / PI),
        Regime::Super => {
            let h = 0.5 * n as f64;
            Ok(gamma(h)? / (4f64.powf(s) * PI.powf(h) * gamma(s)?.powi(2)))
        }
        Regime::Sub => {
            let via_ak = -a_const(1, s)? * k_const(1, s)?;
            let direct = 1.0 / (4f64.powf(s) * gamma(s)?.powi(2));
            if (via_ak - direct).abs() > KAPPA_CROSS_CHECK * direct.abs() {
                return Err(Error::Domain(format!(
                    "kappa(1, {s}) routes disagree: {via_ak:e} vs {direct:e}"
                )));
            }
            Ok(via_ak)
        }
    }
}

/// Constant of the singular-integral fractional Laplacian.
pub fn big_c_const(n: usize, s: f64) -> Result<f64> {
    FracOrder::new(n, s)?;
    let h = 0.5 * n as f64;
    Ok(4f64.powf(s) * s * gamma(h + s)? / (PI.powf(h) * gamma(1.0 - s)?))
}

/// Measure of the unit sphere S^{n−1}.
pub fn sphere_measure(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let h = 0.5 * n as f64;
    Ok(2.0 * PI.powf(h) / gamma(h)?)
}

/// (−Δ)^s of (1 − |x|²)₊^s inside the unit ball: C(n,s)(ω_n/2)B(s, 1−s).
pub fn dydares_constant(n: usize, s: f64) -> Result<f64> {
    Ok(big_c_const(n, s)? * 0.5 * sphere_measure(n)? * beta(s, 1.0 - s)?)
}

/// Half periods summed explicitly before the alternating tail.
const C_QUAD_HALF_PERIODS: usize = 8;
/// Terms handed to the alternating-series accelerator.
const C_QUAD_TAIL_TERMS: usize = 40;

/// C(n, s) from its defining integral ∫(1 − cos η₁)/|η|^{n+2s} dη.
///
/// Polar coordinates split it into ∫₀^∞ (1 − cos u)u^{−1−2s} du times the
/// angular moment ∫_{S^{n−1}} |ω₁|^{2s} dω. The radial part is integrated
/// with a Jacobi weight at 0 up to R = (m + 1/2)π; beyond R the
/// non-oscillating piece is R^{−2s}/(2s) and the cosine piece is an
/// accelerated alternating sum over half periods.
pub fn big_c_quadrature(n: usize, s: f64) -> Result<f64> {
    FracOrder::new(n, s)?;
    let spec = QuadSpec::new(1e-13, 1e-15)?;
    let converge = |r: crate::quadrature::QuadResult, what: &str| -> Result<f64> {
        if r.converged {
            Ok(r.value)
        } else {
            Err(Error::Convergence(format!("{what}: error estimate {:e}", r.error_estimate)))
        }
    };

    let big_r = (C_QUAD_HALF_PERIODS as f64 + 0.5) * PI;
    let near = integrate_interval(
        |u| {
            let h = (0.5 * u).sin();
            2.0 * h * h * u.powf(-1.0 - 2.0 * s)
        },
        0.0,
        big_r,
        &spec.clone().with_left(1.0 - 2.0 * s),
    )?;
    let near = converge(near, "radial integral near the origin")?;
    let mut halves = Vec::with_capacity(C_QUAD_TAIL_TERMS);
    for k in 0..C_QUAD_TAIL_TERMS {
        let lo = big_r + k as f64 * PI;
        // |cos u| u^{-1-2s} over one half period; signs alternate from −
        let r = integrate_interval(|u| u.cos().abs() * u.powf(-1.0 - 2.0 * s), lo, lo + PI, &spec)?;
        halves.push(converge(r, "oscillatory tail")?);
    }
    // cos is negative on the first half period after (m + 1/2)π for even m
    let sign = if C_QUAD_HALF_PERIODS.is_multiple_of(2) { -1.0 } else { 1.0 };
    let cos_tail = sign * alternating_sum(&halves);
    let radial = near + big_r.powf(-2.0 * s) / (2.0 * s) - cos_tail;

    let angular = match n {
        1 => 2.0,
        _ => {
            // 2∫₀^{π/2} cos^{2s}θ sin^{n−2}θ dθ, then the remaining angles
            let half = integrate_nodes(
                |node| node.from_right.sin().powf(2.0 * s) * node.x.sin().powi(n as i32 - 2),
                0.0,
                0.5 * PI,
                &spec.clone().with_right(2.0 * s),
            )?;
            let polar = 2.0 * converge(half, "angular moment")?;
            if n == 2 {
                2.0 * polar
            } else {
                2.0 * PI * (1..=(n as u32 - 3)).map(wallis).product::<f64>() * polar
            }
        }
    };
    let c = 1.0 / (radial * angular);
    if c > 0.0 && c.is_finite() {
        Ok(c)
    } else {
        Err(Error::Convergence(format!("non-positive quadrature value for C({n}, {s})")))
    }
}

/// All constants for one (n, s).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsBundle {
    pub order: FracOrder,
    pub a: f64,
    pub c: f64,
    /// Undefined when n = 2s.
    pub k: Option<f64>,
    pub kappa: f64,
    pub big_c: f64,
    pub omega_n: f64,
}

impl ConstantsBundle {
    pub fn new(order: FracOrder) -> Result<Self> {
        let (n, s) = (order.n(), order.s());
        let k = match order.regime() {
            Regime::Critical => None,
            _ => Some(k_const(n, s)?),
        };
        Ok(Self {
            order,
            a: a_const(n, s)?,
            c: c_const(n, s)?,
            k,
            kappa: kappa_const(n, s)?,
            big_c: big_c_const(n, s)?,
            omega_n: sphere_measure(n)?,
        })
    }

    pub fn dydares(&self) -> Result<f64> {
        let s = self.order.s();
        Ok(self.big_c * 0.5 * self.omega_n * beta(s, 1.0 - s)?)
    }
}

/// (n, s, C(n,s), c(n,s), C/c)
pub type AsymptoticRow = (usize, f64, f64, f64, f64);

/// Rows comparing C(n,s) with c(n,s) over a grid of orders.
pub fn asymptotic_table(dims: &[usize], orders: &[f64]) -> Result<Vec<AsymptoticRow>> {
    let mut rows = Vec::new();
    for &n in dims {
        for &s in orders {
            let big = big_c_const(n, s)?;
            let small = c_const(n, s)?;
            rows.push((n, s, big, small, big / small));
        }
    }
    Ok(rows)
}
