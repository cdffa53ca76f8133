//! Numerical integration: singular-endpoint 1-D rules, ball and exterior
//! cubature through polar coordinates, and the pointwise fractional
//! Laplacian.

mod adaptive;
mod cubature;
mod pv;
pub mod rules;

pub use cubature::{
    integrate_ball, integrate_ball_about, integrate_exterior, integrate_exterior_focused,
    integrate_sphere, Sample,
};
pub use pv::{frac_laplacian_pointwise, LocalBound};
pub(crate) use cubature::ray;

use crate::error::{Error, Result};
use adaptive::{adaptive, tanh_sinh, EndpointWeights};

/// Smallest relative tolerance handed to nested inner integrals.
const MIN_INNER_REL_TOL: f64 = 1e-14;

/// Tolerances, node budget and endpoint annotations for one integration.
///
/// With `left_exponent = α` the integrand is declared to behave like
/// (x − a)^α near a, and similarly `right_exponent` at b. On an infinite
/// upper limit the far behaviour is declared by `decay_exponent = γ`, meaning
/// |f(x)| ~ x^γ with γ < −1. The integrand is always passed in full; the
/// engine divides the declared factor out on the endpoint panels and
/// integrates it exactly with Gauss–Jacobi rules.
///
/// For ball and exterior cubature the exponents refer to the radial
/// behaviour: `left_exponent` at the polar centre, `right_exponent` in the
/// distance to the sphere, `decay_exponent` at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Budget of integrand evaluations for each one-dimensional pass.
    pub max_nodes: usize,
    pub left_exponent: Option<f64>,
    pub right_exponent: Option<f64>,
    pub decay_exponent: Option<f64>,
    /// Nodes of the coarse Gauss rule on each panel; the fine rule uses twice as many.
    pub order: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_nodes: 200_000,
            left_exponent: None,
            right_exponent: None,
            decay_exponent: None,
            order: 10,
        }
    }
}

impl QuadSpec {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let spec = Self { rel_tol, abs_tol, ..Self::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_left(mut self, alpha: f64) -> Self {
        self.left_exponent = Some(alpha);
        self
    }

    pub fn with_right(mut self, beta: f64) -> Self {
        self.right_exponent = Some(beta);
        self
    }

    pub fn with_decay(mut self, gamma: f64) -> Self {
        self.decay_exponent = Some(gamma);
        self
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    /// Same tolerances and budget, endpoint annotations cleared.
    pub fn plain(&self) -> Self {
        Self { left_exponent: None, right_exponent: None, decay_exponent: None, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.order < 2 || self.order > 40 {
            return Err(Error::Domain(format!("rule order {} outside 2..=40", self.order)));
        }
        for e in [self.left_exponent, self.right_exponent].into_iter().flatten() {
            if !(e > -1.0 && e.is_finite()) {
                return Err(Error::Domain(format!("endpoint exponent {e} must exceed -1")));
            }
        }
        Ok(())
    }

    pub fn tolerance_for(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }

    /// Tighter copy for an integral nested inside another.
    pub(crate) fn nested(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol / factor).max(MIN_INNER_REL_TOL),
            abs_tol: self.abs_tol / factor,
            ..self.plain()
        }
    }
}

/// Value with error estimate, evaluation count and convergence flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, nodes_used: 1, converged: true }
    }

    /// The value, or `BudgetExceeded` when the tolerance was not met.
    pub fn require(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::BudgetExceeded { nodes: self.nodes_used, estimate: self.error_estimate })
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self { value: k * self.value, error_estimate: k.abs() * self.error_estimate, ..self }
    }

    pub fn plus(self, other: QuadResult) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            nodes_used: self.nodes_used + other.nodes_used,
            converged: self.converged && other.converged,
        }
    }
}

/// A quadrature node with its distances to both ends of the interval,
/// computed without cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

/// Pairwise summation in index order.
pub fn pairwise_sum(v: &mut [f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    let (a, b) = v.split_at_mut(mid);
    pairwise_sum(a) + pairwise_sum(b)
}

/// ∫ₐᵇ f(x) dx with b finite or +∞.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    integrate_nested(|node: Node| Ok(QuadResult::exact(f(node.x))), a, b, spec)
}

/// Like [`integrate_interval`], but the integrand sees the endpoint
/// distances of each node.
pub fn integrate_nodes<F>(mut f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(Node) -> f64,
{
    integrate_nested(|node: Node| Ok(QuadResult::exact(f(node))), a, b, spec)
}

/// Integration of an integrand that is itself an integral; inner error
/// estimates are accumulated into the outer one.
pub fn integrate_nested<F>(mut f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    spec.validate()?;
    if !a.is_finite() || b.is_nan() || !(b > a) {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    if b.is_infinite() {
        if let Some(g) = spec.decay_exponent {
            if !(g < -1.0) {
                return Err(Error::Domain(format!("decay exponent {g} must be below -1")));
            }
        }
        let scale = a.abs().max(1.0);
        let mut mapped = |node: Node| -> Result<QuadResult> {
            let (t, rest) = (node.from_left, node.from_right);
            let dx = scale * t / rest;
            let r = f(Node { x: a + dx, from_left: dx, from_right: f64::INFINITY })?;
            Ok(r.scaled(scale / (rest * rest)))
        };
        let w = EndpointWeights {
            left: spec.left_exponent,
            right: spec.decay_exponent.map(|g| -g - 2.0),
        };
        return adaptive(&mut mapped, 0.0, 1.0, w, spec);
    }
    let w = EndpointWeights { left: spec.left_exponent, right: spec.right_exponent };
    let primary = adaptive(&mut f, a, b, w, spec)?;
    if primary.converged || w.left.is_some() || w.right.is_some() {
        return Ok(primary);
    }
    let fallback = tanh_sinh(&mut f, a, b, spec)?;
    let nodes = primary.nodes_used + fallback.nodes_used;
    let best = if fallback.converged || fallback.error_estimate < primary.error_estimate {
        fallback
    } else {
        primary
    };
    Ok(QuadResult { nodes_used: nodes, ..best })
}

/// Sum of integrals over consecutive pieces [p₀, p₁], [p₁, p₂], ….
///
/// Endpoint annotations of `spec` apply to the outermost ends only.
pub fn integrate_pieces<F>(mut f: F, points: &[f64], spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    if points.len() < 2 {
        return Err(Error::Domain("need at least two breakpoints".into()));
    }
    let pieces = points.len() - 1;
    let mut total = QuadResult { value: 0.0, error_estimate: 0.0, nodes_used: 0, converged: true };
    let (first, last) = (points[0], points[pieces]);
    for k in 0..pieces {
        let (lo, hi) = (points[k], points[k + 1]);
        if !(hi > lo) {
            continue;
        }
        let mut piece_spec = spec.plain();
        piece_spec.abs_tol = spec.abs_tol / pieces as f64;
        if k == 0 {
            piece_spec.left_exponent = spec.left_exponent;
        }
        if k + 1 == pieces {
            piece_spec.right_exponent = spec.right_exponent;
            piece_spec.decay_exponent = spec.decay_exponent;
        }
        // report distances to the outer ends, not to the piece ends
        let shifted = |node: Node| {
            let from_left = if k == 0 { node.from_left } else { node.x - first };
            let from_right = if k + 1 == pieces { node.from_right } else { last - node.x };
            f(Node { x: node.x, from_left, from_right })
        };
        let r = integrate_nested(shifted, lo, hi, &piece_spec)?;
        total = total.plus(r);
    }
    Ok(total)
}

/// Σ (−1)ᵏ aₖ by the Cohen–Rodriguez Villegas–Zagier acceleration.
///
/// Accurate to roughly 5.8^−n for terms that are moments of a positive
/// measure, e.g. integrals of a completely monotone function over
/// consecutive half periods.
pub fn alternating_sum(terms: &[f64]) -> f64 {
    let n = terms.len();
    if n == 0 {
        return 0.0;
    }
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for (k, a) in terms.iter().enumerate() {
        let kf = k as f64;
        let nf = n as f64;
        c = b - c;
        s += c * a;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{sin_pi, wallis};
    use std::f64::consts::PI;

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-12, 1e-14).unwrap()
    }

    #[test]
    fn arcsine_weight_exact() {
        let s = spec().with_left(-0.5).with_right(-0.5);
        let r = integrate_nodes(|n| n.from_left.powf(-0.5) * n.from_right.powf(-0.5), 0.0, 1.0, &s).unwrap();
        assert!(r.converged);
        assert!((r.value - PI).abs() < 1e-13);
    }

    #[test]
    fn undeclared_singularity_falls_back() {
        let r = integrate_nodes(|n| n.from_left.powf(-0.5) * n.from_right.powf(-0.5), 0.0, 1.0, &spec()).unwrap();
        assert!((r.value - PI).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn semi_infinite_beta() {
        let s = 0.3;
        let q = spec().with_left(-s).with_decay(-1.0 - s);
        let r = integrate_interval(|z| z.powf(-s) / (z + 1.0), 0.0, f64::INFINITY, &q).unwrap();
        assert!(r.converged);
        assert!((r.value - PI / sin_pi(s)).abs() < 1e-11 * r.value);
    }

    #[test]
    fn sine_squared_matches_wallis() {
        let r = integrate_interval(|t| t.sin().powi(2), 0.0, PI, &spec()).unwrap();
        assert!((r.value - wallis(2)).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tight = QuadSpec::new(1e-14, 1e-300).unwrap().with_max_nodes(200);
        let r = integrate_interval(|x| (1.0 / x).sin(), 1e-6, 1.0, &tight).unwrap();
        assert!(!r.converged);
        assert!(matches!(r.require(), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn nan_is_rejected() {
        let r = integrate_interval(|_| f64::NAN, 0.0, 1.0, &spec());
        assert!(matches!(r, Err(Error::NonFiniteSample(_))));
    }

    #[test]
    fn invalid_specs() {
        assert!(QuadSpec::new(0.0, 1e-10).is_err());
        assert!(integrate_interval(|x| x, 0.0, 1.0, &spec().with_left(-1.0)).is_err());
        assert!(integrate_interval(|x| x, 1.0, 0.0, &spec()).is_err());
    }

    #[test]
    fn pieces_with_kink() {
        let f = |n: Node| Ok(QuadResult::exact((n.x - 0.3).abs().sqrt()));
        let r = integrate_pieces(f, &[0.0, 0.3, 1.0], &spec()).unwrap();
        let exact = 2.0 / 3.0 * (0.3f64.powf(1.5) + 0.7f64.powf(1.5));
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn alternating_log_two() {
        let terms: Vec<f64> = (1..=30).map(|k| 1.0 / k as f64).collect();
        assert!((alternating_sum(&terms) - 2f64.ln()).abs() < 1e-15);
    }
}
