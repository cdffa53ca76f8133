//! Pointwise (−Δ)^s u(x) from the second-difference form of the singular
//! integral, (C/2)∫ (2u(x) − u(x+y) − u(x−y))|y|^{−n−2s} dy.

use super::{integrate_pieces, integrate_sphere, Node, QuadResult, QuadSpec};
use crate::constants::{big_c_const, sphere_measure, FracOrder};
use crate::error::{Error, Result};
use crate::field::{Decay, ScalarField};
use crate::geometry::Point;

/// Local regularity of u near x: |D²u| ≤ `second_derivative_bound` on the
/// ball of radius `delta` about x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalBound {
    pub delta: f64,
    pub second_derivative_bound: f64,
}

/// (−Δ)^s u at x.
///
/// The ball of radius δ about x is dropped and its contribution bounded by
/// the second-derivative bound. δ balances that bound against rounding in
/// the second difference and never exceeds `bound.delta`. With compact
/// support the far field beyond |x| + R is added in closed form; otherwise
/// the radial integral runs to infinity with decay ρ^{−1−2s}.
pub fn frac_laplacian_pointwise(
    u: &ScalarField<'_>,
    x: &Point,
    order: &FracOrder,
    bound: &LocalBound,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    let (n, s) = (order.n(), order.s());
    x.check_dim(n)?;
    if !(bound.delta > 0.0 && bound.second_derivative_bound >= 0.0) {
        return Err(Error::Domain("local bound needs delta > 0 and a non-negative bound".into()));
    }
    let Some(decay) = u.decay else {
        return Err(Error::Domain("a decay class is required for the fractional Laplacian".into()));
    };
    let half_c = 0.5 * big_c_const(n, s)?;
    let omega = sphere_measure(n)?;
    let u0 = u.eval(x)?;

    let m = bound.second_derivative_bound;
    let inner_coef = half_c * m * omega / (2.0 - 2.0 * s);
    let noise_coef = half_c * omega * 4.0 * f64::EPSILON * u0.abs().max(f64::MIN_POSITIVE) / (2.0 * s);
    let delta = if m == 0.0 {
        bound.delta
    } else {
        let by_tol = (0.25 * spec.abs_tol / inner_coef).powf(1.0 / (2.0 - 2.0 * s));
        let balanced = (noise_coef * 2.0 * s / (inner_coef * (2.0 - 2.0 * s))).sqrt();
        bound.delta.min(by_tol.max(balanced))
    };
    let dropped = inner_coef * delta.powf(2.0 - 2.0 * s) + noise_coef * delta.powf(-2.0 * s);

    let radial_spec = QuadSpec { abs_tol: 0.5 * spec.abs_tol / (half_c * omega), ..spec.plain() };
    let xn = x.norm();
    let (reach, tail) = match decay {
        Decay::Compact(rs) => {
            let reach = (xn + rs).max(2.0 * delta);
            (Some((rs, reach)), 2.0 * u0 * omega * reach.powf(-2.0 * s) / (2.0 * s))
        }
        _ => (None, 0.0),
    };

    let radial = integrate_sphere(n, None, &radial_spec, |dir, inner| {
        let mut points = vec![delta];
        match reach {
            Some((rs, r_max)) => {
                points.extend(support_crossings(x, dir, rs).into_iter().filter(|&p| p > delta && p < r_max));
                points.sort_by(f64::total_cmp);
                points.push(r_max);
            }
            None => {
                let mid = (xn + 1.0).max(2.0 * delta);
                points.push(mid);
                points.push(f64::INFINITY);
            }
        }
        let mut q = inner.plain();
        if reach.is_none() {
            q.decay_exponent = Some(-1.0 - 2.0 * s);
        }
        integrate_pieces(
            |node: Node| {
                let rho = node.x;
                let plus = u.eval(&x.offset(rho, dir))?;
                let minus = u.eval(&x.offset(-rho, dir))?;
                Ok(QuadResult::exact((2.0 * u0 - plus - minus) * rho.powf(-1.0 - 2.0 * s)))
            },
            &points,
            &q,
        )
    })?;
    let total = QuadResult::exact(tail).plus(radial).scaled(half_c);
    Ok(QuadResult { error_estimate: total.error_estimate + dropped, ..total })
}

/// Radii ρ > 0 at which x ± ρω crosses the sphere of radius `rs`.
fn support_crossings(x: &Point, dir: &Point, rs: f64) -> Vec<f64> {
    let b = x.dot(dir);
    let c = x.norm_sq() - rs * rs;
    let disc = b * b - c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = disc.sqrt();
    [-b - q, -b + q, b - q, b + q].into_iter().filter(|&p| p > 0.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::dydares_constant;
    use crate::field::Smoothness;

    #[test]
    fn dydares_inside_ball() {
        // (−Δ)^s (1 − |x|²)₊^s is constant in the ball
        for &(n, s) in &[(1usize, 0.5), (1, 0.3), (2, 0.6)] {
            let order = FracOrder::new(n, s).unwrap();
            let u = ScalarField::new(move |p: &Point| (1.0 - p.norm_sq()).max(0.0).powf(s))
                .with_decay(Decay::Compact(1.0))
                .with_smoothness(Smoothness::Holder(s));
            let x = Point::on_axis(n, 0.3);
            let bound = LocalBound { delta: 0.2, second_derivative_bound: 4.0 };
            let spec = QuadSpec::new(1e-8, 1e-9).unwrap();
            let r = frac_laplacian_pointwise(&u, &x, &order, &bound, &spec).unwrap();
            let exact = dydares_constant(n, s).unwrap();
            assert!((r.value - exact).abs() < 1e-5 * exact, "n={n} s={s}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn needs_decay() {
        let order = FracOrder::new(1, 0.5).unwrap();
        let u = ScalarField::new(|_| 1.0);
        let bound = LocalBound { delta: 0.1, second_derivative_bound: 0.0 };
        let r = frac_laplacian_pointwise(&u, &Point::origin(1), &order, &bound, &QuadSpec::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn crossings() {
        let x = Point::on_axis(1, 0.3);
        let mut c = support_crossings(&x, &Point::on_axis(1, 1.0), 1.0);
        c.sort_by(f64::total_cmp);
        assert_eq!(c.len(), 2);
        assert!((c[0] - 0.7).abs() < 1e-15 && (c[1] - 1.3).abs() < 1e-15);
    }
}
