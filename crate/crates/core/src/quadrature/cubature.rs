//! Ball and exterior cubature in polar coordinates about a chosen centre.
//!
//! Angles are integrated adaptively in a frame whose pole points along a
//! given axis, so integrands symmetric about that axis cost almost nothing
//! in the azimuth. Exterior integrals are pulled back into the ball by
//! Kelvin inversion.

use super::{integrate_nested, integrate_nodes, integrate_pieces, Node, QuadResult, QuadSpec};
use crate::error::{Error, Result};
use crate::geometry::{hyperspherical_to_cartesian, BallDomain, Frame, HypersphericalCoord, Point};
use std::f64::consts::PI;

/// Tolerance tightening applied at each nesting level.
const LEVEL_FACTOR: f64 = 8.0;

/// Largest dimension handled by the tensor cubature.
pub const MAX_CUBATURE_DIM: usize = 3;

/// What an integrand sees at a cubature node.
#[derive(Clone, Debug)]
pub struct Sample {
    pub point: Point,
    /// |r² − |y|²| computed without cancellation.
    pub gap: f64,
    /// Distance to the polar centre (ball) or to the focus (exterior).
    pub rho: f64,
}

/// Validation that leaves the centre exponent to [`polar_ball`], where it
/// only has to exceed −n.
fn validate_radial(spec: &QuadSpec) -> Result<()> {
    QuadSpec { left_exponent: None, ..spec.clone() }.validate()
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_CUBATURE_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!("cubature supports dimensions 1 to {MAX_CUBATURE_DIM}, got {n}")))
    }
}

/// ∫ over the unit sphere S^{n−1} of f(ω) dω.
///
/// The closure also receives the `QuadSpec` to use for anything nested
/// inside it. The polar axis of the angular frame is `axis` (default eₙ).
pub fn integrate_sphere<F>(n: usize, axis: Option<&Point>, spec: &QuadSpec, mut f: F) -> Result<QuadResult>
where
    F: FnMut(&Point, &QuadSpec) -> Result<QuadResult>,
{
    check_dim(n)?;
    let frame = Frame::towards(axis, n);
    match n {
        1 => {
            let inner = spec.plain();
            let plus = f(&Point::raw([1.0]), &inner)?;
            let minus = f(&Point::raw([-1.0]), &inner)?;
            Ok(plus.plus(minus))
        }
        2 => {
            let inner = spec.nested(LEVEL_FACTOR);
            let ring = |node: Node| {
                let dir = hyperspherical_to_cartesian(&HypersphericalCoord::new(1.0, &[node.x]), 2)?;
                f(&frame.apply(&dir), &inner)
            };
            integrate_pieces(ring, &[0.0, PI, 2.0 * PI], &spec.plain())
        }
        _ => {
            let middle = spec.nested(LEVEL_FACTOR);
            let inner = middle.nested(LEVEL_FACTOR);
            let polar = |outer: Node| -> Result<QuadResult> {
                let theta = outer.x;
                let ring = |node: Node| {
                    let hc = HypersphericalCoord::new(1.0, &[theta, node.x]);
                    let dir = hyperspherical_to_cartesian(&hc, 3)?;
                    f(&frame.apply(&dir), &inner)
                };
                let r = integrate_pieces(ring, &[0.0, PI, 2.0 * PI], &middle)?;
                Ok(r.scaled(theta.sin()))
            };
            integrate_nested(polar, 0.0, PI, &spec.plain())
        }
    }
}

/// Distances from `center` along `dir` to the sphere |y| = r, forwards
/// (ρ₊) and backwards (ρ₋), so that r² − |c + ρω|² = (ρ₊ − ρ)(ρ + ρ₋).
pub(crate) fn ray(center: &Point, dir: &Point, power: f64) -> (f64, f64) {
    let b = center.dot(dir);
    let sq = (b * b + power).sqrt();
    if b > 0.0 {
        (power / (b + sq), b + sq)
    } else {
        (sq - b, power / (sq - b))
    }
}

/// Polar integration over the ball about `center`. The callback receives
/// the point, the gap r² − |y|² and the radius about the centre.
fn polar_ball<F>(
    domain: &BallDomain,
    center: &Point,
    center_exponent: Option<f64>,
    boundary_exponent: Option<f64>,
    spec: &QuadSpec,
    mut g: F,
) -> Result<QuadResult>
where
    F: FnMut(&Point, f64, f64) -> f64,
{
    let n = domain.dim();
    check_dim(n)?;
    center.check_dim(n)?;
    let r = domain.radius();
    let power = r * r - center.norm_sq();
    if !(power > 0.0) {
        return Err(Error::Domain("polar centre must lie inside the ball".into()));
    }
    if let Some(a) = center_exponent {
        if !(a > -(n as f64)) {
            return Err(Error::Domain(format!("centre exponent {a} is not integrable in dimension {n}")));
        }
    }
    let axis = (center.norm() > 0.0).then_some(center);
    let jac = n as i32 - 1;
    integrate_sphere(n, axis, spec, |dir, inner| {
        let (rho_max, rho_back) = ray(center, dir, power);
        let mut radial = inner.plain();
        radial.left_exponent = center_exponent.map(|a| a + jac as f64);
        radial.right_exponent = boundary_exponent;
        integrate_nodes(
            |node| {
                let rho = node.from_left;
                let y = center.offset(rho, dir);
                g(&y, node.from_right * (rho + rho_back), rho) * rho.powi(jac)
            },
            0.0,
            rho_max,
            &radial,
        )
    })
}

/// ∫_{B_r} f(y) dy in polar coordinates about the origin.
pub fn integrate_ball<F>(f: F, domain: &BallDomain, spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(&Sample) -> f64,
{
    integrate_ball_about(f, domain, &Point::origin(domain.dim()), spec)
}

/// ∫_{B_r} f(y) dy in polar coordinates about `center`, where f may carry a
/// singularity |y − center|^α (declared as `left_exponent`) and a boundary
/// factor (r² − |y|²)^β (declared as `right_exponent`).
pub fn integrate_ball_about<F>(mut f: F, domain: &BallDomain, center: &Point, spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(&Sample) -> f64,
{
    validate_radial(spec)?;
    polar_ball(domain, center, spec.left_exponent, spec.right_exponent, spec, |y, gap, rho| {
        f(&Sample { point: y.clone(), gap, rho })
    })
}

/// ∫_{ℝⁿ∖B_r} f(y) dy, pulled back into the ball by inversion about
/// `inversion_center` and integrated in polar coordinates about it.
///
/// Declare the far-field decay |f| ~ |y|^γ as `decay_exponent` and the
/// boundary behaviour (|y|² − r²)^β as `right_exponent`.
pub fn integrate_exterior<F>(f: F, domain: &BallDomain, spec: &QuadSpec, inversion_center: &Point) -> Result<QuadResult>
where
    F: FnMut(&Sample) -> f64,
{
    spec.validate()?;
    let n = domain.dim() as f64;
    let center_exponent = spec.decay_exponent.map(|g| -g - 2.0 * n);
    exterior(f, domain, spec, inversion_center, None, center_exponent)
}

/// Exterior integral for an f with an integrable singularity
/// |y − focus|^α at an exterior point (α declared as `left_exponent`).
///
/// The polar centre is the image of the focus, so the pulled-back integrand
/// must be regular at the inversion centre itself.
pub fn integrate_exterior_focused<F>(
    f: F,
    domain: &BallDomain,
    spec: &QuadSpec,
    inversion_center: &Point,
    focus: &Point,
) -> Result<QuadResult>
where
    F: FnMut(&Sample) -> f64,
{
    validate_radial(spec)?;
    if !(focus.norm() > domain.radius()) {
        return Err(Error::Domain("focus must lie outside the ball".into()));
    }
    exterior(f, domain, spec, inversion_center, Some(focus), spec.left_exponent)
}

fn exterior<F>(
    mut f: F,
    domain: &BallDomain,
    spec: &QuadSpec,
    x0: &Point,
    focus: Option<&Point>,
    center_exponent: Option<f64>,
) -> Result<QuadResult>
where
    F: FnMut(&Sample) -> f64,
{
    let n = domain.dim();
    x0.check_dim(n)?;
    let r = domain.radius();
    let power = r * r - x0.norm_sq();
    if !(power > 0.0) {
        return Err(Error::Domain("inversion centre must lie inside the ball".into()));
    }
    let polar_center = match focus {
        Some(q) => {
            q.check_dim(n)?;
            crate::geometry::kelvin_invert(x0, r, q)?
        }
        None => x0.clone(),
    };
    let focus_offset = polar_center.dist(x0);
    polar_ball(domain, &polar_center, center_exponent, spec.right_exponent, spec, |ys, gap, rho| {
        let d = ys.sub(x0);
        let d2 = d.norm_sq();
        let k = power / d2;
        let y = x0.offset(-k, &d);
        let jac = k.powi(n as i32);
        let dist = match focus {
            Some(_) => power * rho / (d2.sqrt() * focus_offset),
            None => power / d2.sqrt(),
        };
        f(&Sample { point: y, gap: k * gap, rho: dist }) * jac
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{c_const, sphere_measure};

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-10, 1e-13).unwrap()
    }

    #[test]
    fn ball_volume_three_d() {
        let b = BallDomain::new(3, 1.0).unwrap();
        let r = integrate_ball(|_| 1.0, &b, &spec()).unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn ball_volume_off_centre_polar() {
        let b = BallDomain::new(2, 2.0).unwrap();
        let c = Point::new(&[0.7, -0.9]).unwrap();
        let r = integrate_ball_about(|_| 1.0, &b, &c, &spec()).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn radial_gaussian() {
        for n in 1..=3 {
            let b = BallDomain::new(n, 1.5).unwrap();
            let r = integrate_ball(|s| (-s.point.norm_sq()).exp(), &b, &spec()).unwrap();
            let radial = super::super::integrate_interval(
                |t| t.powi(n as i32 - 1) * (-t * t).exp(),
                0.0,
                1.5,
                &spec(),
            )
            .unwrap();
            let oracle = sphere_measure(n).unwrap() * radial.value;
            assert!((r.value - oracle).abs() < 1e-9 * oracle, "n = {n}");
        }
    }

    #[test]
    fn interior_singular_normalization() {
        let (n, s, x) = (3usize, 0.4, Point::on_axis(3, 0.2));
        let b = BallDomain::new(n, 1.0).unwrap();
        let q = spec().with_left(2.0 * s - n as f64).with_right(-s);
        let r = integrate_ball_about(
            |smp| smp.gap.powf(-s) * smp.rho.powf(2.0 * s - n as f64),
            &b,
            &x,
            &q,
        )
        .unwrap();
        let c = c_const(n, s).unwrap();
        assert!((r.value * c - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn exterior_compact_shell_two_routes() {
        // f supported in 1 < |y| < 2, compared with a direct shell integral
        let b = BallDomain::new(2, 1.0).unwrap();
        let f = |p: &Point| {
            let t = p.norm();
            if t < 2.0 {
                ((t - 1.0) * (2.0 - t)).powi(2) * (1.0 + 0.3 * p[0])
            } else {
                0.0
            }
        };
        let pulled = integrate_exterior(|s| f(&s.point), &b, &spec(), &Point::new(&[0.2, 0.1]).unwrap()).unwrap();
        let shell = super::super::integrate_interval(
            |t| 2.0 * PI * t * ((t - 1.0) * (2.0 - t)).powi(2),
            1.0,
            2.0,
            &spec(),
        )
        .unwrap();
        assert!((pulled.value - shell.value).abs() < 1e-6 * shell.value);
    }

    #[test]
    fn rejects_high_dimension() {
        let b = BallDomain::new(4, 1.0).unwrap();
        assert!(integrate_ball(|_| 1.0, &b, &spec()).is_err());
    }
}
