//! Points, origin-centred balls, hyperspherical coordinates and Kelvin
//! point inversion.

use crate::error::{Error, Result};
use smallvec::SmallVec;
use std::f64::consts::PI;
use std::ops::Index;

type Coords = SmallVec<[f64; 4]>;

/// A point of ℝⁿ with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Coords,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("a point needs at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        Ok(Self::raw(coords.iter().copied()))
    }

    pub(crate) fn raw(coords: impl IntoIterator<Item = f64>) -> Self {
        Self { coords: coords.into_iter().collect() }
    }

    pub fn origin(dim: usize) -> Self {
        Self::raw(std::iter::repeat_n(0.0, dim))
    }

    /// t·e₁ in ℝⁿ.
    pub fn on_axis(dim: usize, t: f64) -> Self {
        let mut p = Self::origin(dim);
        p.coords[0] = t;
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Point) -> Point {
        Self::raw(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b))
    }

    pub fn sub(&self, other: &Point) -> Point {
        Self::raw(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b))
    }

    pub fn scale(&self, k: f64) -> Point {
        Self::raw(self.coords.iter().map(|a| k * a))
    }

    /// self + k·dir
    pub fn offset(&self, k: f64, dir: &Point) -> Point {
        Self::raw(self.coords.iter().zip(&dir.coords).map(|(a, d)| a + k * d))
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::Domain(format!("expected a point in dimension {dim}, got {}", self.dim())))
        }
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Ball of radius r centred at the origin of ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallDomain {
    dim: usize,
    radius: f64,
}

impl BallDomain {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius must be positive and finite, got {radius}")));
        }
        Ok(Self { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.norm() < self.radius
    }
}

/// Radius plus angles θ, θ₁, …, θ_{n−2}.
///
/// For n = 1 there are no angles and `rho` is a signed coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersphericalCoord {
    pub rho: f64,
    pub angles: Vec<f64>,
}

impl HypersphericalCoord {
    pub fn new(rho: f64, angles: &[f64]) -> Self {
        Self { rho, angles: angles.to_vec() }
    }
}

fn check_angles(hc: &HypersphericalCoord, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if hc.angles.len() != n.saturating_sub(1) {
        return Err(Error::Domain(format!(
            "dimension {n} needs {} angles, got {}",
            n.saturating_sub(1),
            hc.angles.len()
        )));
    }
    if !hc.rho.is_finite() || (n > 1 && hc.rho < 0.0) {
        return Err(Error::Domain(format!("invalid radius {}", hc.rho)));
    }
    for (i, &a) in hc.angles.iter().enumerate() {
        let last = i + 1 == hc.angles.len();
        let top = if last && n >= 2 { 2.0 * PI } else { PI };
        if !(0.0..=top).contains(&a) {
            return Err(Error::Domain(format!("angle {i} = {a} outside [0, {top}]")));
        }
    }
    Ok(())
}

/// Cartesian point of a hyperspherical coordinate.
///
/// y_n = ρ cos θ, y_{n−1} = ρ sin θ cos θ₁, …, y₂ = ρ sin θ ⋯ cos θ_{n−2},
/// y₁ = ρ sin θ ⋯ sin θ_{n−2}. In n = 2 the single angle runs over [0, 2π].
pub fn hyperspherical_to_cartesian(hc: &HypersphericalCoord, n: usize) -> Result<Point> {
    check_angles(hc, n)?;
    if n == 1 {
        return Ok(Point::raw([hc.rho]));
    }
    let mut y = vec![0.0; n];
    let mut prefix = hc.rho;
    for (k, &a) in hc.angles.iter().enumerate() {
        y[n - 1 - k] = prefix * a.cos();
        prefix *= a.sin();
    }
    y[0] = prefix;
    Ok(Point::raw(y))
}

/// ρ^{n−1} sin^{n−2}θ sin^{n−3}θ₁ ⋯ sin θ_{n−3}.
pub fn hyperspherical_jacobian(hc: &HypersphericalCoord, n: usize) -> Result<f64> {
    check_angles(hc, n)?;
    let mut j = hc.rho.abs().powi(n as i32 - 1);
    for (k, &a) in hc.angles.iter().enumerate().take(n.saturating_sub(2)) {
        j *= a.sin().powi((n - 2 - k) as i32);
    }
    Ok(j)
}

fn inversion_setup(x0: &Point, r: f64, y: &Point) -> Result<(f64, Point, f64)> {
    if y.dim() != x0.dim() {
        return Err(Error::Domain("points of different dimension".into()));
    }
    let power = r * r - x0.norm_sq();
    if !(power > 0.0) {
        return Err(Error::Domain("inversion centre must lie inside the ball".into()));
    }
    let d = y.sub(x0);
    let d2 = d.norm_sq();
    if d2 == 0.0 {
        return Err(Error::Singularity("point coincides with the inversion centre".into()));
    }
    Ok((power, d, d2))
}

/// K(y) = x0 − (r² − |x0|²)(y − x0)/|y − x0|².
pub fn kelvin_invert(x0: &Point, r: f64, y: &Point) -> Result<Point> {
    let (power, d, d2) = inversion_setup(x0, r, y)?;
    Ok(x0.offset(-power / d2, &d))
}

/// Volume ratio |det DK(y)| = ((r² − |x0|²)/|y − x0|²)ⁿ.
pub fn inversion_jacobian(x0: &Point, r: f64, y: &Point) -> Result<f64> {
    let (power, _, d2) = inversion_setup(x0, r, y)?;
    Ok((power / d2).powi(y.dim() as i32))
}

/// Both sides of |K(y) − K(x)| = (r² − |x0|²)|y − x|/(|y − x0||x − x0|).
pub fn distance_identity(x0: &Point, r: f64, x: &Point, y: &Point) -> Result<(f64, f64)> {
    let xs = kelvin_invert(x0, r, x)?;
    let ys = kelvin_invert(x0, r, y)?;
    let power = r * r - x0.norm_sq();
    let rhs = power * y.dist(x) / (y.dist(x0) * x.dist(x0));
    Ok((ys.dist(&xs), rhs))
}

/// Both sides of |y − x0|²/((r² − |x0|²)(r² − |y|²)) = 1/(|K(y)|² − r²).
pub fn inversion_gap_identity(x0: &Point, r: f64, y: &Point) -> Result<(f64, f64)> {
    let ys = kelvin_invert(x0, r, y)?;
    let power = r * r - x0.norm_sq();
    let lhs = y.dist(x0).powi(2) / (power * (r * r - y.norm_sq()));
    Ok((lhs, 1.0 / (ys.norm_sq() - r * r)))
}

/// Reflection taking e_n to `axis` (a unit vector); identity when they agree.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    v: Option<Point>,
}

impl Frame {
    pub(crate) fn towards(axis: Option<&Point>, n: usize) -> Frame {
        let Some(a) = axis else { return Frame { v: None } };
        let norm = a.norm();
        if norm == 0.0 {
            return Frame { v: None };
        }
        let mut v = a.scale(-1.0 / norm);
        v.coords[n - 1] += 1.0;
        if v.norm_sq() < 1e-28 {
            Frame { v: None }
        } else {
            Frame { v: Some(v) }
        }
    }

    pub(crate) fn apply(&self, p: &Point) -> Point {
        match &self.v {
            None => p.clone(),
            Some(v) => p.offset(-2.0 * v.dot(p) / v.norm_sq(), v),
        }
    }
}
