//! Scalar fields on ℝⁿ with the regularity and decay hints the integrators
//! use to pick exponents and truncation.

use crate::error::{Error, Result};
use crate::geometry::Point;
use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothness {
    Continuous,
    /// Hölder continuous of the given order.
    Holder(f64),
    Smooth,
}

/// Far-field behaviour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    /// Zero outside the closed ball of this radius.
    Compact(f64),
    /// Bounded by `sup` in absolute value.
    Bounded(f64),
    /// |u(y)| ≤ scale·|y|^exponent for large |y|.
    PowerLaw { exponent: f64, scale: f64 },
}

impl Decay {
    /// Exponent γ of |u(y)| ~ |y|^γ at infinity; −∞ for compact support.
    pub fn exponent(&self) -> f64 {
        match *self {
            Decay::Compact(_) => f64::NEG_INFINITY,
            Decay::Bounded(_) => 0.0,
            Decay::PowerLaw { exponent, .. } => exponent,
        }
    }
}

type Eval<'a> = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync + 'a>;

/// A real function on ℝⁿ.
#[derive(Clone)]
pub struct ScalarField<'a> {
    eval: Eval<'a>,
    pub smoothness: Smoothness,
    pub decay: Option<Decay>,
}

impl fmt::Debug for ScalarField<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("smoothness", &self.smoothness)
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

impl<'a> ScalarField<'a> {
    pub fn new(f: impl Fn(&Point) -> f64 + Send + Sync + 'a) -> Self {
        Self::fallible(move |p| Ok(f(p)))
    }

    /// A field whose evaluation may fail, e.g. one defined by an integral.
    pub fn fallible(f: impl Fn(&Point) -> Result<f64> + Send + Sync + 'a) -> Self {
        Self { eval: Arc::new(f), smoothness: Smoothness::Continuous, decay: None }
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn eval(&self, p: &Point) -> Result<f64> {
        let v = (self.eval)(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteSample(p.norm()))
        }
    }

    /// Compact support radius if declared.
    pub fn support_radius(&self) -> Option<f64> {
        match self.decay {
            Some(Decay::Compact(r)) => Some(r),
            _ => None,
        }
    }
}

/// Holds the first error raised inside an infallible integrand.
///
/// The integrand returns NaN after an error, which aborts the integration;
/// [`ErrorSlot::finish`] then reports the stored error instead of the
/// resulting `NonFiniteSample`.
#[derive(Default)]
pub(crate) struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    pub fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    pub fn finish<T>(self, r: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_hints() {
        let u = ScalarField::new(|p: &Point| p.norm_sq()).with_decay(Decay::Compact(2.0));
        assert_eq!(u.eval(&Point::on_axis(2, 3.0)).unwrap(), 9.0);
        assert_eq!(u.support_radius(), Some(2.0));
        assert_eq!(Decay::Bounded(1.0).exponent(), 0.0);
    }

    #[test]
    fn non_finite_is_error() {
        let u = ScalarField::new(|_| f64::NAN);
        assert!(matches!(u.eval(&Point::origin(1)), Err(Error::NonFiniteSample(_))));
    }

    #[test]
    fn slot_prefers_stored_error() {
        let slot = ErrorSlot::default();
        let v = slot.value(Err(Error::Domain("inner".into())));
        assert!(v.is_nan());
        let r: Result<f64> = slot.finish(Err(Error::NonFiniteSample(0.0)));
        assert_eq!(r, Err(Error::Domain("inner".into())));
    }
}
