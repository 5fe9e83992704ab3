use crate::calendar::STEPS_PER_HOUR;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::profile::LoadProfile;

/// Flexible demand: a fraction of base demand that may be curtailed or added
/// at each step, and the recovery window over which deviations may not net
/// to a decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexSpec<T> {
    pub flex_pct: T,
    recovery_steps: usize,
}

impl<T: Scalar> FlexSpec<T> {
    /// `recovery_hours` must be a positive multiple of a quarter hour.
    pub fn new(flex_pct: T, recovery_hours: f64) -> Result<Self> {
        if !(flex_pct >= T::zero() && flex_pct <= T::one()) {
            return Err(Error::Asset(format!("flexibility {flex_pct} must lie in [0, 1]")));
        }
        let steps = recovery_hours * STEPS_PER_HOUR as f64;
        if !(steps >= 1.0) || (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Asset(format!(
                "recovery period {recovery_hours} h must be a positive multiple of 15 minutes"
            )));
        }
        Ok(Self {
            flex_pct,
            recovery_steps: steps.round() as usize,
        })
    }

    /// Window length Δ in steps.
    pub fn delta_steps(&self) -> usize {
        self.recovery_steps
    }

    pub fn recovery_hours(&self) -> f64 {
        self.recovery_steps as f64 / STEPS_PER_HOUR as f64
    }

    /// No deviation is possible.
    pub fn is_inactive(&self) -> bool {
        self.flex_pct <= T::zero()
    }
}

/// Per-step deviation bounds, lower ≤ 0 ≤ upper.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexBounds<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> FlexBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::length("lower", lower.len(), upper.len()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(*l <= T::zero() && *u >= T::zero())) {
            return Err(Error::Asset("deviation bounds must satisfy lower <= 0 <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// Symmetric bounds ±f·D_base(t).
pub fn flex_bounds<T: Scalar>(flex: &FlexSpec<T>, load: &LoadProfile<T>) -> FlexBounds<T> {
    let upper: Vec<T> = load.d_base.iter().map(|d| flex.flex_pct * *d).collect();
    let lower = upper.iter().map(|u| -*u).collect();
    FlexBounds { lower, upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(v: Vec<f64>) -> LoadProfile<f64> {
        let m = v.iter().cloned().fold(0.0, f64::max);
        LoadProfile::new(v, m).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let l = load(vec![100.0, 50.0]);
        let zero = flex_bounds(&FlexSpec::new(0.0, 1.0).unwrap(), &l);
        assert!(zero.lower.iter().chain(&zero.upper).all(|v| *v == 0.0));
        let full = flex_bounds(&FlexSpec::new(1.0, 1.0).unwrap(), &l);
        assert_eq!((full.lower[0], full.upper[0]), (-100.0, 100.0));
        let part = flex_bounds(&FlexSpec::new(0.6, 1.0).unwrap(), &l);
        assert_eq!((part.lower[1], part.upper[1]), (-30.0, 30.0));
    }

    #[test]
    fn recovery_steps() {
        assert_eq!(FlexSpec::new(0.5, 24.0).unwrap().delta_steps(), 96);
        assert_eq!(FlexSpec::new(0.5, 1.0).unwrap().delta_steps(), 4);
        assert_eq!(FlexSpec::new(0.5, 0.25).unwrap().recovery_hours(), 0.25);
        assert!(FlexSpec::new(0.5, 0.1).is_err());
        assert!(FlexSpec::new(0.5, 0.0).is_err());
        assert!(FlexSpec::new(1.5, 1.0).is_err());
        assert!(FlexSpec::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn asymmetric_bounds_representable() {
        assert!(FlexBounds::new(vec![-1.0, 0.0], vec![0.0, 3.0]).is_ok());
        assert!(FlexBounds::new(vec![1.0], vec![2.0]).is_err());
        assert!(FlexBounds::new(vec![-1.0], vec![2.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_linear(
            d in prop::collection::vec(0.0f64..400.0, 1..40),
            f in 0.0f64..0.5,
        ) {
            let l = load(d);
            let a = flex_bounds(&FlexSpec::new(f, 2.0).unwrap(), &l);
            let b = flex_bounds(&FlexSpec::new(2.0 * f, 2.0).unwrap(), &l);
            for i in 0..l.d_base.len() {
                prop_assert_eq!(a.lower[i], -a.upper[i]);
                prop_assert!((b.upper[i] - 2.0 * a.upper[i]).abs() < 1e-9);
                prop_assert!(a.lower[i] <= 0.0 && a.upper[i] >= 0.0);
            }
        }
    }
}
