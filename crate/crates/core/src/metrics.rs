//! Peak-window evaluation metrics and tariff-to-tariff comparisons.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{DispatchSolution, VerificationReport};
use crate::scalar::Scalar;

/// Base values smaller than this make a ratio undefined.
pub const RATIO_EPSILON: f64 = 1e-9;

/// Evaluation quantities for one annual run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSet<T> {
    /// Mean |ΔD_net| over peak steps, kW per 15-minute step.
    pub mean_peak_ramp: T,
    /// Mean net demand over peak steps, kW.
    pub mean_peak_net_demand: T,
    pub total_bill: T,
}

/// Storage-tariff value over base-tariff value, per metric.
/// `None` marks an undefined ratio (base magnitude below [`RATIO_EPSILON`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeMetrics {
    pub bill: Option<f64>,
    pub ramp: Option<f64>,
    pub net: Option<f64>,
    /// Storage minus base.
    pub bill_diff: f64,
    pub ramp_diff: f64,
    pub net_diff: f64,
}

/// Mean absolute step-to-step change of `d_net` over masked steps `t > 0`.
/// The predecessor of a masked step need not be masked.
pub fn peak_ramp_mean<T: Scalar>(d_net: &[T], peak_mask: &[bool]) -> Result<T> {
    peak_ramp_mean_segmented(&[(d_net, peak_mask)])
}

/// Like [`peak_ramp_mean`] over several independent segments (months);
/// pairs straddling two segments are not counted.
pub fn peak_ramp_mean_segmented<T: Scalar>(segments: &[(&[T], &[bool])]) -> Result<T> {
    let mut total = T::zero();
    let mut count = 0usize;
    for (d, mask) in segments {
        if d.len() != mask.len() {
            return Err(Error::length("peak_mask", mask.len(), d.len()));
        }
        for t in 1..d.len() {
            if mask[t] {
                total = total + (d[t] - d[t - 1]).abs();
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(total / T::lit(count as f64))
}

/// Arithmetic mean of `d_net` over masked steps.
pub fn peak_net_mean<T: Scalar>(d_net: &[T], peak_mask: &[bool]) -> Result<T> {
    if d_net.len() != peak_mask.len() {
        return Err(Error::length("peak_mask", peak_mask.len(), d_net.len()));
    }
    let (sum, count) = d_net
        .iter()
        .zip(peak_mask)
        .filter(|(_, m)| **m)
        .fold((T::zero(), 0usize), |(s, c), (v, _)| (s + *v, c + 1));
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / T::lit(count as f64))
}

fn ratio(storage: f64, base: f64) -> Option<f64> {
    (base.abs() >= RATIO_EPSILON && storage.is_finite() && base.is_finite()).then(|| storage / base)
}

pub fn relative_metrics<T: Scalar>(storage: &MetricSet<T>, base: &MetricSet<T>) -> RelativeMetrics {
    let f = |v: T| v.to_f64_lossy();
    RelativeMetrics {
        bill: ratio(f(storage.total_bill), f(base.total_bill)),
        ramp: ratio(f(storage.mean_peak_ramp), f(base.mean_peak_ramp)),
        net: ratio(f(storage.mean_peak_net_demand), f(base.mean_peak_net_demand)),
        bill_diff: f(storage.total_bill) - f(base.total_bill),
        ramp_diff: f(storage.mean_peak_ramp) - f(base.mean_peak_ramp),
        net_diff: f(storage.mean_peak_net_demand) - f(base.mean_peak_net_demand),
    }
}

/// One solved and verified month.
#[derive(Debug, Clone, Serialize)]
pub struct MonthOutcome<T> {
    pub month: u32,
    pub solution: DispatchSolution<T>,
    pub report: VerificationReport,
    pub peak_mask: Vec<bool>,
}

/// Twelve independent monthly solves under one tariff and asset setup.
#[derive(Debug, Clone, Serialize)]
pub struct AnnualResult<T> {
    pub tariff_id: String,
    pub assets: String,
    pub months: Vec<MonthOutcome<T>>,
}

impl<T: Scalar> AnnualResult<T> {
    /// Sum of monthly objective values.
    pub fn annual_bill(&self) -> T {
        self.months.iter().map(|m| m.solution.objective_value).sum()
    }

    /// Concatenated net demand over all months.
    pub fn d_net(&self) -> Vec<T> {
        self.months
            .iter()
            .flat_map(|m| m.solution.net_demand.iter().copied())
            .collect()
    }

    pub fn peak_mask(&self) -> Vec<bool> {
        self.months.iter().flat_map(|m| m.peak_mask.iter().copied()).collect()
    }

    /// Metrics over the whole year, weighting months by their peak steps.
    pub fn metrics(&self) -> Result<MetricSet<T>> {
        let segments: Vec<(&[T], &[bool])> = self
            .months
            .iter()
            .map(|m| (m.solution.net_demand.as_slice(), m.peak_mask.as_slice()))
            .collect();
        Ok(MetricSet {
            mean_peak_ramp: peak_ramp_mean_segmented(&segments)?,
            mean_peak_net_demand: peak_net_mean(&self.d_net(), &self.peak_mask())?,
            total_bill: self.annual_bill(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ramp_examples() {
        assert_eq!(peak_ramp_mean(&[7.0, 7.0, 7.0], &[true; 3]).unwrap(), 0.0);
        assert_eq!(peak_ramp_mean(&[0.0, 4.0, 8.0, 4.0], &[true; 4]).unwrap(), 4.0);
        assert_eq!(peak_ramp_mean(&[0.0, 8.0, 16.0, 8.0], &[true; 4]).unwrap(), 8.0);
        // Ramp into the window counts even though step 0 is unmasked.
        assert_eq!(peak_ramp_mean(&[0.0, 5.0, 5.0], &[false, true, false]).unwrap(), 5.0);
    }

    #[test]
    fn net_examples() {
        assert_eq!(peak_net_mean(&[10.0; 5], &[true; 5]).unwrap(), 10.0);
        assert_eq!(peak_net_mean(&[-2.0, 2.0], &[true; 2]).unwrap(), 0.0);
        assert_eq!(peak_net_mean(&[5.0, 10.0, 15.0], &[true; 3]).unwrap(), 10.0);
        assert_eq!(peak_net_mean(&[5.0f32, 99.0], &[true, false]).unwrap(), 5.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        assert!(matches!(peak_net_mean(&[1.0, 2.0], &[false; 2]), Err(Error::EmptyMask)));
        assert!(matches!(peak_ramp_mean(&[1.0, 2.0], &[true, false]), Err(Error::EmptyMask)));
        assert!(peak_net_mean(&[1.0], &[true, true]).is_err());
    }

    #[test]
    fn month_boundaries_are_not_ramps() {
        let a = [1.0, 2.0, 3.0];
        let b = [30.0, 31.0];
        let m = [true; 3];
        let r = peak_ramp_mean_segmented(&[(&a[..], &m[..]), (&b[..], &m[..2])]).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn ratios() {
        let base = MetricSet { mean_peak_ramp: 4.0, mean_peak_net_demand: 50.0, total_bill: 1000.0 };
        let storage = MetricSet { mean_peak_ramp: 2.0, mean_peak_net_demand: 40.0, total_bill: 900.0 };
        let r = relative_metrics(&storage, &base);
        assert_eq!(r.ramp, Some(0.5));
        assert_eq!(r.net, Some(0.8));
        assert_eq!(r.bill, Some(0.9));
        assert_eq!(r.bill_diff, -100.0);

        let same = relative_metrics(&base, &base);
        assert_eq!((same.bill, same.ramp, same.net), (Some(1.0), Some(1.0), Some(1.0)));

        let zero = MetricSet { total_bill: 0.0, ..base };
        assert_eq!(relative_metrics(&storage, &zero).bill, None);
    }

    proptest! {
        #[test]
        fn metrics_are_homogeneous(
            xs in prop::collection::vec(-200.0f64..200.0, 3..80),
            alpha in 0.1f64..10.0,
        ) {
            let mask: Vec<bool> = (0..xs.len()).map(|t| t % 3 != 1).collect();
            let scaled: Vec<f64> = xs.iter().map(|x| x * alpha).collect();
            let r = peak_ramp_mean(&xs, &mask).unwrap();
            let rs = peak_ramp_mean(&scaled, &mask).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!((rs - alpha * r).abs() <= 1e-9 * (1.0 + rs.abs()));
            let n = peak_net_mean(&xs, &mask).unwrap();
            let ns = peak_net_mean(&scaled, &mask).unwrap();
            prop_assert!((ns - alpha * n).abs() <= 1e-9 * (1.0 + ns.abs()));
        }

        #[test]
        fn segment_order_does_not_matter(
            a in prop::collection::vec(0.0f64..100.0, 2..30),
            b in prop::collection::vec(0.0f64..100.0, 2..30),
        ) {
            let ma = vec![true; a.len()];
            let mb = vec![true; b.len()];
            let ab = peak_ramp_mean_segmented(&[(&a[..], &ma[..]), (&b[..], &mb[..])]).unwrap();
            let ba = peak_ramp_mean_segmented(&[(&b[..], &mb[..]), (&a[..], &ma[..])]).unwrap();
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn relative_to_self_is_one(bill in 1.0f64..1e6, ramp in 0.01f64..50.0, net in -100.0f64..300.0) {
            prop_assume!(net.abs() > 1e-6);
            let m = MetricSet { mean_peak_ramp: ramp, mean_peak_net_demand: net, total_bill: bill };
            let r = relative_metrics(&m, &m);
            prop_assert_eq!((r.bill, r.ramp, r.net), (Some(1.0), Some(1.0), Some(1.0)));
        }
    }
}
