//! Egalitarian curves and their variance-based score.
//!
//! A curve maps initial capital to the best achievable ROI. Capital is drawn
//! uniformly from a discrete grid, and the score is the negated population
//! variance of the ROI over that grid: 0 means every investor earns the same
//! rate regardless of wealth, more negative means less egalitarian.

mod sweep;
mod sybil;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

pub use sweep::{parameter_sweep, SweepAxis};
pub use sybil::{sybil_check, SybilReport, SybilViolation};

/// Anything that maps a capital to an ROI. Must be pure: curve sampling may
/// call it from several threads at once.
pub trait RoiEvaluator: Sync {
    fn roi(&self, capital: f64) -> Result<f64>;
}

impl<F> RoiEvaluator for F
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    fn roi(&self, capital: f64) -> Result<f64> {
        self(capital)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalGrid {
    pub min_capital: f64,
    pub max_capital: f64,
    pub step: f64,
}

impl CapitalGrid {
    pub fn new(min_capital: f64, max_capital: f64, step: f64) -> Result<Self> {
        check("min capital", min_capital, |v| v > 0.0, "must be positive")?;
        check("max capital", max_capital, |v| v >= min_capital, "must be at least the min capital")?;
        check("step", step, |v| v > 0.0, "must be positive")?;
        Ok(Self {
            min_capital,
            max_capital,
            step,
        })
    }

    pub fn len(&self) -> usize {
        let n = (self.max_capital - self.min_capital) / self.step;
        // tolerate a max that is a multiple of the step up to rounding
        (n + 1e-9 * n.max(1.0)).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.min_capital + i as f64 * self.step)
            .collect()
    }
}

impl Default for CapitalGrid {
    fn default() -> Self {
        Self {
            min_capital: 100.0,
            max_capital: 10_000.0,
            step: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub capital_usd: f64,
    pub roi: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveMetadata {
    /// Model identifier, e.g. `pow`, `pure-pos` or `ticket-pos`.
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub duration_hours: Option<f64>,
    /// Every numeric parameter the curve depends on.
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub swept: Option<SweptValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweptValue {
    pub axis: SweepAxis,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub metadata: CurveMetadata,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    /// Builds a curve from points, sorting them by capital.
    pub fn from_points(metadata: CurveMetadata, mut points: Vec<CurvePoint>) -> Result<Self> {
        points.sort_by(|a, b| a.capital_usd.total_cmp(&b.capital_usd));
        if points.windows(2).any(|w| w[0].capital_usd == w[1].capital_usd) {
            return Err(Error::invalid("curve", "capitals must be distinct"));
        }
        if let Some(p) = points.iter().find(|p| !p.roi.is_finite() || !p.capital_usd.is_finite()) {
            return Err(Error::invalid("curve", format!("non-finite point {p:?}")));
        }
        Ok(Self { metadata, points })
    }

    pub fn rois(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.roi)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("capital_usd,roi\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.capital_usd, p.roi));
        }
        out
    }
}

/// Samples `evaluator` at every grid capital. Evaluations run in parallel;
/// the result is ordered by capital.
pub fn egalitarian_curve<E: RoiEvaluator + ?Sized>(
    evaluator: &E,
    grid: &CapitalGrid,
    metadata: CurveMetadata,
) -> Result<Curve> {
    let points = grid
        .samples()
        .into_par_iter()
        .map(|capital| {
            let roi = evaluator.roi(capital).map_err(|source| Error::Evaluation {
                capital,
                source: Box::new(source),
            })?;
            if !roi.is_finite() {
                return Err(Error::Evaluation {
                    capital,
                    source: Box::new(Error::invalid("roi", format!("{roi} is not finite"))),
                });
            }
            Ok(CurvePoint {
                capital_usd: capital,
                roi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Curve::from_points(metadata, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgalScore {
    #[serde(rename = "egalitarianism")]
    pub value: f64,
    pub mean_roi: f64,
    #[serde(rename = "n")]
    pub sample_count: usize,
}

impl EgalScore {
    pub fn to_csv(&self) -> String {
        format!(
            "egalitarianism,mean_roi,n\n{},{},{}\n",
            self.value, self.mean_roi, self.sample_count
        )
    }
}

/// Negated population variance of the curve's ROI values.
pub fn egalitarianism(curve: &Curve) -> Result<EgalScore> {
    score_rois(curve.rois())
}

/// Welford's update: exactly zero variance for identical samples.
pub fn score_rois(rois: impl IntoIterator<Item = f64>) -> Result<EgalScore> {
    let (n, mean, m2) = rois
        .into_iter()
        .fold((0usize, 0.0f64, 0.0f64), |(n, mean, m2), x| {
            let n = n + 1;
            let delta = x - mean;
            let mean = mean + delta / n as f64;
            (n, mean, m2 + delta * (x - mean))
        });
    if n == 0 {
        return Err(Error::EmptyCurve);
    }
    let variance = (m2 / n as f64).max(0.0);
    Ok(EgalScore {
        value: 0.0 - variance,
        mean_roi: mean,
        sample_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(rois: &[f64]) -> Curve {
        let points = rois
            .iter()
            .enumerate()
            .map(|(i, &roi)| CurvePoint {
                capital_usd: (i + 1) as f64,
                roi,
            })
            .collect();
        Curve::from_points(CurveMetadata::default(), points).unwrap()
    }

    #[test]
    fn default_grid_has_991_points() {
        let g = CapitalGrid::default();
        assert_eq!(g.len(), 991);
        let s = g.samples();
        assert_eq!(s[0], 100.0);
        assert_eq!(*s.last().unwrap(), 10_000.0);
    }

    #[test]
    fn grid_validation() {
        assert!(CapitalGrid::new(0.0, 10.0, 1.0).is_err());
        assert!(CapitalGrid::new(10.0, 5.0, 1.0).is_err());
        assert!(CapitalGrid::new(1.0, 5.0, 0.0).is_err());
        assert_eq!(CapitalGrid::new(5.0, 5.0, 1.0).unwrap().len(), 1);
        assert_eq!(CapitalGrid::new(0.1, 0.3, 0.1).unwrap().len(), 3);
    }

    #[test]
    fn constant_evaluator() {
        let c = egalitarian_curve(&|_| Ok(0.5), &CapitalGrid::default(), CurveMetadata::default())
            .unwrap();
        assert_eq!(c.points.len(), 991);
        assert!(c.rois().all(|r| r == 0.5));
        assert_eq!(egalitarianism(&c).unwrap().value, 0.0);
    }

    #[test]
    fn evaluator_error_carries_capital() {
        let grid = CapitalGrid::new(10.0, 50.0, 10.0).unwrap();
        let failing = |v: f64| {
            if v == 30.0 {
                Err(Error::invalid("x", "boom"))
            } else {
                Ok(1.0)
            }
        };
        let err = egalitarian_curve(&failing, &grid, CurveMetadata::default()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { capital, .. } if capital == 30.0), "{err}");
        let nan = |_| Ok(f64::NAN);
        assert!(egalitarian_curve(&nan, &grid, CurveMetadata::default()).is_err());
    }

    #[test]
    fn two_point_variance() {
        let s = egalitarianism(&curve(&[0.1, 0.3])).unwrap();
        assert!((s.value + 0.01).abs() < 1e-15);
        assert!((s.mean_roi - 0.2).abs() < 1e-15);
        assert_eq!(s.sample_count, 2);
    }

    #[test]
    fn empty_curve_is_an_error() {
        let c = Curve::from_points(CurveMetadata::default(), vec![]).unwrap();
        assert!(matches!(egalitarianism(&c), Err(Error::EmptyCurve)));
    }

    #[test]
    fn score_json_and_csv() {
        let s = egalitarianism(&curve(&[0.05, 0.05])).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"egalitarianism":0.0,"mean_roi":0.05,"n":2}"#
        );
        assert_eq!(s.to_csv(), "egalitarianism,mean_roi,n\n0,0.05,2\n");
    }

    #[test]
    fn curve_csv() {
        let c = curve(&[0.25, 0.5]);
        assert_eq!(c.to_csv(), "capital_usd,roi\n1,0.25\n2,0.5\n");
    }

    /// Two-pass textbook variance, independent of the streaming update.
    fn two_pass(xs: &[f64]) -> f64 {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(-10.0f64..10.0, 1..200)) {
            let s = score_rois(xs.iter().copied()).unwrap();
            let v = two_pass(&xs);
            prop_assert!(s.value <= 0.0);
            prop_assert!((s.value + v).abs() <= 1e-12 * v.max(1.0));
        }

        #[test]
        fn zero_iff_constant(x in -5.0f64..5.0, n in 1usize..300) {
            prop_assert_eq!(score_rois(std::iter::repeat(x).take(n)).unwrap().value, 0.0);
        }

        #[test]
        fn permutation_and_duplication(mut xs in prop::collection::vec(0.0f64..2.0, 2..100), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let base = score_rois(xs.iter().copied()).unwrap().value;
            let doubled = score_rois(xs.iter().chain(xs.iter()).copied()).unwrap().value;
            xs.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = score_rois(xs.iter().copied()).unwrap().value;
            prop_assert!((base - shuffled).abs() <= 1e-12 * base.abs().max(1e-12));
            prop_assert!((base - doubled).abs() <= 1e-12 * base.abs().max(1e-12));
        }

        #[test]
        fn shift_and_scale(xs in prop::collection::vec(0.0f64..2.0, 2..100), shift in -10.0f64..10.0, s in 0.1f64..10.0) {
            let base = score_rois(xs.iter().copied()).unwrap().value;
            let shifted = score_rois(xs.iter().map(|x| x + shift)).unwrap().value;
            let scaled = score_rois(xs.iter().map(|x| x * s)).unwrap().value;
            prop_assert!((base - shifted).abs() <= 1e-12);
            prop_assert!((scaled - s * s * base).abs() <= 1e-9 * (s * s * base).abs().max(1e-300));
        }
    }
}
