use rayon::prelude::*;
use serde::Serialize;

use super::{CapitalGrid, RoiEvaluator};
use crate::error::{check, Error, Result};

/// A capital whose ROI exceeds the ROI of one of its integer multiples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SybilViolation {
    pub capital: f64,
    pub multiple: u32,
    pub roi: f64,
    pub roi_at_multiple: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SybilReport {
    pub checked: usize,
    pub violations: Vec<SybilViolation>,
}

impl SybilReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every `(v, i)` with `f(v) > f(i * v) + tolerance`.
///
/// Pooling capital must never do worse than splitting it across `i`
/// identities, so an empty report means the evaluator respects that.
pub fn sybil_check<E: RoiEvaluator + ?Sized>(
    evaluator: &E,
    grid: &CapitalGrid,
    multiples: &[u32],
    tolerance: f64,
) -> Result<SybilReport> {
    check("tolerance", tolerance, |t| t >= 0.0, "must be non-negative")?;
    if let Some(&m) = multiples.iter().find(|&&m| m < 2) {
        return Err(Error::invalid("multiple", format!("{m}: multiples must be at least 2")));
    }
    let eval = |capital: f64| {
        evaluator.roi(capital).map_err(|source| Error::Evaluation {
            capital,
            source: Box::new(source),
        })
    };
    let per_capital = grid
        .samples()
        .into_par_iter()
        .map(|v| {
            let roi = eval(v)?;
            multiples
                .iter()
                .map(|&i| {
                    let at = eval(f64::from(i) * v)?;
                    Ok((roi > at + tolerance).then_some(SybilViolation {
                        capital: v,
                        multiple: i,
                        roi,
                        roi_at_multiple: at,
                    }))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SybilReport {
        checked: per_capital.iter().map(Vec::len).sum(),
        violations: per_capital.into_iter().flatten().flatten().collect(),
    })
}
