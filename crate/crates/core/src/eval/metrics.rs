use crate::error::{GreyError, Result};

/// Observed values closer to zero than this are left out of MAPE.
pub const MAPE_ZERO_GUARD: f64 = 1e-9;

fn check_pairs(predicted: &[f64], observed: &[f64]) -> Result<()> {
    if predicted.len() != observed.len() {
        return Err(GreyError::invalid(format!(
            "metric inputs differ in length: {} predicted vs {} observed",
            predicted.len(),
            observed.len()
        )));
    }
    if predicted.is_empty() {
        return Err(GreyError::InsufficientData { needed: 1, got: 0 });
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_pairs(predicted, observed)?;
    let sum: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    /// Mean absolute percentage error over the retained pairs, in percent.
    pub percent: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Mean absolute percentage error, skipping pairs whose observation is
/// (numerically) zero.
pub fn mape(predicted: &[f64], observed: &[f64]) -> Result<Mape> {
    check_pairs(predicted, observed)?;
    let mut sum = 0.0;
    let mut used = 0;
    for (p, o) in predicted.iter().zip(observed) {
        if o.abs() < MAPE_ZERO_GUARD {
            continue;
        }
        sum += ((p - o) / o).abs();
        used += 1;
    }
    if used == 0 {
        return Err(GreyError::invalid(
            "MAPE is undefined: every observed value is zero",
        ));
    }
    Ok(Mape {
        percent: sum / used as f64 * 100.0,
        used,
        excluded: predicted.len() - used,
    })
}

/// Percent improvement of `candidate` over `reference`.
pub fn improvement(reference: f64, candidate: f64) -> Result<f64> {
    if !(reference > 0.0) || !reference.is_finite() {
        return Err(GreyError::invalid(format!(
            "improvement needs a positive reference, got {reference}"
        )));
    }
    if !candidate.is_finite() {
        return Err(GreyError::invalid("improvement candidate must be finite"));
    }
    Ok((reference - candidate) / reference * 100.0)
}
