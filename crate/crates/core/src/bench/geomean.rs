use std::time::Duration;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometricMeanError {
    #[error("geometric mean of an empty list")]
    Empty,
    #[error("geometric mean needs positive finite values, got {value} at index {index}")]
    NonPositive { index: usize, value: f64 },
}

/// n-th root of the product of n values, computed as exp(mean(ln v)).
pub fn geometric_mean(values: &[f64]) -> Result<f64, GeometricMeanError> {
    if values.is_empty() {
        return Err(GeometricMeanError::Empty);
    }
    let mut sum = 0.0;
    for (index, &value) in values.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(GeometricMeanError::NonPositive { index, value });
        }
        sum += value.ln();
    }
    Ok((sum / values.len() as f64).exp())
}

pub fn geometric_mean_duration(values: &[Duration]) -> Result<Duration, GeometricMeanError> {
    let secs: Vec<f64> = values.iter().map(Duration::as_secs_f64).collect();
    geometric_mean(&secs).map(Duration::from_secs_f64)
}
