use super::FeatureError;

/// Time-domain statistics of one signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFeatures {
    pub mean: f64,
    /// Sample standard deviation (N − 1 denominator).
    pub std: f64,
    /// Mean absolute deviation from the mean.
    pub avg_dev: f64,
    pub rms: f64,
    /// Highest value.
    pub max: f64,
}

impl TimeFeatures {
    pub fn to_array(self) -> [f64; 5] {
        [self.mean, self.std, self.avg_dev, self.rms, self.max]
    }
}

pub fn time_features(x: &[f64]) -> Result<TimeFeatures, FeatureError> {
    let n = x.len();
    if n < 2 {
        return Err(FeatureError::Length { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let avg_dev = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / nf;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TimeFeatures {
        mean,
        std: (ss / (nf - 1.0)).sqrt(),
        avg_dev,
        rms,
        max,
    })
}
