//! One-sided magnitude spectrum and periodogram, plus their shape features.
//!
//! The DFT length always equals the window length; no zero padding and no
//! taper is applied. Skewness and kurtosis are unnormalized sums (no division
//! by the bin count).

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FeatureError;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn dft(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    buf
}

fn one_sided_bins(n: usize) -> usize {
    n / 2 + 1
}

fn bin_freqs(n: usize, sample_rate_hz: f64) -> Vec<f64> {
    (0..one_sided_bins(n))
        .map(|i| i as f64 * sample_rate_hz / n as f64)
        .collect()
}

/// One-sided DFT magnitudes `y_m` and their bin frequencies `y_f` (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    pub freqs: Vec<f64>,
}

impl Spectrum {
    pub fn new(magnitudes: Vec<f64>, freqs: Vec<f64>) -> Result<Self, FeatureError> {
        check_bins(&magnitudes, &freqs)?;
        Ok(Self { magnitudes, freqs })
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Copy without the DC bin.
    pub fn without_dc(&self) -> Self {
        Self {
            magnitudes: self.magnitudes[1..].to_vec(),
            freqs: self.freqs[1..].to_vec(),
        }
    }
}

fn check_bins(mags: &[f64], freqs: &[f64]) -> Result<(), FeatureError> {
    if mags.len() != freqs.len() {
        return Err(FeatureError::InvalidSpectrum(format!(
            "{} magnitudes vs {} frequencies",
            mags.len(),
            freqs.len()
        )));
    }
    if mags.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(FeatureError::InvalidSpectrum(
            "magnitudes must be finite and non-negative".into(),
        ));
    }
    if freqs.first().is_some_and(|f| *f < 0.0) || freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FeatureError::InvalidSpectrum(
            "bin frequencies must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn dft_spectrum(x: &[f64], sample_rate_hz: f64) -> Result<Spectrum, FeatureError> {
    if x.len() < 2 {
        return Err(FeatureError::Length {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len();
    let spec = dft(x);
    let magnitudes = spec[..one_sided_bins(n)].iter().map(|c| c.norm()).collect();
    Spectrum::new(magnitudes, bin_freqs(n, sample_rate_hz))
}

/// `|DFT|² / N` over every (two-sided) bin. Sums to `Σ x²` by Parseval.
pub fn two_sided_power(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    dft(x).iter().map(|c| c.norm_sqr() / n).collect()
}

/// One-sided periodogram `p_m = |DFT|² / N` with bin frequencies `p_f` and
/// the two band splits used by the top-frequency features.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub power: Vec<f64>,
    pub freqs: Vec<f64>,
    /// Bin counts of the first band and of the first two bands together:
    /// bands are `[0, n1)`, `[n1, n2)` and `[n2, len)` (zero-based).
    pub band_splits: (usize, usize),
}

impl Periodogram {
    /// Builds a periodogram with equal-thirds band splits.
    pub fn new(power: Vec<f64>, freqs: Vec<f64>) -> Result<Self, FeatureError> {
        let n = power.len();
        Self::with_splits(power, freqs, (n / 3, 2 * n / 3))
    }

    pub fn with_splits(
        power: Vec<f64>,
        freqs: Vec<f64>,
        band_splits: (usize, usize),
    ) -> Result<Self, FeatureError> {
        check_bins(&power, &freqs)?;
        let (n1, n2) = band_splits;
        if !(1 <= n1 && n1 < n2 && n2 < power.len()) {
            return Err(FeatureError::InvalidSpectrum(format!(
                "band splits ({n1}, {n2}) invalid for {} bins",
                power.len()
            )));
        }
        Ok(Self {
            power,
            freqs,
            band_splits,
        })
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn without_dc(&self) -> Result<Self, FeatureError> {
        Self::new(self.power[1..].to_vec(), self.freqs[1..].to_vec())
    }

    fn bands(&self) -> [std::ops::Range<usize>; 3] {
        let (n1, n2) = self.band_splits;
        [0..n1, n1..n2, n2..self.len()]
    }
}

pub fn periodogram(x: &[f64], sample_rate_hz: f64) -> Result<Periodogram, FeatureError> {
    if x.len() < 4 {
        return Err(FeatureError::Length {
            needed: 4,
            got: x.len(),
        });
    }
    let n = x.len();
    let nf = n as f64;
    let spec = dft(x);
    let power = spec[..one_sided_bins(n)]
        .iter()
        .map(|c| c.norm_sqr() / nf)
        .collect();
    Periodogram::new(power, bin_freqs(n, sample_rate_hz))
}

/// Shape statistics shared by the spectrum and the periodogram.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShapeFeatures {
    pub std: f64,
    pub centroid: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub crest: f64,
    pub irregularity_k: f64,
    pub irregularity_j: f64,
}

impl ShapeFeatures {
    pub fn to_array(self) -> [f64; 7] {
        [
            self.std,
            self.centroid,
            self.skewness,
            self.kurtosis,
            self.crest,
            self.irregularity_k,
            self.irregularity_j,
        ]
    }
}

/// Computes the seven shape features. `moment_center` is the value
/// subtracted inside the kurtosis sum and used as the crest denominator;
/// normally it is the centroid of the same bins.
fn shape(mags: &[f64], freqs: &[f64], moment_center: Option<f64>) -> ShapeFeatures {
    let total: f64 = mags.iter().sum();
    if total == 0.0 {
        return ShapeFeatures::default();
    }
    let centroid = mags.iter().zip(freqs).map(|(m, f)| f * m).sum::<f64>() / total;
    let std = (mags.iter().zip(freqs).map(|(m, f)| f * f * m).sum::<f64>() / total).sqrt();
    let center = moment_center.unwrap_or(centroid);
    let peak = mags.iter().copied().fold(0.0, f64::max);

    // std is zero only when all mass sits at 0 Hz; moments and crest are
    // then undefined and reported as 0.
    let (skewness, kurtosis) = if std > 0.0 {
        (
            mags.iter().map(|m| (m - centroid).powi(3)).sum::<f64>() / std.powi(3),
            mags.iter().map(|m| (m - center).powi(4)).sum::<f64>() / std.powi(4) - 3.0,
        )
    } else {
        (0.0, 0.0)
    };
    let crest = if center != 0.0 { peak / center } else { 0.0 };

    let irregularity_k = mags
        .windows(3)
        .map(|w| (w[1] - (w[0] + w[1] + w[2]) / 3.0).abs())
        .sum();
    let n = mags.len();
    let jump: f64 = mags.windows(2).map(|w| (w[0] - w[1]).powi(2)).sum();
    let energy: f64 = mags[..n - 1].iter().map(|m| m * m).sum();
    let irregularity_j = if energy > 0.0 { jump / energy } else { 0.0 };

    ShapeFeatures {
        std,
        centroid,
        skewness,
        kurtosis,
        crest,
        irregularity_k,
        irregularity_j,
    }
}

/// Spectral std, centroid, skewness, kurtosis, crest and irregularities.
/// An all-zero spectrum yields all zeros.
pub fn spectral_features(s: &Spectrum) -> ShapeFeatures {
    shape(&s.magnitudes, &s.freqs, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PsdFeatures {
    pub shape: ShapeFeatures,
    /// Frequencies (Hz) of the strongest bin in each of the three bands.
    pub top_freqs: [f64; 3],
}

impl PsdFeatures {
    pub fn to_array(self) -> [f64; 10] {
        let s = self.shape.to_array();
        let t = self.top_freqs;
        [s[0], s[1], s[2], s[3], s[4], s[5], s[6], t[0], t[1], t[2]]
    }
}

/// Periodogram shape features plus the per-band peak frequencies.
pub fn psd_features(p: &Periodogram) -> PsdFeatures {
    psd(p, None)
}

/// Variant with kurtosis and crest centred on the *spectral* centroid
/// instead of the periodogram's own.
pub fn psd_features_literal(p: &Periodogram, spectral_centroid: f64) -> PsdFeatures {
    psd(p, Some(spectral_centroid))
}

fn psd(p: &Periodogram, center: Option<f64>) -> PsdFeatures {
    let shape = shape(&p.power, &p.freqs, center);
    if p.power.iter().all(|&v| v == 0.0) {
        return PsdFeatures {
            shape,
            top_freqs: [0.0; 3],
        };
    }
    let mut top_freqs = [0.0; 3];
    for (slot, band) in top_freqs.iter_mut().zip(p.bands()) {
        // First maximum wins; an all-zero band reports its first bin.
        let mut best = band.start;
        for i in band {
            if p.power[i] > p.power[best] {
                best = i;
            }
        }
        *slot = p.freqs[best];
    }
    PsdFeatures { shape, top_freqs }
}
