//! Weighted-frequency Fourier linear combiner (WFLC).
//!
//! The filter models a quasi-periodic signal as a truncated Fourier series
//! whose fundamental frequency is itself adapted by LMS. Each step:
//!
//! ```text
//! x_k      = [sin(r·φ_k)]_{r=1..M} ++ [cos(r·φ_k)]_{r=1..M}     φ_k = Σ ω₀ consumed so far
//! ε_k      = s_k − wᵀx_k − ω_b
//! ω₀      += 2μ₀ ε_k Σ_r r (w_r x_{M+r} − w_{M+r} x_r)
//! w       += 2μ x_k ε_k
//! ω_b     += 2μ_b ε_k
//! φ       += ω₀ (updated value)
//! ```
//!
//! `wᵀx_k` is reported as the tremor estimate and `ω_b` as the voluntary
//! (bias/drift) estimate; with these definitions `s = tremor + voluntary +
//! residual` holds at every step.
//!
//! [`BiasSign::Literal`] switches to `ε_k = s_k − wᵀx_k + ω_b`. That form is
//! positive feedback on the bias weight and drifts away on DC input; it is
//! kept only for comparison.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("WFLC diverged at step {step}: {quantity} = {value:e} exceeds bound {bound:e}")]
    Divergence {
        step: usize,
        quantity: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("invalid WFLC parameters: {0}")]
    InvalidParams(String),
    #[error("input sample {step} is not finite")]
    NonFiniteInput { step: usize },
    #[error("series too short: {0} samples (need at least 2)")]
    TooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasSign {
    /// `ε = s − wᵀx − ω_b`; the bias weight absorbs DC.
    #[default]
    Subtract,
    /// `ε = s − wᵀx + ω_b`; voluntary is reported as `−ω_b`.
    Literal,
}

/// Gains and initial conditions.
///
/// `Default` is a stable configuration for unit-scale inputs at 100 Hz.
/// [`WflcParams::reference`] holds the published set (μ = 0.3), which is
/// outside the LMS stability region for M = 5 (`2μM = 3 > 2`) and diverges
/// on any non-trivial input; see the tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WflcParams {
    /// Fourier order M.
    pub order: usize,
    /// Frequency adaptation gain μ₀.
    pub frequency_gain: f64,
    /// Amplitude adaptation gain μ.
    pub amplitude_gain: f64,
    /// Bias adaptation gain μ_b.
    pub bias_gain: f64,
    /// Initial frequency weight ω₀, radians per sample.
    pub omega0_init: f64,
    #[serde(default)]
    pub bias_sign: BiasSign,
    /// Any state magnitude above this aborts filtering.
    #[serde(default = "default_divergence_bound")]
    pub divergence_bound: f64,
}

fn default_divergence_bound() -> f64 {
    1e6
}

/// 8 Hz at 100 Hz sampling, in radians per sample.
pub const DEFAULT_OMEGA0: f64 = 2.0 * PI * 8.0 / 100.0;

impl Default for WflcParams {
    fn default() -> Self {
        Self {
            order: 5,
            frequency_gain: 1e-5,
            amplitude_gain: 0.05,
            bias_gain: 2.5e-8,
            omega0_init: DEFAULT_OMEGA0,
            bias_sign: BiasSign::Subtract,
            divergence_bound: default_divergence_bound(),
        }
    }
}

impl WflcParams {
    /// Published gains: M = 5, μ₀ = 1e-5, μ = 0.3, μ_b = 2.5e-8.
    pub fn reference() -> Self {
        Self {
            amplitude_gain: 0.3,
            ..Self::default()
        }
    }

    /// All gains zero: the filter passes its input through as residual.
    pub fn pass_through() -> Self {
        Self {
            frequency_gain: 0.0,
            amplitude_gain: 0.0,
            bias_gain: 0.0,
            ..Self::default()
        }
    }

    pub fn with_initial_frequency_hz(mut self, freq_hz: f64, sample_rate_hz: f64) -> Self {
        self.omega0_init = 2.0 * PI * freq_hz / sample_rate_hz;
        self
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |m: String| Err(FilterError::InvalidParams(m));
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        for (name, g) in [
            ("frequency_gain", self.frequency_gain),
            ("amplitude_gain", self.amplitude_gain),
            ("bias_gain", self.bias_gain),
        ] {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {g}"));
            }
        }
        if !(self.omega0_init > 0.0 && self.omega0_init < PI) {
            return bad(format!(
                "omega0_init must lie in (0, pi) rad/sample, got {}",
                self.omega0_init
            ));
        }
        if !(self.divergence_bound.is_finite() && self.divergence_bound > 0.0) {
            return bad("divergence_bound must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WflcState {
    /// Fourier weights; sine terms first, then cosine terms.
    pub weights: Vec<f64>,
    /// Frequency weight ω₀, radians per sample.
    pub omega0: f64,
    /// Bias weight ω_b.
    pub bias: f64,
    /// Running sum of every ω₀ consumed so far.
    pub phase_accum: f64,
}

impl WflcState {
    pub fn new(params: &WflcParams) -> Self {
        Self {
            weights: vec![0.0; 2 * params.order],
            omega0: params.omega0_init,
            bias: 0.0,
            phase_accum: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.weights.len() / 2
    }
}

/// What one step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub tremor: f64,
    pub voluntary: f64,
    pub residual: f64,
}

/// Sine/cosine reference vector for the current phase.
pub fn reference_vector(phase_accum: f64, order: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * order];
    fill_reference(phase_accum, &mut x);
    x
}

fn fill_reference(phase: f64, x: &mut [f64]) {
    let m = x.len() / 2;
    for r in 1..=m {
        let (s, c) = (r as f64 * phase).sin_cos();
        x[r - 1] = s;
        x[m + r - 1] = c;
    }
}

/// Advances the filter by one sample, mutating `state` in place.
///
/// `step` is only used to label errors.
pub fn wflc_step(
    state: &mut WflcState,
    params: &WflcParams,
    sample: f64,
    step: usize,
) -> Result<StepOutput, FilterError> {
    if !sample.is_finite() {
        return Err(FilterError::NonFiniteInput { step });
    }
    let m = state.order();
    let mut x = vec![0.0; 2 * m];
    fill_reference(state.phase_accum, &mut x);
    step_with_reference(state, params, sample, step, &x)
}

fn step_with_reference(
    state: &mut WflcState,
    params: &WflcParams,
    sample: f64,
    step: usize,
    x: &[f64],
) -> Result<StepOutput, FilterError> {
    let m = state.order();
    let w = &mut state.weights;
    let tremor: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let (residual, voluntary) = match params.bias_sign {
        BiasSign::Subtract => (sample - tremor - state.bias, state.bias),
        BiasSign::Literal => (sample - tremor + state.bias, -state.bias),
    };

    let mut quad = 0.0;
    for r in 1..=m {
        quad += r as f64 * (w[r - 1] * x[m + r - 1] - w[m + r - 1] * x[r - 1]);
    }
    state.omega0 += 2.0 * params.frequency_gain * residual * quad;

    let gain = 2.0 * params.amplitude_gain * residual;
    for (w, x) in w.iter_mut().zip(x) {
        *w += gain * x;
    }
    state.bias += 2.0 * params.bias_gain * residual;
    state.phase_accum += state.omega0;

    let bound = params.divergence_bound;
    let check = |quantity: &'static str, value: f64| {
        if value.is_finite() && value.abs() <= bound {
            Ok(())
        } else {
            Err(FilterError::Divergence {
                step,
                quantity,
                value,
                bound,
            })
        }
    };
    check("omega0", state.omega0)?;
    check("bias", state.bias)?;
    for &wi in state.weights.iter() {
        check("weight", wi)?;
    }
    check("residual", residual)?;
    if !state.phase_accum.is_finite() {
        return Err(FilterError::Divergence {
            step,
            quantity: "phase",
            value: state.phase_accum,
            bound,
        });
    }

    Ok(StepOutput {
        tremor,
        voluntary,
        residual,
    })
}

/// Aligned per-step traces of one filtering run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutput {
    pub input: Vec<f64>,
    pub tremor: Vec<f64>,
    pub voluntary: Vec<f64>,
    pub residual: Vec<f64>,
    /// ω₀ after each step's update.
    pub omega0: Vec<f64>,
}

impl FilterOutput {
    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    /// Writes `k,input,tremor,voluntary,residual,omega0` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "k,input,tremor,voluntary,residual,omega0")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{k},{},{},{},{},{}",
                self.input[k], self.tremor[k], self.voluntary[k], self.residual[k], self.omega0[k]
            )?;
        }
        Ok(())
    }
}

/// Runs the filter over a whole series starting from zero weights.
pub fn filter_signal(series: &[f64], params: &WflcParams) -> Result<FilterOutput, FilterError> {
    params.validate()?;
    if series.len() < 2 {
        return Err(FilterError::TooShort(series.len()));
    }
    let n = series.len();
    let mut out = FilterOutput {
        input: series.to_vec(),
        tremor: Vec::with_capacity(n),
        voluntary: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        omega0: Vec::with_capacity(n),
    };
    let mut state = WflcState::new(params);
    let mut x = vec![0.0; 2 * params.order];
    for (k, &s) in series.iter().enumerate() {
        if !s.is_finite() {
            return Err(FilterError::NonFiniteInput { step: k });
        }
        fill_reference(state.phase_accum, &mut x);
        let step = step_with_reference(&mut state, params, s, k, &x)?;
        out.tremor.push(step.tremor);
        out.voluntary.push(step.voluntary);
        out.residual.push(step.residual);
        out.omega0.push(state.omega0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_vector_at_zero_phase() {
        assert_eq!(reference_vector(0.0, 2), vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn reference_vector_quarter_period() {
        let x = reference_vector(PI / 2.0, 1);
        assert!(close(x[0], 1.0, 1e-12) && close(x[1], 0.0, 1e-12));
    }

    #[test]
    fn reference_vector_sixth_period() {
        let x = reference_vector(PI / 6.0, 2);
        let h = 3f64.sqrt() / 2.0;
        for (got, want) in x.iter().zip([0.5, h, h, 0.5]) {
            assert!(close(*got, want, 1e-12), "{x:?}");
        }
    }

    #[test]
    fn zero_input_only_advances_phase() {
        let p = WflcParams::default();
        let mut st = WflcState::new(&p);
        let out = wflc_step(&mut st, &p, 0.0, 0).unwrap();
        assert_eq!(out.residual, 0.0);
        assert!(st.weights.iter().all(|&w| w == 0.0));
        assert_eq!(st.bias, 0.0);
        assert_eq!(st.omega0, p.omega0_init);
        assert_eq!(st.phase_accum, p.omega0_init);
    }

    #[test]
    fn one_step_with_unit_input() {
        // Hand evaluation: at zero state ε = 1, the frequency term vanishes
        // (w = 0), w ← 2μ·x₀ and ω_b ← 2μ_b.
        let p = WflcParams::reference();
        let mut st = WflcState::new(&p);
        let x0 = reference_vector(0.0, p.order);
        let out = wflc_step(&mut st, &p, 1.0, 0).unwrap();
        assert_eq!(out.residual, 1.0);
        assert_eq!(out.tremor, 0.0);
        assert_eq!(out.voluntary, 0.0);
        assert_eq!(st.bias, 2.0 * 2.5e-8);
        for (w, x) in st.weights.iter().zip(&x0) {
            assert_eq!(*w, 2.0 * 0.3 * x);
        }
        assert_eq!(st.omega0, p.omega0_init);
    }

    #[test]
    fn phase_accum_replays_omega_trace() {
        let p = WflcParams {
            frequency_gain: 1e-3,
            ..WflcParams::default()
        };
        let s: Vec<f64> = (0..500).map(|k| (0.45 * k as f64).sin()).collect();
        let mut st = WflcState::new(&p);
        let mut sum = 0.0;
        for (k, &v) in s.iter().enumerate() {
            wflc_step(&mut st, &p, v, k).unwrap();
            sum += st.omega0;
        }
        assert!(close(st.phase_accum, sum, 1e-9 * sum.abs()));
    }

    #[test]
    fn constant_input_is_absorbed_by_bias() {
        let p = WflcParams {
            bias_gain: 1e-3,
            ..WflcParams::default()
        };
        let c = 0.7;
        let mut st = WflcState::new(&p);
        let mut last = StepOutput {
            tremor: 0.0,
            voluntary: 0.0,
            residual: 0.0,
        };
        for k in 0..1_000_000 {
            last = wflc_step(&mut st, &p, c, k).unwrap();
        }
        assert!(close(last.voluntary, c, 1e-2), "{last:?}");
        assert!(close(last.tremor, 0.0, 1e-2), "{last:?}");
    }

    #[test]
    fn literal_bias_sign_runs_away_on_dc() {
        // With ω₀ held fixed the positive-feedback bias loop blows up.
        let p = WflcParams {
            bias_gain: 1e-3,
            frequency_gain: 0.0,
            bias_sign: BiasSign::Literal,
            ..WflcParams::default()
        };
        let series = vec![1.0; 200_000];
        assert!(matches!(
            filter_signal(&series, &p),
            Err(FilterError::Divergence { .. })
        ));
        // With ω₀ adapting it instead collapses the frequency towards 0 and
        // never recovers the DC level as its voluntary component.
        let p = WflcParams {
            frequency_gain: 1e-5,
            ..p
        };
        let out = filter_signal(&series, &p).unwrap();
        assert!(out.omega0.last().unwrap().abs() < 1e-6);
        assert!((out.voluntary.last().unwrap() - 1.0).abs() > 1.0);
    }

    #[test]
    fn reference_gains_diverge_on_a_tone() {
        let s: Vec<f64> = (0..3000)
            .map(|k| (2.0 * PI * 8.0 * k as f64 / 100.0).sin())
            .collect();
        match filter_signal(&s, &WflcParams::reference()) {
            Err(FilterError::Divergence { step, .. }) => assert!(step < 1000),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn all_zero_series() {
        let out = filter_signal(&[0.0; 64], &WflcParams::default()).unwrap();
        assert!(out.tremor.iter().all(|&v| v == 0.0));
        assert!(out.voluntary.iter().all(|&v| v == 0.0));
        assert!(out.residual.iter().all(|&v| v == 0.0));
        assert!(out.omega0.iter().all(|&v| v == DEFAULT_OMEGA0));
    }

    #[test]
    fn rejects_bad_params_and_input() {
        let p = WflcParams {
            order: 0,
            ..WflcParams::default()
        };
        assert!(matches!(
            filter_signal(&[0.0; 4], &p),
            Err(FilterError::InvalidParams(_))
        ));
        let p = WflcParams {
            omega0_init: 4.0,
            ..WflcParams::default()
        };
        assert!(matches!(
            filter_signal(&[0.0; 4], &p),
            Err(FilterError::InvalidParams(_))
        ));
        assert_eq!(
            filter_signal(&[0.0], &WflcParams::default()),
            Err(FilterError::TooShort(1))
        );
        assert_eq!(
            filter_signal(&[0.0, f64::NAN], &WflcParams::default()),
            Err(FilterError::NonFiniteInput { step: 1 })
        );
    }

    #[test]
    fn csv_export_has_one_row_per_step() {
        let out = filter_signal(&[0.1, 0.2, 0.3], &WflcParams::default()).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,input,tremor,voluntary,residual,omega0");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.1,0,0,0.1,"));
    }
}
