//! Runs the filter on a 6 Hz tone from several starting frequencies, with and
//! without slow drift, and prints how the frequency estimate moves.
//!
//!     cargo run --release --example wflc_tracking

use std::f64::consts::PI;

use tremor_id::wflc::{filter_signal, WflcParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rate = 100.0;
    let hz = |w: f64| w * rate / (2.0 * PI);
    for (label, drift) in [("clean tone", 0.0), ("tone + 0.2 Hz drift", 0.5)] {
        let signal: Vec<f64> = (0..6000)
            .map(|k| {
                let t = k as f64 / rate;
                (2.0 * PI * 6.0 * t).sin() + drift * (2.0 * PI * 0.2 * t).sin()
            })
            .collect();
        println!("{label}");
        for start_hz in [5.5, 6.5, 8.0] {
            let params = WflcParams::default().with_initial_frequency_hz(start_hz, rate);
            let out = filter_signal(&signal, &params)?;
            let path: Vec<String> = out
                .omega0
                .iter()
                .step_by(1500)
                .map(|&w| format!("{:.2}", hz(w)))
                .collect();
            let tail = &out.residual[out.len() / 2..];
            let rms = (tail.iter().map(|r| r * r).sum::<f64>() / tail.len() as f64).sqrt();
            println!(
                "  start {start_hz:.1} Hz: {} -> {:.2} Hz, residual rms {rms:.3}",
                path.join(" -> "),
                hz(out.omega0[out.len() - 1])
            );
        }
    }

    let mut csv = Vec::new();
    filter_signal(&[0.3, 0.7, 1.0, 1.2, 1.3], &WflcParams::default())?.write_csv(&mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}
