//! Parses a recording from CSV text, trims it, converts it to JSON lines and
//! shows how a bad row is reported.
//!
//!     cargo run --example recording_io

use tremor_id::signal_io::{parse_recording, trim_edges, write_recording, Format};

const CSV: &str = "\
# subject=subject01;session=s1;date=2016-01-04;device=phone-a;sensor=accelerometer;rate_hz=100
t_ms,x,y,z
0,0.01,-0.02,9.81
10,0.02,-0.01,9.80
20,0.00,0.00,9.82
30,-0.01,0.01,9.81
40,0.01,0.02,9.79
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rec = parse_recording(CSV.as_bytes(), Format::Csv)?;
    println!(
        "{} samples at {} Hz from {:?}",
        rec.len(),
        rec.sample_rate_hz(),
        rec.meta()
    );

    let trimmed = trim_edges(&rec, 10)?;
    let mut out = Vec::new();
    write_recording(&mut out, &trimmed, Format::Jsonl)?;
    print!("{}", String::from_utf8(out)?);

    let broken = CSV
        .replace("20,0.00", "15,0.00")
        .replace("30,-0.01", "15,-0.01");
    match parse_recording(broken.as_bytes(), Format::Csv) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
