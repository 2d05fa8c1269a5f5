#![allow(dead_code)]

use dstsr_core::models::Builtin;
use dstsr_core::{rng, Timestamp};
use rand::Rng;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const RAW_HEADER: &str = "timestamp,Vsw,Bz_gsm,n_sw,B_mag,T_sw,Dst";

/// Hourly OMNI-style rows with a storm centred `storm_at` hours in. Dst
/// follows the BMR model driven by the generated solar wind, so the file
/// is physically self-consistent. Every 97th Vsw cell holds a fill value.
pub fn synthetic_raw_csv(start: Timestamp, hours: usize, storm_at: f64, seed: u64) -> String {
    let mut r = rng::stream(seed);
    let mut out = String::from(RAW_HEADER);
    out.push('\n');
    let mut dst = -5.0;
    for k in 0..hours {
        let g = (-((k as f64 - storm_at) / 8.0).powi(2)).exp();
        let vsw = 400.0 + 250.0 * g + r.random_range(-20.0..20.0);
        let bz = -1.0 - 18.0 * g + r.random_range(-3.0..3.0);
        let n = 5.0 + 12.0 * g + r.random_range(0.0..2.0);
        let b = (bz * bz + 16.0_f64).sqrt();
        let t = 1.0e5 + r.random_range(0.0..5.0e4);
        let vcell = if k % 97 == 50 { "9999.9".to_string() } else { format!("{vsw:.1}") };
        out.push_str(&format!(
            "{},{vcell},{bz:.2},{n:.2},{b:.2},{t:.0},{:.0}\n",
            start.offset(k as i64),
            dst
        ));
        let ey = -vsw * bz * 1e-3;
        let pdyn = 1.6726e-6 * n * vsw * vsw;
        dst += Builtin::Bmr.rate(dst, ey, pdyn) + r.random_range(-1.0..1.0);
    }
    out
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn dstsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dstsr"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ts(y: i32, m: u32, d: u32, h: u32) -> Timestamp {
    Timestamp::from_ymdh(y, m, d, h).unwrap()
}
