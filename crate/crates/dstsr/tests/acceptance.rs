//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every verdict is printed. Exits
//! non-zero if any criterion fails. Criterion 6 needs real OMNI hourly data
//! in the file named by `DST_OMNI_CSV` and is reported as skipped otherwise.

mod common;

use dstsr::cli::run_from;
use dstsr::ingest::{self, Schema};
use dstsr_core::dataset::{dynamic_pressure, electric_field, magnetic_pressure};
use dstsr_core::evaluate::{metrics, storm_eval, StormReport};
use dstsr_core::expr::{parse, random_expr, ConstantRange, OperatorSet, VarSet};
use dstsr_core::forecast::integrate;
use dstsr_core::models::{catalog, catalog_model, Builtin, CATALOG_EXPRESSIONS, DDM_NAMES};
use dstsr_core::search::{consolidate, multi_run, training_set_from_columns, SearchConfig};
use dstsr_core::{rng, BinaryOp, DerivedRecord, ModelSpec, Timestamp, UnaryOp};
use rand::Rng;
use std::time::Instant;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut mismatches = Vec::new();
    let mut ddm1 = None;
    for (name, text, reported) in CATALOG_EXPRESSIONS {
        let c = parse(text).unwrap().size() as u32;
        if name == "DDM#1" || name == "C19" {
            ddm1 = Some(c);
        } else if c != reported {
            mismatches.push(format!("{name}: {c} vs {reported}"));
        }
    }
    // same equation with the leading coefficient written as neg(0.036)
    let negated = parse("(neg(0.036)*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319")
        .unwrap()
        .size();
    let ddm1 = ddm1.unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let detail = format!(
        "C3..C12 and DDM#2..5 match; DDM#1/C19 compute to {ddm1} with signed constants, {negated} with one explicit negation, reported 19; {elapsed:.3}s"
    );
    if mismatches.is_empty() && (ddm1 == 18 || ddm1 == 19) && negated == 19 && elapsed < 1.0 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; mismatches: {mismatches:?}"))
    }
}

fn criterion_2() -> Verdict {
    let tol = 1e-9;
    let bmr = ModelSpec::builtin(Builtin::Bmr);
    let obm = ModelSpec::builtin(Builtin::Obm);
    let ddm1 = catalog_model("DDM#1").unwrap();
    let pb = magnetic_pressure(10.0);
    let obm_v = obm.rate(-20.0, 1.0, 1.0, 0.0);
    // The listed PB and OBM figures are rounded; check the exact closed
    // forms at 1e-9 and the listed digits at their own precision.
    let checks = [
        ("Ey", electric_field(400.0, -5.0), 2.0, tol),
        ("Pdyn", dynamic_pressure(5.0, 400.0), 1.33808, tol),
        ("PB", pb, 1.0 / (8.0 * std::f64::consts::PI), tol),
        ("PB listed", pb, 0.0397887, 5e-7 / 0.0397887),
        ("BMR", bmr.rate(-20.0, 0.0, 1.0, 0.0), 0.026, tol),
        ("OBM", obm_v, 0.2 / 3.5 - 2.7, tol),
        ("OBM listed", obm_v, -2.64286, 5e-6 / 2.64286),
        ("DDM#1", ddm1.rate(0.0, 0.0, 0.0, 0.0), 0.319, tol),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, got, want, tol)| !rel_close(*got, *want, *tol))
        .map(|(n, got, want, _)| format!("{n}: {got} vs {want}"))
        .collect();
    if failed.is_empty() {
        Verdict::Pass(format!("PB = {pb} = 1/(8 pi), OBM = {obm_v} = 0.2/3.5 - 2.7"))
    } else {
        Verdict::Fail(failed.join("; "))
    }
}

fn constant_drivers(n: usize, ey: f64, pdyn: f64) -> Vec<DerivedRecord> {
    (0..n)
        .map(|i| DerivedRecord {
            time: Timestamp(i as i64),
            ey,
            pdyn,
            pb: 0.0,
            dst: 0.0,
            dst_prev: 0.0,
            ddst_dt: 0.0,
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let c3 = catalog_model("C3").unwrap();
    let f = integrate(&c3, -100.0, &constant_drivers(48, 0.0, 1.0), 48).unwrap();
    let end = f.predicted[48];
    let closed = -100.0 * 0.969f64.powi(48);
    let bmr = ModelSpec::builtin(Builtin::Bmr);
    let g = integrate(&bmr, -100.0, &constant_drivers(72, 0.0, 1.0), 72).unwrap();
    let monotone = g.predicted.windows(2).all(|w| w[1] > w[0] && w[1] <= -19.8);
    let gap = (g.predicted[72] + 19.8).abs();
    let detail = format!("C3 48 h: {end:.4} (closed form {closed:.4}); BMR 72 h: {:.4}, monotone {monotone}", g.predicted[72]);
    if (end + 22.05).abs() <= 0.05 && (end - closed).abs() < 1e-9 && monotone && gap < 0.5 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_4() -> Verdict {
    let mut r = rng::stream(2024);
    let n = 5000;
    let dst: Vec<f64> = (0..n).map(|_| r.random_range(-200.0..=20.0)).collect();
    let ey: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..=10.0)).collect();
    let pdyn: Vec<f64> = (0..n).map(|_| r.random_range(0.5..10.0)).collect();
    let pb: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.3)).collect();
    let y: Vec<f64> = dst.iter().zip(&ey).map(|(d, e)| -0.05 * d - e).collect();
    let train = training_set_from_columns(dst, ey, pdyn, pb, y).unwrap();
    let cfg = SearchConfig {
        iterations: 200,
        seed: 1,
        ..SearchConfig::default()
    };
    let t = Instant::now();
    let ranked = consolidate(&multi_run(&cfg, 4, &train).unwrap());
    let elapsed = t.elapsed().as_secs_f64();
    let Some(top) = ranked.first() else {
        return Verdict::Fail("no candidates".into());
    };
    let c = &top.candidate;
    let detail = format!(
        "top: {} (complexity {}, L1 {:.3e}) in {elapsed:.1}s",
        c.expr.to_string_rounded(6),
        c.complexity,
        c.loss
    );
    if c.loss < 1e-3 && c.complexity <= 7 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_5() -> Verdict {
    let mut r = rng::stream(5);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = r.random_range(1..50);
        let p: Vec<f64> = (0..n).map(|_| r.random_range(-300.0..100.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-300.0..100.0)).collect();
        let m = metrics(&p, &a).unwrap();
        if m.rmse < m.mae {
            violations += 1;
        }
    }
    let m = metrics(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    let detail = format!("rmse < mae in {violations}/1000 pairs; example ({}, {})", m.rmse, m.mae);
    if violations == 0 && (m.rmse - 3.53553).abs() < 1e-5 && (m.mae - 3.5).abs() < 1e-5 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn storm(series: &[DerivedRecord], name: &str) -> Result<StormReport, String> {
    let event = dstsr::events::resolve(name, &[]).map_err(|e| e.to_string())?;
    storm_eval(&catalog(), &event, series).map_err(|e| format!("{name}: {e}"))
}

fn errors(report: &StormReport, model: &str) -> (f64, f64) {
    report
        .results
        .iter()
        .find(|(f, _)| f.model == model)
        .and_then(|(_, m)| *m)
        .map_or((f64::INFINITY, f64::INFINITY), |m| (m.rmse, m.mae))
}

fn criterion_6() -> Verdict {
    let Ok(path) = std::env::var("DST_OMNI_CSV") else {
        return Verdict::Skip("no OMNI hourly data; set DST_OMNI_CSV to an hourly CSV covering 2003-10-29 and 2015-03-17".into());
    };
    let series = match ingest::ingest(std::path::Path::new(&path), &Schema::default()) {
        Ok((s, _)) => s,
        Err(e) => return Verdict::Fail(format!("ingest {path}: {e}")),
    };
    let (spd, hal) = match (storm(&series, "stpatricks-2015"), storm(&series, "halloween-2003")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Verdict::Fail(e),
    };
    let baseline = ["BMR", "OBM"].map(|m| errors(&spd, m));
    let spd_ok = DDM_NAMES.iter().all(|d| {
        let (r, a) = errors(&spd, d);
        baseline.iter().all(|(br, ba)| r < *br && a < *ba)
    });
    let best = hal
        .results
        .iter()
        .filter_map(|(f, m)| m.map(|m| (f.model.clone(), m.mae)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|x| x.0)
        .unwrap_or_default();
    let detail = format!(
        "St. Patrick's min Dst {} ({}), DDMs beat BMR/OBM: {spd_ok}; Halloween lowest MAE: {best}",
        spd.min_dst, spd.class
    );
    // C19 carries the same equation as DDM#1
    if spd_ok && (best == "DDM#1" || best == "C19") {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_7() -> Verdict {
    let ops = OperatorSet {
        unary: UnaryOp::ALL.to_vec(),
        binary: BinaryOp::ALL.to_vec(),
    };
    let mut r = rng::stream(7);
    let mut bad = 0;
    for _ in 0..10_000 {
        let depth = r.random_range(1..=8);
        let e = random_expr(&mut r, depth, VarSet::ALL, &ops, ConstantRange { lo: -1e4, hi: 1e4 }).unwrap();
        if parse(&e.to_string()).ok() != Some(e) {
            bad += 1;
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let raw = common::write(
        dir.path(),
        "raw.csv",
        &common::synthetic_raw_csv(common::ts(2003, 10, 27, 0), 400, 70.0, 11),
    );
    let derived = dir.path().join("derived.csv");
    let p = |p: &std::path::Path| p.to_str().unwrap().to_string();
    run_from(["dstsr", "ingest", &p(&raw), &p(&derived)], &mut std::io::sink()).unwrap();
    let discover = |name: &str, parallel: bool| {
        let cfg = common::write(
            dir.path(),
            &format!("{name}.toml"),
            &format!(
                "[spans]\nfit_start = \"2003-10-27T00:00:00Z\"\nfit_end = \"2003-11-13T00:00:00Z\"\n\
                 [search]\nparallel = {parallel}\n"
            ),
        );
        let out = dir.path().join(name);
        run_from(
            [
                "dstsr", "discover", &p(&derived), "--config", &p(&cfg), "--runs", "4", "--iterations", "25",
                "--seed", "99", "--out", &p(&out),
            ],
            &mut std::io::sink(),
        )
        .unwrap();
        std::fs::read(out.join("candidates.csv")).unwrap()
    };
    let a = discover("a", true);
    let b = discover("b", true);
    let c = discover("c", false);
    let rows = a.iter().filter(|&&b| b == b'\n').count() - 1;
    let detail = format!(
        "{bad}/10000 round-trip failures; candidates CSV ({rows} rows) identical across reruns: {}, parallel vs serial: {}",
        a == b,
        a == c
    );
    if bad == 0 && a == b && a == c && rows > 0 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 complexity reconciliation", criterion_1),
        ("2 formula oracles", criterion_2),
        ("3 integration oracle", criterion_3),
        ("4 planted-equation recovery", criterion_4),
        ("5 metric properties", criterion_5),
        ("6 protocol reproduction", criterion_6),
        ("7 determinism and round-trip", criterion_7),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (tag, detail) = match check() {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {name}: {tag}: {detail}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
