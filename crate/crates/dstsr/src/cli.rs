//! Command-line interface.

use crate::config::Config;
use crate::events;
use crate::formats;
use crate::ingest::{self, Schema};
use crate::svg;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dstsr_core::dataset::slice;
use dstsr_core::evaluate::{self, MetricKind};
use dstsr_core::forecast;
use dstsr_core::models::{catalog, catalog_model};
use dstsr_core::search::{consolidate, multi_run_with, TrainingSet};
use dstsr_core::{DerivedRecord, ModelSpec};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "dstsr", version, about = "Discover, benchmark and run Dst rate models")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the search or the window sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: config `data.out_dir`, else ".").
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load an OMNI-style CSV, repair gaps and write the derived CSV.
    Ingest {
        input: PathBuf,
        /// Default: <out>/derived.csv.
        output: Option<PathBuf>,
    },
    /// Run the symbolic-regression ensemble over the fit span.
    Discover {
        #[command(flatten)]
        data: DataArg,
        /// Number of independent runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Generations per population.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Score models on random windows of the holdout span.
    Benchmark {
        #[command(flatten)]
        data: DataArg,
        #[command(flatten)]
        models: ModelsArg,
        #[arg(long)]
        horizon: Option<usize>,
        /// Number of random windows.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run models over a 72-hour storm window.
    Storm {
        #[command(flatten)]
        data: DataArg,
        #[command(flatten)]
        models: ModelsArg,
        /// Event name, start timestamp, or START/END.
        #[arg(long)]
        event: String,
    },
    /// Integrate one model from a given start hour.
    Forecast {
        #[command(flatten)]
        data: DataArg,
        #[command(flatten)]
        models: ModelsArg,
        /// Model name within the model set.
        #[arg(long)]
        model: String,
        #[arg(long)]
        start: String,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Write the fixed model catalog.
    Catalog,
}

#[derive(Debug, Args)]
pub struct DataArg {
    /// Derived CSV (default: config `data.derived`).
    pub derived: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelsArg {
    /// `catalog`, a candidates CSV, or comma-separated catalog names.
    #[arg(long, default_value = "catalog")]
    pub models: String,
}

/// Files produced by a command, written together at the end. If any write
/// fails, files already written by this set are removed.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written: Vec<PathBuf> = Vec::new();
        for (path, bytes) in &self.files {
            let res = (|| -> std::io::Result<()> {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                written.push(path.clone());
                std::fs::write(path, bytes)
            })();
            if let Err(e) = res {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
        }
        Ok(written)
    }
}

struct Ctx {
    config: Config,
    seed: Option<u64>,
    out: PathBuf,
}

impl Ctx {
    fn derived(&self, arg: &DataArg) -> Result<Vec<DerivedRecord>> {
        let path = arg
            .derived
            .clone()
            .or_else(|| self.config.data.derived.clone())
            .context("no derived CSV given (argument or config data.derived)")?;
        let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        formats::read_derived(std::io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
    }
}

/// Resolves `--models`.
pub fn load_models(spec: &str) -> Result<Vec<ModelSpec>> {
    if spec.eq_ignore_ascii_case("catalog") {
        return Ok(catalog());
    }
    let path = Path::new(spec);
    if path.is_file() {
        let file = std::fs::File::open(path).with_context(|| format!("opening {spec}"))?;
        let rows = formats::read_candidates(file).with_context(|| format!("reading {spec}"))?;
        if rows.is_empty() {
            bail!("{spec} holds no candidates");
        }
        return Ok(rows.into_iter().map(|r| r.model).collect());
    }
    spec.split(',')
        .map(|name| {
            catalog_model(name.trim()).with_context(|| {
                format!("\"{name}\" is neither a file nor a catalog model (use `dstsr catalog` to list them)")
            })
        })
        .collect()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), formats::FormatError>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3}")
    } else {
        "n/a".into()
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| config.data.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx {
        config,
        seed: cli.seed,
        out,
    };
    match &cli.command {
        Command::Ingest { input, output } => cmd_ingest(&ctx, input, output.as_deref(), stdout),
        Command::Discover {
            data,
            runs,
            iterations,
        } => cmd_discover(&ctx, data, *runs, *iterations, stdout),
        Command::Benchmark {
            data,
            models,
            horizon,
            count,
        } => cmd_benchmark(&ctx, data, &models.models, *horizon, *count, stdout),
        Command::Storm {
            data,
            models,
            event,
        } => cmd_storm(&ctx, data, &models.models, event, stdout),
        Command::Forecast {
            data,
            models,
            model,
            start,
            horizon,
        } => cmd_forecast(&ctx, data, &models.models, model, start, *horizon, stdout),
        Command::Catalog => cmd_catalog(&ctx, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?, stdout)
}

fn cmd_ingest(ctx: &Ctx, input: &Path, output: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let (derived, stats) =
        ingest::ingest(input, &Schema::default()).with_context(|| format!("ingesting {}", input.display()))?;
    let path = output.map_or_else(|| ctx.out.join("derived.csv"), Path::to_path_buf);
    let mut outs = Outputs::default();
    outs.add(path.clone(), csv_bytes(|b| formats::write_derived(b, &derived))?);
    outs.commit()?;
    writeln!(stdout, "{stats}")?;
    writeln!(stdout, "wrote {} rows to {}", derived.len(), path.display())?;
    Ok(())
}

fn cmd_discover(
    ctx: &Ctx,
    data: &DataArg,
    runs: Option<usize>,
    iterations: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let series = ctx.derived(data)?;
    let fit = ctx.config.fit_span()?;
    let train = TrainingSet::from_records(slice(&series, fit));
    if train.is_empty() {
        bail!("fit span {fit} holds no usable rows");
    }
    let mut cfg = ctx.config.search_config()?;
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    if let Some(i) = iterations {
        cfg.iterations = i;
    }
    let n_runs = runs.unwrap_or(ctx.config.search.n_runs);
    log::info!(
        "discover: {} rows, {n_runs} runs x {} populations x {} generations",
        train.len(),
        cfg.population_count,
        cfg.iterations
    );
    let ensemble = multi_run_with(&cfg, n_runs, &ctx.config.ranges(), &train)?;
    let ranked = consolidate(&ensemble);
    let path = ctx.out.join("candidates.csv");
    let mut outs = Outputs::default();
    outs.add(path.clone(), csv_bytes(|b| formats::write_candidates(b, &ranked))?);
    outs.commit()?;
    writeln!(stdout, "{} candidates from {n_runs} runs on {} rows", ranked.len(), train.len())?;
    for c in ranked.iter().take(10) {
        writeln!(
            stdout,
            "{:>4}  c={:<3} loss={:<12.6} {}",
            c.rank,
            c.candidate.complexity,
            c.candidate.loss,
            c.candidate.expr.to_string_rounded(4)
        )?;
    }
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_benchmark(
    ctx: &Ctx,
    data: &DataArg,
    models: &str,
    horizon: Option<usize>,
    count: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let series = ctx.derived(data)?;
    let models = load_models(models)?;
    let holdout = ctx.config.holdout_span()?;
    let rows = slice(&series, holdout);
    let horizon = horizon.unwrap_or(ctx.config.benchmark.horizon);
    let count = count.unwrap_or(ctx.config.benchmark.count);
    let seed = ctx.seed.unwrap_or(ctx.config.benchmark.seed);
    let report = evaluate::benchmark(&models, rows, horizon, count, seed)
        .with_context(|| format!("benchmark over holdout span {holdout}"))?;
    if report.windows.is_short() {
        log::warn!(
            "requested {count} windows but only {} are valid",
            report.windows.starts.len()
        );
        writeln!(
            stdout,
            "warning: requested {count} windows, only {} valid; using {}",
            report.windows.available,
            report.windows.starts.len()
        )?;
    }
    let mut outs = Outputs::default();
    let csv_path = ctx.out.join("report.csv");
    outs.add(csv_path.clone(), csv_bytes(|b| formats::write_report(b, &report))?);
    let names: Vec<String> = report.rows.iter().map(|r| r.model.clone()).collect();
    let chart = svg::bar_chart(
        &format!("{horizon} h forecast error over {} windows", report.windows.starts.len()),
        "nT",
        &names,
        &[
            ("mean RMSE", report.rows.iter().map(|r| r.mean_rmse).collect()),
            ("mean MAE", report.rows.iter().map(|r| r.mean_mae).collect()),
        ],
    );
    outs.add(ctx.out.join("report.svg"), chart.into_bytes());
    outs.commit()?;

    writeln!(
        stdout,
        "{:<10} {:>10} {:>10} {:>10} {:>10} {:>6} {:>6}",
        "model", "rmse", "std", "mae", "std", "n", "excl"
    )?;
    for r in &report.rows {
        writeln!(
            stdout,
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>6} {:>6}",
            r.model,
            fmt_num(r.mean_rmse),
            fmt_num(r.std_rmse),
            fmt_num(r.mean_mae),
            fmt_num(r.std_mae),
            r.n_windows,
            r.n_excluded
        )?;
    }
    writeln!(stdout, "top 5 by RMSE: {}", evaluate::rank(&report, MetricKind::Rmse, 5).join(", "))?;
    writeln!(stdout, "top 5 by MAE:  {}", evaluate::rank(&report, MetricKind::Mae, 5).join(", "))?;
    writeln!(stdout, "wrote {}", csv_path.display())?;
    Ok(())
}

fn cmd_storm(ctx: &Ctx, data: &DataArg, models: &str, event: &str, stdout: &mut dyn Write) -> Result<()> {
    let series = ctx.derived(data)?;
    let models = load_models(models)?;
    let event = events::resolve(event, &ctx.config.events()?)?;
    let report = evaluate::storm_eval(&models, &event, &series).with_context(|| format!("storm {}", event.name))?;
    let fit = ctx.config.fit_span()?;
    let sample = if events::in_sample(&event, &fit) {
        "in-sample"
    } else {
        "out-of-sample"
    };

    let stem = format!("storm-{}", file_stem(&event.name));
    let mut outs = Outputs::default();
    let csv_path = ctx.out.join(format!("{stem}.csv"));
    outs.add(csv_path.clone(), csv_bytes(|b| formats::write_storm(b, &report))?);

    let labels: Vec<String> = (0..report.actual.len())
        .map(|k| {
            let (_, m, d, h) = event.window.start.offset(k as i64).to_ymdh();
            format!("{m:02}-{d:02} {h:02}h")
        })
        .collect();
    let mut series_list = vec![svg::Series {
        name: "actual",
        values: &report.actual,
    }];
    series_list.extend(report.results.iter().map(|(f, _)| svg::Series {
        name: &f.model,
        values: &f.predicted,
    }));
    let title = format!("{} ({}, {sample})", event.name, report.class);
    outs.add(
        ctx.out.join(format!("{stem}.svg")),
        svg::line_chart(&title, "Dst (nT)", &labels, &series_list).into_bytes(),
    );

    let names: Vec<String> = report.results.iter().map(|(f, _)| f.model.clone()).collect();
    let rmse: Vec<f64> = report.results.iter().map(|(_, m)| m.map_or(f64::NAN, |m| m.rmse)).collect();
    let mae: Vec<f64> = report.results.iter().map(|(_, m)| m.map_or(f64::NAN, |m| m.mae)).collect();
    let mut metrics_csv = csv::Writer::from_writer(Vec::new());
    metrics_csv.write_record(["model", "rmse", "mae"])?;
    for ((n, r), a) in names.iter().zip(&rmse).zip(&mae) {
        let cell = |x: &f64| if x.is_finite() { formats::fmt_f64(*x) } else { String::new() };
        metrics_csv.write_record([n.clone(), cell(r), cell(a)])?;
    }
    outs.add(ctx.out.join(format!("{stem}-metrics.csv")), metrics_csv.into_inner()?);
    outs.add(
        ctx.out.join(format!("{stem}-errors.svg")),
        svg::bar_chart(&format!("{} errors, 72 h", event.name), "nT", &names, &[("RMSE", rmse), ("MAE", mae)])
            .into_bytes(),
    );
    outs.commit()?;

    writeln!(
        stdout,
        "{}: {} to {}, min Dst {} nT, class {} ({sample})",
        event.name,
        event.window.start,
        event.window.end,
        report.min_dst,
        report.class
    )?;
    if let Some(r) = event.reference.filter(|r| *r != report.class) {
        writeln!(stdout, "note: reference class is {r}")?;
    }
    writeln!(stdout, "{:<10} {:>10} {:>10}", "model", "rmse", "mae")?;
    for (f, m) in &report.results {
        let (r, a) = m.map_or((f64::NAN, f64::NAN), |m| (m.rmse, m.mae));
        let flag = f.invalid_at.map_or(String::new(), |k| format!("  invalid at step {k}"));
        writeln!(stdout, "{:<10} {:>10} {:>10}{flag}", f.model, fmt_num(r), fmt_num(a))?;
    }
    writeln!(stdout, "wrote {}", csv_path.display())?;
    Ok(())
}

fn cmd_forecast(
    ctx: &Ctx,
    data: &DataArg,
    models: &str,
    model: &str,
    start: &str,
    horizon: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let series = ctx.derived(data)?;
    let spec = load_models(models)?
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(model))
        .with_context(|| format!("model \"{model}\" not in the model set"))?;
    let t0 = ingest::parse_timestamp(start).with_context(|| format!("cannot parse start \"{start}\""))?;
    let idx = series
        .binary_search_by(|r| r.time.cmp(&t0))
        .map_err(|_| anyhow::anyhow!("start {t0} is not in the series"))?;
    let horizon = horizon.unwrap_or(ctx.config.benchmark.horizon);
    let f = forecast::forecast_at(&spec, &series, idx, horizon)?;
    let path = ctx.out.join(format!("forecast-{}.csv", file_stem(&spec.name)));
    let mut outs = Outputs::default();
    outs.add(path.clone(), csv_bytes(|b| formats::write_forecast(b, &f))?);
    outs.commit()?;
    if let Some(m) = evaluate::score(&f) {
        writeln!(stdout, "{}: rmse {} mae {}", spec.name, fmt_num(m.rmse), fmt_num(m.mae))?;
    }
    if let Some(k) = f.invalid_at {
        writeln!(stdout, "trajectory became non-finite at step {k}")?;
    }
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_catalog(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let models = catalog();
    let path = ctx.out.join("catalog.csv");
    let mut outs = Outputs::default();
    outs.add(path.clone(), csv_bytes(|b| formats::write_catalog(b, &models))?);
    outs.commit()?;
    for m in &models {
        let c = match (m.reported_complexity, m.computed_complexity()) {
            (Some(r), Some(c)) if r != c => format!("{c} (reported {r})"),
            (_, Some(c)) => c.to_string(),
            _ => "-".into(),
        };
        writeln!(stdout, "{:<7} {:<16} {}", m.name, c, m.text())?;
    }
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}
