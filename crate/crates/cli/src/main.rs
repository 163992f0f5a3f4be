//! `dupchan`: Monte Carlo information-rate estimation for noisy duplication
//! channels, with CSV/SVG output, figure presets, and self-verification.

mod config;
mod output;
mod verify;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use dupchan_core::embed::build_embedded_chain;
use dupchan_core::estimator::{
    aggregate_samples, information_density_sample, DensitySample, EstimateResult,
    EstimatorOptions,
};
use dupchan_core::model::{DurationDistribution, DurationFamily, MarkovSource, NoiseModel};
use dupchan_core::sim::{replicate_seeds, RNG_NAME};

use config::ModelConfig;
use output::{csv_header, csv_row, line_plot_svg, Series};

#[derive(Parser)]
#[command(name = "dupchan", version, about = "Noisy duplication channel toolkit")]
struct Cli {
    /// Worker threads (default: DUPCHAN_THREADS or available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the information rate at a single parameter point.
    Run(RunArgs),
    /// Sweep the duplication probability over a grid.
    Sweep(SweepArgs),
    /// Reproduce a preset figure (all series + SVG + manifest).
    Figure(FigureArgs),
    /// Run the self-check suites; exit 0 iff all pass.
    Verify,
    /// Empirical AEP convergence diagnostic over a grid of block lengths.
    Aep(AepArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Config file (`key = value` lines); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source: `ber-half` or `matrix-file:<path>`.
    #[arg(long)]
    source: Option<String>,
    /// Duration family.
    #[arg(long, value_enum)]
    dup: Option<DupFamily>,
    /// Duplication probability.
    #[arg(long)]
    pd: Option<f64>,
    /// Truncation point for the geometric family.
    #[arg(long)]
    kmax: Option<usize>,
    /// Noise model (only `bsc`).
    #[arg(long)]
    noise: Option<String>,
    /// BSC crossover probability.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DupFamily {
    Bernoulli,
    Geometric,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ModelConfig::from_file(path).map_err(Failure::config)?,
            None => ModelConfig::default(),
        };
        if let Some(src) = &self.source {
            cfg.source_spec = config::parse_source(src).map_err(Failure::config)?;
        }
        if let Some(noise) = &self.noise {
            if noise != "bsc" {
                return Err(Failure::Config(format!("unknown noise model `{noise}`")));
            }
        }
        match self.dup {
            Some(DupFamily::Bernoulli) => cfg.family = DurationFamily::Bernoulli,
            Some(DupFamily::Geometric) => {
                cfg.family = DurationFamily::Geometric {
                    k_max: self.kmax.unwrap_or(15),
                }
            }
            None => {
                if let (DurationFamily::Geometric { .. }, Some(k)) = (&cfg.family, self.kmax) {
                    cfg.family = DurationFamily::Geometric { k_max: k };
                }
            }
        }
        if let Some(pd) = self.pd {
            cfg.pd = pd;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        Ok(cfg)
    }
}

#[derive(Args, Clone)]
struct EstimateArgs {
    /// Block length (channel uses).
    #[arg(long, default_value_t = 100_000)]
    m: usize,
    /// Master seed; replicate seeds derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Report the analytic source entropy rate instead of the sampled one.
    #[arg(long)]
    analytic_source: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    est: EstimateArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    est: EstimateArgs,
    #[arg(long, default_value_t = 0.0)]
    pd_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pd_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pd_step: f64,
    /// Also emit a line plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    which: Figure,
    /// Full mode: m = 1e6 (default quick mode uses m = 1e5).
    #[arg(long)]
    full: bool,
    #[arg(long, default_value = "figures")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
}

#[derive(Args)]
struct AepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated strictly increasing block lengths.
    #[arg(long, default_value = "100,1000,10000")]
    m_grid: String,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure::Config(e.to_string())
    }
    fn numeric(e: impl std::fmt::Display) -> Self {
        Failure::Numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("DUPCHAN_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0); // 0 = rayon default (available parallelism)
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("dupchan: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Verify => return cmd_verify(),
        Command::Aep(args) => cmd_aep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("dupchan: config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("dupchan: numeric error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Replicates in parallel; aggregation in replicate order keeps the result
/// bit-identical across thread counts.
fn estimate_parallel(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
    master_seed: u64,
    replicates: usize,
    analytic_source: bool,
) -> Result<EstimateResult, Failure> {
    if replicates == 0 {
        return Err(Failure::Config("replicates must be >= 1".into()));
    }
    let start = Instant::now();
    let chain = build_embedded_chain(source, duration, noise).map_err(Failure::config)?;
    let opts = EstimatorOptions::default();
    let seeds = replicate_seeds(master_seed, replicates);
    let samples: Vec<DensitySample> = seeds
        .par_iter()
        .map(|&seed| {
            information_density_sample(
                source,
                duration,
                noise,
                &chain,
                m,
                seed,
                opts.prune_threshold,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(Failure::numeric)?;
    let analytic = if analytic_source {
        Some(source.entropy_rate().map_err(Failure::numeric)?)
    } else {
        None
    };
    let mut result = aggregate_samples(&samples, m, master_seed, analytic);
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

fn write_out(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let cfg = args.model.resolve()?;
    let (source, noise) = cfg.build().map_err(Failure::config)?;
    let duration = cfg.family.build(cfg.pd).map_err(Failure::config)?;
    let r = estimate_parallel(
        &source,
        &duration,
        &noise,
        args.est.m,
        args.est.seed,
        args.est.replicates,
        args.est.analytic_source,
    )?;
    let mut text = csv_header();
    text.push_str(&csv_row(&cfg.family, cfg.p, cfg.pd, &r));
    write_out(args.est.out.as_deref(), &text)
}

fn pd_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if step <= 0.0 || end < start || !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
        return Err(Failure::Config(format!(
            "invalid pd grid: start={start} end={end} step={step}"
        )));
    }
    let n = ((end - start) / step).round() as usize;
    Ok((0..=n)
        .map(|i| (start + i as f64 * step).min(end))
        .collect())
}

fn sweep_rows(
    source: &MarkovSource,
    family: &DurationFamily,
    noise: &NoiseModel,
    grid: &[f64],
    m: usize,
    master_seed: u64,
    replicates: usize,
    analytic_source: bool,
) -> Vec<(f64, Result<EstimateResult, Failure>)> {
    let point_seeds = replicate_seeds(master_seed, grid.len());
    grid.par_iter()
        .zip(point_seeds.par_iter())
        .map(|(&pd, &seed)| {
            let result = family
                .build(pd)
                .map_err(Failure::config)
                .and_then(|duration| {
                    estimate_parallel(
                        source,
                        &duration,
                        noise,
                        m,
                        seed,
                        replicates,
                        analytic_source,
                    )
                });
            (pd, result)
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = args.model.resolve()?;
    let (source, noise) = cfg.build().map_err(Failure::config)?;
    let grid = pd_grid(args.pd_start, args.pd_end, args.pd_step)?;
    let rows = sweep_rows(
        &source,
        &cfg.family,
        &noise,
        &grid,
        args.est.m,
        args.est.seed,
        args.est.replicates,
        args.est.analytic_source,
    );
    let mut text = csv_header();
    let mut points = Vec::new();
    for (pd, row) in &rows {
        match row {
            Ok(r) => {
                text.push_str(&csv_row(&cfg.family, cfg.p, *pd, r));
                points.push((*pd, r.info_rate));
            }
            Err(Failure::Config(msg)) | Err(Failure::Numeric(msg)) => {
                return Err(Failure::Numeric(format!("pd={pd}: {msg}")));
            }
        }
    }
    write_out(args.est.out.as_deref(), &text)?;
    if let Some(svg_path) = &args.svg {
        let series = vec![Series {
            label: format!("p={}", cfg.p),
            points,
        }];
        let svg = line_plot_svg(
            "Information rate",
            "duplication probability",
            "bits per channel use",
            &series,
        );
        write_out(Some(svg_path), &svg)?;
    }
    Ok(())
}

fn cmd_figure(args: FigureArgs) -> Result<(), Failure> {
    let (name, family, pd_end) = match args.which {
        Figure::Fig1 => ("fig1", DurationFamily::Bernoulli, 1.0),
        Figure::Fig2 => ("fig2", DurationFamily::Geometric { k_max: 15 }, 0.6),
    };
    let m = if args.full { 1_000_000 } else { 100_000 };
    let grid = pd_grid(0.0, pd_end, 0.01)?;
    let source = MarkovSource::ber_half();
    let ps = [0.0, 0.01, 0.1];
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", args.out_dir.display())))?;

    let series_seeds = replicate_seeds(args.seed, ps.len());
    let mut manifest = format!(
        "tool = dupchan {}\nrng = {RNG_NAME}\nfigure = {name}\nmode = {}\nm = {m}\nmaster_seed = {}\nfamily = {}\nkmax = {}\n",
        env!("CARGO_PKG_VERSION"),
        if args.full { "full" } else { "quick" },
        args.seed,
        family.name(),
        family.k_max()
    );
    let mut all_series = Vec::new();
    for (si, &p) in ps.iter().enumerate() {
        let noise = NoiseModel::bsc(p).map_err(Failure::config)?;
        let rows = sweep_rows(
            &source,
            &family,
            &noise,
            &grid,
            m,
            series_seeds[si],
            1,
            false,
        );
        let mut text = csv_header();
        let mut points = Vec::new();
        for (pd, row) in &rows {
            let r = match row {
                Ok(r) => r,
                Err(Failure::Config(msg)) | Err(Failure::Numeric(msg)) => {
                    return Err(Failure::Numeric(format!("{name} p={p} pd={pd}: {msg}")))
                }
            };
            text.push_str(&csv_row(&family, p, *pd, r));
            points.push((*pd, r.info_rate));
        }
        let file = args.out_dir.join(format!("{name}_p{p}.csv"));
        write_out(Some(&file), &text)?;
        manifest.push_str(&format!(
            "series p={p}: file = {}, seed = {}\n",
            file.display(),
            series_seeds[si]
        ));
        all_series.push(Series {
            label: format!("p={p}"),
            points,
        });
    }
    let svg = line_plot_svg(
        &format!("Information rate vs duplication probability ({})", family.name()),
        "duplication probability",
        "bits per channel use",
        &all_series,
    );
    write_out(Some(&args.out_dir.join(format!("{name}.svg"))), &svg)?;
    write_out(
        Some(&args.out_dir.join(format!("{name}_manifest.txt"))),
        &manifest,
    )?;
    Ok(())
}

fn cmd_verify() -> ExitCode {
    let results = verify::run_all();
    let mut all_ok = true;
    println!("{:<20} {:<6} detail", "suite", "result");
    for r in &results {
        println!(
            "{:<20} {:<6} {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_aep(args: AepArgs) -> Result<(), Failure> {
    let cfg = args.model.resolve()?;
    let (source, noise) = cfg.build().map_err(Failure::config)?;
    let duration = cfg.family.build(cfg.pd).map_err(Failure::config)?;
    let m_grid: Vec<usize> = args
        .m_grid
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| Failure::Config(format!("bad m_grid entry `{tok}`")))
        })
        .collect::<Result<_, _>>()?;
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::Config("m_grid must be strictly increasing".into()));
    }
    let diag = dupchan_core::estimator::aep_convergence_diagnostic(
        &source,
        &duration,
        &noise,
        &m_grid,
        args.replicates,
        args.seed,
        &EstimatorOptions::default(),
    )
    .map_err(Failure::numeric)?;
    let mut text = format!(
        "# dupchan {} rng={RNG_NAME}\nm,mean_g,std_g,mean_g_joint,std_g_joint,replicates\n",
        env!("CARGO_PKG_VERSION")
    );
    for (i, &m) in diag.m_grid.iter().enumerate() {
        text.push_str(&format!(
            "{m},{:.9},{:.6e},{:.9},{:.6e},{}\n",
            diag.mean_g[i], diag.std_g[i], diag.mean_g_joint[i], diag.std_g_joint[i],
            diag.replicates
        ));
    }
    write_out(args.out.as_deref(), &text)
}
