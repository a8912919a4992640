use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tilefetch::analytics::{self, Cdf, REFERENCE_BANDS};
use tilefetch::config::{PlanConfig, SolveConfig, SweepConfig};
use tilefetch::model::DirectionGrid;
use tilefetch::optimizer::{self, RandomInstanceSpec};
use tilefetch::scheduler::run_plan;
use tilefetch::sweep::{run_sweep, write_rows};
use tilefetch::trace::synth::{self, Motion};
use tilefetch::trace::{load_trace_dir, Axis, Category, HeadTrace};
use tilefetch::viewprob;
use tilefetch::{Error, Instance, Result};

#[derive(Parser)]
#[command(
    name = "tilefetch",
    version,
    about = "Tile prefetch optimizer for 360° video"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the selection as JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Trace directory, for empirical probabilities.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a tradeoff sweep and emit one CSV row per grid cell.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Parallel solves (default: config value, else all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a multi-pass prefetch plan and emit its trajectory as CSV.
    Schedule {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        traces: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Compute a head-movement metric over a trace directory.
    Analyze(AnalyzeArgs),
    /// Cross-check the DP against exhaustive search.
    Oracle {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        config: Option<PathBuf>,
        /// Check this many seeded random instances instead of a config.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Write synthetic traces (CSV plus JSON sidecar per user).
    GenTraces(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    AngleCdf,
    Heatmap,
    Pairwise,
    YawChange,
    Velocity,
    Origin,
    PhaseSplit,
    Density,
    Probs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    traces: PathBuf,
    #[arg(long, value_enum)]
    metric: Metric,
    #[arg(long, default_value = "yaw")]
    axis: Axis,
    #[arg(long, default_value_t = 0.2)]
    lag: f64,
    #[arg(long, default_value_t = viewprob::DEFAULT_STRIDE_S)]
    stride: f64,
    #[arg(long, default_value_t = 10.0)]
    yaw_bin: f64,
    #[arg(long, default_value_t = 10.0)]
    pitch_bin: f64,
    #[arg(long, default_value_t = 1.0)]
    time_step: f64,
    #[arg(long, default_value_t = 5.0)]
    threshold: f64,
    #[arg(long, default_value_t = 0.0)]
    safety: f64,
    #[arg(long, default_value_t = 60.0)]
    sector: f64,
    #[arg(long, default_value_t = 20.0)]
    split: f64,
    #[arg(long, default_value_t = 6)]
    tiles: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum MotionKind {
    Uniform,
    Constant,
    Rotation,
    Sinusoid,
    RandomWalk,
    ExploreThenFixate,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    motion: MotionKind,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    #[arg(long, default_value_t = 30.0)]
    rate: f64,
    #[arg(long, default_value = "synthetic")]
    video: String,
    #[arg(long, default_value = "misc")]
    category: Category,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Yaw of `constant` motion.
    #[arg(long, default_value_t = 0.0)]
    yaw: f64,
    /// Angular velocity of `rotation` motion (°/s).
    #[arg(long, default_value_t = 10.0)]
    rate_dps: f64,
    #[arg(long, default_value_t = 45.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 10.0)]
    period: f64,
    /// Velocity noise of the random-walk motions (°/s per √s).
    #[arg(long, default_value_t = 30.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    reversion: f64,
    /// Exploration length of `explore-then-fixate` motion (s).
    #[arg(long, default_value_t = 20.0)]
    explore: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn sink(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| io_error(path, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush().map_err(|e| io_error(Path::new("<output>"), e))
}

fn load_traces(dir: Option<&Path>) -> Result<Option<Vec<HeadTrace>>> {
    dir.map(load_trace_dir).transpose()
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve {
            config,
            traces,
            output,
        } => {
            let (cfg, base) = SolveConfig::load(&config)?;
            let traces = load_traces(traces.as_deref())?;
            let inst = cfg.instance(&base, traces.as_deref())?;
            let report = optimizer::solve_dp(&inst);
            let mut json = serde_json::to_value(&report)?;
            json["total_size"] = inst.total_size(report.levels()).into();
            json["capacity"] = inst.capacity().into();
            let mut w = sink(&output)?;
            serde_json::to_writer_pretty(&mut w, &json)?;
            writeln!(w).map_err(|e| io_error(Path::new("<output>"), e))?;
            finish(w)?;
        }
        Command::Sweep {
            config,
            traces,
            workers,
            output,
        } => {
            let cfg = SweepConfig::load(&config)?;
            let spec = cfg.spec()?;
            let traces = load_traces(traces.as_deref())?;
            let workers = workers
                .or(cfg.sweep.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = run_sweep(&spec, traces.as_deref(), workers)?;
            let w = sink(&output)?;
            write_rows(&rows, w)?;
        }
        Command::Schedule {
            config,
            traces,
            output,
        } => {
            let (cfg, base) = PlanConfig::load(&config)?;
            let traces = load_traces(traces.as_deref())?;
            let (plan, chunk) = cfg.build(&base, traces.as_deref())?;
            let trajectory = run_plan(&plan, &chunk, &cfg.size_model)?;
            let mut w = sink(&output)?;
            let line = |w: &mut Box<dyn Write>, s: String| {
                writeln!(w, "{s}").map_err(|e| io_error(Path::new("<output>"), e))
            };
            line(&mut w, "pass,lead_s,tile,level,value,spent".into())?;
            for o in &trajectory {
                let pass = &plan.passes()[o.pass];
                for (tile, level) in o.state.levels().iter().enumerate() {
                    line(
                        &mut w,
                        format!(
                            "{},{:.6},{tile},{level},{:.6},{}",
                            o.pass, pass.lead_s, o.value, o.spent
                        ),
                    )?;
                }
            }
            finish(w)?;
        }
        Command::Analyze(args) => analyze(&args)?,
        Command::Oracle {
            config,
            random,
            seed,
            output,
        } => {
            let instances: Vec<Instance> = match (config, random) {
                (Some(path), _) => {
                    let (cfg, base) = SolveConfig::load(&path)?;
                    vec![cfg.instance(&base, None)?]
                }
                (None, Some(k)) => {
                    optimizer::random_instances(&RandomInstanceSpec::default(), k, seed)
                }
                (None, None) => unreachable!("clap requires one of --config/--random"),
            };
            let mut results = Vec::with_capacity(instances.len());
            for (i, inst) in instances.iter().enumerate() {
                let dp = optimizer::solve_dp(inst);
                let bf = optimizer::brute_force(inst)?;
                let pass = (dp.value() - bf.value()).abs() <= 1e-9;
                results.push(serde_json::json!({
                    "index": i,
                    "dp_value": dp.value(),
                    "brute_force_value": bf.value(),
                    "dp_levels": dp.levels(),
                    "brute_force_levels": bf.levels(),
                    "pass": pass,
                }));
            }
            let passed = results.iter().filter(|r| r["pass"] == true).count();
            let report = serde_json::json!({
                "instances": results.len(),
                "passed": passed,
                "results": results,
            });
            let mut w = sink(&output)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w).map_err(|e| io_error(Path::new("<output>"), e))?;
            finish(w)?;
            eprintln!("oracle: {passed}/{} equal", instances.len());
            if passed != instances.len() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::GenTraces(args) => gen_traces(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn annotate(metric: &str, measured: impl Fn(&analytics::ReferenceBand) -> Option<f64>) {
    for band in REFERENCE_BANDS.iter().filter(|b| b.metric == metric) {
        match measured(band) {
            Some(m) => eprintln!(
                "reference: {} in {:.0}% of real sessions; here {:.1}%",
                band.description,
                band.fraction * 100.0,
                m * 100.0
            ),
            None => eprintln!(
                "reference: {} in {:.0}% of real sessions",
                band.description,
                band.fraction * 100.0
            ),
        }
    }
}

fn write_cdf_rows(w: &mut Box<dyn Write>, label: &str, cdf: &Cdf) -> Result<()> {
    let mut buf = Vec::new();
    cdf.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("csv output is utf-8");
    for row in text.lines().skip(1) {
        writeln!(w, "{label},{row}").map_err(|e| io_error(Path::new("<output>"), e))?;
    }
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let traces = load_trace_dir(&args.traces)?;
    let mut w = sink(&args.output)?;
    let out_err = |e| io_error(Path::new("<output>"), e);
    match args.metric {
        Metric::AngleCdf => {
            let cdf = analytics::angle_utilization_cdf(&traces, args.axis)?;
            cdf.write_csv(&mut w)?;
            if args.axis == Axis::Roll {
                annotate("angle-cdf", |b| Some(cdf.fraction_within(b.within_deg)));
            }
        }
        Metric::Heatmap => {
            analytics::heatmap(&traces, args.yaw_bin, args.pitch_bin)?.write_csv(&mut w)?
        }
        Metric::Pairwise => {
            let series = analytics::pairwise_angular_difference(&traces, args.time_step)?;
            writeln!(w, "t,value").map_err(out_err)?;
            for (t, d) in series {
                writeln!(w, "{t:.6},{d:.6}").map_err(out_err)?;
            }
        }
        Metric::YawChange => {
            let cdf = analytics::yaw_change_cdf(&traces, args.lag, args.stride)?;
            cdf.write_csv(&mut w)?;
            annotate("yaw-change", |b| {
                (b.lag_s == args.lag).then(|| cdf.fraction_within(b.within_deg))
            });
        }
        Metric::Velocity => {
            let r = analytics::velocity_prediction_error(
                &traces,
                args.lag,
                args.threshold,
                args.safety,
            )?;
            writeln!(
                w,
                "lag_s,threshold_dps,safety_deg,qualifying,total,error_rate"
            )
            .map_err(out_err)?;
            writeln!(
                w,
                "{:.6},{:.6},{:.6},{},{},{:.6}",
                args.lag, args.threshold, args.safety, r.qualifying, r.total, r.error_rate
            )
            .map_err(out_err)?;
            annotate("velocity", |b| {
                (b.lag_s == args.lag).then_some(1.0 - r.error_rate)
            });
        }
        Metric::Origin => {
            let sectors =
                analytics::origin_conditioned_change(&traces, args.lag, args.stride, args.sector)?;
            writeln!(w, "sector_start_deg,value,cumulative_fraction").map_err(out_err)?;
            for s in sectors {
                if let Some(cdf) = &s.cdf {
                    write_cdf_rows(&mut w, &format!("{}", s.start_deg), cdf)?;
                }
            }
        }
        Metric::PhaseSplit => {
            let (early, late) =
                analytics::phase_split_cdf(&traces, args.lag, args.stride, args.split)?;
            writeln!(w, "phase,value,cumulative_fraction").map_err(out_err)?;
            write_cdf_rows(&mut w, "exploration", &early)?;
            write_cdf_rows(&mut w, "steady", &late)?;
            annotate("phase-split", |b| {
                (b.lag_s == args.lag).then(|| late.fraction_within(b.within_deg))
            });
        }
        Metric::Density => {
            let rebased: Vec<HeadTrace> = traces.iter().map(HeadTrace::rebase_yaw).collect();
            viewprob::empirical_yaw_change(&rebased, args.lag, args.stride)?.write_csv(&mut w)?;
        }
        Metric::Probs => {
            let grid = DirectionGrid::new(args.tiles)?;
            let rebased: Vec<HeadTrace> = traces.iter().map(HeadTrace::rebase_yaw).collect();
            viewprob::empirical_probs(&rebased, args.lag, args.stride, &grid)?.write_csv(&mut w)?;
        }
    }
    finish(w)
}

fn gen_traces(args: &GenArgs) -> Result<()> {
    let motion = match args.motion {
        MotionKind::Uniform => Motion::Uniform,
        MotionKind::Constant => Motion::Constant { yaw_deg: args.yaw },
        MotionKind::Rotation => Motion::Rotation {
            rate_dps: args.rate_dps,
        },
        MotionKind::Sinusoid => Motion::Sinusoid {
            amplitude_deg: args.amplitude,
            period_s: args.period,
        },
        MotionKind::RandomWalk => Motion::RandomWalk {
            noise_dps: args.noise,
            reversion: args.reversion,
        },
        MotionKind::ExploreThenFixate => Motion::ExploreThenFixate {
            explore_s: args.explore,
            noise_dps: args.noise,
        },
    };
    let traces = synth::generate_set(
        motion,
        args.count,
        args.duration,
        args.rate,
        &args.video,
        args.category,
        args.seed,
    )?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    for t in &traces {
        let stem = format!("{}_{}", t.meta().video_id, t.meta().user_id);
        t.save(&args.out, &stem)?;
    }
    eprintln!("wrote {} traces to {}", traces.len(), args.out.display());
    Ok(())
}
