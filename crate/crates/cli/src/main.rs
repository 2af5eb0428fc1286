mod config;
mod output;
mod stats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};
use rayon::prelude::*;

use uhv_core::hypervolume::{indicators, ObjectiveMatrix};
use uhv_core::metrics::{
    front_curve, optimal_hv_on_curve, parse_points, sampled_front_dp, FrontSource, ReferenceFront,
};
use uhv_core::optimizers::{run, Gamma0Policy, GradientMode, OptimizerKind, TraceSampling};
use uhv_core::problems::{default_dim, Quadratic, QuadraticKind};
use uhv_core::Objectives;

use config::{parse_reference, parse_vary, CliError, RunConfig};
use output::{num, Outcome};

const OUTPUT_DIR_ENV: &str = "UHV_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "uhv",
    version,
    about = "Uncrowded hypervolume gradient ascent experiments"
)]
struct Cli {
    /// Worker threads for repetitions and sweeps (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded repetitions of one configuration.
    Run(RunArgs),
    /// Run the cross-product of one or more varied parameters.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `name=v1,v2,...`; repeat to vary several parameters.
        #[arg(long, required = true)]
        vary: Vec<String>,
    },
    /// Print HV, UD, UHV and |A_p| of a set of objective vectors.
    Indicator {
        /// Two columns per line (whitespace or comma separated); `#` starts a comment.
        file: PathBuf,
        #[arg(long = "ref", value_parser = parse_reference, default_value = "11,11")]
        reference: Objectives,
    },
    /// Derive target hypervolumes for the quadratic problems with a known front.
    Targets {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,5,9,17,33,65,129")]
        p: Vec<usize>,
        #[arg(
            long,
            default_value = "bisphere,sphere-rot-ellipsoid,concave-bisphere",
            value_delimiter = ','
        )]
        problems: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a reference front by pooling the final sets of several long runs.
    Front {
        #[command(flatten)]
        run: RunArgs,
        /// Maximum number of points kept.
        #[arg(long, default_value_t = 5000)]
        keep: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Log,
    Every,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    /// Decision-space dimension (default: 24 for WFG, 10 otherwise).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    optimizer: OptimizerKind,
    #[arg(long)]
    gradients: GradientMode,
    /// MO-evaluations per repetition, initialization included.
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// `paper` or `explicit:<value>`.
    #[arg(long, default_value = "paper")]
    gamma0: Gamma0Policy,
    #[arg(long = "ref", value_parser = parse_reference, default_value = "11,11")]
    reference: Objectives,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "uhv-output")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "log")]
    sampling: Sampling,
    /// Target HV for ΔHV (default: shipped table, when it has an entry).
    #[arg(long)]
    target_hv: Option<f64>,
    /// Skip generational distance.
    #[arg(long)]
    no_gd: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            problem: self.problem.clone(),
            n: self.n.unwrap_or_else(|| default_dim(&self.problem)),
            p: self.p,
            optimizer: self.optimizer,
            gradients: self.gradients,
            budget: self.budget,
            reference: self.reference,
            gamma0: self.gamma0,
            seed: self.seed,
            reps: self.reps,
            out_dir: self.out_dir.clone(),
            sampling: match self.sampling {
                Sampling::Log => TraceSampling::Logarithmic,
                Sampling::Every => TraceSampling::Every,
            },
            target_hv: self.target_hv,
            gd: !self.no_gd,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args.config()),
        Command::Sweep { run, vary } => cmd_sweep(&run.config(), &vary),
        Command::Indicator { file, reference } => cmd_indicator(&file, reference),
        Command::Targets {
            n,
            p,
            problems,
            out,
        } => cmd_targets(n, &p, &problems, out.as_deref()),
        Command::Front { run, keep, out } => cmd_front(&run.config(), keep, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct Cell {
    label: String,
    config: RunConfig,
}

fn cmd_run(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    let cells = vec![Cell {
        label: "run".into(),
        config: config.clone(),
    }];
    let summary = config
        .out_dir
        .join(format!("{}.summary.csv", config.tag(config.seed)));
    execute(config, &cells, &summary)
}

fn cmd_sweep(base: &RunConfig, vary: &[String]) -> Result<(), CliError> {
    let axes = vary
        .iter()
        .map(|v| parse_vary(v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = vec![Cell {
        label: String::new(),
        config: base.clone(),
    }];
    for (name, values) in &axes {
        let mut next = Vec::new();
        for cell in &cells {
            for value in values {
                let mut config = cell.config.clone();
                config.set(name, value)?;
                let sep = if cell.label.is_empty() { "" } else { ";" };
                next.push(Cell {
                    label: format!("{}{sep}{name}={value}", cell.label),
                    config,
                });
            }
        }
        cells = next;
    }
    for cell in &cells {
        cell.config
            .validate()
            .map_err(|e| CliError::Usage(format!("{}: {e}", cell.label)))?;
    }
    let names: Vec<&str> = axes.iter().map(|(n, _)| n.as_str()).collect();
    let summary = base.out_dir.join(format!(
        "sweep_{}_{}.summary.csv",
        names.join("-"),
        base.tag(base.seed)
    ));
    execute(base, &cells, &summary)
}

fn execute(base: &RunConfig, cells: &[Cell], summary_path: &Path) -> Result<(), CliError> {
    struct Job<'a> {
        cell: &'a Cell,
        rep: usize,
        seed: u64,
        front: Option<Arc<ReferenceFront>>,
    }
    let mut jobs = Vec::new();
    for cell in cells {
        let front = cell.config.reference_front()?;
        for rep in 0..cell.config.reps {
            jobs.push(Job {
                cell,
                rep,
                seed: cell.config.seed + rep as u64,
                front: front.clone(),
            });
        }
    }

    let outcomes: Vec<Outcome> = jobs
        .into_par_iter()
        .map(|job| {
            let c = &job.cell.config;
            let tag = c.tag(job.seed);
            let trace_file = format!("{tag}.trace.csv");
            let result = c
                .problem()
                .map_err(|e| e.to_string())
                .and_then(|problem| {
                    run(problem.as_ref(), &c.spec(job.seed, job.front.clone()))
                        .map_err(|e| e.to_string())
                })
                .and_then(|trace| {
                    let target_source = c.target_hv().map_or("none", |t| t.1);
                    let header = output::preamble(
                        "trace",
                        &c.echo(),
                        &[
                            ("rep_seed", job.seed.to_string()),
                            ("gamma0", num(trace.gamma0)),
                            (
                                "target_hv",
                                c.target_hv().map(|t| num(t.0)).unwrap_or_default(),
                            ),
                            ("target_source", target_source.to_string()),
                            (
                                "gd_front",
                                job.front
                                    .as_ref()
                                    .map(|f| {
                                        format!("{} ({} points)", f.source().as_str(), f.len())
                                    })
                                    .unwrap_or_else(|| "none".into()),
                            ),
                            ("stop", trace.stop.to_string()),
                        ],
                    );
                    output::write(
                        &c.out_dir.join(&trace_file),
                        &output::trace_csv(&header, &trace),
                    )
                    .and_then(|_| {
                        output::write(
                            &c.out_dir.join(format!("{tag}.best.csv")),
                            &output::best_set_csv(&header, &trace),
                        )
                    })
                    .map_err(|e| format!("writing {trace_file}: {e}"))?;
                    info!(
                        "{tag}: HV {} after {} evaluations",
                        trace.best_hv.hv, trace.evaluations
                    );
                    Ok(trace)
                });
            if let Err(e) = &result {
                error!("{tag}: {e}");
            }
            Outcome {
                cell: job.cell.label.clone(),
                rep: job.rep,
                seed: job.seed,
                trace_file,
                result,
            }
        })
        .collect();

    let header = output::preamble("summary", &base.echo(), &[]);
    let summary = output::summary_csv(&header, &outcomes);
    output::write(summary_path, &summary)
        .map_err(|e| CliError::Failed(format!("writing {}: {e}", summary_path.display())))?;
    print!(
        "{}",
        summary
            .lines()
            .filter(|l| l.starts_with("# stats"))
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );
    println!("summary: {}", summary_path.display());

    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        return Err(CliError::Failed(format!(
            "{failed} of {} repetitions failed",
            outcomes.len()
        )));
    }
    Ok(())
}

fn cmd_indicator(file: &Path, reference: Objectives) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    let points =
        parse_points(&text).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    if points.is_empty() {
        return Err(CliError::Usage(format!("{}: no points", file.display())));
    }
    let y = ObjectiveMatrix::new(points, reference).map_err(|e| CliError::Usage(e.to_string()))?;
    let ind = indicators(&y);
    println!("hv {}", num(ind.hv));
    println!("ud {}", num(ind.ud));
    println!("uhv {}", num(ind.uhv));
    println!("nondominated {}", ind.nondominated);
    Ok(())
}

fn cmd_targets(
    n: usize,
    ps: &[usize],
    problems: &[String],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let r = [11.0, 11.0];
    let mut jobs = Vec::new();
    for id in problems {
        let kind = QuadraticKind::from_id(id)
            .ok_or_else(|| CliError::Usage(format!("no parameterized front for {id:?}")))?;
        for &p in ps {
            jobs.push((kind, p));
        }
    }
    let rows: Vec<Result<String, CliError>> = jobs
        .into_par_iter()
        .map(|(kind, p)| {
            let problem = Quadratic::new(kind, n).map_err(|e| CliError::Usage(e.to_string()))?;
            let curve = front_curve(&problem).map_err(|e| CliError::Usage(e.to_string()))?;
            let (hv, _) = optimal_hv_on_curve(&curve, p, r, 0.0, 200_000)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            // Independent lower bound: the exact optimum over 2001 curve samples.
            let sample: Vec<Objectives> = (0..=2000).map(|i| curve(i as f64 / 2000.0)).collect();
            let front = ReferenceFront::new(sample, FrontSource::Analytic)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            let dp = sampled_front_dp(front.points(), p, r)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            if dp > hv + 1e-12 {
                return Err(CliError::Failed(format!(
                    "{} p={p}: sampled optimum {dp} exceeds curve optimum {hv}",
                    kind.id()
                )));
            }
            info!("{} p={p}: {hv} (sampled lower bound {dp})", kind.id());
            Ok(format!("{}\t{n}\t{p}\t{}\n", kind.id(), num(hv)))
        })
        .collect();
    let mut text = String::from(
        "# Target hypervolumes, r = (11, 11): the best HV of p points on the Pareto front.\n\
         # Derived by cyclic coordinate ascent over the front parameterization (`uhv targets`),\n\
         # checked against the exact optimum over 2001 front samples.\n\
         # problem\tn\tp\ttarget_hv\n",
    );
    for row in rows {
        text.push_str(&row?);
    }
    match out {
        Some(path) => output::write(path, &text)
            .map_err(|e| CliError::Failed(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_front(config: &RunConfig, keep: usize, out: &Path) -> Result<(), CliError> {
    config.validate()?;
    let problem = config.problem()?;
    let seeds: Vec<u64> = (0..config.reps as u64).map(|r| config.seed + r).collect();
    let sets: Vec<Result<Vec<Objectives>, CliError>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut spec = config.spec(seed, None);
            spec.target_hv = None;
            run(problem.as_ref(), &spec)
                .map(|t| t.best_hv.objectives)
                .map_err(|e| CliError::Failed(format!("seed {seed}: {e}")))
        })
        .collect();
    let mut pooled = Vec::new();
    for s in sets {
        pooled.extend(s?);
    }
    let front = ReferenceFront::new(pooled, FrontSource::Sampled)
        .and_then(|f| f.thinned(keep))
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let provenance = vec![
        format!("{} n = {}: pooled best sets of {} runs", config.problem, config.n, config.reps),
        format!(
            "uhv front --problem {} --n {} --p {} --optimizer {} --gradients {} --budget {} --seed {} --reps {} --keep {keep}",
            config.problem, config.n, config.p, config.optimizer, config.gradients, config.budget, config.seed, config.reps
        ),
        format!("{} points", front.len()),
    ];
    output::write(out, &front.to_text(&provenance))
        .map_err(|e| CliError::Failed(format!("{}: {e}", out.display())))
}
