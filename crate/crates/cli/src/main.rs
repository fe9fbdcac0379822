//! Experiment driver: loads a space and a function, runs verification
//! pipelines, and persists canonical reports under a content-addressed
//! directory. Exit status: 0 when every check passed, 1 when some check
//! failed, 2 on configuration or usage errors.

mod load;
mod steps;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lochom::io::canonical_json;
use lochom::Result;
use steps::{Ctx, Step};

#[derive(Parser)]
#[command(
    name = "lochom",
    version,
    about = "Verification pipelines for local harmonic analysis on finite weighted point clouds"
)]
struct Cli {
    /// Space: builtin spec (tiny4 | grid1d:N | grid2d:NXxNY | power:N:S |
    /// weighted:N:{linear|step}) or path to a JSON space file.
    #[arg(long, global = true, default_value = "grid1d:256")]
    space: String,

    /// Function: builtin spec (constant[:C] | indicator_halfspace[:AXIS:T] |
    /// log_singularity[:X..] | two_valued[:AXIS:T] | atom_spike[:X..:V] |
    /// random_piecewise:SEED[:PIECES]) or path to a CSV value file.
    #[arg(long, global = true, default_value = "log_singularity")]
    function: String,

    /// Output root; each run writes into a subdirectory named by the hash
    /// of its configuration.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for sampled checks and random ball families.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Worker threads; 0 keeps the library default. Results do not depend
    /// on this setting.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the declared level structure: enlargement containment,
    /// quasi-triangle constants, doubling constants.
    Axioms,
    /// Vitali selection on a seeded ball family plus a finite cube cover of
    /// the level.
    Cover {
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Number of seeded balls in the family.
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Build a dyadic cube forest and verify separation, partition,
    /// nesting, ball sandwiching and restricted doubling.
    Cubes {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Sampling budget for the doubling scan; exhaustive below it.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Also dump the forest as GraphViz DOT.
        #[arg(long, default_value_t = false)]
        dot: bool,
    },
    /// Local maximal function: weak-type scan, strong-type ratio and the
    /// pointwise differentiation bound.
    Maximal {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Pointwise comparison of the dyadic sharp function against the ball
    /// sharp function one level up.
    Sharp {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Stopping-time families over a threshold grid with their average,
    /// nesting, complement and measure-comparison properties.
    Cz {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Lp comparison of the maximal function against the sharp function
    /// plus the root average, with good-lambda constants.
    Fs {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Oscillation seminorms and the p-seminorm equivalence with the
    /// decay-rate proof constant.
    Bmo {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Iterative decomposition of the worst-oscillation ball plus the
    /// exponential decay of the deviation distribution.
    Jn {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Every pipeline in sequence on the configured space and function.
    Suite,
}

impl Command {
    fn pipeline(&self) -> Vec<String> {
        match self {
            Command::Axioms => vec!["axioms".into()],
            Command::Cover { level, count } => vec![format!("cover(level={level},count={count})")],
            Command::Cubes {
                level,
                delta,
                depth,
                budget,
                dot,
            } => vec![format!(
                "cubes(level={level},delta={delta},depth={depth},budget={budget},dot={dot})"
            )],
            Command::Maximal { level, p } => vec![format!("maximal(level={level},p={p})")],
            Command::Sharp { level, delta, depth } => {
                vec![format!("sharp(level={level},delta={delta},depth={depth})")]
            }
            Command::Cz { level, delta, depth } => {
                vec![format!("cz(level={level},delta={delta},depth={depth})")]
            }
            Command::Fs {
                level,
                delta,
                depth,
                p,
            } => vec![format!("fs(level={level},delta={delta},depth={depth},p={p})")],
            Command::Bmo { level, p } => vec![format!("bmo(level={level},p={p})")],
            Command::Jn { level, steps } => vec![format!("jn(level={level},steps={steps})")],
            Command::Suite => vec![
                "axioms".into(),
                "cover(level=1,count=64)".into(),
                "cubes(level=1,delta=0.25,depth=4,budget=100000,dot=false)".into(),
                "maximal(level=1,p=2)".into(),
                "sharp(level=1,delta=0.25,depth=3)".into(),
                "cz(level=1,delta=0.25,depth=5)".into(),
                "fs(level=1,delta=0.25,depth=3,p=2)".into(),
                "bmo(level=1,p=2)".into(),
                "jn(level=1,steps=3)".into(),
            ],
        }
    }
}

#[derive(Serialize)]
struct ExperimentConfig<'a> {
    space: &'a str,
    function: &'a str,
    pipeline: Vec<String>,
    seed: u64,
}

#[derive(Serialize)]
struct StepSummary {
    name: &'static str,
    pass: bool,
    report: String,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    config: &'a ExperimentConfig<'a>,
    config_hash: &'a str,
    pass: bool,
    steps: Vec<StepSummary>,
}

fn run_steps(ctx: &Ctx, command: &Command) -> Result<Vec<Step>> {
    Ok(match command {
        Command::Axioms => vec![steps::run_axioms(ctx)?],
        Command::Cover { level, count } => vec![steps::run_cover(ctx, *level, *count)?],
        Command::Cubes {
            level,
            delta,
            depth,
            budget,
            dot,
        } => vec![steps::run_cubes(ctx, *level, *delta, *depth, *budget, *dot)?],
        Command::Maximal { level, p } => vec![steps::run_maximal(ctx, *level, *p)?],
        Command::Sharp { level, delta, depth } => {
            vec![steps::run_sharp(ctx, *level, *delta, *depth)?]
        }
        Command::Cz { level, delta, depth } => vec![steps::run_cz(ctx, *level, *delta, *depth)?],
        Command::Fs {
            level,
            delta,
            depth,
            p,
        } => vec![steps::run_fs(ctx, *level, *delta, *depth, *p)?],
        Command::Bmo { level, p } => vec![steps::run_bmo(ctx, *level, *p)?],
        Command::Jn { level, steps } => vec![steps::run_jn(ctx, *level, *steps)?],
        Command::Suite => vec![
            steps::run_axioms(ctx)?,
            steps::run_cover(ctx, 1, 64)?,
            steps::run_cubes(ctx, 1, 0.25, 4, 100_000, false)?,
            steps::run_maximal(ctx, 1, 2.0)?,
            steps::run_sharp(ctx, 1, 0.25, 3)?,
            steps::run_cz(ctx, 1, 0.25, 5)?,
            steps::run_fs(ctx, 1, 0.25, 3, 2.0)?,
            steps::run_bmo(ctx, 1, 2.0)?,
            steps::run_jn(ctx, 1, 3)?,
        ],
    })
}

fn write_all(dir: &Path, config_json: &str, hash: &str, config: &ExperimentConfig, steps: &[Step]) -> Result<bool> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), config_json)?;
    let mut summaries = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let prefix = format!("{:02}_{}", i + 1, step.name);
        let report_name = format!("{prefix}.json");
        fs::write(dir.join(&report_name), canonical_json(&step.report)?)?;
        let mut artifact_names = Vec::new();
        for a in &step.artifacts {
            let name = a.file_name(&prefix);
            fs::write(dir.join(&name), a.contents())?;
            artifact_names.push(name);
        }
        summaries.push(StepSummary {
            name: step.name,
            pass: step.pass,
            report: report_name,
            artifacts: artifact_names,
        });
    }
    let pass = summaries.iter().all(|s| s.pass);
    let summary = RunSummary {
        config,
        config_hash: hash,
        pass,
        steps: summaries,
    };
    fs::write(dir.join("summary.json"), canonical_json(&summary)?)?;
    Ok(pass)
}

fn run(cli: &Cli) -> Result<bool> {
    let space = load::load_space(&cli.space)?;
    let f = load::load_function(&space, &cli.function)?;
    let ctx = Ctx {
        space,
        f,
        seed: cli.seed,
    };

    let config = ExperimentConfig {
        space: &cli.space,
        function: &cli.function,
        pipeline: cli.command.pipeline(),
        seed: cli.seed,
    };
    let config_json = canonical_json(&config)?;
    let hash = format!("{:x}", Sha256::digest(config_json.as_bytes()));
    let dir = cli.out.join(&hash[..16]);

    let steps = run_steps(&ctx, &cli.command)?;
    let pass = write_all(&dir, &config_json, &hash[..16], &config, &steps)?;

    for s in &steps {
        eprintln!("{:>8}  {}", s.name, if s.pass { "pass" } else { "FAIL" });
    }
    eprintln!("reports: {}", dir.display());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
