//! Command-line front end: generate channels, run upgrade/degrade
//! reductions, sweep budgets into plot-ready CSV, and run the verification
//! suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse/format error,
//! 3 precondition violation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chanapprox::bounds::{self, BoundKind};
use chanapprox::gen::GeneratorSpec;
use chanapprox::io;
use chanapprox::verify::{self, Caps, Suite};
use chanapprox::{Error, JointDistribution};

#[derive(Parser)]
#[command(
    name = "chanapprox",
    about = "Construct upgraded/degraded channel approximations under an output-alphabet budget",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    Nats,
    Bits,
}

impl Units {
    fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => chanapprox::nats_to_bits(nats),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Upgrade,
    Degrade,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Upgrade => "upgrade",
            Mode::Degrade => "degrade",
        })
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Channel file (JSON) to load.
    #[arg(long, conflicts_with = "gen")]
    channel: Option<PathBuf>,
    /// Generator spec, e.g. hard-grid:3:400, random:2:512:7, noiseless:3.
    #[arg(long)]
    gen: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> Result<JointDistribution, Error> {
        match (&self.channel, &self.gen) {
            (Some(path), None) => Ok(io::read_channel(path)?.0),
            (None, Some(spec)) => GeneratorSpec::parse(spec)?.generate(),
            _ => Err(Error::BadGeneratorSpec(
                "exactly one of --channel or --gen is required".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a channel file from a spec.
    Gen {
        #[arg(long)]
        gen: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Upgrade a channel to at most L output symbols.
    Upgrade {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, value_enum, default_value = "nats")]
        units: Units,
        /// Write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degrade a channel to at most L output symbols.
    Degrade {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, value_enum, default_value = "nats")]
        units: Units,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the quantizer CSV (y,z1,...,z_id) here.
        #[arg(long)]
        quantizer_out: Option<PathBuf>,
    },
    /// Run a budget sweep and write a CSV of (L, delta_I, bound, timing).
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Comma-separated budgets, e.g. 4,9,16,25.
        #[arg(long = "L-list")]
        l_list: String,
        #[arg(long, value_enum, default_value = "nats")]
        units: Units,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for sweep points (requires the parallel build).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a named verification suite (lemma, sphere, claims, bounds, oracle).
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Cap on instance outputs for the oracle suite.
        #[arg(long, default_value_t = 64)]
        max_outputs: usize,
        /// Cap on budgets for the oracle suite.
        #[arg(long, default_value_t = 8)]
        max_budget: usize,
        /// Where to write failing instances for replay.
        #[arg(long)]
        failures_out: Option<PathBuf>,
    },
    /// Evaluate a closed-form bound (binary-up, binary-down, onehot-up,
    /// onehot-down, per-step-up, per-step-down).
    Bound {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        q: usize,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, value_enum, default_value = "nats")]
        units: Units,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. }
        | Error::Json(_)
        | Error::FileFormat(_)
        | Error::BadGeneratorSpec(_)
        | Error::NonStochastic { .. }
        | Error::NegativeEntry { .. }
        | Error::NonFinite { .. } => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen { gen, out } => {
            let joint = GeneratorSpec::parse(&gen)?.generate()?;
            io::write_channel(&out, &joint)?;
            println!(
                "wrote {} (q={}, outputs={})",
                out.display(),
                joint.q(),
                joint.outputs()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Upgrade {
            source,
            l,
            units,
            out,
        } => {
            let joint = source.load()?;
            let result = chanapprox::upgrade(&joint, l)?;
            if let Some(path) = out {
                io::write_json(&path, &io::UpgradeResultFile::from_result(&result))?;
            }
            println!(
                "delta_I={} bound={} L_actual={}",
                units.convert(result.delta_i),
                units.convert(result.bound),
                result.l_actual()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Degrade {
            source,
            l,
            units,
            out,
            quantizer_out,
        } => {
            let joint = source.load()?;
            let result = chanapprox::degrade(&joint, l)?;
            if let Some(path) = out {
                io::write_json(&path, &io::DegradeResultFile::from_result(&result))?;
            }
            if let Some(path) = quantizer_out {
                io::write_text(&path, &result.quantizer_csv())?;
            }
            println!(
                "delta_I={} bound={} L_actual={}",
                units.convert(result.delta_i),
                units.convert(result.bound),
                result.l_actual()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            source,
            mode,
            l_list,
            units,
            out,
            jobs,
        } => {
            configure_jobs(jobs);
            let joint = source.load()?;
            let budgets = parse_budgets(&l_list)?;
            run_sweep(&joint, mode, &budgets, units, &out)
        }
        Command::Verify {
            suite,
            seed,
            max_outputs,
            max_budget,
            failures_out,
        } => {
            let suite = Suite::from_str(&suite)?;
            let caps = Caps {
                max_outputs,
                max_budget,
            };
            let report = verify::run_suite(suite, seed, caps);
            print!("{report}");
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                let path =
                    failures_out.unwrap_or_else(|| PathBuf::from("verify-failures.json"));
                io::write_json(&path, &report.failures)?;
                eprintln!("failing instances written to {}", path.display());
                Ok(ExitCode::from(1))
            }
        }
        Command::Bound { kind, q, l, units } => {
            let kind = BoundKind::from_str(&kind)?;
            let value = bounds::bound(kind, q, l)?;
            println!("bound={}", units.convert(value));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn configure_jobs(jobs: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if jobs.is_some() {
        eprintln!("note: built without the parallel feature; --jobs ignored");
    }
}

fn parse_budgets(list: &str) -> Result<Vec<usize>, Error> {
    let trimmed = list.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::BadGeneratorSpec(format!("bad budget `{tok}`")))
        })
        .collect()
}

struct SweepRow {
    l_design: usize,
    outcome: Result<(usize, f64, f64, u128), Error>,
}

fn run_sweep(
    joint: &JointDistribution,
    mode: Mode,
    budgets: &[usize],
    units: Units,
    out: &std::path::Path,
) -> Result<ExitCode, Error> {
    let mut budgets = budgets.to_vec();
    budgets.sort_unstable();
    let rows: Vec<SweepRow> = chanapprox::par::map_collect(&budgets, |&l| {
        let start = Instant::now();
        let outcome = match mode {
            Mode::Upgrade => chanapprox::upgrade(joint, l)
                .map(|r| (r.l_actual(), r.delta_i, r.bound, start.elapsed().as_millis())),
            Mode::Degrade => chanapprox::degrade(joint, l)
                .map(|r| (r.l_actual(), r.delta_i, r.bound, start.elapsed().as_millis())),
        };
        SweepRow { l_design: l, outcome }
    });

    let mut csv = String::from("L_design,L_actual,delta_I,bound,mode,q,elapsed_ms\n");
    let mut points = Vec::new();
    let mut failed = false;
    for row in &rows {
        match &row.outcome {
            Ok((l_actual, delta, bound, ms)) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.l_design,
                    l_actual,
                    units.convert(*delta),
                    units.convert(*bound),
                    mode,
                    joint.q(),
                    ms
                ));
                points.push((*l_actual as f64, *delta));
            }
            Err(err) => {
                failed = true;
                eprintln!("L={}: {err}", row.l_design);
                csv.push_str(&format!("{},,,,{},{},\n", row.l_design, mode, joint.q()));
            }
        }
    }
    io::write_text(out, &csv)?;
    match bounds::loglog_slope(&points) {
        Some(slope) => println!("slope={slope}"),
        None => println!("slope=nan"),
    }
    if failed {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
