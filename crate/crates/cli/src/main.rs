//! Command-line front end: run the domain-of-attraction test on data
//! files, generate seeded samples, sweep experiment grids, and export
//! bridge paths and standardized-statistic histograms as CSV.
//!
//! Exit codes: 0 = success (for `test`: the Gaussian-domain hypothesis
//! is not rejected), 2 = `test` rejected the hypothesis, 1 = any error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use datest::dist::{self, DistributionSpec, RngStream};
use datest::hypotest::{n_exceeds_sqrt_m, run_test, TestConfig};
use datest::montecarlo::{
    run_experiment, standardized_histogram, write_histogram_csv, write_report_csv, CellSpec,
    ExperimentSpec, Hypothesis,
};
use datest::statistic::build_bridge_path;

/// Largest per-sample size runnable without `--full-scale`.
const DESK_SCALE_MAX_M: usize = 1_000_000;

const SEED_ENV_VAR: &str = "DATEST_SEED";

#[derive(Parser)]
#[command(
    name = "datest",
    version,
    about = "Test whether sampled data lies in the Gaussian domain of attraction",
    after_help = "Distributions use a mini-language `kind:param[:param...]`:\n\
                  \n  standard-normal\
                  \n  gaussian-power:R          |G|^-R with G ~ N(0,1)\
                  \n  alpha-stable:A[:B[:C:L]]  stable index A, skew B, scale C, location L\
                  \n  weak-dependent:R          1-dependent chain on gaussian-power draws\
                  \n  file:PATH                 newline-delimited reals\
                  \n\nWhen --seed is omitted, the DATEST_SEED environment variable is\n\
                  consulted before falling back to 0."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the test on a data file (exit 2 when the hypothesis is rejected).
    Test {
        /// Newline-delimited reals; `#` comments allowed.
        file: PathBuf,
        /// Number of blocks.
        #[arg(long)]
        n: usize,
        /// Two-sided significance level.
        #[arg(long, default_value_t = 0.05)]
        q: f64,
    },
    /// Draw a seeded sample and write it one value per line.
    Simulate {
        /// Distribution mini-language, e.g. `alpha-stable:1.2:0:1:0`.
        #[arg(long)]
        dist: String,
        /// Sample size (the weak-dependent chain emits m-1 values).
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Stream index within the seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a (m, n, q) grid and write the rejection-rate report CSV.
    Experiment {
        /// JSON experiment spec; replaces the inline grid flags.
        #[arg(long, conflicts_with_all = ["dist", "m", "n", "q", "scenarios", "seed", "label"])]
        spec_file: Option<PathBuf>,
        #[arg(long)]
        dist: Option<String>,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        /// Comma-separated block counts.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Comma-separated significance levels.
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long)]
        scenarios: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Hypothesis tag echoed into the report: h0, h1 or unknown.
        #[arg(long)]
        label: Option<String>,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to all cores); results are identical
        /// for any worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Allow sample sizes beyond 1e6.
        #[arg(long)]
        full_scale: bool,
    },
    /// Export the pinned partial-sum path of a sample as `t,z` CSV.
    Path {
        /// Data file; alternatively generate with --dist and --m.
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        dist: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: usize,
        /// Scale divisor for the exported values (default sqrt(m)); it
        /// cancels in the statistic and only affects plot scale.
        #[arg(long)]
        normalizer: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of the standardized statistic across seeded scenarios.
    Hist {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        scenarios: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("{SEED_ENV_VAR}={text:?} is not a valid seed")),
        Err(_) => Ok(0),
    }
}

/// Open `--out` or fall back to stdout.
fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Test { file, n, q } => {
            let config = TestConfig::new(n, q)?;
            let sample = dist::read_sample_file(&file)?;
            if n_exceeds_sqrt_m(n, sample.len()) {
                eprintln!(
                    "warning: n = {n} exceeds sqrt(m) = {:.0}; with so many blocks the \
                     asymptotics degrade and rejections become unreliable",
                    (sample.len() as f64).sqrt()
                );
            }
            let result = run_test(&sample, &config)?;
            println!("{}", result.to_json_line());
            if result.reject {
                eprintln!(
                    "reject: the sampled variable is outside the Gaussian domain of \
                     attraction, so its second moment is infinite"
                );
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }

        Command::Simulate {
            dist,
            m,
            seed,
            stream,
            out,
        } => {
            let spec: DistributionSpec = dist.parse()?;
            let seed = resolve_seed(seed)?;
            let sample = spec.sample(RngStream::new(seed, stream), m)?;
            let mut w = writer(&out)?;
            dist::write_sample(&mut w, sample.values())?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Experiment {
            spec_file,
            dist,
            m,
            n,
            q,
            scenarios,
            seed,
            label,
            out,
            workers,
            full_scale,
        } => {
            let spec = match spec_file {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    ExperimentSpec::from_json(&text)?
                }
                None => {
                    let Some(dist) = dist else {
                        bail!("provide either --spec-file or --dist with --m, --n and --q");
                    };
                    if m.is_empty() || n.is_empty() || q.is_empty() {
                        bail!("--m, --n and --q must each list at least one value");
                    }
                    let hypothesis_label = match label.as_deref() {
                        None | Some("unknown") => Hypothesis::Unknown,
                        Some("h0") => Hypothesis::H0,
                        Some("h1") => Hypothesis::H1,
                        Some(other) => bail!("--label must be h0, h1 or unknown, got {other:?}"),
                    };
                    ExperimentSpec {
                        distribution: dist.parse()?,
                        m_values: m,
                        n_values: n,
                        q_values: q,
                        scenarios: scenarios.unwrap_or(2000),
                        master_seed: resolve_seed(seed)?,
                        hypothesis_label,
                    }
                }
            };
            spec.validate()?;
            if !full_scale {
                if let Some(&m) = spec.m_values.iter().find(|&&m| m > DESK_SCALE_MAX_M) {
                    bail!(
                        "m = {m} exceeds the desk-scale limit of {DESK_SCALE_MAX_M}; \
                         pass --full-scale to run it anyway"
                    );
                }
            }
            let cells = match workers {
                Some(w) if w > 0 => rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .context("cannot build worker pool")?
                    .install(|| run_experiment(&spec)),
                _ => run_experiment(&spec),
            }?;
            let mut w = writer(&out)?;
            write_report_csv(&spec.distribution, &cells, &mut w)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Path {
            file,
            dist,
            m,
            n,
            normalizer,
            seed,
            stream,
            out,
        } => {
            let sample = match (file, dist) {
                (Some(path), None) => dist::read_sample_file(&path)?,
                (None, Some(text)) => {
                    let spec: DistributionSpec = text.parse()?;
                    let Some(m) = m else {
                        bail!("--m is required when generating with --dist");
                    };
                    spec.sample(RngStream::new(resolve_seed(seed)?, stream), m)?
                }
                _ => bail!("provide a data file or --dist (with --m), not both"),
            };
            let normalizer = normalizer.unwrap_or_else(|| (sample.len() as f64).sqrt());
            let path = build_bridge_path(&sample, n, normalizer)?;
            let mut w = writer(&out)?;
            path.write_csv(&mut w)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Hist {
            dist,
            m,
            n,
            scenarios,
            seed,
            bins,
            out,
        } => {
            let cell = CellSpec {
                distribution: dist.parse()?,
                m,
                n,
                scenarios,
                master_seed: resolve_seed(seed)?,
            };
            let hist = standardized_histogram(&cell, bins)?;
            let mut w = writer(&out)?;
            write_histogram_csv(&hist, &mut w)?;
            w.flush()?;
            if out.is_some() {
                println!("ks_distance_vs_standard_normal={}", hist.ks_distance);
            } else {
                eprintln!("ks_distance_vs_standard_normal={}", hist.ks_distance);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too and must stay exit 0; real
            // usage errors map to 1 (2 is reserved for rejection).
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// stdout closed mid-stream (e.g. piped into `head`) is not an error.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        let io = match cause.downcast_ref::<datest::Error>() {
            Some(datest::Error::Io(io)) => Some(io),
            _ => cause.downcast_ref::<std::io::Error>(),
        };
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
