//! Command-line driver: configuration loading, runs, CSV reports and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use sobolev_core::checks::run_suite;
use sobolev_core::pipeline::{approximate_once, convergence_study, demo_obstruction, PipelineConfig, PipelineReport, ReportRow};
use sobolev_core::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_OBSTRUCTION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sobolev-approx", version, about = "Strong approximation of manifold-valued Sobolev maps on cubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// worker threads (default: all cores)
    #[arg(long, global = true, env = "SOBOLEV_APPROX_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the pipeline at the finest configured scale
    Approx(RunArgs),
    /// One report row per configured scale
    Study(RunArgs),
    /// Seeded property checks
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Force mollify-and-project on an obstructed pair; expects a tube violation
    DemoObstruction(RunArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// overrides the configured seed
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    PipelineConfig::parse(&text)
}

pub fn write_report_to<W: Write>(report: &PipelineReport, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(ReportRow::HEADER).map_err(io)?;
    for row in &report.rows {
        wr.write_record(row.fields()).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_report(report: &PipelineReport, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_report_to(report, f)
}

/// Everything needed to reproduce a run, stored next to the CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub version: String,
    pub seed: u64,
    /// seconds since the Unix epoch
    pub started: f64,
    pub finished: f64,
    pub wall_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "version = {}\nseed = {}\nstarted = {:.3}\nfinished = {:.3}\nwall_seconds = {:.3}\n",
            self.version, self.seed, self.started, self.finished, self.wall_seconds
        );
        for o in &self.outputs {
            s.push_str(&format!("output = {}\n", o.display()));
        }
        s.push_str("[config]\n");
        s.push_str(&self.config.to_text());
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (head, cfg) = text
            .split_once("[config]\n")
            .ok_or_else(|| Error::Config("manifest has no [config] section".into()))?;
        let mut m = RunManifest {
            config: PipelineConfig::parse(cfg)?,
            version: String::new(),
            seed: 0,
            started: 0.0,
            finished: 0.0,
            wall_seconds: 0.0,
            outputs: vec![],
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("manifest value {v:?} is not a number")));
        for line in head.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Config(format!("manifest line {line:?} is not key = value")))?;
            match k {
                "version" => m.version = v.into(),
                "seed" => m.seed = v.parse().map_err(|_| Error::Config(format!("manifest seed {v:?}")))?,
                "started" => m.started = num(v)?,
                "finished" => m.finished = num(v)?,
                "wall_seconds" => m.wall_seconds = num(v)?,
                "output" => m.outputs.push(v.into()),
                _ => return Err(Error::Config(format!("unknown manifest key {k:?}"))),
            }
        }
        Ok(m)
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn run_report(args: &RunArgs, run: impl Fn(&PipelineConfig) -> Result<PipelineReport>) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let started = now();
    let clock = Instant::now();
    let report = run(&cfg)?;
    let wall = clock.elapsed().as_secs_f64();
    match &args.out {
        Some(out) => {
            write_report(&report, out)?;
            let mpath = manifest_path(out);
            let manifest = RunManifest {
                config: cfg.clone(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed: cfg.seed,
                started,
                finished: now(),
                wall_seconds: wall,
                outputs: vec![out.clone(), mpath.clone()],
            };
            std::fs::write(&mpath, manifest.to_text()).map_err(|e| Error::Io(format!("{}: {e}", mpath.display())))?;
        }
        None => write_report_to(&report, std::io::stdout().lock())?,
    }
    for r in report.rows.iter().filter(|r| !r.ok()) {
        eprintln!("scale {}: {}", r.scale, r.status);
    }
    if !report.all_ok() {
        return Err(Error::Numeric { message: "some scales failed".into(), residual: 0.0 });
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs the command; returns the exit status.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return EXIT_CONFIG;
        }
    }
    let result = match &cli.command {
        Command::Approx(a) => run_report(a, approximate_once),
        Command::Study(a) => run_report(a, convergence_study),
        Command::Check { suite, seed } => match run_suite(suite, *seed) {
            Ok(results) => {
                for r in &results {
                    println!("{} {}::{} {}", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.name, r.detail);
                }
                if results.iter().all(|r| r.passed) {
                    Ok(())
                } else {
                    Err(Error::Numeric { message: "property checks failed".into(), residual: 0.0 })
                }
            }
            Err(e) => Err(e),
        },
        Command::DemoObstruction(a) => {
            let outcome = load_config(&a.config).and_then(|mut cfg| {
                if let Some(s) = a.seed {
                    cfg.seed = s;
                }
                demo_obstruction(&cfg)
            });
            return match outcome {
                Err(e @ Error::TubeViolation { .. }) => {
                    eprintln!("obstruction demonstrated: {e}");
                    EXIT_OBSTRUCTION
                }
                Err(e) => {
                    eprintln!("{e}");
                    exit_code(&e)
                }
                Ok(_) => EXIT_NUMERIC,
            };
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}
