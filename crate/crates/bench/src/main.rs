use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use geodesic_bench::BenchError;
use geodesic_bench::checks::{CheckConfig, run_checks};
use geodesic_bench::experiments::{
    BtConfig, CategoricalKlConfig, MixtureConfig, ViConfig, run_bradley_terry, run_categorical_kl, run_mixture_mle,
    run_vi_mlr,
};
use geodesic_bench::io::{read_bt_csv, read_dataset_csv, read_mixture_json, write_dataset_csv};
use geodesic_bench::table::{Format, ResultTable};
use geodesic_core::datagen::{GenConfig, generate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    CategoricalKl,
    MixtureMle,
    BradleyTerry,
    ViMlr,
    Checks,
    /// Write a synthetic classification dataset as CSV.
    Generate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Small,
    Large,
}

/// Seeded experiments on dual-geodesic descent.
#[derive(Debug, Parser)]
#[command(name = "geodesic-bench", version)]
struct Cli {
    experiment: Experiment,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials (categorical-kl, vi-mlr) or instances (bradley-terry large).
    #[arg(long)]
    trials: Option<usize>,
    /// Step sizes, comma separated. For mixture-mle these are multiples of 1/N.
    #[arg(long, value_delimiter = ',')]
    lr: Option<Vec<f64>>,
    /// Prior precisions for vi-mlr, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Monte-Carlo samples for vi-mlr.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// bradley-terry instance size.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Input data: wins CSV (bradley-terry small), component JSON
    /// (mixture-mle) or dataset CSV (vi-mlr).
    #[arg(long)]
    data: Option<PathBuf>,
    /// `N,M,D` for vi-mlr and generate.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    triple: Option<Vec<usize>>,
}

fn config_error(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

fn open(path: &Path) -> Result<BufReader<File>, BenchError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| config_error(format!("cannot open {}: {e}", path.display())))
}

/// Input files are part of the configuration, so any failure reading them is
/// a configuration error.
fn as_config<T>(path: &Path, r: Result<T, BenchError>) -> Result<T, BenchError> {
    r.map_err(|e| match e {
        BenchError::Config(m) => BenchError::Config(m),
        other => config_error(format!("{}: {other}", path.display())),
    })
}

fn reject(cli: &Cli, allowed: &[&str]) -> Result<(), BenchError> {
    let given = [
        ("--trials", cli.trials.is_some()),
        ("--lr", cli.lr.is_some()),
        ("--lambda", cli.lambda.is_some()),
        ("--K", cli.k.is_some()),
        ("--epsilon", cli.epsilon.is_some()),
        ("--mode", cli.mode.is_some()),
        ("--data", cli.data.is_some()),
        ("--triple", cli.triple.is_some()),
    ];
    for (flag, set) in given {
        if set && !allowed.contains(&flag) {
            return Err(config_error(format!("{flag} does not apply to this experiment")));
        }
    }
    Ok(())
}

fn triple(cli: &Cli) -> Result<Option<(usize, usize, usize)>, BenchError> {
    match cli.triple.as_deref() {
        None => Ok(None),
        Some(&[n, m, d]) => Ok(Some((n, m, d))),
        Some(_) => Err(config_error("--triple takes exactly three values N,M,D")),
    }
}

fn emit(cli: &Cli, write: impl FnOnce(&mut dyn Write) -> Result<(), BenchError>) -> Result<(), BenchError> {
    match &cli.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| config_error(format!("cannot create {}: {e}", path.display())))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_table(cli: &Cli, table: &ResultTable) -> Result<(), BenchError> {
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Md => Format::Markdown,
    };
    emit(cli, |out| table.write(out, format))
}

fn run(cli: &Cli) -> Result<ExitCode, BenchError> {
    let table = match cli.experiment {
        Experiment::CategoricalKl => {
            reject(cli, &["--trials", "--lr", "--epsilon"])?;
            let mut cfg = CategoricalKlConfig::default();
            if let Some(lr) = &cli.lr {
                match lr.as_slice() {
                    [t] => cfg.step_size = *t,
                    _ => return Err(config_error("categorical-kl takes a single --lr")),
                }
            }
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            cfg.trials = cli.trials.unwrap_or(cfg.trials);
            cfg.epsilon = cli.epsilon.unwrap_or(cfg.epsilon);
            run_categorical_kl(&cfg)?.table()
        }
        Experiment::MixtureMle => {
            reject(cli, &["--lr", "--epsilon", "--data"])?;
            let mut cfg = MixtureConfig::default();
            if let Some(path) = &cli.data {
                cfg.components = as_config(path, read_mixture_json(open(path)?))?;
                let k = cfg.components.components.len();
                if cfg.cases.iter().any(|c| c.len() != k) {
                    // the default cases assume four components
                    cfg.cases = vec![vec![1000 / k; k]];
                }
            }
            if let Some(lr) = &cli.lr {
                cfg.lr_multipliers = lr.clone();
                cfg.expgrad_extra_multipliers.clear();
            }
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            cfg.epsilon = cli.epsilon.unwrap_or(cfg.epsilon);
            run_mixture_mle(&cfg)?.table()
        }
        Experiment::BradleyTerry => {
            reject(cli, &["--trials", "--lr", "--epsilon", "--mode", "--data"])?;
            let mut cfg = match cli.mode.unwrap_or(Mode::Small) {
                Mode::Small => BtConfig::small(),
                Mode::Large => BtConfig::large(),
            };
            if let Some(path) = &cli.data {
                cfg.data = Some(as_config(path, read_bt_csv(open(path)?))?);
            }
            if let Some(trials) = cli.trials {
                if cli.mode != Some(Mode::Large) {
                    return Err(config_error("--trials applies to --mode large only"));
                }
                cfg.instances = trials;
            }
            cfg.lrs = cli.lr.clone().unwrap_or(cfg.lrs);
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            cfg.epsilon = cli.epsilon.unwrap_or(cfg.epsilon);
            run_bradley_terry(&cfg)?.table()
        }
        Experiment::ViMlr => {
            reject(cli, &["--trials", "--lr", "--lambda", "--K", "--data", "--triple"])?;
            let mut cfg = ViConfig::default();
            if let Some(path) = &cli.data {
                if cli.triple.is_some() {
                    return Err(config_error("--data and --triple are mutually exclusive"));
                }
                cfg.dataset = Some(as_config(path, read_dataset_csv(open(path)?))?);
            }
            cfg.triple = triple(cli)?.unwrap_or(cfg.triple);
            cfg.lrs = cli.lr.clone().unwrap_or(cfg.lrs);
            cfg.lambdas = cli.lambda.clone().unwrap_or(cfg.lambdas);
            cfg.mc_samples = cli.k.unwrap_or(cfg.mc_samples);
            cfg.trials = cli.trials.unwrap_or(cfg.trials);
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            run_vi_mlr(&cfg)?.table()
        }
        Experiment::Checks => {
            reject(cli, &[])?;
            let cfg = CheckConfig {
                seed: cli.seed.unwrap_or(0),
                ..CheckConfig::default()
            };
            let report = run_checks(&cfg);
            emit(cli, |out| Ok(writeln!(out, "{report}")?))?;
            return Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Experiment::Generate => {
            reject(cli, &["--triple"])?;
            let (n, m, d) = triple(cli)?.unwrap_or((200, 5, 3));
            let cfg = GenConfig::new(n, m, d, cli.seed.unwrap_or(0));
            cfg.validate().map_err(|e| config_error(e.to_string()))?;
            let data = generate(&cfg)?.dataset;
            emit(cli, |out| write_dataset_csv(out, &data))?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    emit_table(cli, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        // downstream reader closed early, e.g. `| head`
        Err(BenchError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geodesic-bench: {e}");
            match e {
                BenchError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
