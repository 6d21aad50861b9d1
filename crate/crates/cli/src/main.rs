use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cauchynet_cli::kernel_demo::{convergence_csv, run_kernel_demo, DemoFunction};
use cauchynet_cli::output::write_atomic;
use cauchynet_cli::spec::{resolve_spec, SEED_ENV};
use cauchynet_cli::studies::{write_lambda_ablation, write_sensitivity_grid};
use cauchynet_cli::{presets, run_decompose, runner, CliError, ExperimentSpec, MetricsReport, Result};

#[derive(Parser)]
#[command(name = "cauchynet", version, about = "Train and evaluate CauchyNet experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Named preset (see `list-experiments`).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one field, e.g. `--set train.epochs=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; defaults to `runs/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SpecArgs {
    fn resolve(&self) -> Result<(ExperimentSpec, PathBuf)> {
        let base = match (&self.preset, &self.config) {
            (Some(name), _) => presets::preset_toml(name)?.to_string(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?,
            (None, None) => return Err(CliError::config("one of --preset or --config is required")),
        };
        let seed = std::env::var(SEED_ENV).ok();
        let spec = resolve_spec(&base, seed.as_deref(), &self.overrides)?;
        let out = self.out.clone().unwrap_or_else(|| spec.output_dir());
        Ok((spec, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train CauchyNet (and the baseline, if configured) and write a run directory.
    Train(SpecArgs),
    /// Score a saved checkpoint on the spec's data.
    Evaluate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Train on a masked spec and report errors over the withheld region.
    Impute(SpecArgs),
    /// One training run per imaginary-penalty weight, shared seed.
    AblateLambda {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated weights; defaults to the spec's ablation list.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Snapshot interval in epochs.
        #[arg(long)]
        every: Option<usize>,
    },
    /// Hidden size / data size / learning rate / weight decay grid.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Convergence of the contour quadrature expansion.
    KernelDemo {
        #[arg(long, default_value = "square")]
        function: String,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value = "runs/kernel-demo")]
        out: PathBuf,
    },
    /// Multiplicative seasonal decomposition of one CSV column.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        period: usize,
        #[arg(long, default_value = "runs/decompose")]
        out: PathBuf,
    },
    /// List presets, or print one as TOML.
    ListExperiments {
        #[arg(long)]
        show: Option<String>,
    },
}

fn print_metrics(reports: &[MetricsReport]) {
    println!("{:<14} {:<6} {:>6} {:>14} {:>14}", "model", "split", "n", "mse", "mae");
    for r in reports {
        println!("{:<14} {:<6} {:>6} {:>14.6e} {:>14.6e}", r.model, r.split, r.n, r.mse, r.mae);
    }
}

fn finished(dir: &Path) {
    println!("outputs in {}", dir.display());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let (spec, out) = args.resolve()?;
            let outcome = runner::run_experiment(&spec, &out)?;
            print_metrics(&outcome.metrics);
            finished(&out);
        }
        Command::Impute(args) => {
            let (spec, out) = args.resolve()?;
            if spec.data.mask.is_none() {
                return Err(CliError::config("impute needs a spec with data.mask"));
            }
            let outcome = runner::run_experiment_as(&spec, &out, "impute")?;
            let hidden: Vec<&MetricsReport> = outcome.metrics.iter().filter(|m| m.split == "test").collect();
            println!("errors over the withheld region:");
            print_metrics(&hidden.into_iter().cloned().collect::<Vec<_>>());
            finished(&out);
        }
        Command::Evaluate { spec, checkpoint } => {
            let (spec, out) = spec.resolve()?;
            let reports = runner::evaluate_checkpoint(&spec, &checkpoint, &out)?;
            print_metrics(&reports);
            finished(&out);
        }
        Command::AblateLambda { spec, lambdas, every } => {
            let (spec, out) = spec.resolve()?;
            let ablation = spec.ablation.as_ref();
            let lambdas = lambdas
                .or_else(|| ablation.map(|a| a.lambdas.clone()))
                .ok_or_else(|| CliError::config("no lambdas: pass --lambdas or set ablation.lambdas"))?;
            let every = every.or(ablation.map(|a| a.every)).unwrap_or(1);
            let rows = write_lambda_ablation(&spec, &lambdas, every, &out)?;
            for l in &lambdas {
                if let Some(r) = rows.iter().rev().find(|r| r.lambda == *l) {
                    println!("lambda {l:<6} final test MSE {:.6e}", r.test_mse);
                }
            }
            finished(&out);
        }
        Command::Sweep { spec, threads } => {
            let (spec, out) = spec.resolve()?;
            let rows = write_sensitivity_grid(&spec, &spec.sweep, threads, &out)?;
            let failed = rows.iter().filter(|r| r.test_mse.is_nan()).count();
            println!("{} cells, {failed} failed", rows.len());
            finished(&out);
        }
        Command::KernelDemo { function, a, b, nodes, grid, out } => {
            let f: DemoFunction = function.parse()?;
            let rows = run_kernel_demo(a, b, f, &nodes, grid)?;
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
            write_atomic(&out.join("kernel_convergence.csv"), convergence_csv(&rows).as_bytes())?;
            for r in &rows {
                println!("nodes {:>5}  sup error {:.3e}", r.nodes, r.sup_error);
            }
            finished(&out);
        }
        Command::Decompose { input, column, period, out } => {
            let d = run_decompose(&input, &column, period, &out)?;
            let factors: Vec<String> = d.factors().iter().map(|f| format!("{f:.4}")).collect();
            println!("seasonal factors: {}", factors.join(" "));
            finished(&out);
        }
        Command::ListExperiments { show } => match show {
            Some(name) => print!("{}", presets::preset_toml(&name)?),
            None => {
                for p in presets::PRESETS {
                    println!("{:<14} {}", p.name, p.summary);
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
