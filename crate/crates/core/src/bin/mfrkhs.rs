use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfrkhs::io::{self, ReproRow, RunConfig};
use mfrkhs::kernels::KernelFamily;
use mfrkhs::model::{self, evaluate_mse, predict_dataset};
use mfrkhs::simgen::{self, parse_zero_set, run_replications, Scenario, ScenarioConfig};
use mfrkhs::Result;

#[derive(Parser)]
#[command(name = "mfrkhs", version, about = "Function-on-function regression with kernel variable selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated dataset with its truth block.
    Simulate {
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Zero set in compact form, e.g. 135 for {1,3,5}.
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        kernel: Option<KernelFamily>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the shifted index formula for the multi-dimensional u_j.
        #[arg(long)]
        reindexed_u: bool,
        /// Run configuration whose `scenario` block supplies defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model to a dataset.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Predict responses for every covariate tuple of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the mean squared prediction error on a dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run every (M, kernel) cell of a simulation table.
    Repro {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        table: u8,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Use 100 replications.
        #[arg(long, conflicts_with = "reps")]
        full: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run configuration supplying fit settings and grid overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => io::load_run_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn base_dir(path: Option<&Path>) -> PathBuf {
    path.and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            scenario,
            m,
            kernel,
            sigma,
            n,
            seed,
            reindexed_u,
            config,
            out,
        } => {
            let mut cfg = load_config(config.as_deref())?.scenario;
            if let Some(s) = scenario {
                cfg.scenario = s;
            }
            if let Some(m) = m {
                cfg.zero_set = parse_zero_set(&m)?;
            }
            if let Some(k) = kernel {
                cfg.kernel_family = k;
            }
            if let Some(s) = sigma {
                cfg.sigma_noise = s;
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.reindexed_u |= reindexed_u;
            let sim = simgen::generate(&cfg)?;
            io::write_dataset(&out, &sim.dataset)
        }
        Command::Fit {
            data,
            config,
            model_out,
            report_out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let dataset = io::load_dataset(&data)?;
            let specs = cfg.kernel.specs(dataset.p())?;
            let op = cfg
                .operator
                .build(dataset.response_grid(), &base_dir(config.as_deref()))?;
            let fitted = model::fit(&dataset, &specs, &op, &cfg.fit)?;
            if !fitted.report.converged {
                eprintln!(
                    "warning: block coordinate descent stopped after {} iterations without converging",
                    fitted.report.iterations
                );
            }
            io::write_model(&model_out, &fitted)?;
            if let Some(r) = report_out {
                io::write_fit_summary(&r, &fitted)?;
            }
            Ok(())
        }
        Command::Predict { model, data, out } => {
            let fitted = io::load_model(&model)?;
            let dataset = io::load_dataset(&data)?;
            let preds = predict_dataset(&fitted, &dataset)?;
            io::write_predictions(&out, &preds)
        }
        Command::Evaluate { model, data } => {
            let fitted = io::load_model(&model)?;
            let dataset = io::load_dataset(&data)?;
            println!("{:.6}", evaluate_mse(&fitted, &dataset)?);
            Ok(())
        }
        Command::Repro {
            table,
            reps,
            full,
            seed,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let reps = if full { 100 } else { reps };
            let (scenario, sigma) = match table {
                1 => (Scenario::OneDim, 0.01),
                2 => (Scenario::OneDim, 0.1),
                3 => (Scenario::MultiDim, 0.01),
                _ => (Scenario::MultiDim, 0.1),
            };
            let mut rows = Vec::new();
            for zero_set in [vec![5], vec![1, 3, 5], vec![1, 3, 4, 5]] {
                for kernel in KernelFamily::ALL {
                    let sc = ScenarioConfig {
                        scenario,
                        sigma_noise: sigma,
                        zero_set: zero_set.clone(),
                        kernel_family: kernel,
                        seed,
                        ..cfg.scenario.clone()
                    };
                    let summary = run_replications(&sc, reps, &cfg.fit)?;
                    for (r, msg) in &summary.failures {
                        eprintln!("replication {r} failed: {msg}");
                    }
                    eprintln!(
                        "M={} kernel={kernel}: counts {:?}, mean MSE {:.6}",
                        simgen::format_zero_set(&zero_set),
                        summary.selection_counts,
                        summary.mean_mse
                    );
                    rows.push(ReproRow {
                        scenario: scenario.to_string(),
                        zero_set: zero_set.clone(),
                        kernel,
                        sigma,
                        selection_counts: summary.selection_counts,
                        mean_mse: summary.mean_mse,
                        reps: summary.reps,
                    });
                }
            }
            io::write_repro_csv(&out, &rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
