use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hawkes_ldp::io::{parse_config, run_task, write_outputs, ConfigError, RunError, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Simulate,
    Loglik,
    Entropy,
    RateFn,
    RareEvent,
    Empirical,
    Lln,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Simulate => Task::Simulate,
            TaskArg::Loglik => Task::Loglik,
            TaskArg::Entropy => Task::Entropy,
            TaskArg::RateFn => Task::RateFn,
            TaskArg::RareEvent => Task::RareEvent,
            TaskArg::Empirical => Task::Empirical,
            TaskArg::Lln => Task::Lln,
        }
    }
}

/// Hawkes process simulation, likelihood ratios and large-deviation estimates.
#[derive(Debug, Parser)]
#[command(name = "hawkes-ldp", version)]
struct Cli {
    /// Task to run; overrides `task` in the config file.
    task: TaskArg,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory for results.jsonl, config.resolved and event files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<String, RunError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Config(ConfigError::Parse(format!("{}: {e}", cli.config.display()))))?;
    let mut cfg = parse_config(&text)?;
    cfg.task = cli.task.into();
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(h) = cli.horizon {
        cfg.sim.horizon = h;
    }
    if let Some(r) = cli.replicas {
        cfg.sim.replicas = r;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = Some(out);
    }
    cfg.validate()?;
    let output = run_task(&cfg)?;
    if let Some(dir) = &cfg.output.dir {
        write_outputs(&cfg, &output, dir)?;
    }
    Ok(hawkes_ldp::io::records_to_jsonl(&output.records))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let print = cli.out.is_none();
    match run(cli) {
        Ok(jsonl) => {
            if print {
                print!("{jsonl}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error code={} exit={}: {msg}", e.code(), e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
