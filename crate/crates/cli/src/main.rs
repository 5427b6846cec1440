use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use share_cli::commands::*;
use share_cli::Settings;

#[derive(Parser)]
#[command(name = "share", version, about = "Homophily-aware social recommendation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Edge and graph homophily of a dataset, with a histogram
    Analyze(Common),
    /// Planted-community dataset for quick experiments
    Generate(Common),
    /// Sub-graphs at the requested homophily levels
    Synth(Common),
    /// Train one model and report test metrics of the best checkpoint
    Train(Common),
    /// Test metrics of a saved checkpoint
    Eval(Common),
    /// SHaRe against each single-component ablation
    Ablate(Common),
    /// Homophily levels x strategies, or zeta/lambda grids
    Sweep(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    interactions: Option<PathBuf>,
    #[arg(long)]
    social: Option<PathBuf>,
    /// `key = value` settings file; flags win over it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Checkpoint for `eval`
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strategy: Option<String>,
    /// Comma list of no-sgr, no-hra, no-sw, cut-only, add-only
    #[arg(long)]
    ablation: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Comma list of homophily levels
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    parallel_cells: Option<usize>,
    /// Worker threads for the numeric kernels
    #[arg(long)]
    threads: Option<usize>,
    /// Extra `key=value` settings, applied after the named flags
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    /// Flag overrides as `key = value` pairs. A comma list for `--zeta` or
    /// `--lambda` becomes a sweep grid.
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("threshold", self.threshold.map(|x| x.to_string()));
        push("bins", self.bins.map(|x| x.to_string()));
        push("seed", self.seed.map(|x| x.to_string()));
        push("strategy", self.strategy.clone());
        push("ablation", self.ablation.clone());
        for (key, grid, v) in [("zeta", "zeta_grid", &self.zeta), ("lambda", "lambda_grid", &self.lambda)] {
            match v {
                Some(v) if v.contains(',') => push(grid, Some(v.clone())),
                other => push(key, other.clone()),
            }
        }
        push("tau", self.tau.map(|x| x.to_string()));
        push("epochs", self.epochs.map(|x| x.to_string()));
        push("batch", self.batch.map(|x| x.to_string()));
        push("dim", self.dim.map(|x| x.to_string()));
        push("layers", self.layers.map(|x| x.to_string()));
        push("targets", self.targets.clone());
        push("repeats", self.repeats.map(|x| x.to_string()));
        push("parallel_cells", self.parallel_cells.map(|x| x.to_string()));
        push("threads", self.threads.map(|x| x.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            o.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(o)
    }

    fn settings(&self) -> Result<Settings> {
        Settings::resolve(self.config.as_deref(), &self.overrides()?)
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("--{flag} is required"))
}

fn run(cli: Cli) -> Result<()> {
    let (Command::Analyze(c)
    | Command::Generate(c)
    | Command::Synth(c)
    | Command::Train(c)
    | Command::Eval(c)
    | Command::Ablate(c)
    | Command::Sweep(c)) = &cli.command;
    let settings = c.settings()?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = c.out.as_path();
    match &cli.command {
        Command::Analyze(_) => {
            let r = cmd_analyze(need(&c.interactions, "interactions")?, need(&c.social, "social")?, &settings, out)?;
            print!("{}", r.to_text());
        }
        Command::Generate(_) => {
            let (ri, si) = cmd_generate(&settings, out)?;
            println!("interactions={}\nsocial={}", ri.display(), si.display());
        }
        Command::Synth(_) => {
            let o = cmd_synth(need(&c.interactions, "interactions")?, c.social.as_deref(), &settings, out)?;
            for r in &o.rows {
                println!("target={} achieved={:.4} users={} edges={}", r.target, r.achieved, r.users, r.edges);
            }
            for (t, e) in &o.failures {
                println!("target={t} unreachable: {e}");
            }
            if o.rows.is_empty() && !o.failures.is_empty() {
                anyhow::bail!("no target could be reached");
            }
        }
        Command::Train(_) => {
            let r = cmd_train(need(&c.interactions, "interactions")?, need(&c.social, "social")?, &settings, out)?;
            print!("{}", r.test.to_text());
            println!("best_epoch={}", r.outcome.best_epoch);
        }
        Command::Eval(_) => {
            let r = cmd_eval(
                need(&c.interactions, "interactions")?,
                need(&c.social, "social")?,
                need(&c.checkpoint, "checkpoint")?,
                &settings,
                out,
            )?;
            print!("{}", r.to_text());
        }
        Command::Ablate(_) => {
            cmd_ablate(need(&c.interactions, "interactions")?, need(&c.social, "social")?, &settings, out)?;
            print!("{}", std::fs::read_to_string(out.join("ablation.txt"))?);
        }
        Command::Sweep(_) => {
            let rows = cmd_sweep(need(&c.interactions, "interactions")?, c.social.as_deref(), &settings, out)?;
            println!("{} runs written to {}", rows.len(), out.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
