use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdvoice::classify::cmd_classify;
use pdvoice::correlate::cmd_correlate;
use pdvoice::extract::cmd_extract;
use pdvoice::regress::cmd_regress;
use pdvoice::synth::cmd_synth;
use pdvoice::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "pdvoice",
    version,
    about = "Voice features for Parkinson's disease assessment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic cohort with known perturbations.
    Synth,
    /// Extract features and write one matrix per scope.
    Extract,
    /// PD versus HC classification with leave-one-out validation.
    Classify,
    /// Clinical score estimation with leave-one-out validation.
    Regress,
    /// Best-correlated feature per clinical scale.
    Correlate,
}

#[derive(Args)]
struct Options {
    /// `key = value` file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    manifest: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated scopes such as `a(s),all(s)`.
    #[arg(long, global = true)]
    scope: Option<String>,
    /// `group` or a clinical scale id.
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    mrmr_k: Option<String>,
    #[arg(long, global = true)]
    sffs_patience: Option<String>,
    #[arg(long, global = true)]
    trees: Option<String>,
    /// `cart` or `forest`.
    #[arg(long, global = true)]
    wrapper: Option<String>,
    #[arg(long, global = true)]
    max_features: Option<String>,
    #[arg(long, global = true)]
    min_rated: Option<String>,
    #[arg(long, global = true)]
    subjects: Option<String>,
    #[arg(long, global = true)]
    pd_fraction: Option<String>,
    #[arg(long, global = true)]
    vowels: Option<String>,
    #[arg(long, global = true)]
    tasks: Option<String>,
    #[arg(long, global = true)]
    secs: Option<String>,
}

impl Options {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        let flags = [
            ("manifest", &self.manifest),
            ("out", &self.out),
            ("scope", &self.scope),
            ("target", &self.target),
            ("seed", &self.seed),
            ("mrmr_k", &self.mrmr_k),
            ("sffs_patience", &self.sffs_patience),
            ("trees", &self.trees),
            ("wrapper", &self.wrapper),
            ("max_features", &self.max_features),
            ("min_rated", &self.min_rated),
            ("subjects", &self.subjects),
            ("pd_fraction", &self.pd_fraction),
            ("vowels", &self.vowels),
            ("tasks", &self.tasks),
            ("secs", &self.secs),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.opts.config()?;
    match cli.command {
        Command::Synth => {
            let s = cmd_synth(&config)?;
            println!(
                "{} subjects, {} recordings, manifest {}",
                s.subjects.len(),
                s.recordings,
                s.manifest.display()
            );
        }
        Command::Extract => {
            let log = cmd_extract(&config)?;
            println!(
                "{}/{} recordings extracted, {} matrices",
                log.extracted,
                log.recordings,
                log.matrices.len()
            );
        }
        Command::Classify => print!("{}", cmd_classify(&config)?.to_csv()),
        Command::Regress => print!("{}", cmd_regress(&config)?.to_csv()),
        Command::Correlate => {
            for p in cmd_correlate(&config)? {
                println!(
                    "{}: {} in {} (rho {:.3}, p {:.2e})",
                    p.panel.scale.id(),
                    p.panel.feature,
                    p.scope,
                    p.panel.rho,
                    p.panel.p
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
