use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seqclone::experiment::{
    max_qubits_from_env, parse_config_file, run_to_output, ExperimentConfig, RunError,
};

#[derive(Parser)]
#[command(name = "seqclone", version, about = "Sequential generation of optimal cloner output states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress the cloner-output MPS to smaller bond dimensions.
    Regularize(Settings),
    /// Fit XXZ ancilla–qubit schedules that emit the cloner output.
    Synthesize(Settings),
    /// Print coefficients, bond profile and clone fidelities.
    GmInfo(Settings),
    /// Run an experiment described by a key=value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Settings {
    /// Clone counts, comma separated.
    #[arg(long)]
    clones: Option<String>,
    /// Qubit counts n = 2M-1, comma separated.
    #[arg(long)]
    qubits: Option<String>,
    #[arg(long)]
    bond_caps: Option<String>,
    /// Any of svd, variational, seeded.
    #[arg(long)]
    methods: Option<String>,
    /// on or off.
    #[arg(long)]
    aux: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Input amplitude of |0>, as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Input amplitude of |1>, as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    max_sweeps: Option<String>,
    /// Record wall-clock seconds per row.
    #[arg(long)]
    timing: bool,
    /// Directory for cached target MPS files.
    #[arg(long)]
    mps_cache: Option<String>,
}

impl Settings {
    fn into_pairs(self, experiment: &str) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("experiment".to_string(), experiment.to_string());
        let fields = [
            ("clones", self.clones),
            ("qubits", self.qubits),
            ("bond_caps", self.bond_caps),
            ("methods", self.methods),
            ("aux", self.aux),
            ("restarts", self.restarts),
            ("seed", self.seed),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("output", self.output),
            ("format", self.format),
            ("threads", self.threads),
            ("max_sweeps", self.max_sweeps),
            ("mps_cache", self.mps_cache),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                p.insert(k.to_string(), v);
            }
        }
        if self.timing {
            p.insert("timing".to_string(), "on".to_string());
        }
        p
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (max_qubits, warning) = max_qubits_from_env()?;
    if let Some(w) = warning {
        eprintln!("{w}");
    }
    let pairs = match cli.command {
        Command::Regularize(s) => s.into_pairs("regularize"),
        Command::Synthesize(s) => s.into_pairs("synthesize"),
        Command::GmInfo(s) => s.into_pairs("gm-info"),
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| RunError::Config {
                field: "config".into(),
                message: format!("cannot read {}: {e}", config.display()),
            })?;
            parse_config_file(&text)?
        }
    };
    let cfg = ExperimentConfig::from_pairs(&pairs, max_qubits)?;
    if let Some(text) = run_to_output(&cfg)? {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqclone: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
