//! Command-line surface of the `hashqkd` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hashqkd::verification::QuestionPolicy;

use crate::config::{ExperimentConfig, Kind, Method};
use crate::error::CliError;
use crate::experiments;
use crate::results;

#[derive(Debug, Parser)]
#[command(
    name = "hashqkd",
    version,
    about = "Hashing-verified entanglement key distribution laboratory"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config, or a results file whose echoed config is reused.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write JSON lines here; only the summary goes to stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hashing or direct-testing verification against a source strategy.
    #[command(name = "verify-sim", alias = "verify")]
    VerifySim {
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Extract and compare a raw key after acceptance.
        #[arg(long)]
        key: bool,
        #[arg(long)]
        transcripts: bool,
    },
    /// The classical parity game.
    #[command(name = "game-sim", alias = "game")]
    GameSim {
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        questions: Option<usize>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
    },
    /// Purification and entanglement swapping along a chain.
    #[command(name = "repeater-sim", alias = "repeater")]
    RepeaterSim {
        #[arg(long)]
        segments: Option<usize>,
        #[arg(long)]
        fidelity: Option<f64>,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        depolarizing: Option<f64>,
    },
    /// Beamsplitter attack on a weak-coherent source.
    #[command(name = "attack-analysis", alias = "attack")]
    AttackAnalysis {
        #[arg(long)]
        mu: Option<f64>,
        /// Channel transmittance; repeatable.
        #[arg(long)]
        eta: Vec<f64>,
        #[arg(long)]
        detector_efficiency: Option<f64>,
    },
    /// Singlet-fraction estimation by random-axis sampling.
    Estimate {
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        singlet_fraction: Option<f64>,
        #[arg(long)]
        confidence: Option<f64>,
    },
    /// Label algebra against the amplitude simulator.
    #[command(name = "oracle-check")]
    OracleCheck,
    /// Information bounds on Eve.
    Bounds {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        key_bits: Option<u32>,
        #[arg(long)]
        pairs: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    SingleDigit,
    RandomParity,
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::VerifySim { .. } => Kind::VerifySim,
            Command::GameSim { .. } => Kind::GameSim,
            Command::RepeaterSim { .. } => Kind::RepeaterSim,
            Command::AttackAnalysis { .. } => Kind::AttackAnalysis,
            Command::Estimate { .. } => Kind::Estimate,
            Command::OracleCheck => Kind::OracleCheck,
            Command::Bounds { .. } => Kind::Bounds,
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig) {
        fn set<T>(dst: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *dst = v;
            }
        }
        match self {
            Command::VerifySim {
                pairs,
                rounds,
                method,
                key,
                transcripts,
            } => {
                let p = cfg.verify_sim.get_or_insert_with(Default::default);
                set(&mut p.pairs, pairs);
                set(&mut p.rounds, rounds);
                set(&mut p.method, method);
                p.key |= key;
                p.transcripts |= transcripts;
            }
            Command::GameSim {
                length,
                questions,
                policy,
            } => {
                let p = cfg.game_sim.get_or_insert_with(Default::default);
                set(&mut p.length, length);
                set(&mut p.questions, questions);
                set(
                    &mut p.policy,
                    policy.map(|q| match q {
                        PolicyArg::SingleDigit => QuestionPolicy::SingleDigit,
                        PolicyArg::RandomParity => QuestionPolicy::RandomParity,
                    }),
                );
            }
            Command::RepeaterSim {
                segments,
                fidelity,
                target,
                depolarizing,
            } => {
                let p = cfg.repeater_sim.get_or_insert_with(Default::default);
                if segments.is_some() || fidelity.is_some() {
                    p.fidelities = None;
                }
                set(&mut p.segments, segments);
                set(&mut p.fidelity, fidelity);
                set(&mut p.target, target);
                set(&mut p.depolarizing, depolarizing);
            }
            Command::AttackAnalysis {
                mu,
                eta,
                detector_efficiency,
            } => {
                let p = cfg.attack_analysis.get_or_insert_with(Default::default);
                set(&mut p.mean_photon_number, mu);
                set(&mut p.detector_efficiency, detector_efficiency);
                if !eta.is_empty() {
                    p.transmittances = eta;
                }
            }
            Command::Estimate {
                pairs,
                sample,
                singlet_fraction,
                confidence,
            } => {
                let p = cfg.estimate.get_or_insert_with(Default::default);
                set(&mut p.pairs, pairs);
                set(&mut p.sample, sample);
                set(&mut p.singlet_fraction, singlet_fraction);
                set(&mut p.confidence, confidence);
            }
            Command::OracleCheck => {}
            Command::Bounds { delta, key_bits, pairs } => {
                let p = cfg.bounds.get_or_insert_with(Default::default);
                set(&mut p.delta, delta);
                set(&mut p.key_bits, key_bits);
                set(&mut p.pairs, pairs);
            }
        }
    }
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg = results::load_config(&text)?;
            if cfg.kind != kind {
                return Err(CliError::Usage(format!(
                    "config is for `{}` but the subcommand is `{kind}`",
                    cfg.kind
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(s) = cli.common.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.common.trials {
        cfg.trials = t;
    }
    if let Some(o) = cli.common.output {
        cfg.output = Some(o);
    }
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let outcome = experiments::run(cfg)?;
    let text = results::render(cfg, &outcome);
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            stdout.write_all(results::footer(&outcome).as_bytes()).map_err(io)?;
        }
        None => stdout.write_all(text.as_bytes()).map_err(io)?,
    }
    stdout.flush().map_err(io)
}

/// Runs the binary on `args` (including the program name) and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = build_config(cli).and_then(|cfg| execute(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hashqkd: {e}");
            e.exit_code()
        }
    }
}
