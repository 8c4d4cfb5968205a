//! Experiment configuration files.
//!
//! ```toml
//! kind = "verify-sim"
//! seed = 7
//! trials = 10000
//! output = "runs/flaw.jsonl"
//!
//! [verify-sim]
//! pairs = 30
//! rounds = 10
//! strategy = { kind = "single-flaw", label = "phi+" }
//! ```
//!
//! Only the section named by `kind` may appear; missing sections take their
//! defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hashqkd::security::IntervalMethod;
use hashqkd::verification::QuestionPolicy;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    VerifySim,
    GameSim,
    RepeaterSim,
    AttackAnalysis,
    Estimate,
    OracleCheck,
    Bounds,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::VerifySim => "verify-sim",
            Kind::GameSim => "game-sim",
            Kind::RepeaterSim => "repeater-sim",
            Kind::AttackAnalysis => "attack-analysis",
            Kind::Estimate => "estimate",
            Kind::OracleCheck => "oracle-check",
            Kind::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, rename = "verify-sim", skip_serializing_if = "Option::is_none")]
    pub verify_sim: Option<VerifySim>,
    #[serde(default, rename = "game-sim", skip_serializing_if = "Option::is_none")]
    pub game_sim: Option<GameSim>,
    #[serde(default, rename = "repeater-sim", skip_serializing_if = "Option::is_none")]
    pub repeater_sim: Option<RepeaterSim>,
    #[serde(default, rename = "attack-analysis", skip_serializing_if = "Option::is_none")]
    pub attack_analysis: Option<AttackAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<Estimate>,
    #[serde(default, rename = "oracle-check", skip_serializing_if = "Option::is_none")]
    pub oracle_check: Option<OracleCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

fn default_trials() -> u64 {
    1
}

impl ExperimentConfig {
    /// A config of `kind` with default parameters.
    pub fn new(kind: Kind) -> Self {
        let mut c = Self {
            kind,
            seed: 0,
            trials: default_trials(),
            output: None,
            verify_sim: None,
            game_sim: None,
            repeater_sim: None,
            attack_analysis: None,
            estimate: None,
            oracle_check: None,
            bounds: None,
        };
        c.fill_section();
        c
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut c: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.check_sections()?;
        c.fill_section();
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn present(&self) -> Vec<Kind> {
        let mut v = Vec::new();
        if self.verify_sim.is_some() {
            v.push(Kind::VerifySim);
        }
        if self.game_sim.is_some() {
            v.push(Kind::GameSim);
        }
        if self.repeater_sim.is_some() {
            v.push(Kind::RepeaterSim);
        }
        if self.attack_analysis.is_some() {
            v.push(Kind::AttackAnalysis);
        }
        if self.estimate.is_some() {
            v.push(Kind::Estimate);
        }
        if self.oracle_check.is_some() {
            v.push(Kind::OracleCheck);
        }
        if self.bounds.is_some() {
            v.push(Kind::Bounds);
        }
        v
    }

    fn check_sections(&self) -> Result<(), CliError> {
        if let Some(other) = self.present().into_iter().find(|k| *k != self.kind) {
            return Err(CliError::Config(format!(
                "section [{other}] does not belong to an experiment of kind {}",
                self.kind
            )));
        }
        Ok(())
    }

    fn fill_section(&mut self) {
        match self.kind {
            Kind::VerifySim => {
                self.verify_sim.get_or_insert_with(Default::default);
            }
            Kind::GameSim => {
                self.game_sim.get_or_insert_with(Default::default);
            }
            Kind::RepeaterSim => {
                self.repeater_sim.get_or_insert_with(Default::default);
            }
            Kind::AttackAnalysis => {
                self.attack_analysis.get_or_insert_with(Default::default);
            }
            Kind::Estimate => {
                self.estimate.get_or_insert_with(Default::default);
            }
            Kind::OracleCheck => {
                self.oracle_check.get_or_insert_with(Default::default);
            }
            Kind::Bounds => {
                self.bounds.get_or_insert_with(Default::default);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Hashing verification.
    #[default]
    Hashing,
    /// Measure randomly chosen pairs directly.
    Direct,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Labels,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategyConfig {
    Honest,
    SingleFlaw {
        /// Defaults to the last pair.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<usize>,
        label: String,
    },
    /// Explicit weighted label strings, each `2N` bits.
    BellMixture {
        entries: Vec<MixtureEntry>,
    },
    /// Uniform over all label strings.
    Uniform,
    GeneralPure {
        #[serde(default)]
        ancilla: usize,
    },
    Foreknowledge {
        /// Schedule Eve prepares for; drawn from `schedule_seed` if absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subsets: Option<Vec<String>>,
        #[serde(default)]
        schedule_seed: u64,
        #[serde(default)]
        key_bit: u8,
        /// Alice and Bob use Eve's schedule instead of fresh subsets.
        #[serde(default)]
        revealed: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub labels: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySim {
    pub pairs: usize,
    pub rounds: usize,
    pub method: Method,
    pub engine: Engine,
    pub strategy: StrategyConfig,
    /// Measure the survivors of accepted runs and report key agreement.
    pub key: bool,
    /// Include each run's transcript in its trial record.
    pub transcripts: bool,
}

impl Default for VerifySim {
    fn default() -> Self {
        Self {
            pairs: 30,
            rounds: 10,
            method: Method::Hashing,
            engine: Engine::Labels,
            strategy: StrategyConfig::Honest,
            key: false,
            transcripts: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Commitment {
    AllOnes,
    /// All ones but a single zero at a random position per trial.
    SingleZero,
    /// Uniform over strings other than all ones.
    RandomWrong,
    /// A fixed bit string.
    Fixed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameSim {
    pub length: usize,
    pub questions: usize,
    pub policy: QuestionPolicy,
    pub commitment: Commitment,
}

impl Default for GameSim {
    fn default() -> Self {
        Self {
            length: 60,
            questions: 10,
            policy: QuestionPolicy::RandomParity,
            commitment: Commitment::SingleZero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtqcSection {
    pub epsilon: f64,
    pub epsilon0: f64,
    pub levels: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepeaterSim {
    /// Elementary fidelity of each segment; overrides `segments`/`fidelity`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelities: Option<Vec<f64>>,
    pub segments: usize,
    pub fidelity: f64,
    /// Depolarizing probability applied to every elementary pair before use.
    pub depolarizing: f64,
    pub target: f64,
    /// Fixed per-segment rounds; otherwise the minimal uniform schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<u32>>,
    pub max_rounds: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ftqc: Option<FtqcSection>,
}

impl Default for RepeaterSim {
    fn default() -> Self {
        Self {
            fidelities: None,
            segments: 4,
            fidelity: 0.9,
            depolarizing: 0.0,
            target: 0.95,
            rounds: None,
            max_rounds: 64,
            ftqc: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackAnalysis {
    pub mean_photon_number: f64,
    /// One report per transmittance.
    pub transmittances: Vec<f64>,
    pub detector_efficiency: f64,
}

impl Default for AttackAnalysis {
    fn default() -> Self {
        Self {
            mean_photon_number: 0.1,
            transmittances: vec![1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            detector_efficiency: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Estimate {
    pub pairs: usize,
    pub sample: usize,
    /// Exact fraction of singlets in the generated population.
    pub singlet_fraction: f64,
    /// Label of the other pairs; `werner` cycles through the three triplets.
    pub other: String,
    pub confidence: f64,
    pub interval: IntervalMethod,
}

impl Default for Estimate {
    fn default() -> Self {
        Self {
            pairs: 2000,
            sample: 1000,
            singlet_fraction: 0.5,
            other: "phi+".into(),
            confidence: 0.99,
            interval: IntervalMethod::Normal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleCheck {
    /// Largest pair count for random reduction cases.
    pub max_pairs: usize,
    pub max_ancilla: usize,
    pub tolerance: f64,
}

impl Default for OracleCheck {
    fn default() -> Self {
        Self {
            max_pairs: 3,
            max_ancilla: 4,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bounds {
    pub delta: f64,
    pub key_bits: u32,
    /// Pair count for the typical-subspace bound.
    pub pairs: usize,
    pub atypical_mass: f64,
    /// Given directly, or estimated from `bit_error` and `phase_error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typical_log_dim: Option<f64>,
    pub bit_error: f64,
    pub phase_error: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            delta: 0.5,
            key_bits: 1,
            pairs: 100,
            atypical_mass: 0.001,
            typical_log_dim: None,
            bit_error: 0.0,
            phase_error: 0.0,
        }
    }
}

impl FromStr for Kind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Kind as clap::ValueEnum>::from_str(s, false).map_err(CliError::Usage)
    }
}
