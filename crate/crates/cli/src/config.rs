use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    DecomposeCheck,
    TrotterSweep,
    GapFormula,
    ZenoRun,
    AdiabaticRun,
    CompileCircuit,
    ZenBound,
    MarkovSpectrum,
    MatchingsQsample,
    SzkSd,
    SzkDlp,
    SzkQr,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DecomposeCheck => "decompose-check",
            Self::TrotterSweep => "trotter-sweep",
            Self::GapFormula => "gap-formula",
            Self::ZenoRun => "zeno-run",
            Self::AdiabaticRun => "adiabatic-run",
            Self::CompileCircuit => "compile-circuit",
            Self::ZenBound => "zen-bound",
            Self::MarkovSpectrum => "markov-spectrum",
            Self::MatchingsQsample => "matchings-qsample",
            Self::SzkSd => "szk-sd",
            Self::SzkDlp => "szk-dlp",
            Self::SzkQr => "szk-qr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    PhaseEstimation,
}

/// Every tunable of an experiment. Flags and config files share this
/// shape; unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every stochastic step derives its own labeled sub-seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Qubits of random Hamiltonians, or matching side length.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub n: Option<u32>,
    /// Row sparsity D.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Entry magnitude bound Λ.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Evolution time t.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub t: Option<f64>,
    /// Requested simulation accuracy α.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rescaled adiabatic time T.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub total_time: Option<f64>,
    /// Adiabatic accuracy ε.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Step size δ (time step, or error probability for szk-sd).
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Zeno measurement counts R; several values make a sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long, value_delimiter = ',')]
    pub zeno_steps: Option<Vec<usize>>,
    /// Length of an annealing sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Per-step weight ratio of an annealing sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Largest allowed variation between consecutive stationary distributions.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub max_variation: Option<f64>,
    /// Hadamard-test shots.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub shots: Option<u64>,
    /// Random instances or seeded trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub instances: Option<usize>,
    /// Sweep points.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub points: Option<usize>,
    /// Monte-Carlo runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Phase-estimation ancilla bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub bits: Option<u32>,
    /// Hamiltonian in coordinate-list form.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Final Hamiltonian of a linear path (adiabatic-run).
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub final_matrix_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub gate_file: Option<PathBuf>,
    /// Target bipartite graph for matchings-qsample.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub edge_file: Option<PathBuf>,
    /// Dense transition matrix for markov-spectrum.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub chain_file: Option<PathBuf>,
    /// Circuit input bits, most significant qubit last (e.g. `010`).
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub input: Option<String>,
    /// Truth-table file or built-in (`shifted:D:S:0|1`, `dlp:P:G:A:K`, `qr:N:A`).
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub circuit0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub circuit1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long, value_delimiter = ',')]
    pub moduli: Option<Vec<u64>>,
    /// Prime for szk-dlp.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub p: Option<u64>,
    /// Generator for szk-dlp.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub g: Option<u64>,
    /// Single query for szk-dlp.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub y: Option<u64>,
    /// Single unit for szk-qr.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub x: Option<u64>,
}

/// Shape of a config file: the command plus any config field. Unknown
/// keys are caught when the merged table becomes an [`ExperimentConfig`].
#[derive(Debug, Deserialize)]
struct ConfigFile {
    command: Option<CommandKind>,
    #[serde(flatten)]
    fields: toml::Table,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config schema violation: {0}")]
    Schema(String),
}

/// Layers `file` over `flags`; keys present in the file win.
pub fn resolve(
    command: Option<CommandKind>,
    flags: ExperimentConfig,
    file: Option<&Path>,
) -> Result<(CommandKind, ExperimentConfig), ConfigError> {
    let Some(path) = file else {
        let command = command.ok_or_else(|| ConfigError::Schema("no command given".into()))?;
        return Ok((command, flags));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
    let parsed: ConfigFile = toml::from_str(&text).map_err(|e| ConfigError::Schema(e.message().to_owned()))?;
    let base = toml::Table::try_from(&flags).map_err(|e| ConfigError::Schema(e.to_string()))?;
    let mut merged = base;
    merged.extend(parsed.fields);
    let config: ExperimentConfig = toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Schema(e.message().to_owned()))?;
    let command = parsed
        .command
        .or(command)
        .ok_or_else(|| ConfigError::Schema("no command in flags or config".into()))?;
    Ok((command, config))
}
