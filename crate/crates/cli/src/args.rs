use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use photonic_fusion::source::DetectorModel;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulateMode {
    State,
    Process,
}

fn parse_detector(s: &str) -> Result<DetectorModel, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown detector model {s:?} (herald_matched, threshold)"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coincidence probability and expected counts versus delay.
    Antidip(AntidipArgs),
    /// Apply the fusion channel with dephasing to an input state.
    Fuse(FuseArgs),
    /// Total process matrix after dephasing, at one delay or over a grid.
    ChiCompose(ChiComposeArgs),
    /// Maximum-likelihood state reconstruction from count files.
    TomoState(TomoArgs),
    /// Basis fidelities and process matrix from count files.
    TomoProcess(TomoArgs),
    /// Visibility and fidelity limits from multi-pair emission.
    HigherOrder(HigherOrderArgs),
    /// Fit visibility and mean counts to antidip data.
    Fit(FitArgs),
    /// Write synthetic tomography counts.
    Simulate(SimulateArgs),
    /// Source, fusion and tomography chain over a list of pair numbers.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Antidip(_) => "antidip",
            Command::Fuse(_) => "fuse",
            Command::ChiCompose(_) => "chi-compose",
            Command::TomoState(_) => "tomo-state",
            Command::TomoProcess(_) => "tomo-process",
            Command::HigherOrder(_) => "higher-order",
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

// Every field is optional so that unset flags leave config-file values alone.
// Defaults are applied after merging.

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntidipArgs {
    /// Pulse duration, ps [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_t: Option<f64>,
    /// Center wavelength mismatch, nm [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_lambda: Option<f64>,
    /// Center wavelength, nm [default: 625]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_center: Option<f64>,
    /// First delay, ps [default: -5]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    /// Last delay, ps [default: 5]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    /// Grid points [default: 101]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Mean coincidences far from the dip [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_av: Option<f64>,
    /// Visibility [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    /// Coincidence window, ns [default: 3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_coinc: Option<f64>,
    /// Pulse period, ns [default: 12.5]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_rep: Option<f64>,
    /// Add a Poisson-sampled counts column
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson: Option<bool>,
}

impl AntidipArgs {
    pub fn fill_defaults(&mut self) {
        self.sigma_t.get_or_insert(1.0);
        self.delta_lambda.get_or_insert(0.0);
        self.lambda_center.get_or_insert(625.0);
        self.start.get_or_insert(-5.0);
        self.stop.get_or_insert(5.0);
        self.points.get_or_insert(101);
        self.n_av.get_or_insert(1.0);
        self.p0.get_or_insert(1.0);
        self.tau_coinc.get_or_insert(3.0);
        self.tau_rep.get_or_insert(12.5);
        self.poisson.get_or_insert(false);
    }
}

/// Input state selection shared by `fuse` and `simulate`.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct StateArgs {
    /// Product label such as PP or HV, or phi+, psi-, mixed, werner:<p> [default: PP]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Density matrix JSON {"re": [[...]], "im": [[...]]}
    #[arg(long, conflicts_with = "input")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<PathBuf>,
}

/// Process matrix and dephasing selection.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct ChannelArgs {
    /// Diagonal chi as 00,zz,xy,xx [default: 1,0,0,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
    /// Chi JSON {"chi_diag": {...}, "f_model": {...}}
    #[arg(long, conflicts_with = "chi")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_file: Option<PathBuf>,
    /// Dephasing factor in [0, 1]; overrides the delay
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    /// Photon delay, ps
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_tau: Option<f64>,
    /// Pulse duration for the Gaussian dephasing model, ps [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_t: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct FuseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct ChiComposeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// First delay of a sweep, ps
    #[arg(long, allow_hyphen_values = true, requires = "stop")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    /// Last delay of a sweep, ps
    #[arg(long, allow_hyphen_values = true, requires = "start")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    /// Sweep points [default: 41]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoArgs {
    /// Count CSV files; rows of all files are merged
    #[arg(long, num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<PathBuf>>,
    /// Monte Carlo resamples, at least 100 [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HigherOrderArgs {
    /// Mean pairs per pulse [default: 0.037]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bar: Option<f64>,
    /// Heralding detector efficiency [default: 0.1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Highest pair number kept per source [default: 2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<u32>,
    /// Keep only terms first order in the pair number [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_order: Option<bool>,
    /// herald_matched or threshold [default: herald_matched]
    #[arg(long, value_parser = parse_detector)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_model: Option<DetectorModel>,
}

impl HigherOrderArgs {
    pub fn fill_defaults(&mut self) {
        self.n_bar.get_or_insert(0.037);
        self.eta.get_or_insert(photonic_fusion::source::DEFAULT_ETA);
        self.fock_cutoff.get_or_insert(2);
        self.first_order.get_or_insert(true);
        self.detector_model.get_or_insert_with(DetectorModel::default);
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// CSV with a delta_tau_ps column and a counts or expected_counts column
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Pulse duration, ps [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_t: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// state or process [default: state]
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<SimulateMode>,
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// Events per basis setting (state) or per input state (process) [default: 10000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Acquisition time written per row, s [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineArgs {
    /// Mean pairs per pulse, comma separated [default: the five measured values]
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bar: Option<Vec<f64>>,
    /// Heralding detector efficiency [default: 0.1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Diagonal fusion chi as 00,zz,xy,xx [default: 1,0,0,0]
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
    /// Dephasing factor [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_value: Option<f64>,
    /// Sampled events per state-tomography setting [default: 10000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts_per_setting: Option<u64>,
    /// Sampled events per process-tomography input [default: 10000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process_trials: Option<u64>,
    /// Monte Carlo resamples [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
    /// herald_matched or threshold [default: herald_matched]
    #[arg(long, value_parser = parse_detector)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_model: Option<DetectorModel>,
}
