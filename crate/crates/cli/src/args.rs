use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spinnet::ga::CrossoverMode;
use spinnet::metrology::FitKind;
use spinnet::nn::Target;
use spinnet::{CouplingScaling, GraphKind, Parity, SpinSystemParams};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "spinnet", version, about = "Graph topology search and metrology for transverse-field Ising networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genetic search for the graph maximizing D_n at one size.
    Ga(GaCmd),
    /// Spectral deformation D_n of one graph.
    Dn(GraphCmd),
    /// Thermal field QFI (and ground-state M_x generator QFI) of one graph.
    Qfi(GraphCmd),
    /// Energy gap E_1 - E_0 of one graph.
    Gap(GraphCmd),
    /// Thermal magnetization variance with its susceptibility estimate.
    Varmx(GraphCmd),
    /// Husimi Q grid of a ground state, with equatorial profile and <S_x>.
    Husimi(HusimiCmd),
    /// Zero-temperature scaling on complete graphs, bare and Kac.
    T0Scaling(T0Cmd),
    /// Polynomial or power-law fit of a series file.
    Fit(FitCmd),
    /// Train the size regressor on an `N,value` series.
    NnTrain(NnTrainCmd),
    /// Predict with a saved regressor over a size range.
    NnPredict(NnPredictCmd),
    /// Multi-size sweeps.
    Sweep(SweepCmd),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhysicsArgs {
    /// Temperature.
    #[arg(long, default_value_t = 0.08)]
    pub t: f64,
    /// Transverse field.
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub h: f64,
    /// Coupling constant.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub j: f64,
    /// bare or kac.
    #[arg(long, default_value = "bare")]
    pub scaling: CouplingScaling,
    /// Number of lowest levels in D_n.
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
}

impl PhysicsArgs {
    pub fn params(&self) -> SpinSystemParams {
        SpinSystemParams {
            j: self.j,
            h: self.h,
            t: self.t,
            scaling: self.scaling,
            dn_levels: self.levels,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GaArgs {
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 15)]
    pub gens: usize,
    #[arg(long = "mut-prob", default_value_t = 0.3)]
    pub mut_prob: f64,
    /// Probability of the extra diversity edge after crossover.
    #[arg(long = "crossover-edge-prob", default_value_t = 0.5)]
    pub crossover_edge_prob: f64,
    /// intersection or union.
    #[arg(long, default_value = "intersection")]
    pub crossover: CrossoverMode,
    /// Required for every stochastic command.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the thermal QFI of the winner.
    #[arg(long)]
    pub no_qfi: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    /// Graph JSON file `{"n": .., "edges": [[u, v], ..]}`; overrides --kind/--n.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// path, cycle or complete.
    #[arg(long, default_value = "complete")]
    pub kind: GraphKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RangeArgs {
    #[arg(long = "n-min", default_value_t = 2)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 8)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GaCmd {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Also write the full run record as JSON.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HusimiCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long = "n-theta", default_value_t = spinnet::phasespace::DEFAULT_THETA_SAMPLES)]
    pub n_theta: usize,
    #[arg(long = "n-phi", default_value_t = spinnet::phasespace::DEFAULT_PHI_SAMPLES)]
    pub n_phi: usize,
    /// Also write the equatorial overlap profile here.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct T0Cmd {
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesArgs {
    /// CSV file with a header row; `#` lines are ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "x-column", default_value = "N")]
    pub x_column: String,
    /// Value column; defaults to the first non-size column.
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitCmd {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// poly, loglog or power.
    #[arg(long = "fit", default_value = "power")]
    pub fit_kind: FitKind,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// all, even or odd.
    #[arg(long, default_value = "all")]
    pub parity: Parity,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NnTrainCmd {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Keep only sizes of this parity before training.
    #[arg(long, default_value = "all")]
    pub parity: Parity,
    /// dn or qfi; a label stored with the model.
    #[arg(long, default_value = "dn")]
    pub target: Target,
    #[arg(long, default_value_t = 4000)]
    pub epochs: usize,
    #[arg(long = "lr", default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to save the trained model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NnPredictCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "n-min", default_value_t = 13)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 21)]
    pub n_max: usize,
    /// Predict every size, not only those of the model's parity.
    #[arg(long)]
    pub all_sizes: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    DnQfiVsN,
    VarmxVsN,
    RescaledQfi,
    GapVsN,
    Husimi,
    T0Scaling,
    Fits,
    HSweep,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepCmd {
    #[arg(value_enum)]
    pub kind: SweepKind,
    #[command(flatten)]
    pub range: RangeArgs,
    /// Graph family for fixed-family sweeps.
    #[arg(long, default_value = "complete")]
    pub family: GraphKind,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Field values for `h-sweep`.
    #[arg(long = "h-values", value_delimiter = ',', default_value = "0.01,0.05,0.1,0.5", allow_hyphen_values = true)]
    pub h_values: Vec<f64>,
    /// Series file for `fits`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "x-column", default_value = "N")]
    pub x_column: String,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long = "n-theta", default_value_t = spinnet::phasespace::DEFAULT_THETA_SAMPLES)]
    pub n_theta: usize,
    #[arg(long = "n-phi", default_value_t = spinnet::phasespace::DEFAULT_PHI_SAMPLES)]
    pub n_phi: usize,
    /// Directory for per-run GA records and their aggregate table.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
