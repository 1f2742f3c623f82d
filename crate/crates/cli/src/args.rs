use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::grid::Grid;

#[derive(Debug, Parser)]
#[command(name = "fieldnoise", version, about = "Electric-field noise analysis for trapped-ion heating data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every stochastic step (overrides a seed in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the primary result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Where to write the run manifest (default: `<output>.manifest.json`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Suppress informational messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectra (or a telegraph time series) of a sampled fluctuator ensemble.
    Simulate(SimulateArgs),
    /// Fit a temperature law to a noise dataset.
    Fit(FitArgs),
    /// Heating rate and field noise from sideband populations.
    Thermometry(ThermometryArgs),
    /// Frequency exponent of the activated-process model on a temperature grid.
    PredictAlpha(PredictAlphaArgs),
    /// Welch PSD of a time series.
    Psd(PsdArgs),
    /// Power-law fit `S = A f^-alpha` over a frequency band.
    FitAlpha(FitAlphaArgs),
    /// Scale the measured noise to other distances and compare with other systems.
    Extrapolate(ExtrapolateArgs),
    /// Print the reference parameter table, optionally generating synthetic datasets.
    ReferenceTable(ReferenceTableArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Ensemble JSON (keys: beta, e_min_K, e_max_K, tau0_s, n, amplitude, seed).
    pub config: PathBuf,
    /// Temperatures in K [default: 12 points from 7 to 100 K].
    #[arg(long, short = 'T')]
    pub temperatures: Option<Grid>,
    /// Frequencies in Hz.
    #[arg(long, short = 'f', default_value = "1e6")]
    pub frequencies: Grid,
    /// Emit a summed telegraph time series instead of spectra.
    #[arg(long)]
    pub trace: bool,
    /// Trace temperature, K.
    #[arg(long, default_value_t = 30.0, requires = "trace")]
    pub temperature: f64,
    /// Trace sample rate, Hz.
    #[arg(long, default_value_t = 1e5, requires = "trace")]
    pub sample_rate: f64,
    /// Trace duration, s.
    #[arg(long, default_value_t = 1.0, requires = "trace")]
    pub duration: f64,
    /// Refuse traces longer than this many samples.
    #[arg(long, default_value_t = fieldnoise_core::ensemble::DEFAULT_MAX_TRACE_SAMPLES)]
    pub max_samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    TempScaling,
    Arrhenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Noise dataset CSV (temperature_K,frequency_Hz,SE_V2m2Hz,SE_err_V2m2Hz).
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "temp-scaling")]
    pub model: ModelArg,
    /// Residual space.
    #[arg(long, value_enum, default_value = "log")]
    pub loss: LossArg,
    /// Bootstrap resamples for the parameter uncertainties (0 = Jacobian only).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    /// Rescale every sample to this frequency (1/f) before fitting. Mixed-
    /// frequency data is rescaled to 1 MHz when this is not given.
    #[arg(long)]
    pub scale_to_frequency: Option<f64>,
    /// Resistivity CSV (temperature_K,rho_ohm_m) for a Johnson-noise comparison.
    #[arg(long)]
    pub johnson: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ThermometryArgs {
    /// Sideband CSV (delay_s,P_bsb,P_rsb,trials).
    pub series: PathBuf,
    /// Secular frequency of the ion, Hz.
    #[arg(long, default_value_t = 1e6)]
    pub trap_frequency: f64,
    /// Also report the field noise rescaled (1/f) to this frequency, Hz.
    #[arg(long, default_value_t = 1e6)]
    pub rescale_to: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PredictAlphaArgs {
    /// Parameter JSON (beta, t0_K, and optionally s0, tau0_s, e_min_K, e_max_K).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// K
    #[arg(long)]
    pub t0: Option<f64>,
    /// s
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Frequency at which alpha is evaluated, Hz.
    #[arg(long, default_value_t = 1e6)]
    pub frequency: f64,
    /// Temperatures in K [default: 5:150:30, or 10,20,35,46,70,100 with --figure-parity].
    #[arg(long, short = 'T')]
    pub temperatures: Option<Grid>,
    /// Emit S·f against f (plot-ready) instead of the alpha table.
    #[arg(long)]
    pub figure_parity: bool,
    /// Frequencies for --figure-parity, Hz.
    #[arg(long, short = 'f', default_value = "log:1e5:1e7:21")]
    pub frequencies: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Args)]
pub struct PsdArgs {
    /// Time series CSV (time_s,value).
    pub trace: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub segment: usize,
    #[arg(long, value_enum, default_value = "hann")]
    pub window: WindowArg,
}

#[derive(Debug, Clone, Args)]
pub struct FitAlphaArgs {
    /// PSD CSV (frequency_Hz,psd) or a noise dataset CSV.
    pub spectrum: PathBuf,
    /// Lower band edge, Hz [default: lowest frequency].
    #[arg(long)]
    pub f_lo: Option<f64>,
    /// Upper band edge, Hz [default: highest frequency].
    #[arg(long)]
    pub f_hi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtrapolateArgs {
    /// Distance, m.
    #[arg(long, default_value_t = 1e-6)]
    pub distance: f64,
    /// Frequency, Hz.
    #[arg(long, default_value_t = 1e4)]
    pub frequency: f64,
    /// Averaging time for the DC field fluctuation, s.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Microscopic cutoff time, s.
    #[arg(long, default_value_t = 1e-12)]
    pub tau0: f64,
    /// Prefactor `S0` of `S = S0 d^-a f^-b`, SI units.
    #[arg(long, default_value_t = 1e-21)]
    pub reference: f64,
    #[arg(long, default_value_t = 4.0)]
    pub distance_exponent: f64,
    #[arg(long, default_value_t = 1.0)]
    pub frequency_exponent: f64,
    /// Cantilever damping rate, kg/s.
    #[arg(long, requires_all = ["capacitance", "voltage", "cantilever_temperature"])]
    pub gamma: Option<f64>,
    /// Tip-sample capacitance, F.
    #[arg(long, requires = "gamma")]
    pub capacitance: Option<f64>,
    /// Tip-sample voltage, V.
    #[arg(long, requires = "gamma")]
    pub voltage: Option<f64>,
    /// Cantilever temperature, K.
    #[arg(long, requires = "gamma")]
    pub cantilever_temperature: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReferenceTableArgs {
    /// Write one synthetic dataset per row, plus an Arrhenius-type and a
    /// sideband dataset, into this directory.
    #[arg(long)]
    pub synthesize: Option<PathBuf>,
    /// Relative noise of the synthetic datasets.
    #[arg(long, default_value_t = fieldnoise_core::synthetic::DEFAULT_NOISE)]
    pub noise: f64,
}
