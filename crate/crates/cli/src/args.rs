use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qe_core::engine::SplitMethod;

#[derive(Debug, Parser)]
#[command(name = "qe-station", version, about = "Photocathode quantum-efficiency station")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve a virtual bench on TCP endpoints.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Stop after this many wall-clock seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Measure the splitter ratio table with both reference heads mounted.
    CalibrateSplitter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        #[arg(long, value_parser = parse_method)]
        method: Option<SplitMethod>,
    },
    /// Sweep QE over the configured wavelengths at a fixed position.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        measure: Measure,
    },
    /// Raster-scan the cathode at one wavelength.
    Scan2d {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        measure: Measure,
    },
    /// Recompute QE and statistics from a run's raw sample log.
    Analyze {
        /// Directory of a finished run.
        run_dir: PathBuf,
        /// Where to write the analysis (default: the run directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Overlay several spectrum files in one plot table.
    Compare {
        #[arg(required = true, num_args = 1..)]
        spectra: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Virtual bench seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instrument addresses as `kind=host:port,...`; selects live TCP sessions.
    #[arg(long)]
    pub endpoints: Option<String>,
    /// Print progress to stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Measure {
    /// Use this filter slot at every wavelength.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=4))]
    pub force_filter: Option<u8>,
    /// Re-measure dark current every n points.
    #[arg(long)]
    pub dark_every: Option<usize>,
    /// Splitter table file, overriding the config.
    #[arg(long)]
    pub splitter_table: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<SplitMethod, String> {
    s.parse()
}
