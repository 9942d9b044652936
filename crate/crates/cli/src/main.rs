mod args;
mod commands;
mod failure;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, duration } => commands::simulate(common, *duration),
        Command::CalibrateSplitter { common, output, method } => commands::calibrate(common, &output.out, *method),
        Command::Spectrum { common, output, measure } => commands::spectrum(common, &output.out, measure),
        Command::Scan2d { common, output, measure } => commands::scan2d(common, &output.out, measure),
        Command::Analyze { run_dir, out } => commands::analyze(run_dir, out.as_deref()),
        Command::Compare { spectra, out } => commands::compare(spectra, out),
    };
    if let Err(f) = result {
        eprintln!("qe-station: {f}");
        std::process::exit(f.code());
    }
}
