use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Renormalization-group perturbation theory for open quantum systems.
#[derive(Debug, Parser)]
#[command(name = "rgq", version)]
struct Args {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output_path, else results)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the summary line on stdout
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    // clap's own exit code 2 would collide with the numerical-failure code
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            eprintln!("SchemaError: command line: {msg}");
            return ExitCode::from(1);
        }
    };
    if std::env::var_os("RGQ_SEED").is_some() {
        eprintln!("warning: RGQ_SEED is set but ignored; rgq has no stochastic components");
    }
    let code = rgq_core::cli::run(&args.config, args.out.as_deref(), args.quiet);
    ExitCode::from(code as u8)
}
