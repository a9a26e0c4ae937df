use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "pspect",
    version,
    about = "Spectra and nodal solutions of the radial p-Laplacian with indefinite weight"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance of the integrator.
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "PSPECT_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and eigenfunctions.
    Eig(Common),
    /// Nodal solutions at one gamma.
    Nodal(Common),
    /// Trace a solution branch over amplitude.
    Branch(Common),
    /// Run the verification checks listed in the config.
    Verify(Common),
    /// Apply the solution operator to a source.
    Gp(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args) = match &cli.command {
        Command::Eig(a) => ("eig", a),
        Command::Nodal(a) => ("nodal", a),
        Command::Branch(a) => ("branch", a),
        Command::Verify(a) => ("verify", a),
        Command::Gp(a) => ("gp", a),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("config error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: {e}");
        }
    }
    match pspect_cli::run(name, &args.config, args.out.as_deref(), args.tol_rel) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for m in &outcome.messages {
                eprintln!("{m}");
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
