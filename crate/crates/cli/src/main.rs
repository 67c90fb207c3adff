use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "landau-hf",
    version,
    about = "Exact and Hartree–Fock dynamics of fermions in Landau levels"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "./out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the single-particle basis and report its diagnostics.
    Basis {
        #[command(flatten)]
        config: ConfigArg,
        /// Skip the per-orbital CSV files.
        #[arg(long)]
        no_orbitals: bool,
    },
    /// Non-interacting ground state: energy, filling, degeneracy, occupations.
    Groundstate {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Exact many-body propagation from the non-interacting ground determinant.
    EvolveExact {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Hartree–Fock propagation.
    EvolveHf {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long, value_parser = ["rk4", "rk4+reorth"])]
        scheme: Option<String>,
        /// `nigs-ground` or a CSV of K rows with re/im column pairs per orbital.
        #[arg(long, default_value = "nigs-ground")]
        initial: String,
        /// Write the orbital coefficients at every recorded sample.
        #[arg(long)]
        snapshots: bool,
    },
    /// Run both dynamics and compare them against the error bounds.
    Compare {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Check a configuration without running anything.
    Validate {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Method {
    Auto,
    Dense,
    Krylov,
}

impl From<Method> for landau_hf::many_body::PropagationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => Self::Auto,
            Method::Dense => Self::Dense,
            Method::Krylov => Self::Krylov,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out_dir.as_path();
    let result = match cli.command {
        Command::Basis { config, no_orbitals } => commands::basis(&config.config, out, !no_orbitals),
        Command::Groundstate { config } => commands::groundstate(&config.config, out),
        Command::EvolveExact { config, method } => commands::evolve_exact(&config.config, out, method.into()),
        Command::EvolveHf {
            config,
            dt,
            t_final,
            scheme,
            initial,
            snapshots,
        } => commands::evolve_hf(
            &config.config,
            out,
            commands::HfOverrides {
                dt,
                t_final,
                scheme,
                initial,
                snapshots,
            },
        ),
        Command::Compare { config, method } => commands::compare(&config.config, out, method.into()),
        Command::Validate { config } => commands::validate(&config.config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed; see the manifest in {}", out.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
