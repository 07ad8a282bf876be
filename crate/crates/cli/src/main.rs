use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qca_cli::{emit_plot_script, load_config, run_experiment, CliError, Command, PlotKind};

#[derive(Parser)]
#[command(name = "qca", version, about = "Weyl, Dirac and Maxwell quantum cellular automata experiments")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, env = "QCA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set mass=0.2 (repeatable)
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Artifact path (default: $QCA_OUTPUT_DIR/<command>.csv)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// ω, v and D along a direction of the cell
    Dispersion(RunArgs),
    /// Exact packet evolution: norm, mean and variance
    Evolve(RunArgs),
    /// Exact versus dispersive evolution
    Dispersive(RunArgs),
    /// Zitterbewegung trace and oscillation fit
    Zitter(RunArgs),
    /// One step-potential scattering run
    Scatter(RunArgs),
    /// Reflection versus step height, with the plateau edges
    KleinScan(RunArgs),
    /// Photon dispersion, light speed and polarization tilt at random k
    Maxwell(RunArgs),
    /// Deformed boosts of on-shell points
    Boost(RunArgs),
    /// Planck-scale phenomenology report
    Pheno(RunArgs),
    /// Write a gnuplot script for an existing CSV
    Plot {
        csv: PathBuf,
        #[arg(long, value_parser = |s: &str| s.parse::<PlotKind>())]
        kind: Option<PlotKind>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let (command, args) = match cli.command {
        Cmd::Plot { csv, kind } => {
            let out = emit_plot_script(&csv, kind)?;
            println!("{}", out.display());
            return Ok(());
        }
        Cmd::Dispersion(a) => (Command::Dispersion, a),
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Dispersive(a) => (Command::Dispersive, a),
        Cmd::Zitter(a) => (Command::Zitter, a),
        Cmd::Scatter(a) => (Command::Scatter, a),
        Cmd::KleinScan(a) => (Command::KleinScan, a),
        Cmd::Maxwell(a) => (Command::Maxwell, a),
        Cmd::Boost(a) => (Command::Boost, a),
        Cmd::Pheno(a) => (Command::Pheno, a),
    };
    let config = load_config(command, args.config.as_deref(), &args.set, args.output)?;
    let out = run_experiment(&config)?;
    println!("{}", out.primary.display());
    if let Some(s) = &out.sidecar {
        println!("{}", s.display());
    }
    if args.plot && command.extension() == "csv" {
        println!("{}", emit_plot_script(&out.primary, None)?.display());
    }
    Ok(())
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
