use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use infolat_cli::config::Task;
use infolat_cli::{default_out_dir, execute, presets, resolve};

/// Open free-fermion chains: steady states, information lattice and
/// currents, noise lattice, negativity and quantum trajectories.
#[derive(Debug, Parser)]
#[command(name = "infolat", version)]
struct Args {
    /// Task to run; defaults to the task stored in the config or preset.
    task: Option<Task>,

    /// TOML configuration, merged on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Named preset, see --list-presets.
    #[arg(long)]
    preset: Option<String>,

    /// Output directory (default: out/<preset or task>).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_presets {
        for p in presets::all() {
            println!("{:<12} {:<14} {}", p.name, p.task.name(), p.description);
        }
        return ExitCode::SUCCESS;
    }
    let result = resolve(args.task, args.config.as_deref(), args.preset.as_deref()).and_then(|inv| {
        let out = args.out.clone().unwrap_or_else(|| default_out_dir(&inv));
        execute(&inv, &out).map(|m| (m, out))
    });
    match result {
        Ok((manifest, out)) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for o in &manifest.outputs {
                println!("{}", out.join(&o.file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
