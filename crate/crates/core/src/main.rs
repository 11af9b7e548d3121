use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rankone_core::cli::{self, Failure, Overrides};

#[derive(Parser)]
#[command(name = "rankone", version, about = "Experiments for the random rank-1 iteration")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $RANKONE_OUT_DIR/<experiment> or results/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Convert a results CSV into log10 columns for plotting.
    Plotdata {
        csv: PathBuf,
        /// Output file (default: <stem>.plot.dat beside the CSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("error: {}", f.message());
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match args.command {
        Command::Run {
            config,
            seed,
            out,
            replicas,
            steps,
        } => {
            let overrides = Overrides { seed, out, replicas, steps };
            let report = match cli::run(&config, &overrides) {
                Ok(r) => r,
                Err(f) => return fail(f),
            };
            let o = &report.outcome;
            for r in &o.summary {
                let tag = if r.threshold.is_nan() { "info" } else if r.passed { "ok" } else { "FAIL" };
                println!("[{tag:>4}] {}: {:.6e}", r.name, r.value);
            }
            println!("wrote {}", report.dir.display());
            if !o.diverged.is_empty() {
                let ids: Vec<String> = o.diverged.iter().map(|(r, n)| format!("{r}@{n}")).collect();
                eprintln!("diverged replicas (replica@step): {}", ids.join(", "));
            }
            if o.passed() {
                ExitCode::SUCCESS
            } else {
                for r in o.failures() {
                    eprintln!("check failed: {} (value {:e}, threshold {:e})", r.name, r.value, r.threshold);
                }
                ExitCode::from(1)
            }
        }
        Command::Plotdata { csv, out } => match cli::emit_plotdata(&csv, out.as_deref()) {
            Ok(path) => {
                println!("wrote {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(Failure::Input(e.to_string())),
        },
    }
}
