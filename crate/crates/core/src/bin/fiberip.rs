use clap::{Parser, Subcommand};
use fiberip::cli_io::{parse_with_overrides, run_scenario, verify_suite};
use fiberip::Error;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fiberip", version, about = "Adhesion between in-plane elastic fibers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config
    Run {
        config: PathBuf,
        /// override a config entry, e.g. --set discretization.density=800
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// worker threads for pair assembly (1 gives bit-reproducible runs)
        #[arg(long)]
        threads: Option<usize>,
        /// output directory; defaults to output.dir from the config, then ./out
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: oracle, scaling, tangent or all
    Verify { suite: String },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_FAILURE: u8 = 3;

fn diagnose(e: &Error) -> ExitCode {
    let mut d = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Config { field, .. } = e {
        d["field"] = json!(field);
    }
    eprintln!("{d}");
    ExitCode::from(if matches!(e, Error::Config { .. }) { EXIT_VALIDATION } else { EXIT_FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, set, threads, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return diagnose(&Error::config("config", format!("{}: {e}", config.display()))),
            };
            let cfg = match parse_with_overrides(&text, &set) {
                Ok(c) => c,
                Err(e) => return diagnose(&e),
            };
            if let Some(n) = threads {
                if n == 0 {
                    return diagnose(&Error::config("--threads", "must be at least 1"));
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return diagnose(&Error::Solver(format!("thread pool: {e}")));
                }
            }
            let out = out
                .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            match run_scenario(&cfg, &out) {
                Ok(summary) => {
                    println!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => diagnose(&e),
            }
        }
        Command::Verify { suite } => match verify_suite(&suite) {
            Ok(checks) => {
                let mut ok = true;
                for c in &checks {
                    ok &= c.pass;
                    println!("{}", serde_json::to_string(c).expect("check serializes"));
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => diagnose(&e),
        },
    }
}
