use clap::{Args, Parser, Subcommand};
use migo::fencing::is_fenced;
use migo::inference::infer;
use migo::interp::{explore, run};
use migo::syntax::{parse_program, parse_type_system, Program, TypeSystem};
use migo::tysem::reachable;
use migo::verification::{verify, Bound, VerificationConfig, VerificationReport};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_NOT_FENCED: u8 = 2;
const EXIT_INPUT: u8 = 3;

/// Behavioural-type verification for MiGo programs.
#[derive(Parser)]
#[command(name = "migo", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a program under a random scheduler and print the trace.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Explore the state graph of a program up to a depth.
    Explore {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Write the graph in Graphviz format ("-" for standard output).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Infer the behavioural types of a program.
    Infer {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check whether a type system is fenced.
    Fence { file: PathBuf },
    /// Build the bounded symbolic transition system.
    Lts {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check k-liveness and k-channel safety of a type system.
    Verify(VerifyArgs),
    /// Infer the types of a program and verify them.
    Check(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(short = 'k', conflicts_with = "auto")]
    k: Option<usize>,
    /// Sweep bounds up to the heuristic k (the default).
    #[arg(long)]
    auto: bool,
    #[arg(long)]
    json: bool,
    /// Include the path to a violating state.
    #[arg(long)]
    witness: bool,
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_program(path: &Path) -> Result<Program, String> {
    parse_program(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Programs (`.migo`) are inferred; anything else is read as type equations.
fn load_types(path: &Path) -> Result<TypeSystem, String> {
    if path.extension().is_some_and(|e| e == "migo") {
        let p = load_program(path)?;
        return infer(&p).map_err(|e| format!("{}: {e}", path.display()));
    }
    parse_type_system(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(dest: &Path, text: &str) -> Result<(), String> {
    if dest == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(dest, text).map_err(|e| format!("{}: {e}", dest.display()))
}

fn report_exit(r: &VerificationReport) -> u8 {
    if !r.fenced {
        EXIT_NOT_FENCED
    } else if r.ok() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn verify_cmd(args: &VerifyArgs, sys: &TypeSystem) -> Result<u8, String> {
    let cfg = VerificationConfig {
        k: args.k.map_or(Bound::Auto, Bound::Fixed),
        witness: args.witness,
        ..VerificationConfig::default()
    };
    let r = verify(sys, &cfg);
    if args.json {
        let j =
            serde_json::to_string_pretty(&r.to_json(args.witness)).map_err(|e| e.to_string())?;
        println!("{j}");
    } else {
        print!("{}", r.render());
    }
    Ok(report_exit(&r))
}

fn dispatch(cmd: Cmd) -> Result<u8, String> {
    match cmd {
        Cmd::Run { file, steps, seed } => {
            let p = load_program(&file)?;
            let t = run(&p, steps, seed);
            println!("{}", t.initial);
            for s in &t.steps {
                println!("--{} ({})--> {}", s.label, s.rule, s.state);
            }
            if t.terminated {
                println!("terminated after {} steps", t.steps.len());
            } else if t.stuck {
                println!("stuck after {} steps", t.steps.len());
            } else {
                println!("stopped after {} steps", t.steps.len());
            }
            Ok(EXIT_OK)
        }
        Cmd::Explore { file, depth, dot } => {
            let p = load_program(&file)?;
            let g = explore(&p, depth).map_err(|e| e.to_string())?;
            if let Some(d) = dot {
                write_out(&d, &g.to_dot())?;
            }
            eprintln!(
                "states: {}, transitions: {}, complete: {}",
                g.states.len(),
                g.transitions(),
                if g.is_complete() { "yes" } else { "no" }
            );
            Ok(EXIT_OK)
        }
        Cmd::Infer { file, output } => {
            let p = load_program(&file)?;
            let sys = infer(&p).map_err(|e| format!("{}: {e}", file.display()))?;
            match output {
                Some(o) => write_out(&o, &format!("{sys}\n"))?,
                None => println!("{sys}"),
            }
            Ok(EXIT_OK)
        }
        Cmd::Fence { file } => {
            let sys = load_types(&file)?;
            let v = is_fenced(&sys);
            if v.fenced {
                println!("fenced");
                return Ok(EXIT_OK);
            }
            println!("not fenced");
            if let Some(f) = v.failure() {
                print!("{f}");
            }
            Ok(EXIT_NOT_FENCED)
        }
        Cmd::Lts { file, k, dot } => {
            let sys = load_types(&file)?;
            let g = match reachable(&sys, k) {
                Ok(g) => g,
                Err(e) => {
                    println!("{e}");
                    let code = if matches!(e, migo::tysem::ReachError::NotFenced(_)) {
                        EXIT_NOT_FENCED
                    } else {
                        EXIT_VIOLATION
                    };
                    return Ok(code);
                }
            };
            match dot {
                Some(d) => write_out(&d, &g.to_dot())?,
                None => {
                    for (i, s) in g.states.iter().enumerate() {
                        println!("{i}: {s}");
                        for (l, j) in &g.edges[i] {
                            println!("    --{l}--> {j}");
                        }
                    }
                }
            }
            eprintln!(
                "states: {}, transitions: {}",
                g.states.len(),
                g.transitions()
            );
            Ok(EXIT_OK)
        }
        Cmd::Verify(args) => verify_cmd(&args, &load_types(&args.file)?),
        Cmd::Check(args) => {
            let p = load_program(&args.file)?;
            let sys = infer(&p).map_err(|e| format!("{}: {e}", args.file.display()))?;
            verify_cmd(&args, &sys)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
