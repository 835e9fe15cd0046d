use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qbc::driver::{self, CompileError, Emit, Options};

#[derive(Parser)]
#[command(name = "qbc", version, about = "Compiler and simulator for basis-oriented quantum programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and type check.
    Check {
        file: PathBuf,
        #[command(flatten)]
        defines: Defines,
    },
    /// Compile to one of the textual forms.
    Compile {
        file: PathBuf,
        #[arg(long, value_parser = parse_emit)]
        emit: Emit,
        #[command(flatten)]
        pipeline: Pipeline,
        /// Let freed qubit indices be reused in QASM output.
        #[arg(long)]
        reuse_qubits: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate and print `bitstring<TAB>count` lines.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1024)]
        shots: usize,
        /// Overridden by the QBC_SEED environment variable.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        pipeline: Pipeline,
    },
    /// Gate, qubit and surviving call counts.
    Stats {
        file: PathBuf,
        #[command(flatten)]
        pipeline: Pipeline,
    },
}

#[derive(Args)]
struct Defines {
    /// Bind a dimension variable, e.g. `-D N=4`.
    #[arg(short = 'D', value_name = "NAME=VALUE", value_parser = parse_define)]
    define: Vec<(String, i64)>,
}

#[derive(Args)]
struct Pipeline {
    /// Optimization level: 0 or 1.
    #[arg(short = 'O', default_value = "1", value_parser = ["0", "1"])]
    opt: String,
    /// Keep calls instead of inlining them.
    #[arg(long)]
    no_inline: bool,
    #[command(flatten)]
    defines: Defines,
}

impl Pipeline {
    fn options(&self) -> Options {
        Options {
            optimize: self.opt == "1",
            inline: !self.no_inline,
            defines: self.defines.map(),
            ..Options::default()
        }
    }
}

impl Defines {
    fn map(&self) -> BTreeMap<String, i64> {
        self.define.iter().cloned().collect()
    }
}

fn parse_emit(s: &str) -> Result<Emit, String> {
    Emit::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Emit::ALL.iter().map(|e| e.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_define(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v = v.trim().parse().map_err(|_| format!("`{v}` is not an integer"))?;
    Ok((k.trim().to_string(), v))
}

enum Failure {
    Usage(String),
    Diagnostics(String),
}

fn read(file: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::Usage(format!("qbc: cannot read {}: {e}", file.display())))
}

fn diag(file: &Path) -> impl Fn(CompileError) -> Failure + '_ {
    move |e| Failure::Diagnostics(e.render(&file.display().to_string()))
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Check { file, defines } => {
            let src = read(&file)?;
            driver::check(&src, &defines.map()).map_err(diag(&file))?;
        }
        Command::Compile { file, emit, pipeline, reuse_qubits, output } => {
            let src = read(&file)?;
            let opts = Options { reuse_qubits, ..pipeline.options() };
            let text = driver::emit(&src, &opts, emit).map_err(diag(&file))?;
            match output {
                Some(out) => std::fs::write(&out, text)
                    .map_err(|e| Failure::Usage(format!("qbc: cannot write {}: {e}", out.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Run { file, shots, seed, pipeline } => {
            let src = read(&file)?;
            let seed = match std::env::var("QBC_SEED") {
                Ok(s) => s.trim().parse().map_err(|_| Failure::Usage(format!("qbc: QBC_SEED `{s}` is not an integer")))?,
                Err(_) => seed,
            };
            let hist = driver::run(&src, &pipeline.options(), shots, seed).map_err(diag(&file))?;
            for (bits, count) in hist {
                println!("{bits}\t{count}");
            }
        }
        Command::Stats { file, pipeline } => {
            let src = read(&file)?;
            let s = driver::stats(&src, &pipeline.options()).map_err(diag(&file))?;
            if let Some(c) = &s.circuit {
                println!("qubits={}", c.qubits);
                println!("gates={}", c.gates);
                for (kind, n) in &c.by_kind {
                    println!("gates.{kind}={n}");
                }
                println!("measurements={}", c.measurements);
                println!("conditionals={}", c.conditionals);
            }
            println!("calls={}", s.calls.calls);
            println!("indirect_calls={}", s.calls.indirect_calls);
            println!("lambdas={}", s.calls.lambdas);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostics(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
