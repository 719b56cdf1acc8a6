use std::fmt::Display;
use std::io::{IsTerminal, Read};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nooplab::auditor::{audit_program, render_report, ReportFormat};
use nooplab::corpus::{self, CORPUS};
use nooplab::eval::{EvalOptions, Evaluator, RuntimeError, DEFAULT_STEP_BUDGET};
use nooplab::nominal::{check_program, nominal_subtype};
use nooplab::signatures::{dump_json, SignatureTable};
use nooplab::structural::{check_program_structural, struct_subtype, StructuralTypes};
use nooplab::syntax::{parse_program, ClassName, Program};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const DIAGNOSTICS: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "nooplab", version, about = "Nominal and structural typing for a small class-based language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Nominal,
    Structural,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program.
    Check {
        #[arg(long, value_enum, default_value = "nominal")]
        mode: Mode,
        /// Path, `-` for stdin, or a built-in corpus name.
        file: String,
    },
    /// Decide whether class A is a subtype of class B.
    Subtype {
        #[arg(long, value_enum, default_value = "nominal")]
        mode: Mode,
        file: String,
        a: String,
        b: String,
    },
    /// Compare inheritance with both subtyping relations and classify binary methods.
    Audit {
        file: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Accepted and ignored: the audit always runs both disciplines.
        #[arg(long, value_enum, hide = true)]
        mode: Option<Mode>,
    },
    /// Check, then evaluate the main expression.
    Run {
        file: String,
        /// Print the structural view of the result.
        #[arg(long)]
        erase: bool,
        /// Method invocation budget.
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        steps: u64,
        #[arg(long, value_enum, default_value = "nominal")]
        mode: Mode,
        /// Skip the type check.
        #[arg(long)]
        unchecked: bool,
    },
    /// Print every class signature closure as JSON.
    DumpSignatures { file: String },
    /// Built-in example programs.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List the built-in programs.
    List,
    /// Print one built-in program.
    Show { name: String },
}

struct Failure(u8);

fn diagnose(file: &str, errors: impl IntoIterator<Item = (&'static str, impl Display)>) -> Failure {
    for (code, message) in errors {
        eprintln!("{file}: error[{code}]: {message}");
    }
    Failure(DIAGNOSTICS)
}

fn read_source(file: &str) -> Result<String, Failure> {
    if file == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| {
                eprintln!("cannot read standard input: {e}");
                Failure(DIAGNOSTICS)
            })?;
        return Ok(text);
    }
    if Path::new(file).exists() {
        return std::fs::read_to_string(file).map_err(|e| {
            eprintln!("cannot read `{file}`: {e}");
            Failure(DIAGNOSTICS)
        });
    }
    match corpus::lookup(file) {
        Some(entry) => Ok(entry.source.to_owned()),
        None => {
            eprintln!("`{file}` is neither a readable file nor a built-in corpus program (see `nooplab corpus list`)");
            Err(Failure(DIAGNOSTICS))
        }
    }
}

fn load(file: &str) -> Result<Program, Failure> {
    let source = read_source(file)?;
    parse_program(&source).map_err(|e| diagnose(file, [(e.code(), e)]))
}

fn class_arg(program: &Program, file: &str, name: &str) -> Result<ClassName, Failure> {
    let class = ClassName::new(name);
    if class.is_object() || program.has_class(&class) {
        Ok(class)
    } else {
        Err(diagnose(file, [("SYN005", format!("unknown class `{name}`"))]))
    }
}

fn color_enabled() -> bool {
    match std::env::var("NOOPLAB_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn typecheck(program: &Program, file: &str, mode: Mode) -> Result<Option<String>, Failure> {
    match mode {
        Mode::Nominal => check_program(program)
            .map(|c| c.main_type.map(|t| t.to_string()))
            .map_err(|errs| diagnose(file, errs.iter().map(|e| (e.code(), e)))),
        Mode::Structural => check_program_structural(program)
            .map(|c| c.main_type.map(|t| t.to_string()))
            .map_err(|errs| diagnose(file, errs.iter().map(|e| (e.code(), e)))),
    }
}

fn execute(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check { mode, file } => {
            let program = load(&file)?;
            match typecheck(&program, &file, mode)? {
                Some(t) => println!("OK (main : {t})"),
                None => println!("OK"),
            }
            Ok(OK)
        }
        Command::Subtype { mode, file, a, b } => {
            let program = load(&file)?;
            let (ca, cb) = (class_arg(&program, &file, &a)?, class_arg(&program, &file, &b)?);
            let verdict = match mode {
                Mode::Nominal => {
                    let table = SignatureTable::build(&program).map_err(|e| diagnose(&file, [(e.code(), e)]))?;
                    let v = nominal_subtype(table.graph(), &ca, &cb);
                    println!("{a} <: {b} : {v}");
                    v
                }
                Mode::Structural => {
                    let types = StructuralTypes::build(&program).map_err(|e| diagnose(&file, [(e.code(), e)]))?;
                    let (ta, tb) = (types.get(&ca).expect("resolved"), types.get(&cb).expect("resolved"));
                    let v = struct_subtype(ta, tb);
                    println!("{a} <: {b} : {v}");
                    println!("{a} = {ta}");
                    println!("{b} = {tb}");
                    v
                }
            };
            Ok(if verdict { OK } else { NEGATIVE })
        }
        Command::Audit { file, format, mode: _ } => {
            let program = load(&file)?;
            let report = audit_program(&program).map_err(|errs| diagnose(&file, errs.iter().map(|e| (e.code(), e))))?;
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Json => ReportFormat::Json,
            };
            print!("{}", render_report(&report, format, color_enabled()));
            Ok(OK)
        }
        Command::Run {
            file,
            erase,
            steps,
            mode,
            unchecked,
        } => {
            let program = load(&file)?;
            if !unchecked {
                typecheck(&program, &file, mode)?;
            }
            let Some(main) = program.main() else {
                return Err(diagnose(&file, [("RUN000", "program has no main expression")]));
            };
            let options = EvalOptions {
                step_budget: steps,
                poison_signatures: false,
            };
            let evaluator = Evaluator::new(&program, options).map_err(|e| diagnose(&file, [(e.code(), e)]))?;
            match evaluator.eval(main) {
                Ok(v) if erase => println!("{}", v.erase()),
                Ok(v) => println!("{v}"),
                Err(e @ (RuntimeError::CastError { .. } | RuntimeError::Timeout(_))) => {
                    eprintln!("{e}");
                    return Ok(NEGATIVE);
                }
                Err(e) => return Err(diagnose(&file, [(e.code(), e)])),
            }
            Ok(OK)
        }
        Command::DumpSignatures { file } => {
            let program = load(&file)?;
            let table = SignatureTable::build(&program).map_err(|e| diagnose(&file, [(e.code(), e)]))?;
            print!("{}", dump_json(&program, &table));
            Ok(OK)
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                let width = CORPUS.iter().map(|e| e.name.len()).max().unwrap_or(0);
                for e in CORPUS {
                    println!("{:<width$}  {}", e.name, e.summary);
                }
                Ok(OK)
            }
            CorpusAction::Show { name } => match corpus::lookup(&name) {
                Some(e) => {
                    print!("{}", e.source);
                    Ok(OK)
                }
                None => {
                    eprintln!("no corpus program named `{name}`");
                    Err(Failure(DIAGNOSTICS))
                }
            },
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| execute(cli.command));
    match outcome {
        Ok(Ok(code)) | Ok(Err(Failure(code))) => ExitCode::from(code),
        Err(_) => {
            eprintln!("internal error");
            ExitCode::from(INTERNAL)
        }
    }
}
