use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gqbp::circuit::{circuit_acceptance, run_circuit, validate_circuit};
use gqbp::convert::{circuit_to_rgqbp, rgqbp_to_circuit};
use gqbp::error::Error;
use gqbp::experiments::{
    hamming_expectation, hybrid_deviation, hybrid_run, promise_or_expectation, render_tradeoff, tradeoff_scan,
    ExperimentReport, Family, TableFormat,
};
use gqbp::format::{parse_circuit, parse_document, parse_program, serialize_circuit, serialize_program, Document};
use gqbp::model::{validate_program, InputString, Program, DEFAULT_MAX_DISTINCT};
use gqbp::programs::{grover_promise_or, parity_program, random_rgqbp};
use gqbp::simulate::{acceptance_of_state, decide_probability, run, BOUNDED_ERROR};
use gqbp::transform::split_layers;

#[derive(Parser)]
#[command(name = "gqbp", version, about = "Quantum branching program toolkit")]
struct Cli {
    /// Table rendering for tabular reports.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Text,
}

impl From<OutputFormat> for TableFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => TableFormat::Csv,
            OutputFormat::Text => TableFormat::Text,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check normalization and unitarity of a program or circuit.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a program or circuit on one input.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Print the state after every level.
        #[arg(long)]
        trace: bool,
    },
    /// Convert between programs and circuits.
    Convert {
        #[arg(long, value_enum)]
        to: Target,
        file: PathBuf,
    },
    /// Rewrite a restricted program into alternating form.
    Split { file: PathBuf },
    /// Emit a builtin program or circuit.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Per-level hybrid accounting between two inputs.
    Hybrid {
        file: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        alt: String,
        /// Also print the hybrid state with the last k queries switched.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Expectation bounds over Promise-OR or Hamming families.
    Expect {
        #[arg(value_enum)]
        family: ExpectKind,
        file: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long)]
        fixed: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Width/length table over a family of sizes.
    Scan {
        #[arg(value_enum)]
        family: ScanKind,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Circuit,
    Bp,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Parity,
    GroverOr,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpectKind {
    Or,
    Hamming,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanKind {
    Parity,
    GroverOr,
}

enum Failure {
    Verdict,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::Usage(format!("stdin: {e}")));
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    Ok(parse_program(&read(path)?)?)
}

fn bits(text: &str) -> Result<InputString, Failure> {
    Ok(text.parse::<InputString>()?)
}

fn render_state(out: &mut String, label: &str, state: &[num_complex::Complex64]) {
    let entries: Vec<String> = state.iter().map(|z| format!("{:+.9}{:+.9}i", z.re, z.im)).collect();
    let _ = writeln!(out, "{label}: [{}]", entries.join(", "));
}

fn emit(text: &str) {
    use std::io::Write;
    // A closed pipe downstream is not an error for us.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn verdict(passed: bool, out: String) -> Outcome {
    if passed {
        Ok(out)
    } else {
        emit(&out);
        Err(Failure::Verdict)
    }
}

fn validate(path: &Path, tol: f64) -> Outcome {
    let mut out = String::new();
    match parse_document(&read(path)?)? {
        Document::Program(p) => {
            let report = validate_program(&p, tol, DEFAULT_MAX_DISTINCT)?;
            let _ = writeln!(out, "initial norm {:.12}", report.initial_norm);
            for (t, level) in report.levels.iter().enumerate() {
                let _ = write!(
                    out,
                    "level {t}: {} deviation {:.3e} over {} assignment(s)",
                    if level.passed { "ok" } else { "FAIL" },
                    level.max_deviation,
                    level.assignments_checked
                );
                if let Some(assignment) = &level.failing_assignment {
                    let a: Vec<String> = assignment.iter().map(|(v, b)| format!("x{v}={}", *b as u8)).collect();
                    let _ = write!(out, " at {}", a.join(" "));
                }
                out.push('\n');
            }
            let _ = writeln!(out, "{}", if report.passed { "valid" } else { "invalid" });
            verdict(report.passed, out)
        }
        Document::Circuit(c) => {
            let report = validate_circuit(&c, tol);
            let _ = writeln!(out, "max deviation {:.3e}", report.max_deviation);
            if let Some(g) = report.worst_gate {
                let _ = writeln!(out, "worst gate {g}");
            }
            let _ = writeln!(out, "{}", if report.passed { "valid" } else { "invalid" });
            verdict(report.passed, out)
        }
    }
}

fn simulate(path: &Path, input: &str, trace: bool) -> Outcome {
    let x = bits(input)?;
    let mut out = String::new();
    let prob = match parse_document(&read(path)?)? {
        Document::Program(p) => {
            let states = run(&p, &x)?.states;
            if trace {
                for (t, s) in states.iter().enumerate() {
                    render_state(&mut out, &format!("level {t}"), s);
                }
            }
            acceptance_of_state(states.last().expect("run yields the initial state"), p.accept().iter().copied())
        }
        Document::Circuit(c) => {
            if trace {
                render_state(&mut out, "final", &run_circuit(&c, &x)?);
            }
            circuit_acceptance(&c, &x)?
        }
    };
    let _ = writeln!(out, "acceptance {prob:.12}");
    let _ = writeln!(out, "decision {:?}", decide_probability(prob, BOUNDED_ERROR));
    Ok(out)
}

fn convert(path: &Path, to: Target) -> Outcome {
    let text = read(path)?;
    Ok(match to {
        Target::Circuit => serialize_circuit(&rgqbp_to_circuit(&parse_program(&text)?)?),
        Target::Bp => serialize_program(&circuit_to_rgqbp(&parse_circuit(&text)?)?),
    })
}

fn generate(kind: GenKind, n: usize, s: Option<usize>, len: Option<usize>, seed: u64) -> Outcome {
    Ok(match kind {
        GenKind::Parity => serialize_program(&parity_program(n)?),
        GenKind::GroverOr => serialize_circuit(&grover_promise_or(n)?),
        GenKind::Random => {
            let s = s.ok_or_else(|| Failure::Usage("gen random needs --s".into()))?;
            let len = len.ok_or_else(|| Failure::Usage("gen random needs --len".into()))?;
            serialize_program(&random_rgqbp(s, len, n, seed)?)
        }
    })
}

fn hybrid(path: &Path, base: &str, alt: &str, k: Option<usize>, format: TableFormat) -> Outcome {
    let p = load_program(path)?;
    let (x, y) = (bits(base)?, bits(alt)?);
    let trace = hybrid_deviation(&p, &x, &y)?;
    let header = ["t", "l1", "deviation", "step"];
    let rows: Vec<[String; 4]> = (0..trace.deviations.len())
        .map(|t| {
            [
                t.to_string(),
                format!("{:.9}", trace.level_l1[t]),
                format!("{:.9}", trace.deviations[t]),
                // Step t switches the t-th query from the end.
                format!("{:.9}", trace.step_distances[trace.deviations.len() - 1 - t]),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for r in &rows {
                let _ = writeln!(out, "{}", r.join(","));
            }
        }
        TableFormat::Text => {
            let _ = writeln!(out, "{:>4}  {:>12}  {:>12}  {:>12}", header[0], header[1], header[2], header[3]);
            for r in &rows {
                let _ = writeln!(out, "{:>4}  {:>12}  {:>12}  {:>12}", r[0], r[1], r[2], r[3]);
            }
            let _ = writeln!(out, "final distance {:.12}", trace.final_distance);
            let _ = writeln!(out, "bound          {:.12}", trace.bound);
            let _ = writeln!(out, "verdict        {}", if trace.holds { "pass" } else { "FAIL" });
        }
    }
    if let Some(k) = k {
        render_state(&mut out, &format!("hybrid k={k}"), &hybrid_run(&p, &x, &y, k)?);
    }
    let cs = trace.cauchy_schwarz_holds(p.width());
    verdict(trace.holds && cs, out)
}

fn render_report(report: &ExperimentReport, format: TableFormat) -> String {
    match format {
        TableFormat::Text => report.render(),
        TableFormat::Csv => {
            let mut keys = vec!["experiment".to_string(), "empirical".into(), "bound".into(), "slack".into(), "verdict".into()];
            let mut values = vec![
                report.name.clone(),
                format!("{:.12}", report.empirical),
                format!("{:.12}", report.bound),
                format!("{:.12}", report.slack),
                if report.passed { "pass" } else { "fail" }.into(),
            ];
            for (k, v) in &report.metadata {
                keys.push(k.clone());
                values.push(v.clone());
            }
            format!("{}\n{}\n", keys.join(","), values.join(","))
        }
    }
}

fn expect(kind: ExpectKind, path: &Path, args: (Option<usize>, Option<usize>, Option<String>), seed: u64, format: TableFormat) -> Outcome {
    let p = load_program(path)?;
    let report = match kind {
        ExpectKind::Or => promise_or_expectation(&p)?,
        ExpectKind::Hamming => {
            let (k, delta, fixed) = args;
            let k = k.ok_or_else(|| Failure::Usage("expect hamming needs --k".into()))?;
            let delta = delta.ok_or_else(|| Failure::Usage("expect hamming needs --delta".into()))?;
            let fixed = match fixed {
                Some(f) => bits(&f)?,
                None => {
                    let mut v = vec![false; p.n()];
                    v.iter_mut().take(k).for_each(|b| *b = true);
                    InputString::new(v)
                }
            };
            hamming_expectation(&p, k, delta, &fixed, seed)?
        }
    };
    verdict(report.passed, render_report(&report, format))
}

fn scan(kind: ScanKind, sizes: &[usize], format: TableFormat) -> Outcome {
    let family = match kind {
        ScanKind::Parity => Family::Parity,
        ScanKind::GroverOr => Family::GroverOr,
    };
    let rows = tradeoff_scan(|n| family.instance(n), sizes)?;
    Ok(render_tradeoff(&rows, format))
}

fn execute(cli: Cli) -> Outcome {
    let format = cli.format.into();
    match cli.command {
        Command::Validate { file, tol } => validate(&file, tol),
        Command::Simulate { file, input, trace } => simulate(&file, &input, trace),
        Command::Convert { to, file } => convert(&file, to),
        Command::Split { file } => Ok(serialize_program(&split_layers(&load_program(&file)?)?)),
        Command::Gen { kind, n, s, len, seed } => generate(kind, n, s, len, seed),
        Command::Hybrid { file, base, alt, k } => hybrid(&file, &base, &alt, k, format),
        Command::Expect { family, file, k, delta, fixed, seed } => expect(family, &file, (k, delta, fixed), seed, format),
        Command::Scan { family, sizes } => scan(family, &sizes, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
