//! Command-line entry point: explore a theory file, verify a report
//! against the brute-force oracle, or just parse and type-check.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lawseeker::explore::explore;
use lawseeker::frontend::{self, FrontendError};
use lawseeker::oracle::{build_universe, exhaustive_check, Verdict};
use lawseeker::report::{parse_prefix_term, render_json, render_law, render_text, theory_digest};
use lawseeker::term::Variable;
use lawseeker::theory::{Config, Theory};

#[derive(Parser)]
#[command(name = "lawseeker", version, about = "Discovers equational laws about a theory file")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the discovery pipeline on a theory file and print its laws.
    Explore {
        theory: PathBuf,
        /// Largest term size on each side of a law.
        #[arg(long = "max-size")]
        max_size: Option<usize>,
        /// Random cases used to confirm each candidate law.
        #[arg(long = "max-tests")]
        max_tests: Option<usize>,
        /// Random seed; defaults to LAWSEEKER_SEED, then the file options.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation step budget per test.
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every law of a JSON report with the exhaustive oracle.
    Verify {
        report: PathBuf,
        #[arg(long)]
        theory: PathBuf,
    },
    /// Parse and type-check a theory file, reporting diagnostics.
    Check { theory: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Explore { theory, max_size, max_tests, seed, fuel, format, out } => {
            run_explore(&theory, max_size, max_tests, seed, fuel, format, out.as_deref())
        }
        Command::Verify { report, theory } => run_verify(&report, &theory),
        Command::Check { theory } => run_check(&theory),
    }
}

fn read_file(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: error: {e}", path.display());
        ExitCode::from(1)
    })
}

fn load_checked(path: &Path, source: &str) -> Result<Theory, ExitCode> {
    frontend::load_theory(source).map_err(|e| {
        let (span, message) = match &e {
            FrontendError::Parse(p) => (p.span, p.message.clone()),
            FrontendError::Check(c) => (c.span, format!("{:?}: {}", c.kind, c.message)),
        };
        eprintln!("{}:{}:{}: error: {message}", path.display(), span.line, span.col);
        ExitCode::from(1)
    })
}

fn run_explore(
    path: &Path,
    max_size: Option<usize>,
    max_tests: Option<usize>,
    seed: Option<u64>,
    fuel: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> ExitCode {
    let source = match read_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let theory = match load_checked(path, &source) {
        Ok(t) => t,
        Err(code) => return code,
    };

    let mut config: Config = theory.config.clone();
    let env_seed = std::env::var("LAWSEEKER_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok());
    if let Some(s) = env_seed {
        config.seed = s;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(n) = max_size {
        config.max_term_size = n;
    }
    if let Some(n) = max_tests {
        config.max_tests = n;
    }
    if let Some(n) = fuel {
        config.fuel = n;
    }

    let report = match explore(&theory, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: error: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let rendered = match format {
        Format::Text => render_text(&report, &theory),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&render_json(
                &report,
                &theory,
                &theory_digest(&source),
            ))
            .expect("report serialization cannot fail");
            s.push('\n');
            s
        }
    };
    let stats = &report.stats;
    eprintln!(
        "{} laws ({} stored for pruning only); {} terms considered, {} pruned; suite size {}; {} confirmation tests",
        stats.laws_printed,
        stats.laws_stored_only,
        stats.terms_considered,
        stats.terms_pruned,
        stats.suite_size,
        stats.confirmation_tests
    );
    match out {
        None => print!("{rendered}"),
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("{}: error: {e}", path.display());
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}

fn run_check(path: &Path) -> ExitCode {
    let source = match read_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let theory = match load_checked(path, &source) {
        Ok(t) => t,
        Err(code) => return code,
    };
    println!(
        "ok: {} ({} sorts, {} symbols, {} stages, {} functions)",
        theory.name,
        theory.signature.sorts.len() - 1, // Bool is built in
        theory.signature.symbols.len(),
        theory.stage_count(),
        theory.functions.len()
    );
    ExitCode::SUCCESS
}

fn run_verify(report_path: &Path, theory_path: &Path) -> ExitCode {
    let source = match read_file(theory_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let theory = match load_checked(theory_path, &source) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let report_text = match read_file(report_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let json: serde_json::Value = match serde_json::from_str(&report_text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{}: error: not a JSON report: {e}", report_path.display());
            return ExitCode::from(1);
        }
    };
    let laws = match json.get("laws").and_then(|l| l.as_array()) {
        Some(l) => l,
        None => {
            eprintln!("{}: error: report has no 'laws' array", report_path.display());
            return ExitCode::from(1);
        }
    };

    let universe = match build_universe(&theory) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: building universe: {e}");
            return ExitCode::from(1);
        }
    };

    let mut counterexamples = 0usize;
    for law in laws {
        match parse_report_law(law, &theory) {
            Err(msg) => {
                eprintln!("{}: error: {msg}", report_path.display());
                return ExitCode::from(1);
            }
            Ok(conjecture) => {
                let index = law.get("index").and_then(|i| i.as_u64()).unwrap_or(0);
                match exhaustive_check(&conjecture, &theory, &universe) {
                    Err(e) => {
                        eprintln!("error: law {index}: {e}");
                        return ExitCode::from(1);
                    }
                    Ok(Verdict::Holds) => {
                        println!("{index:>3}. holds: {}", render_law(&conjecture, &theory));
                    }
                    Ok(Verdict::Inconclusive(frac)) => {
                        println!(
                            "{index:>3}. inconclusive ({:.0}% undefined): {}",
                            frac * 100.0,
                            render_law(&conjecture, &theory)
                        );
                    }
                    Ok(Verdict::Counterexample(tc)) => {
                        counterexamples += 1;
                        println!(
                            "{index:>3}. COUNTEREXAMPLE: {}",
                            render_law(&conjecture, &theory)
                        );
                        for (var, value) in &tc.valuation {
                            if conjecture.lhs.vars().contains(var)
                                || conjecture.rhs.vars().contains(var)
                            {
                                println!(
                                    "       {} = {}",
                                    theory.signature.var_name(*var),
                                    value.render(&theory)
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    if counterexamples > 0 {
        eprintln!("{counterexamples} laws refuted by the oracle");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn parse_report_law(
    law: &serde_json::Value,
    theory: &Theory,
) -> Result<lawseeker::explore::Conjecture, String> {
    let lhs_text = law
        .get("lhs")
        .and_then(|v| v.as_str())
        .ok_or("law is missing 'lhs'")?;
    let rhs_text = law
        .get("rhs")
        .and_then(|v| v.as_str())
        .ok_or("law is missing 'rhs'")?;
    let lhs = parse_prefix_term(lhs_text, theory, None)?;
    let rhs = parse_prefix_term(rhs_text, theory, Some(lhs.sort(&theory.signature)))?;
    let precondition = match law.get("precondition") {
        None | Some(serde_json::Value::Null) => None,
        Some(p) => {
            let name = p
                .get("predicate")
                .and_then(|v| v.as_str())
                .ok_or("precondition is missing 'predicate'")?;
            let pi = theory
                .predicates
                .iter()
                .position(|pd| pd.name == name)
                .ok_or_else(|| format!("unknown predicate '{name}'"))?;
            let sorts: Vec<_> = theory
                .fun(theory.predicates[pi].fun)
                .params
                .iter()
                .map(|(_, s)| *s)
                .collect();
            let args = p
                .get("args")
                .and_then(|v| v.as_array())
                .ok_or("precondition is missing 'args'")?;
            if args.len() != sorts.len() {
                return Err(format!("predicate '{name}' arity mismatch"));
            }
            let mut vars = Vec::new();
            for (a, sort) in args.iter().zip(sorts) {
                let vname = a.as_str().ok_or("precondition args must be strings")?;
                let index = theory
                    .signature
                    .sort(sort)
                    .var_names
                    .iter()
                    .position(|n| n == vname)
                    .ok_or_else(|| format!("unknown variable '{vname}'"))?;
                vars.push(Variable { sort, index: index as u32 });
            }
            Some((pi, vars))
        }
    };
    Ok(lawseeker::explore::Conjecture {
        effective_size: lhs.size().max(rhs.size())
            + usize::from(precondition.is_some()),
        lhs,
        rhs,
        precondition,
        stage: law.get("stage").and_then(|v| v.as_u64()).unwrap_or(1) as usize,
        tests_passed: law
            .get("tests_passed")
            .and_then(|v| v.as_u64())
            .unwrap_or(0) as usize,
    })
}
