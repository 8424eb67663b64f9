//! Report rendering: the numbered text format grouped by stage, and the
//! machine-readable JSON format, plus the prefix term parser `verify` uses
//! to read laws back.

use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::explore::{Conjecture, ExplorationReport};
use crate::frontend::sexp;
use crate::term::{Signature, SortId, SymbolId, Term};
use crate::theory::Theory;

fn is_operator_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| "+-*/=<>!&|~^%:".contains(c))
}

fn is_infix(sym: SymbolId, sig: &Signature) -> bool {
    let decl = sig.symbol(sym);
    decl.arity() == 2 && is_operator_name(&decl.name)
}

/// Term rendering for reports: operator-named binary symbols print infix
/// with parenthesized operator operands, everything else as `name(args)`.
/// Invisible symbols print as their argument.
pub fn render_term(t: &Term, sig: &Signature) -> String {
    match t {
        Term::Var(v) => sig.var_name(*v).to_string(),
        Term::App(sym, args) => {
            let decl = sig.symbol(*sym);
            if decl.invisible() {
                return match args.len() {
                    0 => String::new(),
                    1 => render_term(&args[0], sig),
                    _ => {
                        let inner: Vec<String> =
                            args.iter().map(|a| render_term(a, sig)).collect();
                        format!("({})", inner.join(","))
                    }
                };
            }
            if is_infix(*sym, sig) {
                let wrap = |a: &Term| -> String {
                    let s = render_term(a, sig);
                    match a {
                        Term::App(inner, _) if is_infix(*inner, sig) => format!("({s})"),
                        _ => s,
                    }
                };
                return format!("{}{}{}", wrap(&args[0]), decl.name, wrap(&args[1]));
            }
            if args.is_empty() {
                decl.name.clone()
            } else {
                let inner: Vec<String> = args.iter().map(|a| render_term(a, sig)).collect();
                format!("{}({})", decl.name, inner.join(","))
            }
        }
    }
}

/// One law as printed text, without its number.
pub fn render_law(law: &Conjecture, theory: &Theory) -> String {
    let sig = &theory.signature;
    let equation = format!("{} = {}", render_term(&law.lhs, sig), render_term(&law.rhs, sig));
    match &law.precondition {
        None => equation,
        Some((pi, args)) => {
            let pred = &theory.predicates[*pi];
            let names: Vec<String> = args
                .iter()
                .map(|v| sig.var_name(*v).to_string())
                .collect();
            let cond = if is_operator_name(&pred.name) && names.len() == 2 {
                format!("{} {} {}", names[0], pred.name, names[1])
            } else {
                format!("{}({})", pred.name, names.join(","))
            };
            format!("{cond} => {equation}")
        }
    }
}

fn symbol_signature_line(sym: SymbolId, sig: &Signature) -> String {
    let decl = sig.symbol(sym);
    let name = if decl.invisible() { "\"\"" } else { decl.name.as_str() };
    let mut parts: Vec<String> = decl
        .arg_sorts
        .iter()
        .map(|s| sig.sort(*s).name.clone())
        .collect();
    parts.push(sig.sort(decl.result_sort).name.clone());
    format!("{} : {}", name, parts.join(" -> "))
}

/// The text report: laws numbered in emission order, grouped by stage with
/// the stage's new symbols as a header, conditional laws at the end.
pub fn render_text(report: &ExplorationReport, theory: &Theory) -> String {
    let sig = &theory.signature;
    let mut out = String::new();
    out.push_str(&format!(
        "theory {} (seed {}, max-size {}, max-tests {})\n",
        report.theory_name, report.config.seed, report.config.max_term_size, report.config.max_tests
    ));

    let mut header_printed_for = 0usize;
    let mut conditional_header = false;
    for (i, law) in report.laws.iter().enumerate() {
        if law.precondition.is_none() {
            while header_printed_for < law.stage {
                header_printed_for += 1;
                out.push('\n');
                for (si, decl) in sig.symbols.iter().enumerate() {
                    if decl.stage == header_printed_for && !decl.background {
                        out.push_str(&symbol_signature_line(SymbolId(si as u32), sig));
                        out.push('\n');
                    }
                }
            }
        } else if !conditional_header {
            conditional_header = true;
            out.push('\n');
        }
        out.push_str(&format!("{:>3}. {}\n", i + 1, render_law(law, theory)));
    }
    out
}

/// SHA-256 of the theory source, labeling reports with what they explored.
pub fn theory_digest(source: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(source.as_bytes());
    hex::encode(hasher.finalize())
}

/// The machine format: a run header plus one object per law, terms as
/// prefix applications with canonical variable names.
pub fn render_json(report: &ExplorationReport, theory: &Theory, digest: &str) -> Json {
    let sig = &theory.signature;
    let laws: Vec<Json> = report
        .laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let precondition = match &law.precondition {
                None => Json::Null,
                Some((pi, args)) => json!({
                    "predicate": theory.predicates[*pi].name,
                    "args": args.iter().map(|v| sig.var_name(*v).to_string()).collect::<Vec<_>>(),
                }),
            };
            json!({
                "index": i + 1,
                "stage": law.stage,
                "lhs": law.lhs.prefix_string(sig),
                "rhs": law.rhs.prefix_string(sig),
                "precondition": precondition,
                "effective_size": law.effective_size,
                "tests_passed": law.tests_passed,
            })
        })
        .collect();
    json!({
        "theory": report.theory_name,
        "theory_digest": digest,
        "seed": report.config.seed,
        "config": report.config,
        "stats": report.stats,
        "warnings": report.warnings,
        "laws": laws,
    })
}

/// Parses a term in the prefix serialization back over a theory's
/// signature. `expected` guides variable resolution; the root of a law's
/// left side is always an application, which pins the sorts below it.
pub fn parse_prefix_term(
    text: &str,
    theory: &Theory,
    expected: Option<SortId>,
) -> Result<Term, String> {
    let sexp = sexp::read_one(text).map_err(|e| e.to_string())?;
    resolve_term(&sexp, theory, expected)
}

fn resolve_term(s: &sexp::Sexp, theory: &Theory, expected: Option<SortId>) -> Result<Term, String> {
    let sig = &theory.signature;
    match &s.kind {
        sexp::SexpKind::Str(_) => Err("unexpected string in term".into()),
        sexp::SexpKind::Int(n) => {
            resolve_leaf_symbol(&n.to_string(), theory, expected)
                .ok_or_else(|| format!("no constant named '{n}'"))
        }
        sexp::SexpKind::Atom(name) => {
            // A variable of the expected sort, or a variable unique across
            // sorts, or a nullary symbol.
            if let Some(sort) = expected {
                if let Some(idx) = sig.sort(sort).var_names.iter().position(|v| v == name) {
                    return Ok(Term::var(sort, idx as u32));
                }
            } else {
                let hits: Vec<(SortId, usize)> = sig
                    .sorts
                    .iter()
                    .enumerate()
                    .filter_map(|(si, decl)| {
                        decl.var_names
                            .iter()
                            .position(|v| v == name)
                            .map(|i| (SortId(si as u32), i))
                    })
                    .collect();
                if hits.len() == 1 {
                    return Ok(Term::var(hits[0].0, hits[0].1 as u32));
                }
                if hits.len() > 1 {
                    return Err(format!("ambiguous variable '{name}': give it a sorted context"));
                }
            }
            resolve_leaf_symbol(name, theory, expected)
                .ok_or_else(|| format!("unknown name '{name}'"))
        }
        sexp::SexpKind::List(items) => {
            let head = items.first().ok_or("empty term")?;
            let name = match &head.kind {
                sexp::SexpKind::Atom(a) => a.clone(),
                sexp::SexpKind::Int(n) => n.to_string(),
                _ => return Err("expected a symbol name".into()),
            };
            let arity = items.len() - 1;
            let sym = find_symbol(&name, arity, expected, sig)
                .ok_or_else(|| format!("no symbol '{name}' of arity {arity}"))?;
            let decl = sig.symbol(sym);
            let mut args = Vec::with_capacity(arity);
            for (item, sort) in items[1..].iter().zip(decl.arg_sorts.clone()) {
                args.push(resolve_term(item, theory, Some(sort))?);
            }
            Ok(Term::app(sym, args))
        }
    }
}

fn resolve_leaf_symbol(name: &str, theory: &Theory, expected: Option<SortId>) -> Option<Term> {
    find_symbol(name, 0, expected, &theory.signature).map(|sym| Term::app(sym, vec![]))
}

fn find_symbol(
    name: &str,
    arity: usize,
    expected: Option<SortId>,
    sig: &Signature,
) -> Option<SymbolId> {
    // `#k` names a symbol by declaration index (used for invisible symbols).
    if let Some(idx) = name.strip_prefix('#').and_then(|r| r.parse::<u32>().ok()) {
        if (idx as usize) < sig.symbols.len() {
            return Some(SymbolId(idx));
        }
    }
    (0..sig.symbols.len() as u32).map(SymbolId).find(|s| {
        let decl = sig.symbol(*s);
        decl.name == name
            && decl.arity() == arity
            && expected.is_none_or(|want| decl.result_sort == want)
    })
}
