//! The theory file frontend: an s-expression surface syntax parsed into a
//! shaped tree, then name- and sort-checked into a [`Theory`].
//!
//! Parsing rejects malformed shapes; all name resolution, duplicate
//! detection, and sort checking happens in [`check_theory`], so a file like
//! `(theory t (stage (con "+" plus)))` with `plus` undefined parses fine and
//! fails at check time.

pub mod sexp;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

pub use sexp::{ParseError, Sexp, SexpKind, Span};

use crate::term::{Signature, SortDecl, SortId, SymbolDecl, SymbolId};
use crate::theory::{
    Builtin, Config, CtorDecl, Expr, FnId, FunDef, MatchArm, ObserveSpec, Pat, PredicateDef,
    SortKind, SymbolReferent, Theory, UniverseSpec, BOOL_SORT,
};

// ---------------------------------------------------------------------------
// Shaped syntax tree
// ---------------------------------------------------------------------------

/// The parsed but unresolved theory file.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxTree {
    pub name: String,
    pub span: Span,
    pub options: Vec<OptionClause>,
    pub sort_decls: Vec<SortClause>,
    pub functions: Vec<FunClause>,
    pub predicates: Vec<PredicateClause>,
    pub observes: Vec<ObserveClause>,
    pub background: Vec<ConClause>,
    pub stages: Vec<StageClause>,
    pub universes: Vec<UniverseClause>,
}

impl SyntaxTree {
    /// Number of declared sorts (integer-backed and datatypes).
    pub fn sort_count(&self) -> usize {
        self.sort_decls.len()
    }

    /// Number of signature symbols, background included.
    pub fn symbol_count(&self) -> usize {
        self.background.len() + self.stages.iter().map(|s| s.cons.len()).sum::<usize>()
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionClause {
    pub key: String,
    pub value: BigInt,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortClause {
    pub name: String,
    pub span: Span,
    pub kind: RawSortKind,
    pub vars: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawSortKind {
    IntRange(BigInt, BigInt),
    Datatype(Vec<RawCtor>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCtor {
    pub name: String,
    pub span: Span,
    /// (field name, field sort name, span of the sort name)
    pub fields: Vec<(String, String, Span)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunClause {
    pub name: String,
    pub span: Span,
    pub params: Vec<(String, String, Span)>,
    pub result: (String, Span),
    pub body: Sexp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateClause {
    pub display: String,
    pub fun: (String, Span),
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserveClause {
    pub sort: (String, Span),
    pub context: (String, Span),
    pub result: (String, Span),
    pub via: (String, Span),
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConClause {
    pub display: String,
    pub referent: ConRef,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConRef {
    Named(String, Span),
    Lit(BigInt, String, Span),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageClause {
    pub cons: Vec<ConClause>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniverseClause {
    pub sort: (String, Span),
    pub spec: RawUniverse,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawUniverse {
    Range(BigInt, BigInt),
    Depth(usize),
    Closure(usize, Vec<(String, Span)>),
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckErrorKind {
    UnknownName,
    SortMismatch,
    NoBaseConstructor,
    BadObservation,
    EmptyStage,
    DuplicateName,
}

/// Name resolution or sort error, with the source span it points at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {kind:?}: {message}")]
pub struct CheckError {
    pub kind: CheckErrorKind,
    pub span: Span,
    pub message: String,
}

impl CheckError {
    fn new(kind: CheckErrorKind, span: Span, message: impl Into<String>) -> CheckError {
        CheckError { kind, span, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontendError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Check(#[from] CheckError),
}

// ---------------------------------------------------------------------------
// Shape parsing
// ---------------------------------------------------------------------------

fn err(span: Span, msg: impl Into<String>) -> ParseError {
    ParseError::new(span, msg)
}

fn expect_list(s: &Sexp) -> Result<&[Sexp], ParseError> {
    s.list()
        .ok_or_else(|| err(s.span, format!("expected a list, found {}", s.describe())))
}

fn expect_atom(s: &Sexp) -> Result<&str, ParseError> {
    s.atom()
        .ok_or_else(|| err(s.span, format!("expected a name, found {}", s.describe())))
}

fn expect_string(s: &Sexp) -> Result<&str, ParseError> {
    s.string()
        .ok_or_else(|| err(s.span, format!("expected a string, found {}", s.describe())))
}

fn expect_int(s: &Sexp) -> Result<&BigInt, ParseError> {
    s.int()
        .ok_or_else(|| err(s.span, format!("expected an integer, found {}", s.describe())))
}

fn expect_len(items: &[Sexp], n: usize, span: Span, what: &str) -> Result<(), ParseError> {
    if items.len() != n {
        return Err(err(span, format!("{what} takes {} items, found {}", n - 1, items.len() - 1)));
    }
    Ok(())
}

/// Parses the s-expression surface grammar into a shaped tree with spans.
pub fn parse_theory(text: &str) -> Result<SyntaxTree, ParseError> {
    let top = sexp::read_one(text)?;
    let items = top
        .list()
        .ok_or_else(|| err(top.span, "expected (theory ...)"))?;
    if items.first().and_then(|s| s.atom()) != Some("theory") {
        return Err(err(top.span, "expected (theory ...)"));
    }
    if items.len() < 2 {
        return Err(err(top.span, "expected a theory name after 'theory'"));
    }
    let name = expect_atom(&items[1])?.to_string();

    let mut tree = SyntaxTree {
        name,
        span: top.span,
        options: Vec::new(),
        sort_decls: Vec::new(),
        functions: Vec::new(),
        predicates: Vec::new(),
        observes: Vec::new(),
        background: Vec::new(),
        stages: Vec::new(),
        universes: Vec::new(),
    };

    for clause in &items[2..] {
        let parts = expect_list(clause)?;
        let head = parts
            .first()
            .ok_or_else(|| err(clause.span, "empty clause"))?;
        match expect_atom(head)? {
            "options" => parse_options(&parts[1..], &mut tree)?,
            "sort" => tree.sort_decls.push(parse_sort(parts, clause.span)?),
            "declare-datatype" => tree.sort_decls.push(parse_datatype(parts, clause.span)?),
            "define-fun" => tree.functions.push(parse_define_fun(parts, clause.span)?),
            "predicate" => {
                expect_len(parts, 3, clause.span, "(predicate ...)")?;
                tree.predicates.push(PredicateClause {
                    display: expect_string(&parts[1])?.to_string(),
                    fun: (expect_atom(&parts[2])?.to_string(), parts[2].span),
                    span: clause.span,
                });
            }
            "observe" => tree.observes.push(parse_observe(parts, clause.span)?),
            "background" => {
                for c in &parts[1..] {
                    tree.background.push(parse_con(c)?);
                }
            }
            "stage" => {
                let mut cons = Vec::new();
                for c in &parts[1..] {
                    cons.push(parse_con(c)?);
                }
                tree.stages.push(StageClause { cons, span: clause.span });
            }
            "universe" => {
                for entry in &parts[1..] {
                    tree.universes.push(parse_universe_entry(entry)?);
                }
            }
            other => {
                return Err(err(
                    head.span,
                    format!(
                        "unknown clause '{other}'; expected options, sort, declare-datatype, \
                         define-fun, predicate, observe, background, stage, or universe"
                    ),
                ))
            }
        }
    }
    Ok(tree)
}

fn parse_options(entries: &[Sexp], tree: &mut SyntaxTree) -> Result<(), ParseError> {
    for entry in entries {
        let parts = expect_list(entry)?;
        expect_len(parts, 2, entry.span, "an option entry")?;
        tree.options.push(OptionClause {
            key: expect_atom(&parts[0])?.to_string(),
            value: expect_int(&parts[1])?.clone(),
            span: entry.span,
        });
    }
    Ok(())
}

fn parse_sort(parts: &[Sexp], span: Span) -> Result<SortClause, ParseError> {
    if parts.len() < 3 {
        return Err(err(span, "expected (sort NAME (int-range LO HI) (vars ...)?)"));
    }
    let name = expect_atom(&parts[1])?.to_string();
    let range = expect_list(&parts[2])?;
    if range.first().and_then(|s| s.atom()) != Some("int-range") || range.len() != 3 {
        return Err(err(parts[2].span, "expected (int-range LO HI)"));
    }
    let lo = expect_int(&range[1])?.clone();
    let hi = expect_int(&range[2])?.clone();
    let vars = parse_vars_clause(parts.get(3))?;
    if parts.len() > 4 {
        return Err(err(parts[4].span, "unexpected extra items in (sort ...)"));
    }
    Ok(SortClause { name, span, kind: RawSortKind::IntRange(lo, hi), vars })
}

fn parse_datatype(parts: &[Sexp], span: Span) -> Result<SortClause, ParseError> {
    if parts.len() < 3 {
        return Err(err(span, "expected (declare-datatype NAME ((CTOR ...)*) (vars ...)?)"));
    }
    let name = expect_atom(&parts[1])?.to_string();
    let mut ctors = Vec::new();
    for ctor in expect_list(&parts[2])? {
        let cparts = expect_list(ctor)?;
        let cname = expect_atom(
            cparts
                .first()
                .ok_or_else(|| err(ctor.span, "empty constructor"))?,
        )?
        .to_string();
        let mut fields = Vec::new();
        for field in &cparts[1..] {
            let fparts = expect_list(field)?;
            expect_len(fparts, 2, field.span, "a constructor field")?;
            fields.push((
                expect_atom(&fparts[0])?.to_string(),
                expect_atom(&fparts[1])?.to_string(),
                fparts[1].span,
            ));
        }
        ctors.push(RawCtor { name: cname, span: ctor.span, fields });
    }
    let vars = parse_vars_clause(parts.get(3))?;
    if parts.len() > 4 {
        return Err(err(parts[4].span, "unexpected extra items in (declare-datatype ...)"));
    }
    Ok(SortClause { name, span, kind: RawSortKind::Datatype(ctors), vars })
}

fn parse_vars_clause(s: Option<&Sexp>) -> Result<Option<Vec<String>>, ParseError> {
    let Some(s) = s else { return Ok(None) };
    let parts = expect_list(s)?;
    if parts.first().and_then(|p| p.atom()) != Some("vars") {
        return Err(err(s.span, "expected (vars \"x\" ...)"));
    }
    let mut names = Vec::new();
    for n in &parts[1..] {
        names.push(expect_string(n)?.to_string());
    }
    if names.is_empty() {
        return Err(err(s.span, "a (vars ...) clause needs at least one name"));
    }
    Ok(Some(names))
}

fn parse_define_fun(parts: &[Sexp], span: Span) -> Result<FunClause, ParseError> {
    if parts.len() != 5 {
        return Err(err(span, "expected (define-fun NAME ((ARG SORT)*) SORT BODY)"));
    }
    let name = expect_atom(&parts[1])?.to_string();
    let mut params = Vec::new();
    for p in expect_list(&parts[2])? {
        let pp = expect_list(p)?;
        expect_len(pp, 2, p.span, "a parameter")?;
        params.push((
            expect_atom(&pp[0])?.to_string(),
            expect_atom(&pp[1])?.to_string(),
            pp[1].span,
        ));
    }
    let result = (expect_atom(&parts[3])?.to_string(), parts[3].span);
    Ok(FunClause { name, span, params, result, body: parts[4].clone() })
}

fn parse_observe(parts: &[Sexp], span: Span) -> Result<ObserveClause, ParseError> {
    if parts.len() != 5 {
        return Err(err(
            span,
            "expected (observe SORT (context CSORT) (result RSORT) (via FN))",
        ));
    }
    let sort = (expect_atom(&parts[1])?.to_string(), parts[1].span);
    let mut keyed = HashMap::new();
    for p in &parts[2..] {
        let pp = expect_list(p)?;
        expect_len(pp, 2, p.span, "an observe field")?;
        keyed.insert(expect_atom(&pp[0])?.to_string(), (&pp[1], p.span));
    }
    let get = |k: &str| -> Result<(String, Span), ParseError> {
        let (v, _) = keyed
            .get(k)
            .ok_or_else(|| err(span, format!("missing ({k} ...) in observe clause")))?;
        Ok((expect_atom(v)?.to_string(), v.span))
    };
    Ok(ObserveClause {
        sort,
        context: get("context")?,
        result: get("result")?,
        via: get("via")?,
        span,
    })
}

fn parse_con(s: &Sexp) -> Result<ConClause, ParseError> {
    let parts = expect_list(s)?;
    if parts.first().and_then(|p| p.atom()) != Some("con") || parts.len() != 3 {
        return Err(err(s.span, "expected (con \"NAME\" REF)"));
    }
    let display = expect_string(&parts[1])?.to_string();
    let referent = match &parts[2].kind {
        SexpKind::Atom(name) => ConRef::Named(name.clone(), parts[2].span),
        SexpKind::List(items)
            if items.first().and_then(|i| i.atom()) == Some("lit") && items.len() == 3 =>
        {
            ConRef::Lit(
                expect_int(&items[1])?.clone(),
                expect_atom(&items[2])?.to_string(),
                parts[2].span,
            )
        }
        _ => {
            return Err(err(
                parts[2].span,
                "expected a function or constructor name, or (lit K SORT)",
            ))
        }
    };
    Ok(ConClause { display, referent, span: s.span })
}

fn parse_universe_entry(s: &Sexp) -> Result<UniverseClause, ParseError> {
    let parts = expect_list(s)?;
    expect_len(parts, 2, s.span, "a universe entry")?;
    let sort = (expect_atom(&parts[0])?.to_string(), parts[0].span);
    let spec_parts = expect_list(&parts[1])?;
    let head = spec_parts
        .first()
        .ok_or_else(|| err(parts[1].span, "empty universe spec"))?;
    let spec = match expect_atom(head)? {
        "range" => {
            expect_len(spec_parts, 3, parts[1].span, "(range ...)")?;
            RawUniverse::Range(expect_int(&spec_parts[1])?.clone(), expect_int(&spec_parts[2])?.clone())
        }
        "depth" => {
            expect_len(spec_parts, 2, parts[1].span, "(depth ...)")?;
            RawUniverse::Depth(
                expect_int(&spec_parts[1])?
                    .to_usize()
                    .ok_or_else(|| err(spec_parts[1].span, "depth out of range"))?,
            )
        }
        "closure" => {
            if spec_parts.len() < 3 {
                return Err(err(parts[1].span, "expected (closure N SYMBOL...)"));
            }
            let rounds = expect_int(&spec_parts[1])?
                .to_usize()
                .ok_or_else(|| err(spec_parts[1].span, "closure rounds out of range"))?;
            let mut syms = Vec::new();
            for sym in &spec_parts[2..] {
                syms.push((expect_atom(sym)?.to_string(), sym.span));
            }
            RawUniverse::Closure(rounds, syms)
        }
        other => {
            return Err(err(
                head.span,
                format!("unknown universe spec '{other}'; expected range, depth, or closure"),
            ))
        }
    };
    Ok(UniverseClause { sort, spec, span: s.span })
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

fn default_var_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("x{}", i + 1),
        })
        .collect()
}

struct Checker<'a> {
    tree: &'a SyntaxTree,
    config: Config,
    sorts: Vec<SortDecl>,
    sort_kinds: Vec<SortKind>,
    sort_map: HashMap<String, SortId>,
    ctor_map: HashMap<String, (SortId, usize)>,
    fn_map: HashMap<String, FnId>,
    fn_sigs: Vec<(Vec<(String, SortId)>, SortId)>,
}

type Check<T> = Result<T, CheckError>;

fn cerr(kind: CheckErrorKind, span: Span, msg: impl Into<String>) -> CheckError {
    CheckError::new(kind, span, msg)
}

impl<'a> Checker<'a> {
    fn sort_named(&self, name: &str, span: Span) -> Check<SortId> {
        self.sort_map
            .get(name)
            .copied()
            .ok_or_else(|| cerr(CheckErrorKind::UnknownName, span, format!("unknown sort '{name}'")))
    }

    fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id.0 as usize].name
    }

    fn options(&mut self) -> Check<()> {
        for opt in &self.tree.options {
            let as_usize = |v: &BigInt| -> Check<usize> {
                v.to_usize().ok_or_else(|| {
                    cerr(CheckErrorKind::SortMismatch, opt.span, "option value out of range")
                })
            };
            match opt.key.as_str() {
                "max-size" => self.config.max_term_size = as_usize(&opt.value)?,
                "max-tests" => self.config.max_tests = as_usize(&opt.value)?,
                "seed" => {
                    self.config.seed = opt.value.to_u64().ok_or_else(|| {
                        cerr(CheckErrorKind::SortMismatch, opt.span, "seed out of range")
                    })?
                }
                "vars-per-sort" => self.config.vars_per_sort = as_usize(&opt.value)?,
                "fuel" => {
                    self.config.fuel = opt.value.to_u64().ok_or_else(|| {
                        cerr(CheckErrorKind::SortMismatch, opt.span, "fuel out of range")
                    })?
                }
                "initial-suite" => self.config.initial_suite = as_usize(&opt.value)?,
                "contexts" => self.config.contexts_per_case = as_usize(&opt.value)?,
                "max-preconditions" => self.config.max_preconditions = as_usize(&opt.value)?,
                other => {
                    return Err(cerr(
                        CheckErrorKind::UnknownName,
                        opt.span,
                        format!("unknown option '{other}'"),
                    ))
                }
            }
        }
        self.config
            .validate()
            .map_err(|m| cerr(CheckErrorKind::SortMismatch, self.tree.span, m))
    }

    fn declare_sorts(&mut self) -> Check<()> {
        // Bool is built in and always sort 0; it has no variables so boolean
        // terms never appear in laws unless a signature symbol produces them.
        self.sorts.push(SortDecl { name: "Bool".into(), var_names: vec![] });
        self.sort_kinds.push(SortKind::Bool);
        self.sort_map.insert("Bool".into(), BOOL_SORT);

        for clause in &self.tree.sort_decls {
            if self.sort_map.contains_key(&clause.name) {
                return Err(cerr(
                    CheckErrorKind::DuplicateName,
                    clause.span,
                    format!("sort '{}' is already declared", clause.name),
                ));
            }
            let id = SortId(self.sorts.len() as u32);
            let var_names = clause
                .vars
                .clone()
                .unwrap_or_else(|| default_var_names(self.config.vars_per_sort));
            self.sorts.push(SortDecl { name: clause.name.clone(), var_names });
            self.sort_kinds.push(SortKind::Bool); // placeholder, filled below
            self.sort_map.insert(clause.name.clone(), id);
        }

        // Second pass: resolve ranges and constructor fields now that every
        // sort name is known.
        for (i, clause) in self.tree.sort_decls.iter().enumerate() {
            let id = SortId((i + 1) as u32);
            let kind = match &clause.kind {
                RawSortKind::IntRange(lo, hi) => {
                    if lo > hi {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            clause.span,
                            format!("empty integer range for sort '{}'", clause.name),
                        ));
                    }
                    if (hi - lo).to_u64().is_none() {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            clause.span,
                            format!("integer range of sort '{}' is too wide", clause.name),
                        ));
                    }
                    SortKind::IntRange(lo.clone(), hi.clone())
                }
                RawSortKind::Datatype(raw_ctors) => {
                    let mut ctors = Vec::new();
                    for (ci, rc) in raw_ctors.iter().enumerate() {
                        if self.ctor_map.contains_key(&rc.name) {
                            return Err(cerr(
                                CheckErrorKind::DuplicateName,
                                rc.span,
                                format!("constructor '{}' is already declared", rc.name),
                            ));
                        }
                        let mut fields = Vec::new();
                        for (_, sort_name, span) in &rc.fields {
                            fields.push(self.sort_named(sort_name, *span)?);
                        }
                        self.ctor_map.insert(rc.name.clone(), (id, ci));
                        ctors.push(CtorDecl { name: rc.name.clone(), fields });
                    }
                    SortKind::Datatype(ctors)
                }
            };
            self.sort_kinds[id.0 as usize] = kind;
        }
        Ok(())
    }

    fn declare_functions(&mut self) -> Check<()> {
        for clause in &self.tree.functions {
            if Builtin::from_name(&clause.name).is_some()
                || clause.name == "match"
                || clause.name == "true"
                || clause.name == "false"
            {
                return Err(cerr(
                    CheckErrorKind::DuplicateName,
                    clause.span,
                    format!("'{}' is a reserved name", clause.name),
                ));
            }
            if self.fn_map.contains_key(&clause.name) || self.ctor_map.contains_key(&clause.name)
            {
                return Err(cerr(
                    CheckErrorKind::DuplicateName,
                    clause.span,
                    format!("'{}' is already declared", clause.name),
                ));
            }
            let mut params = Vec::new();
            for (pname, sort_name, span) in &clause.params {
                params.push((pname.clone(), self.sort_named(sort_name, *span)?));
            }
            let result = self.sort_named(&clause.result.0, clause.result.1)?;
            self.fn_map
                .insert(clause.name.clone(), FnId(self.fn_sigs.len() as u32));
            self.fn_sigs.push((params, result));
        }
        Ok(())
    }

    fn check_bodies(&self) -> Check<Vec<FunDef>> {
        let mut out = Vec::new();
        for (i, clause) in self.tree.functions.iter().enumerate() {
            let (params, result) = &self.fn_sigs[i];
            let mut scope: Vec<(String, SortId)> = params.clone();
            let (body, got) = self.check_expr(&clause.body, Some(*result), &mut scope)?;
            debug_assert_eq!(got, *result);
            out.push(FunDef {
                name: clause.name.clone(),
                params: params.clone(),
                result: *result,
                body,
            });
        }
        Ok(out)
    }

    fn expect_sort(&self, got: SortId, expected: Option<SortId>, span: Span) -> Check<SortId> {
        match expected {
            Some(want) if want != got => Err(cerr(
                CheckErrorKind::SortMismatch,
                span,
                format!(
                    "expected sort '{}', found '{}'",
                    self.sort_name(want),
                    self.sort_name(got)
                ),
            )),
            _ => Ok(got),
        }
    }

    fn is_int_sort(&self, s: SortId) -> bool {
        matches!(self.sort_kinds[s.0 as usize], SortKind::IntRange(..))
    }

    fn check_expr(
        &self,
        e: &Sexp,
        expected: Option<SortId>,
        scope: &mut Vec<(String, SortId)>,
    ) -> Check<(Expr, SortId)> {
        match &e.kind {
            SexpKind::Int(n) => match expected {
                Some(s) if self.is_int_sort(s) => Ok((Expr::Int(n.clone()), s)),
                Some(s) => Err(cerr(
                    CheckErrorKind::SortMismatch,
                    e.span,
                    format!("integer literal where sort '{}' is expected", self.sort_name(s)),
                )),
                None => Err(cerr(
                    CheckErrorKind::SortMismatch,
                    e.span,
                    "cannot infer the sort of a bare integer literal here",
                )),
            },
            SexpKind::Str(_) => Err(cerr(
                CheckErrorKind::SortMismatch,
                e.span,
                "strings cannot appear in function bodies",
            )),
            SexpKind::Atom(name) => {
                if name == "true" || name == "false" {
                    let sort = self.expect_sort(BOOL_SORT, expected, e.span)?;
                    return Ok((Expr::Bool(name == "true"), sort));
                }
                if let Some(idx) = scope.iter().rposition(|(n, _)| n == name) {
                    let sort = self.expect_sort(scope[idx].1, expected, e.span)?;
                    return Ok((Expr::Local(idx), sort));
                }
                if let Some(&(sort, ci)) = self.ctor_map.get(name) {
                    let arity = match &self.sort_kinds[sort.0 as usize] {
                        SortKind::Datatype(cs) => cs[ci].fields.len(),
                        _ => unreachable!(),
                    };
                    if arity != 0 {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            e.span,
                            format!("constructor '{name}' takes {arity} fields"),
                        ));
                    }
                    let sort = self.expect_sort(sort, expected, e.span)?;
                    return Ok((Expr::Ctor(sort, ci, vec![]), sort));
                }
                Err(cerr(
                    CheckErrorKind::UnknownName,
                    e.span,
                    format!("unknown name '{name}'"),
                ))
            }
            SexpKind::List(items) => {
                let head = items
                    .first()
                    .ok_or_else(|| cerr(CheckErrorKind::SortMismatch, e.span, "empty expression"))?;
                let head_name = head.atom().ok_or_else(|| {
                    cerr(CheckErrorKind::SortMismatch, head.span, "expected an operation name")
                })?;
                if head_name == "match" {
                    return self.check_match(e, items, expected, scope);
                }
                if let Some(op) = Builtin::from_name(head_name) {
                    return self.check_builtin(e, op, &items[1..], expected, scope);
                }
                if let Some(&(sort, ci)) = self.ctor_map.get(head_name) {
                    let fields = match &self.sort_kinds[sort.0 as usize] {
                        SortKind::Datatype(cs) => cs[ci].fields.clone(),
                        _ => unreachable!(),
                    };
                    if items.len() - 1 != fields.len() {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            e.span,
                            format!(
                                "constructor '{head_name}' takes {} fields, given {}",
                                fields.len(),
                                items.len() - 1
                            ),
                        ));
                    }
                    let mut args = Vec::new();
                    for (arg, fsort) in items[1..].iter().zip(fields.iter()) {
                        args.push(self.check_expr(arg, Some(*fsort), scope)?.0);
                    }
                    let sort = self.expect_sort(sort, expected, e.span)?;
                    return Ok((Expr::Ctor(sort, ci, args), sort));
                }
                if let Some(&f) = self.fn_map.get(head_name) {
                    let (params, result) = &self.fn_sigs[f.0 as usize];
                    if items.len() - 1 != params.len() {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            e.span,
                            format!(
                                "function '{head_name}' takes {} arguments, given {}",
                                params.len(),
                                items.len() - 1
                            ),
                        ));
                    }
                    let mut args = Vec::new();
                    for (arg, (_, psort)) in items[1..].iter().zip(params.iter()) {
                        args.push(self.check_expr(arg, Some(*psort), scope)?.0);
                    }
                    let sort = self.expect_sort(*result, expected, e.span)?;
                    return Ok((Expr::Call(f, args), sort));
                }
                Err(cerr(
                    CheckErrorKind::UnknownName,
                    head.span,
                    format!("unknown operation '{head_name}'"),
                ))
            }
        }
    }

    /// Checks a two-argument form where the shared argument sort must be
    /// synthesized from whichever argument can stand alone.
    fn check_same_sort_pair(
        &self,
        a: &Sexp,
        b: &Sexp,
        scope: &mut Vec<(String, SortId)>,
    ) -> Check<(Expr, Expr, SortId)> {
        match self.check_expr(a, None, scope) {
            Ok((ea, sa)) => {
                let (eb, _) = self.check_expr(b, Some(sa), scope)?;
                Ok((ea, eb, sa))
            }
            Err(first_err) => match self.check_expr(b, None, scope) {
                Ok((eb, sb)) => {
                    let (ea, _) = self.check_expr(a, Some(sb), scope)?;
                    Ok((ea, eb, sb))
                }
                Err(_) => Err(first_err),
            },
        }
    }

    fn check_builtin(
        &self,
        whole: &Sexp,
        op: Builtin,
        args: &[Sexp],
        expected: Option<SortId>,
        scope: &mut Vec<(String, SortId)>,
    ) -> Check<(Expr, SortId)> {
        if args.len() != op.arity() {
            return Err(cerr(
                CheckErrorKind::SortMismatch,
                whole.span,
                format!("'{op:?}' takes {} arguments, given {}", op.arity(), args.len()),
            ));
        }
        use Builtin::*;
        match op {
            And | Or | Not => {
                let mut checked = Vec::new();
                for a in args {
                    checked.push(self.check_expr(a, Some(BOOL_SORT), scope)?.0);
                }
                let sort = self.expect_sort(BOOL_SORT, expected, whole.span)?;
                Ok((Expr::Builtin(op, checked), sort))
            }
            Eq | Ne => {
                let (ea, eb, _) = self.check_same_sort_pair(&args[0], &args[1], scope)?;
                let sort = self.expect_sort(BOOL_SORT, expected, whole.span)?;
                Ok((Expr::Builtin(op, vec![ea, eb]), sort))
            }
            Lt | Le | Gt | Ge => {
                let (ea, eb, s) = self.check_same_sort_pair(&args[0], &args[1], scope)?;
                if !self.is_int_sort(s) {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        whole.span,
                        format!("comparison requires an integer sort, found '{}'", self.sort_name(s)),
                    ));
                }
                let sort = self.expect_sort(BOOL_SORT, expected, whole.span)?;
                Ok((Expr::Builtin(op, vec![ea, eb]), sort))
            }
            Add | Sub | Mul | Div | Mod => {
                let (ea, eb, s) = match expected {
                    Some(want) => {
                        let ea = self.check_expr(&args[0], Some(want), scope)?.0;
                        let eb = self.check_expr(&args[1], Some(want), scope)?.0;
                        (ea, eb, want)
                    }
                    None => self.check_same_sort_pair(&args[0], &args[1], scope)?,
                };
                if !self.is_int_sort(s) {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        whole.span,
                        format!("arithmetic requires an integer sort, found '{}'", self.sort_name(s)),
                    ));
                }
                Ok((Expr::Builtin(op, vec![ea, eb]), s))
            }
        }
    }

    fn check_match(
        &self,
        whole: &Sexp,
        items: &[Sexp],
        expected: Option<SortId>,
        scope: &mut Vec<(String, SortId)>,
    ) -> Check<(Expr, SortId)> {
        if items.len() < 3 {
            return Err(cerr(
                CheckErrorKind::SortMismatch,
                whole.span,
                "expected (match EXPR (PATTERN BODY)+)",
            ));
        }
        let (scrut, scrut_sort) = self.check_expr(&items[1], None, scope)?;
        let mut arms = Vec::new();
        let mut result = expected;
        for arm in &items[2..] {
            let parts = arm.list().ok_or_else(|| {
                cerr(CheckErrorKind::SortMismatch, arm.span, "expected (PATTERN BODY)")
            })?;
            if parts.len() != 2 {
                return Err(cerr(
                    CheckErrorKind::SortMismatch,
                    arm.span,
                    "expected (PATTERN BODY)",
                ));
            }
            let depth = scope.len();
            let pattern = self.check_pattern(&parts[0], scrut_sort, scope)?;
            let (body, got) = self.check_expr(&parts[1], result, scope)?;
            scope.truncate(depth);
            result = Some(got);
            arms.push(MatchArm { pattern, body });
        }
        Ok((
            Expr::Match(Box::new(scrut), arms),
            result.expect("at least one arm"),
        ))
    }

    fn check_pattern(
        &self,
        p: &Sexp,
        sort: SortId,
        scope: &mut Vec<(String, SortId)>,
    ) -> Check<Pat> {
        match &p.kind {
            SexpKind::Int(_) => Err(cerr(
                CheckErrorKind::SortMismatch,
                p.span,
                "integer literals cannot be matched; compare with '=' instead",
            )),
            SexpKind::Str(_) => Err(cerr(
                CheckErrorKind::SortMismatch,
                p.span,
                "strings cannot appear in patterns",
            )),
            SexpKind::Atom(name) => {
                if name == "_" {
                    return Ok(Pat::Wildcard);
                }
                if name == "true" || name == "false" {
                    if sort != BOOL_SORT {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            p.span,
                            format!("boolean pattern against sort '{}'", self.sort_name(sort)),
                        ));
                    }
                    return Ok(Pat::Bool(name == "true"));
                }
                if let Some(&(csort, ci)) = self.ctor_map.get(name) {
                    if csort != sort {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            p.span,
                            format!(
                                "constructor '{name}' belongs to sort '{}', not '{}'",
                                self.sort_name(csort),
                                self.sort_name(sort)
                            ),
                        ));
                    }
                    let arity = match &self.sort_kinds[csort.0 as usize] {
                        SortKind::Datatype(cs) => cs[ci].fields.len(),
                        _ => unreachable!(),
                    };
                    if arity != 0 {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            p.span,
                            format!("constructor '{name}' takes {arity} fields"),
                        ));
                    }
                    return Ok(Pat::Ctor(csort, ci, vec![]));
                }
                scope.push((name.clone(), sort));
                Ok(Pat::Bind)
            }
            SexpKind::List(items) => {
                let head = items.first().ok_or_else(|| {
                    cerr(CheckErrorKind::SortMismatch, p.span, "empty pattern")
                })?;
                let name = head.atom().ok_or_else(|| {
                    cerr(CheckErrorKind::SortMismatch, head.span, "expected a constructor name")
                })?;
                let &(csort, ci) = self.ctor_map.get(name).ok_or_else(|| {
                    cerr(CheckErrorKind::UnknownName, head.span, format!("unknown constructor '{name}'"))
                })?;
                if csort != sort {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        head.span,
                        format!(
                            "constructor '{name}' belongs to sort '{}', not '{}'",
                            self.sort_name(csort),
                            self.sort_name(sort)
                        ),
                    ));
                }
                let fields = match &self.sort_kinds[csort.0 as usize] {
                    SortKind::Datatype(cs) => cs[ci].fields.clone(),
                    _ => unreachable!(),
                };
                if items.len() - 1 != fields.len() {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        p.span,
                        format!(
                            "constructor '{name}' takes {} fields, given {}",
                            fields.len(),
                            items.len() - 1
                        ),
                    ));
                }
                let mut sub = Vec::new();
                for (pp, fsort) in items[1..].iter().zip(fields.iter()) {
                    sub.push(self.check_pattern(pp, *fsort, scope)?);
                }
                Ok(Pat::Ctor(csort, ci, sub))
            }
        }
    }

    fn resolve_con(&self, con: &ConClause, stage: usize, background: bool) -> Check<(SymbolDecl, SymbolReferent)> {
        match &con.referent {
            ConRef::Named(name, span) => {
                if let Some(&f) = self.fn_map.get(name) {
                    let (params, result) = &self.fn_sigs[f.0 as usize];
                    Ok((
                        SymbolDecl {
                            name: con.display.clone(),
                            arg_sorts: params.iter().map(|(_, s)| *s).collect(),
                            result_sort: *result,
                            background,
                            stage,
                        },
                        SymbolReferent::Fun(f),
                    ))
                } else if let Some(&(sort, ci)) = self.ctor_map.get(name) {
                    let fields = match &self.sort_kinds[sort.0 as usize] {
                        SortKind::Datatype(cs) => cs[ci].fields.clone(),
                        _ => unreachable!(),
                    };
                    Ok((
                        SymbolDecl {
                            name: con.display.clone(),
                            arg_sorts: fields,
                            result_sort: sort,
                            background,
                            stage,
                        },
                        SymbolReferent::Ctor(sort, ci),
                    ))
                } else {
                    Err(cerr(
                        CheckErrorKind::UnknownName,
                        *span,
                        format!("unknown function or constructor '{name}'"),
                    ))
                }
            }
            ConRef::Lit(value, sort_name, span) => {
                let sort = self.sort_named(sort_name, *span)?;
                if !self.is_int_sort(sort) {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        *span,
                        format!("(lit ...) requires an integer sort, found '{sort_name}'"),
                    ));
                }
                Ok((
                    SymbolDecl {
                        name: con.display.clone(),
                        arg_sorts: vec![],
                        result_sort: sort,
                        background,
                        stage,
                    },
                    SymbolReferent::Lit(value.clone()),
                ))
            }
        }
    }
}

/// Resolves names, checks every definition and signature entry, validates
/// observation specs and generators, and merges options over defaults.
pub fn check_theory(tree: &SyntaxTree) -> Result<Theory, CheckError> {
    let mut cx = Checker {
        tree,
        config: Config::default(),
        sorts: Vec::new(),
        sort_kinds: Vec::new(),
        sort_map: HashMap::new(),
        ctor_map: HashMap::new(),
        fn_map: HashMap::new(),
        fn_sigs: Vec::new(),
    };
    cx.options()?;
    cx.declare_sorts()?;
    cx.declare_functions()?;
    let functions = cx.check_bodies()?;

    // Predicates must be boolean-valued functions.
    let mut predicates = Vec::new();
    for p in &tree.predicates {
        let f = *cx.fn_map.get(&p.fun.0).ok_or_else(|| {
            cerr(CheckErrorKind::UnknownName, p.fun.1, format!("unknown function '{}'", p.fun.0))
        })?;
        let (params, result) = &cx.fn_sigs[f.0 as usize];
        if *result != BOOL_SORT {
            return Err(cerr(
                CheckErrorKind::SortMismatch,
                p.fun.1,
                format!("predicate '{}' must return Bool", p.display),
            ));
        }
        if params.is_empty() {
            return Err(cerr(
                CheckErrorKind::SortMismatch,
                p.fun.1,
                format!("predicate '{}' must take at least one argument", p.display),
            ));
        }
        predicates.push(PredicateDef { name: p.display.clone(), fun: f });
    }

    // Observation specs: the function must be (context, observed) -> result.
    let mut observations: Vec<ObserveSpec> = Vec::new();
    for o in &tree.observes {
        let observed_sort = cx.sort_named(&o.sort.0, o.sort.1)?;
        let context_sort = cx.sort_named(&o.context.0, o.context.1)?;
        let result_sort = cx.sort_named(&o.result.0, o.result.1)?;
        let f = *cx.fn_map.get(&o.via.0).ok_or_else(|| {
            cerr(CheckErrorKind::UnknownName, o.via.1, format!("unknown function '{}'", o.via.0))
        })?;
        let (params, result) = &cx.fn_sigs[f.0 as usize];
        let sig: Vec<SortId> = params.iter().map(|(_, s)| *s).collect();
        if sig != vec![context_sort, observed_sort] || *result != result_sort {
            return Err(cerr(
                CheckErrorKind::BadObservation,
                o.span,
                format!(
                    "observation function '{}' must have signature ({}, {}) -> {}",
                    o.via.0, o.context.0, o.sort.0, o.result.0
                ),
            ));
        }
        if observations.iter().any(|prev| prev.observed_sort == observed_sort) {
            return Err(cerr(
                CheckErrorKind::BadObservation,
                o.span,
                format!("sort '{}' is observed twice", o.sort.0),
            ));
        }
        observations.push(ObserveSpec { observed_sort, context_sort, result_sort, observe_fn: f });
    }
    for o in &tree.observes {
        let result_sort = cx.sort_named(&o.result.0, o.result.1)?;
        if observations.iter().any(|spec| spec.observed_sort == result_sort) {
            return Err(cerr(
                CheckErrorKind::BadObservation,
                o.span,
                "the observation result sort must support structural equality, but it is itself observed",
            ));
        }
    }

    // The staged signature: background symbols join stage 1.
    if tree.stages.is_empty() {
        return Err(cerr(
            CheckErrorKind::EmptyStage,
            tree.span,
            "a theory needs at least one (stage ...) clause",
        ));
    }
    let mut symbols = Vec::new();
    let mut symbol_refs = Vec::new();
    for con in &tree.background {
        let (decl, referent) = cx.resolve_con(con, 1, true)?;
        symbols.push(decl);
        symbol_refs.push(referent);
    }
    for (k, stage) in tree.stages.iter().enumerate() {
        if stage.cons.is_empty() {
            return Err(cerr(
                CheckErrorKind::EmptyStage,
                stage.span,
                format!("stage {} declares no symbols", k + 1),
            ));
        }
        for con in &stage.cons {
            let (decl, referent) = cx.resolve_con(con, k + 1, false)?;
            symbols.push(decl);
            symbol_refs.push(referent);
        }
    }

    let signature = Signature { sorts: cx.sorts.clone(), symbols };

    // Universe specs for the oracle.
    let mut universes = BTreeMap::new();
    for u in &tree.universes {
        let sort = cx.sort_named(&u.sort.0, u.sort.1)?;
        let spec = match &u.spec {
            RawUniverse::Range(lo, hi) => {
                if !cx.is_int_sort(sort) {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        u.span,
                        "(range ...) universes apply to integer sorts",
                    ));
                }
                if lo > hi {
                    return Err(cerr(CheckErrorKind::SortMismatch, u.span, "empty universe range"));
                }
                UniverseSpec::Range(lo.clone(), hi.clone())
            }
            RawUniverse::Depth(n) => {
                if !matches!(cx.sort_kinds[sort.0 as usize], SortKind::Datatype(_)) {
                    return Err(cerr(
                        CheckErrorKind::SortMismatch,
                        u.span,
                        "(depth ...) universes apply to datatypes",
                    ));
                }
                UniverseSpec::Depth(*n)
            }
            RawUniverse::Closure(rounds, names) => {
                let mut ids = Vec::new();
                for (name, span) in names {
                    let found = signature
                        .symbols
                        .iter()
                        .position(|s| &s.name == name)
                        .ok_or_else(|| {
                            cerr(
                                CheckErrorKind::UnknownName,
                                *span,
                                format!("universe closure: no signature symbol named '{name}'"),
                            )
                        })?;
                    if signature.symbols[found].result_sort != sort {
                        return Err(cerr(
                            CheckErrorKind::SortMismatch,
                            *span,
                            format!("closure symbol '{name}' does not produce sort '{}'", u.sort.0),
                        ));
                    }
                    ids.push(SymbolId(found as u32));
                }
                UniverseSpec::Closure { rounds: *rounds, symbols: ids }
            }
        };
        universes.insert(sort, spec);
    }

    let theory = Theory {
        name: tree.name.clone(),
        signature,
        sort_kinds: cx.sort_kinds.clone(),
        symbol_refs,
        functions,
        predicates,
        observations,
        config: cx.config.clone(),
        universes,
    };

    // Every datatype needs a finitely constructible value.
    let mins = theory.min_value_sizes();
    for (i, min) in mins.iter().enumerate() {
        if min.is_none() {
            let name = &theory.signature.sorts[i].name;
            let span = tree
                .sort_decls
                .iter()
                .find(|c| &c.name == name)
                .map(|c| c.span)
                .unwrap_or(tree.span);
            return Err(cerr(
                CheckErrorKind::NoBaseConstructor,
                span,
                format!("sort '{name}' has no base constructor: every value would be infinite"),
            ));
        }
    }

    Ok(theory)
}

/// Parses and checks in one step.
pub fn load_theory(text: &str) -> Result<Theory, FrontendError> {
    Ok(check_theory(&parse_theory(text)?)?)
}

// ---------------------------------------------------------------------------
// Printing (round-trip support)
// ---------------------------------------------------------------------------

/// Renders a checked theory back to the surface syntax. Reparsing the output
/// yields a structurally identical theory; binder and field names are
/// regenerated.
pub fn print_theory(theory: &Theory) -> String {
    let mut out = String::new();
    let p = &mut out;
    use std::fmt::Write;

    writeln!(p, "(theory {}", theory.name).unwrap();
    let c = &theory.config;
    writeln!(
        p,
        "  (options (max-size {}) (max-tests {}) (seed {}) (vars-per-sort {}) (fuel {})\n           (initial-suite {}) (contexts {}) (max-preconditions {}))",
        c.max_term_size,
        c.max_tests,
        c.seed,
        c.vars_per_sort,
        c.fuel,
        c.initial_suite,
        c.contexts_per_case,
        c.max_preconditions
    )
    .unwrap();

    for (i, decl) in theory.signature.sorts.iter().enumerate() {
        let sort = SortId(i as u32);
        if sort == BOOL_SORT {
            continue;
        }
        let vars: Vec<String> = decl.var_names.iter().map(|v| format!("\"{v}\"")).collect();
        match theory.sort_kind(sort) {
            SortKind::Bool => unreachable!(),
            SortKind::IntRange(lo, hi) => {
                writeln!(p, "  (sort {} (int-range {} {}) (vars {}))", decl.name, lo, hi, vars.join(" ")).unwrap();
            }
            SortKind::Datatype(ctors) => {
                let rendered: Vec<String> = ctors
                    .iter()
                    .map(|ct| {
                        if ct.fields.is_empty() {
                            format!("({})", ct.name)
                        } else {
                            let fs: Vec<String> = ct
                                .fields
                                .iter()
                                .enumerate()
                                .map(|(j, f)| {
                                    format!("(f{} {})", j, theory.signature.sort(*f).name)
                                })
                                .collect();
                            format!("({} {})", ct.name, fs.join(" "))
                        }
                    })
                    .collect();
                writeln!(
                    p,
                    "  (declare-datatype {} ({}) (vars {}))",
                    decl.name,
                    rendered.join(" "),
                    vars.join(" ")
                )
                .unwrap();
            }
        }
    }

    for f in &theory.functions {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|(n, s)| format!("({} {})", n, theory.signature.sort(*s).name))
            .collect();
        let mut names: Vec<String> = f.params.iter().map(|(n, _)| n.clone()).collect();
        let body = print_expr(&f.body, theory, &mut names);
        writeln!(
            p,
            "  (define-fun {} ({}) {} {})",
            f.name,
            params.join(" "),
            theory.signature.sort(f.result).name,
            body
        )
        .unwrap();
    }

    for pred in &theory.predicates {
        writeln!(p, "  (predicate \"{}\" {})", pred.name, theory.fun(pred.fun).name).unwrap();
    }

    for o in &theory.observations {
        writeln!(
            p,
            "  (observe {} (context {}) (result {}) (via {}))",
            theory.signature.sort(o.observed_sort).name,
            theory.signature.sort(o.context_sort).name,
            theory.signature.sort(o.result_sort).name,
            theory.fun(o.observe_fn).name
        )
        .unwrap();
    }

    let render_con = |i: usize| -> String {
        let decl = &theory.signature.symbols[i];
        let referent = match &theory.symbol_refs[i] {
            SymbolReferent::Fun(f) => theory.fun(*f).name.clone(),
            SymbolReferent::Ctor(sort, ci) => theory.ctor(*sort, *ci).name.clone(),
            SymbolReferent::Lit(n) => {
                format!("(lit {} {})", n, theory.signature.sort(decl.result_sort).name)
            }
        };
        format!("(con \"{}\" {})", decl.name, referent)
    };

    let background: Vec<String> = theory
        .signature
        .symbols
        .iter()
        .enumerate()
        .filter(|(_, s)| s.background)
        .map(|(i, _)| render_con(i))
        .collect();
    if !background.is_empty() {
        writeln!(p, "  (background {})", background.join(" ")).unwrap();
    }
    for stage in 1..=theory.stage_count() {
        let cons: Vec<String> = theory
            .signature
            .symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.background && s.stage == stage)
            .map(|(i, _)| render_con(i))
            .collect();
        if !cons.is_empty() {
            writeln!(p, "  (stage {})", cons.join(" ")).unwrap();
        }
    }

    if !theory.universes.is_empty() {
        let entries: Vec<String> = theory
            .universes
            .iter()
            .map(|(sort, spec)| {
                let name = &theory.signature.sort(*sort).name;
                match spec {
                    UniverseSpec::Range(lo, hi) => format!("({name} (range {lo} {hi}))"),
                    UniverseSpec::Depth(n) => format!("({name} (depth {n}))"),
                    UniverseSpec::Closure { rounds, symbols } => {
                        let syms: Vec<String> = symbols
                            .iter()
                            .map(|s| theory.signature.symbol(*s).name.clone())
                            .collect();
                        format!("({name} (closure {rounds} {}))", syms.join(" "))
                    }
                }
            })
            .collect();
        writeln!(p, "  (universe {})", entries.join(" ")).unwrap();
    }

    out.push(')');
    out.push('\n');
    out
}

fn print_expr(e: &Expr, theory: &Theory, names: &mut Vec<String>) -> String {
    match e {
        Expr::Local(i) => names[*i].clone(),
        Expr::Int(n) => n.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::Ctor(sort, ci, args) => {
            let name = &theory.ctor(*sort, *ci).name;
            if args.is_empty() {
                name.clone()
            } else {
                let rendered: Vec<String> =
                    args.iter().map(|a| print_expr(a, theory, names)).collect();
                format!("({} {})", name, rendered.join(" "))
            }
        }
        Expr::Call(f, args) => {
            let rendered: Vec<String> = args.iter().map(|a| print_expr(a, theory, names)).collect();
            if rendered.is_empty() {
                format!("({})", theory.fun(*f).name)
            } else {
                format!("({} {})", theory.fun(*f).name, rendered.join(" "))
            }
        }
        Expr::Builtin(op, args) => {
            let name = match op {
                Builtin::Add => "+",
                Builtin::Sub => "-",
                Builtin::Mul => "*",
                Builtin::Div => "div",
                Builtin::Mod => "mod",
                Builtin::Eq => "=",
                Builtin::Ne => "/=",
                Builtin::Lt => "<",
                Builtin::Le => "<=",
                Builtin::Gt => ">",
                Builtin::Ge => ">=",
                Builtin::And => "and",
                Builtin::Or => "or",
                Builtin::Not => "not",
            };
            let rendered: Vec<String> = args.iter().map(|a| print_expr(a, theory, names)).collect();
            format!("({} {})", name, rendered.join(" "))
        }
        Expr::Match(scrut, arms) => {
            let mut s = format!("(match {}", print_expr(scrut, theory, names));
            for arm in arms {
                let depth = names.len();
                let pat = print_pattern(&arm.pattern, theory, names);
                let body = print_expr(&arm.body, theory, names);
                names.truncate(depth);
                s.push_str(&format!(" ({pat} {body})"));
            }
            s.push(')');
            s
        }
    }
}

fn print_pattern(pat: &Pat, theory: &Theory, names: &mut Vec<String>) -> String {
    match pat {
        Pat::Wildcard => "_".to_string(),
        Pat::Bool(b) => b.to_string(),
        Pat::Bind => {
            let mut i = names.len();
            let mut candidate = format!("_m{i}");
            while names.contains(&candidate) {
                i += 1;
                candidate = format!("_m{i}");
            }
            names.push(candidate.clone());
            candidate
        }
        Pat::Ctor(sort, ci, sub) => {
            let name = &theory.ctor(*sort, *ci).name;
            if sub.is_empty() {
                name.clone()
            } else {
                let rendered: Vec<String> =
                    sub.iter().map(|s| print_pattern(s, theory, names)).collect();
                format!("({} {})", name, rendered.join(" "))
            }
        }
    }
}
