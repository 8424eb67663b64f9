//! The checked theory model: sorts backed by integer ranges or datatypes,
//! pattern-matching function definitions, the staged signature, predicates,
//! observation specs, and run options.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::term::{Signature, SortId, SymbolId};

/// Index of a defined function in [`Theory::functions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnId(pub u32);

/// What a sort's values look like.
#[derive(Debug, Clone, PartialEq)]
pub enum SortKind {
    /// The built-in boolean sort.
    Bool,
    /// Arbitrary-precision integers; the range bounds random generation only.
    IntRange(BigInt, BigInt),
    /// An algebraic datatype.
    Datatype(Vec<CtorDecl>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtorDecl {
    pub name: String,
    pub fields: Vec<SortId>,
}

/// What a signature symbol denotes when evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolReferent {
    Fun(FnId),
    Ctor(SortId, usize),
    Lit(BigInt),
}

/// A function definition: parameters, result sort, and a body expression.
/// Parameters occupy the first local slots of the evaluation environment.
#[derive(Debug, Clone, PartialEq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<(String, SortId)>,
    pub result: SortId,
    pub body: Expr,
}

/// Body expressions. `Local` indexes the flat environment of enclosing
/// parameters and match bindings, innermost bindings pushed last.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Local(usize),
    Int(BigInt),
    Bool(bool),
    Ctor(SortId, usize, Vec<Expr>),
    Call(FnId, Vec<Expr>),
    Builtin(Builtin, Vec<Expr>),
    Match(Box<Expr>, Vec<MatchArm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchArm {
    pub pattern: Pat,
    pub body: Expr,
}

/// First-match patterns over constructors and variables; no guards.
/// Bindings extend the environment in preorder, left to right.
#[derive(Debug, Clone, PartialEq)]
pub enum Pat {
    Wildcard,
    Bind,
    Bool(bool),
    Ctor(SortId, usize, Vec<Pat>),
}

impl Pat {
    /// Number of environment slots this pattern binds.
    pub fn binder_count(&self) -> usize {
        match self {
            Pat::Wildcard | Pat::Bool(_) => 0,
            Pat::Bind => 1,
            Pat::Ctor(_, _, ps) => ps.iter().map(Pat::binder_count).sum(),
        }
    }
}

/// Built-in integer and boolean operations available in function bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "+" => Builtin::Add,
            "-" => Builtin::Sub,
            "*" => Builtin::Mul,
            "div" => Builtin::Div,
            "mod" => Builtin::Mod,
            "=" => Builtin::Eq,
            "/=" => Builtin::Ne,
            "<" => Builtin::Lt,
            "<=" => Builtin::Le,
            ">" => Builtin::Gt,
            ">=" => Builtin::Ge,
            "and" => Builtin::And,
            "or" => Builtin::Or,
            "not" => Builtin::Not,
            _ => return None,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            Builtin::Not => 1,
            _ => 2,
        }
    }
}

/// A declared precondition predicate: a printing name plus a boolean-valued
/// function over the sorts of its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDef {
    pub name: String,
    pub fun: FnId,
}

/// Observational equality for one sort: values are compared by the results
/// of `observe_fn(context, value)` over randomly drawn contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserveSpec {
    pub observed_sort: SortId,
    pub context_sort: SortId,
    pub result_sort: SortId,
    pub observe_fn: FnId,
}

/// How the brute-force oracle builds the finite value universe for a sort.
#[derive(Debug, Clone, PartialEq)]
pub enum UniverseSpec {
    /// Every integer in the range.
    Range(BigInt, BigInt),
    /// Every datatype value of depth at most `n`.
    Depth(usize),
    /// Closure of the listed signature symbols applied up to `n` rounds,
    /// starting from the listed constants.
    Closure { rounds: usize, symbols: Vec<SymbolId> },
}

/// Run options. File `(options ...)` entries and CLI flags override these
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub max_term_size: usize,
    pub max_tests: usize,
    pub seed: u64,
    pub vars_per_sort: usize,
    pub fuel: u64,
    pub initial_suite: usize,
    pub contexts_per_case: usize,
    pub max_preconditions: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            max_term_size: 7,
            max_tests: 1000,
            seed: 0,
            vars_per_sort: 3,
            fuel: 100_000,
            initial_suite: 20,
            contexts_per_case: 2,
            max_preconditions: 1,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_term_size < 1 {
            return Err("max-size must be at least 1".into());
        }
        for (name, v) in [
            ("max-tests", self.max_tests),
            ("vars-per-sort", self.vars_per_sort),
            ("initial-suite", self.initial_suite),
            ("contexts", self.contexts_per_case),
            ("max-preconditions", self.max_preconditions),
        ] {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.fuel == 0 {
            return Err("fuel must be positive".into());
        }
        Ok(())
    }
}

/// A checked theory, ready for evaluation and exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub name: String,
    /// Sort and symbol declarations; indices here are the `SortId` /
    /// `SymbolId` spaces. `sorts[0]` is always the built-in `Bool`.
    pub signature: Signature,
    /// Parallel to `signature.sorts`.
    pub sort_kinds: Vec<SortKind>,
    /// Parallel to `signature.symbols`.
    pub symbol_refs: Vec<SymbolReferent>,
    pub functions: Vec<FunDef>,
    pub predicates: Vec<PredicateDef>,
    pub observations: Vec<ObserveSpec>,
    pub config: Config,
    pub universes: BTreeMap<SortId, UniverseSpec>,
}

pub const BOOL_SORT: SortId = SortId(0);

impl Theory {
    pub fn fun(&self, id: FnId) -> &FunDef {
        &self.functions[id.0 as usize]
    }

    pub fn sort_kind(&self, sort: SortId) -> &SortKind {
        &self.sort_kinds[sort.0 as usize]
    }

    pub fn ctor(&self, sort: SortId, idx: usize) -> &CtorDecl {
        match self.sort_kind(sort) {
            SortKind::Datatype(ctors) => &ctors[idx],
            _ => panic!("sort #{} is not a datatype", sort.0),
        }
    }

    pub fn observation_for(&self, sort: SortId) -> Option<&ObserveSpec> {
        self.observations.iter().find(|o| o.observed_sort == sort)
    }

    /// Number of exploration stages (the largest stage index declared).
    pub fn stage_count(&self) -> usize {
        self.signature
            .symbols
            .iter()
            .map(|s| s.stage)
            .max()
            .unwrap_or(0)
    }

    /// Sorts that can appear in enumerated terms: every sort mentioned by a
    /// signature symbol, plus the sorts of all signature symbols' results.
    pub fn sorts_in_play(&self) -> Vec<SortId> {
        let mut seen = vec![false; self.signature.sorts.len()];
        for sym in &self.signature.symbols {
            seen[sym.result_sort.0 as usize] = true;
            for s in &sym.arg_sorts {
                seen[s.0 as usize] = true;
            }
        }
        (0..self.signature.sorts.len() as u32)
            .map(SortId)
            .filter(|s| seen[s.0 as usize])
            .collect()
    }

    /// Minimal term-size of a value per sort; `None` when the sort has no
    /// finite value (a datatype without a base constructor).
    pub fn min_value_sizes(&self) -> Vec<Option<usize>> {
        let n = self.signature.sorts.len();
        let mut min: Vec<Option<usize>> = vec![None; n];
        for (i, kind) in self.sort_kinds.iter().enumerate() {
            match kind {
                SortKind::Bool | SortKind::IntRange(..) => min[i] = Some(1),
                SortKind::Datatype(_) => {}
            }
        }
        loop {
            let mut changed = false;
            for (i, kind) in self.sort_kinds.iter().enumerate() {
                if let SortKind::Datatype(ctors) = kind {
                    for ctor in ctors {
                        let mut total = 1usize;
                        let mut ok = true;
                        for f in &ctor.fields {
                            match min[f.0 as usize] {
                                Some(m) => total += m,
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if ok && min[i].is_none_or(|cur| total < cur) {
                            min[i] = Some(total);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return min;
            }
        }
    }

    /// Oracle universe spec for a sort: the declared one, or the default
    /// (declared range for integer sorts, depth 4 for datatypes).
    pub fn universe_spec(&self, sort: SortId) -> UniverseSpec {
        if let Some(spec) = self.universes.get(&sort) {
            return spec.clone();
        }
        match self.sort_kind(sort) {
            SortKind::Bool => UniverseSpec::Depth(1),
            SortKind::IntRange(lo, hi) => UniverseSpec::Range(lo.clone(), hi.clone()),
            SortKind::Datatype(_) => UniverseSpec::Depth(4),
        }
    }
}
