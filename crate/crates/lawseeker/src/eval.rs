//! Evaluation of terms over user-defined functions, random test data
//! generation, observational equality, and term fingerprints.
//!
//! Evaluation is totalized: runaway recursion, incomplete matches, and
//! division by zero all surface as `Undefined` outcomes instead of hanging
//! or panicking.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rng::RandomStream;
use crate::term::{SortId, Term, Variable};
use crate::theory::{Builtin, Expr, FnId, Pat, SortKind, Theory, BOOL_SORT};

/// A runtime value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    /// Datatype value: sort, constructor index, fields.
    Con(SortId, usize, Vec<Value>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn render(&self, theory: &Theory) -> String {
        match self {
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Con(sort, idx, fields) => {
                let name = &theory.ctor(*sort, *idx).name;
                if fields.is_empty() {
                    name.clone()
                } else {
                    let inner: Vec<String> = fields.iter().map(|f| f.render(theory)).collect();
                    format!("({} {})", name, inner.join(" "))
                }
            }
            Value::Tuple(items) => {
                let inner: Vec<String> = items.iter().map(|f| f.render(theory)).collect();
                format!("(tuple {})", inner.join(" "))
            }
        }
    }
}

/// Why an evaluation failed to produce a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UndefinedReason {
    FuelExhausted,
    PartialMatch,
    DivByZero,
}

/// Totalized evaluation result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Defined(Value),
    Undefined(UndefinedReason),
}

impl Outcome {
    pub fn defined(&self) -> Option<&Value> {
        match self {
            Outcome::Defined(v) => Some(v),
            Outcome::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Outcome::Defined(_))
    }
}

/// One random test input: a valuation for every declared variable plus
/// observation contexts for each observed sort.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub valuation: BTreeMap<Variable, Value>,
    pub contexts: BTreeMap<SortId, Vec<Value>>,
}

impl TestCase {
    pub fn value_of(&self, v: Variable) -> &Value {
        self.valuation
            .get(&v)
            .unwrap_or_else(|| panic!("test case is missing variable {v:?}"))
    }
}

/// Nested calls deeper than this are reported as fuel exhaustion before the
/// host stack can overflow.
const MAX_CALL_DEPTH: usize = 1024;

struct EvalCtx<'t> {
    theory: &'t Theory,
    fuel: u64,
    depth: usize,
}

type Eval = Result<Value, UndefinedReason>;

impl<'t> EvalCtx<'t> {
    fn spend(&mut self) -> Result<(), UndefinedReason> {
        if self.fuel == 0 {
            return Err(UndefinedReason::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn call(&mut self, f: FnId, args: Vec<Value>) -> Eval {
        self.spend()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(UndefinedReason::FuelExhausted);
        }
        self.depth += 1;
        let def = self.theory.fun(f);
        let mut env = args;
        let out = self.expr(&def.body, &mut env);
        self.depth -= 1;
        out
    }

    fn expr(&mut self, e: &Expr, env: &mut Vec<Value>) -> Eval {
        match e {
            Expr::Local(i) => Ok(env[*i].clone()),
            Expr::Int(n) => Ok(Value::Int(n.clone())),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Ctor(sort, idx, args) => {
                let mut fields = Vec::with_capacity(args.len());
                for a in args {
                    fields.push(self.expr(a, env)?);
                }
                Ok(Value::Con(*sort, *idx, fields))
            }
            Expr::Call(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(a, env)?);
                }
                self.call(*f, vals)
            }
            Expr::Builtin(op, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(a, env)?);
                }
                self.spend()?;
                apply_builtin(*op, &vals)
            }
            Expr::Match(scrutinee, arms) => {
                let v = self.expr(scrutinee, env)?;
                for arm in arms {
                    let depth = env.len();
                    if bind_pattern(&arm.pattern, &v, env) {
                        let out = self.expr(&arm.body, env);
                        env.truncate(depth);
                        return out;
                    }
                    env.truncate(depth);
                }
                Err(UndefinedReason::PartialMatch)
            }
        }
    }
}

/// Matches a value against a pattern, pushing bindings in preorder.
fn bind_pattern(pat: &Pat, v: &Value, env: &mut Vec<Value>) -> bool {
    match pat {
        Pat::Wildcard => true,
        Pat::Bind => {
            env.push(v.clone());
            true
        }
        Pat::Bool(want) => matches!(v, Value::Bool(b) if b == want),
        Pat::Ctor(sort, idx, sub) => match v {
            Value::Con(vs, vi, fields) if vs == sort && vi == idx => sub
                .iter()
                .zip(fields.iter())
                .all(|(p, f)| bind_pattern(p, f, env)),
            _ => false,
        },
    }
}

fn apply_builtin(op: Builtin, args: &[Value]) -> Eval {
    use Builtin::*;
    fn int(v: &Value) -> &BigInt {
        match v {
            Value::Int(n) => n,
            other => panic!("builtin applied to non-integer value {other:?}"),
        }
    }
    fn boolean(v: &Value) -> bool {
        match v {
            Value::Bool(b) => *b,
            other => panic!("builtin applied to non-boolean value {other:?}"),
        }
    }
    Ok(match op {
        Add => Value::Int(int(&args[0]) + int(&args[1])),
        Sub => Value::Int(int(&args[0]) - int(&args[1])),
        Mul => Value::Int(int(&args[0]) * int(&args[1])),
        Div | Mod => {
            let (a, b) = (int(&args[0]), int(&args[1]));
            if b == &BigInt::ZERO {
                return Err(UndefinedReason::DivByZero);
            }
            // Floor semantics so results stay canonical for negative inputs.
            match op {
                Div => Value::Int(a.div_floor(b)),
                _ => Value::Int(a.mod_floor(b)),
            }
        }
        Eq => Value::Bool(args[0] == args[1]),
        Ne => Value::Bool(args[0] != args[1]),
        Lt => Value::Bool(int(&args[0]) < int(&args[1])),
        Le => Value::Bool(int(&args[0]) <= int(&args[1])),
        Gt => Value::Bool(int(&args[0]) > int(&args[1])),
        Ge => Value::Bool(int(&args[0]) >= int(&args[1])),
        And => Value::Bool(boolean(&args[0]) && boolean(&args[1])),
        Or => Value::Bool(boolean(&args[0]) || boolean(&args[1])),
        Not => Value::Bool(!boolean(&args[0])),
    })
}

/// Call-by-value interpretation of a term under a test case. Every function
/// call and built-in application consumes one unit of fuel.
pub fn eval_term(t: &Term, tc: &TestCase, theory: &Theory, fuel: u64) -> Outcome {
    let mut ctx = EvalCtx { theory, fuel, depth: 0 };
    match eval_term_inner(t, tc, &mut ctx) {
        Ok(v) => Outcome::Defined(v),
        Err(r) => Outcome::Undefined(r),
    }
}

fn eval_term_inner(t: &Term, tc: &TestCase, ctx: &mut EvalCtx) -> Eval {
    match t {
        Term::Var(v) => Ok(tc.value_of(*v).clone()),
        Term::App(sym, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_term_inner(a, tc, ctx)?);
            }
            apply_symbol(*sym, vals, ctx)
        }
    }
}

fn apply_symbol(sym: crate::term::SymbolId, args: Vec<Value>, ctx: &mut EvalCtx) -> Eval {
    use crate::theory::SymbolReferent::*;
    match &ctx.theory.symbol_refs[sym.0 as usize] {
        Fun(f) => ctx.call(*f, args),
        Ctor(sort, idx) => Ok(Value::Con(*sort, *idx, args)),
        Lit(n) => Ok(Value::Int(n.clone())),
    }
}

/// Applies a defined function to already-evaluated arguments. Used for
/// predicates and observation functions.
pub fn call_function(theory: &Theory, f: FnId, args: Vec<Value>, fuel: u64) -> Outcome {
    let mut ctx = EvalCtx { theory, fuel, depth: 0 };
    match ctx.call(f, args) {
        Ok(v) => Outcome::Defined(v),
        Err(r) => Outcome::Undefined(r),
    }
}

/// Applies a signature symbol to already-evaluated arguments.
pub fn apply_symbol_values(
    theory: &Theory,
    sym: crate::term::SymbolId,
    args: Vec<Value>,
    fuel: u64,
) -> Outcome {
    let mut ctx = EvalCtx { theory, fuel, depth: 0 };
    match apply_symbol(sym, args, &mut ctx) {
        Ok(v) => Outcome::Defined(v),
        Err(r) => Outcome::Undefined(r),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("sort '{0}' has no finite value: every constructor is recursive")]
    NoFiniteValue(String),
}

/// Maximum size budget handed to datatype draws; each draw picks a budget
/// uniformly up to this, which mixes small and mid-sized structures. Large
/// enough that nested structures (a pair of lists, say) can still reach
/// sizes that refute bounded-size near-laws.
pub const DATATYPE_BUDGET_MAX: u64 = 24;

/// Draws a random value of a sort. Integer sorts draw uniformly from their
/// declared range; datatypes pick uniformly among the constructors whose
/// minimal value fits the remaining budget and split the budget evenly
/// across datatype fields.
pub fn generate_value(
    theory: &Theory,
    sort: SortId,
    size_budget: usize,
    rng: &mut RandomStream,
) -> Result<Value, GeneratorError> {
    let min = theory.min_value_sizes();
    gen_value(theory, &min, sort, size_budget, rng)
}

fn gen_value(
    theory: &Theory,
    min: &[Option<usize>],
    sort: SortId,
    budget: usize,
    rng: &mut RandomStream,
) -> Result<Value, GeneratorError> {
    match theory.sort_kind(sort) {
        SortKind::Bool => Ok(Value::Bool(rng.bool())),
        SortKind::IntRange(lo, hi) => {
            let width = (hi - lo)
                .to_u64()
                .expect("integer range width checked at theory load");
            Ok(Value::Int(lo + BigInt::from(rng.below_inclusive(width))))
        }
        SortKind::Datatype(ctors) => {
            let ctor_min = |idx: usize| -> Option<usize> {
                let mut total = 1usize;
                for f in &ctors[idx].fields {
                    total += min[f.0 as usize]?;
                }
                Some(total)
            };
            let fitting: Vec<usize> = (0..ctors.len())
                .filter(|&i| ctor_min(i).is_some_and(|m| m <= budget))
                .collect();
            let choice = if fitting.is_empty() {
                // Nothing fits: fall back to the smallest constructor so
                // generation always terminates.
                (0..ctors.len())
                    .filter(|&i| ctor_min(i).is_some())
                    .min_by_key(|&i| ctor_min(i).unwrap())
                    .ok_or_else(|| {
                        GeneratorError::NoFiniteValue(theory.signature.sort(sort).name.clone())
                    })?
            } else {
                fitting[rng.index(fitting.len())]
            };
            let fields = &ctors[choice].fields;
            let datatype_fields = fields
                .iter()
                .filter(|f| matches!(theory.sort_kind(**f), SortKind::Datatype(_)))
                .count();
            let share = budget
                .saturating_sub(1)
                .checked_div(datatype_fields)
                .unwrap_or(0);
            let mut vals = Vec::with_capacity(fields.len());
            for f in fields.clone() {
                vals.push(gen_value(theory, min, f, share, rng)?);
            }
            Ok(Value::Con(sort, choice, vals))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("predicate '{predicate}' rejected {attempts} consecutive test cases")]
pub struct ConditionExhausted {
    pub predicate: String,
    pub attempts: usize,
}

/// Rejection-sampling cap for conditioned test cases.
pub const REJECTION_CAP: usize = 1000;

/// Fills every declared variable and the observation contexts of each
/// observed sort. With a condition, keeps drawing until the predicate holds
/// on the named variables, up to [`REJECTION_CAP`] attempts.
pub fn generate_testcase(
    theory: &Theory,
    rng: &mut RandomStream,
    condition: Option<(FnId, &[Variable])>,
) -> Result<TestCase, ConditionExhausted> {
    let min = theory.min_value_sizes();
    let attempts = if condition.is_some() { REJECTION_CAP } else { 1 };
    for _ in 0..attempts {
        let tc = draw_case(theory, &min, rng);
        match condition {
            None => return Ok(tc),
            Some((f, vars)) => {
                let args: Vec<Value> = vars.iter().map(|v| tc.value_of(*v).clone()).collect();
                if call_function(theory, f, args, theory.config.fuel)
                    == Outcome::Defined(Value::Bool(true))
                {
                    return Ok(tc);
                }
            }
        }
    }
    let (f, _) = condition.expect("unconditional generation cannot exhaust");
    Err(ConditionExhausted {
        predicate: theory.fun(f).name.clone(),
        attempts: REJECTION_CAP,
    })
}

fn draw_case(theory: &Theory, min: &[Option<usize>], rng: &mut RandomStream) -> TestCase {
    let mut valuation = BTreeMap::new();
    for (si, decl) in theory.signature.sorts.iter().enumerate() {
        let sort = SortId(si as u32);
        if sort == BOOL_SORT && decl.var_names.is_empty() {
            continue;
        }
        for index in 0..decl.var_names.len() as u32 {
            let budget = rng.below_inclusive(DATATYPE_BUDGET_MAX) as usize;
            let v = gen_value(theory, min, sort, budget, rng)
                .expect("generator validity is checked at theory load");
            valuation.insert(Variable { sort, index }, v);
        }
    }
    let mut contexts = BTreeMap::new();
    for obs in &theory.observations {
        let mut ctxs = Vec::with_capacity(theory.config.contexts_per_case);
        for _ in 0..theory.config.contexts_per_case {
            let budget = rng.below_inclusive(DATATYPE_BUDGET_MAX) as usize;
            ctxs.push(
                gen_value(theory, min, obs.context_sort, budget, rng)
                    .expect("generator validity is checked at theory load"),
            );
        }
        contexts.insert(obs.observed_sort, ctxs);
    }
    TestCase { valuation, contexts }
}

/// Applies the sort's observation function to the value under each context.
/// Sorts without an observation spec observe as themselves.
pub fn observe_value(
    v: &Value,
    sort: SortId,
    contexts: &[Value],
    theory: &Theory,
    fuel: u64,
) -> Vec<Outcome> {
    match theory.observation_for(sort) {
        None => vec![Outcome::Defined(v.clone())],
        Some(spec) => contexts
            .iter()
            .map(|c| call_function(theory, spec.observe_fn, vec![c.clone(), v.clone()], fuel))
            .collect(),
    }
}

/// Observed outcome of a term on one test case.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CaseObs {
    Undefined(UndefinedReason),
    Plain(Value),
    Observed(Vec<Outcome>),
}

impl CaseObs {
    pub fn fully_defined(&self) -> bool {
        match self {
            CaseObs::Undefined(_) => false,
            CaseObs::Plain(_) => true,
            CaseObs::Observed(outs) => outs.iter().all(Outcome::is_defined),
        }
    }
}

/// Ordered observed outcomes of a term over a suite. Equal fingerprints make
/// two terms a candidate equation; different fingerprints are a replayable
/// witness of inequality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Fingerprint {
    pub cases: Vec<CaseObs>,
}

impl Fingerprint {
    /// Every case evaluated and observed without an `Undefined`.
    pub fn all_defined(&self) -> bool {
        self.cases.iter().all(CaseObs::fully_defined)
    }

    /// Terms undefined on more than half the suite are excluded from
    /// conjecture formation and from enumeration building blocks.
    pub fn reliable(&self) -> bool {
        let undefined = self.cases.iter().filter(|c| !c.fully_defined()).count();
        undefined * 2 <= self.cases.len()
    }

    /// Deterministic 64-bit digest used to bucket fingerprints.
    pub fn stable_hash(&self) -> u64 {
        use std::hash::Hash;
        let mut h = Fnv1a(0xcbf29ce484222325);
        self.cases.hash(&mut h);
        h.0
    }
}

/// FNV-1a; fixed keys so bucketing is reproducible across runs.
struct Fnv1a(u64);

impl std::hash::Hasher for Fnv1a {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= *b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
}

/// Observed outcome of `t` on a single case.
pub fn case_observation(t: &Term, tc: &TestCase, theory: &Theory, fuel: u64) -> CaseObs {
    match eval_term(t, tc, theory, fuel) {
        Outcome::Undefined(r) => CaseObs::Undefined(r),
        Outcome::Defined(v) => {
            let sort = t.sort(&theory.signature);
            match theory.observation_for(sort) {
                None => CaseObs::Plain(v),
                Some(_) => {
                    let empty = Vec::new();
                    let ctxs = tc.contexts.get(&sort).unwrap_or(&empty);
                    CaseObs::Observed(observe_value(&v, sort, ctxs, theory, fuel))
                }
            }
        }
    }
}

/// Fingerprint of `t` over the whole suite, in suite order.
pub fn fingerprint(t: &Term, suite: &[TestCase], theory: &Theory, fuel: u64) -> Fingerprint {
    Fingerprint {
        cases: suite
            .iter()
            .map(|tc| case_observation(t, tc, theory, fuel))
            .collect(),
    }
}
