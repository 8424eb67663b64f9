//! Independent brute-force verification of emitted laws over finite value
//! universes. This is the soundness backstop: a law that testing let
//! through but the universe refutes is a bug worth failing a build over.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::eval::{call_function, case_observation, CaseObs, Outcome, TestCase, Value};
use crate::explore::Conjecture;
use crate::term::{SortId, Variable};
use crate::theory::{SortKind, Theory, UniverseSpec};

/// Exhaustive finite value sets per sort.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    pub values: BTreeMap<SortId, Vec<Value>>,
}

impl Universe {
    pub fn sort_values(&self, sort: SortId) -> &[Value] {
        self.values
            .get(&sort)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }
}

/// Verdict of an exhaustive check.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Holds,
    Counterexample(TestCase),
    /// Fraction of non-skipped valuations that evaluated `Undefined`.
    Inconclusive(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("universe for sort '{0}' is empty")]
    EmptySort(String),
    #[error("universe too large: {valuations} valuations exceed the cap of {cap}")]
    UniverseTooLarge { valuations: u128, cap: u64 },
    #[error("universe for sort '{sort}' overflowed the value cap of {cap}")]
    SortTooLarge { sort: String, cap: usize },
}

/// Valuations beyond this abort the check instead of spinning.
pub const VALUATION_CAP: u64 = 10_000_000;
/// Per-sort value cap during universe construction.
pub const SORT_VALUE_CAP: usize = 200_000;

/// Builds the universe for every sort of the theory from its declared or
/// defaulted universe specs.
pub fn build_universe(theory: &Theory) -> Result<Universe, OracleError> {
    let mut uni = Universe::default();
    // Non-closure sorts first; closures may draw arguments from them.
    let mut closures = Vec::new();
    for si in 0..theory.signature.sorts.len() as u32 {
        let sort = SortId(si);
        match theory.universe_spec(sort) {
            UniverseSpec::Range(lo, hi) => {
                let mut vals = Vec::new();
                let mut n = lo.clone();
                while n <= hi {
                    vals.push(Value::Int(n.clone()));
                    n += 1;
                }
                uni.values.insert(sort, vals);
            }
            UniverseSpec::Depth(d) => {
                let vals = match theory.sort_kind(sort) {
                    SortKind::Bool => vec![Value::Bool(false), Value::Bool(true)],
                    _ => depth_values(theory, sort, d)?,
                };
                uni.values.insert(sort, vals);
            }
            UniverseSpec::Closure { rounds, symbols } => closures.push((sort, rounds, symbols)),
        }
    }
    for (sort, rounds, symbols) in closures {
        let vals = closure_values(theory, &uni, rounds, &symbols)?;
        if vals.is_empty() {
            return Err(OracleError::EmptySort(
                theory.signature.sort(sort).name.clone(),
            ));
        }
        uni.values.insert(sort, vals);
    }
    Ok(uni)
}

/// Every value of a datatype with constructor nesting depth at most `d`.
fn depth_values(theory: &Theory, sort: SortId, d: usize) -> Result<Vec<Value>, OracleError> {
    match theory.sort_kind(sort) {
        SortKind::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
        SortKind::IntRange(lo, hi) => {
            let mut vals = Vec::new();
            let mut n = lo.clone();
            while &n <= hi {
                vals.push(Value::Int(n.clone()));
                n += 1;
            }
            Ok(vals)
        }
        SortKind::Datatype(ctors) => {
            if d == 0 {
                return Ok(vec![]);
            }
            let mut out = Vec::new();
            for (ci, ctor) in ctors.iter().enumerate() {
                let mut fields_values: Vec<Vec<Value>> = Vec::new();
                for f in &ctor.fields {
                    fields_values.push(depth_values(theory, *f, d - 1)?);
                }
                let mut tuple: Vec<Value> = Vec::new();
                product(&fields_values, &mut tuple, &mut |vals| {
                    out.push(Value::Con(sort, ci, vals.to_vec()));
                });
                if out.len() > SORT_VALUE_CAP {
                    return Err(OracleError::SortTooLarge {
                        sort: theory.signature.sort(sort).name.clone(),
                        cap: SORT_VALUE_CAP,
                    });
                }
            }
            Ok(out)
        }
    }
}

fn product(pools: &[Vec<Value>], current: &mut Vec<Value>, f: &mut impl FnMut(&[Value])) {
    if current.len() == pools.len() {
        f(current);
        return;
    }
    let pos = current.len();
    for v in &pools[pos] {
        current.push(v.clone());
        product(pools, current, f);
        current.pop();
    }
}

/// Closure construction: start from the nullary listed symbols and apply the
/// others for `rounds` rounds, drawing non-closure arguments from their
/// already-built universes.
fn closure_values(
    theory: &Theory,
    uni: &Universe,
    rounds: usize,
    symbols: &[crate::term::SymbolId],
) -> Result<Vec<Value>, OracleError> {
    let fuel = theory.config.fuel;
    let mut seen: HashSet<Value> = HashSet::new();
    let mut values: Vec<Value> = Vec::new();
    let target_sort = symbols
        .first()
        .map(|s| theory.signature.symbol(*s).result_sort);
    for sym in symbols {
        let decl = theory.signature.symbol(*sym);
        if decl.arity() == 0 {
            if let Outcome::Defined(v) = crate::eval::apply_symbol_values(theory, *sym, vec![], fuel)
            {
                if seen.insert(v.clone()) {
                    values.push(v);
                }
            }
        }
    }
    for _ in 0..rounds {
        let snapshot = values.clone();
        for sym in symbols {
            let decl = theory.signature.symbol(*sym);
            if decl.arity() == 0 {
                continue;
            }
            let pools: Vec<Vec<Value>> = decl
                .arg_sorts
                .iter()
                .map(|s| {
                    if Some(*s) == target_sort {
                        snapshot.clone()
                    } else {
                        uni.sort_values(*s).to_vec()
                    }
                })
                .collect();
            let mut tuple = Vec::new();
            let mut new_values = Vec::new();
            product(&pools, &mut tuple, &mut |args| {
                if let Outcome::Defined(v) =
                    crate::eval::apply_symbol_values(theory, *sym, args.to_vec(), fuel)
                {
                    new_values.push(v);
                }
            });
            for v in new_values {
                if seen.insert(v.clone()) {
                    values.push(v);
                }
            }
            if values.len() > SORT_VALUE_CAP {
                return Err(OracleError::SortTooLarge {
                    sort: theory
                        .signature
                        .sort(target_sort.expect("non-empty symbol list"))
                        .name
                        .clone(),
                    cap: SORT_VALUE_CAP,
                });
            }
        }
    }
    Ok(values)
}

/// Checks a conjecture on every valuation over the universe, skipping
/// valuations where the precondition is false. `Holds` requires both sides
/// defined and observationally equal everywhere; more than 10% undefined
/// evaluations is `Inconclusive`.
pub fn exhaustive_check(
    c: &Conjecture,
    theory: &Theory,
    universe: &Universe,
) -> Result<Verdict, OracleError> {
    let mut vars: BTreeSet<Variable> = c.lhs.vars();
    vars.extend(c.rhs.vars());
    if let Some((_, args)) = &c.precondition {
        vars.extend(args.iter().copied());
    }
    let vars: Vec<Variable> = vars.into_iter().collect();

    let mut count: u128 = 1;
    for v in &vars {
        let n = universe.sort_values(v.sort).len();
        if n == 0 {
            return Err(OracleError::EmptySort(
                theory.signature.sort(v.sort).name.clone(),
            ));
        }
        count = count.saturating_mul(n as u128);
    }
    if count > VALUATION_CAP as u128 {
        return Err(OracleError::UniverseTooLarge { valuations: count, cap: VALUATION_CAP });
    }

    // Observation contexts are exhausted from the universe of each observed
    // sort's context sort.
    let mut contexts: BTreeMap<SortId, Vec<Value>> = BTreeMap::new();
    for obs in &theory.observations {
        contexts.insert(
            obs.observed_sort,
            universe.sort_values(obs.context_sort).to_vec(),
        );
    }

    let fuel = theory.config.fuel;
    let mut total = 0u64;
    let mut undefined = 0u64;
    let mut counterexample: Option<TestCase> = None;

    let mut indices = vec![0usize; vars.len()];
    'outer: loop {
        let valuation: BTreeMap<Variable, Value> = vars
            .iter()
            .zip(indices.iter())
            .map(|(v, &i)| (*v, universe.sort_values(v.sort)[i].clone()))
            .collect();
        let tc = TestCase { valuation, contexts: contexts.clone() };

        let mut skip = false;
        let mut undef_here = false;
        if let Some((pi, args)) = &c.precondition {
            let pred_fn = theory.predicates[*pi].fun;
            let argv: Vec<Value> = args.iter().map(|v| tc.value_of(*v).clone()).collect();
            match call_function(theory, pred_fn, argv, fuel) {
                Outcome::Defined(Value::Bool(true)) => {}
                Outcome::Defined(_) => skip = true,
                Outcome::Undefined(_) => undef_here = true,
            }
        }
        if !skip {
            total += 1;
            if !undef_here {
                let a = case_observation(&c.lhs, &tc, theory, fuel);
                let b = case_observation(&c.rhs, &tc, theory, fuel);
                if a.fully_defined() && b.fully_defined() {
                    if a != b {
                        counterexample = Some(tc);
                        break 'outer;
                    }
                } else {
                    undef_here = true;
                }
            }
            if undef_here {
                undefined += 1;
            }
        }

        // Advance the mixed-radix counter; canonical order makes the first
        // counterexample deterministic.
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < universe.sort_values(vars[pos].sort).len() {
                break;
            }
            indices[pos] = 0;
        }
    }

    if let Some(tc) = counterexample {
        return Ok(Verdict::Counterexample(tc));
    }
    if total == 0 {
        return Ok(Verdict::Inconclusive(1.0));
    }
    let frac = undefined as f64 / total as f64;
    if frac > 0.10 {
        return Ok(Verdict::Inconclusive(frac));
    }
    Ok(Verdict::Holds)
}

/// Convenience used by tests and `verify`: does feeding the counterexample
/// back into the evaluator reproduce an observable inequality?
pub fn counterexample_replays(c: &Conjecture, theory: &Theory, tc: &TestCase) -> bool {
    let fuel = theory.config.fuel;
    let a = case_observation(&c.lhs, tc, theory, fuel);
    let b = case_observation(&c.rhs, tc, theory, fuel);
    match (&a, &b) {
        (CaseObs::Undefined(_), _) | (_, CaseObs::Undefined(_)) => false,
        _ => a != b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_term;
    use crate::explore::Conjecture;
    use crate::frontend::load_theory;
    use crate::term::{SymbolId, Term};

    const ARITH: &str = r#"
(theory arith
  (sort Nat (int-range 0 30) (vars "x" "y" "z"))
  (define-fun add ((a Nat) (b Nat)) Nat (+ a b))
  (define-fun mul ((a Nat) (b Nat)) Nat (* a b))
  (define-fun gcd ((a Nat) (b Nat)) Nat
    (match (= b 0) (true a) (false (gcd b (mod a b)))))
  (stage (con "1" (lit 1 Nat)) (con "+" add) (con "*" mul) (con "gcd" gcd))
  (universe (Nat (range 0 6))))
"#;

    fn conjecture(lhs: Term, rhs: Term) -> Conjecture {
        Conjecture {
            effective_size: lhs.size().max(rhs.size()),
            lhs,
            rhs,
            precondition: None,
            stage: 1,
            tests_passed: 0,
        }
    }

    fn x() -> Term {
        Term::var(crate::term::SortId(1), 0)
    }
    fn y() -> Term {
        Term::var(crate::term::SortId(1), 1)
    }
    fn one() -> Term {
        Term::app(SymbolId(0), vec![])
    }
    fn plus(a: Term, b: Term) -> Term {
        Term::app(SymbolId(1), vec![a, b])
    }
    fn times(a: Term, b: Term) -> Term {
        Term::app(SymbolId(2), vec![a, b])
    }
    fn gcd(a: Term, b: Term) -> Term {
        Term::app(SymbolId(3), vec![a, b])
    }

    #[test]
    fn commutativity_holds_over_the_range() {
        let th = load_theory(ARITH).unwrap();
        let uni = build_universe(&th).unwrap();
        assert_eq!(uni.sort_values(crate::term::SortId(1)).len(), 7);
        let c = conjecture(plus(x(), y()), plus(y(), x()));
        assert_eq!(exhaustive_check(&c, &th, &uni).unwrap(), Verdict::Holds);
    }

    #[test]
    fn false_law_yields_the_first_counterexample_in_canonical_order() {
        let th = load_theory(ARITH).unwrap();
        let uni = build_universe(&th).unwrap();
        let c = conjecture(plus(x(), y()), x());
        match exhaustive_check(&c, &th, &uni).unwrap() {
            Verdict::Counterexample(tc) => {
                // x = 0, y = 0 passes; x = 0, y = 1 is the first failure.
                assert_eq!(
                    tc.value_of(crate::term::Variable { sort: crate::term::SortId(1), index: 0 }),
                    &crate::eval::Value::Int(0.into())
                );
                assert_eq!(
                    tc.value_of(crate::term::Variable { sort: crate::term::SortId(1), index: 1 }),
                    &crate::eval::Value::Int(1.into())
                );
                // Replaying the case reproduces the inequality.
                assert!(counterexample_replays(&c, &th, &tc));
                assert_ne!(
                    eval_term(&c.lhs, &tc, &th, 1000),
                    eval_term(&c.rhs, &tc, &th, 1000)
                );
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn prime_square_law_holds_by_enumeration() {
        // gcd(x*x, 1+1) = gcd(x, 1+1), which holds because 2 is prime.
        let th = load_theory(ARITH).unwrap();
        let uni = build_universe(&th).unwrap();
        let two = plus(one(), one());
        let c = conjecture(gcd(times(x(), x()), two.clone()), gcd(x(), two));
        assert_eq!(exhaustive_check(&c, &th, &uni).unwrap(), Verdict::Holds);
    }

    #[test]
    fn oversized_universes_are_rejected() {
        let th = load_theory(
            r#"(theory wide
                 (sort Big (int-range 0 600) (vars "a" "b" "c"))
                 (define-fun add ((a Big) (b Big)) Big (+ a b))
                 (stage (con "+" add)))"#,
        )
        .unwrap();
        let uni = build_universe(&th).unwrap();
        let big = crate::term::SortId(1);
        let c = conjecture(
            Term::app(SymbolId(0), vec![Term::var(big, 0), Term::var(big, 1)]),
            Term::app(SymbolId(0), vec![Term::var(big, 1), Term::var(big, 2)]),
        );
        // 601^3 > 10^7.
        assert!(matches!(
            exhaustive_check(&c, &th, &uni),
            Err(OracleError::UniverseTooLarge { .. })
        ));
    }

    #[test]
    fn mostly_undefined_laws_are_inconclusive() {
        let th = load_theory(
            r#"(theory partial
                 (declare-datatype Nat ((Z) (S (pre Nat))) (vars "x" "y" "z"))
                 (define-fun pred ((a Nat)) Nat (match a ((S p) p)))
                 (stage (con "pred" pred))
                 (universe (Nat (depth 2))))"#,
        )
        .unwrap();
        let nat = crate::term::SortId(1);
        // pred(x) = pred(x) is undefined at Z, half the depth-2 universe.
        let t = Term::app(SymbolId(0), vec![Term::var(nat, 0)]);
        let c = conjecture(t.clone(), t);
        match exhaustive_check(&c, &th, &uni_of(&th)).unwrap() {
            Verdict::Inconclusive(frac) => assert!(frac > 0.10, "fraction {frac}"),
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    fn uni_of(th: &crate::theory::Theory) -> Universe {
        build_universe(th).unwrap()
    }

    #[test]
    fn closure_universes_contain_reachable_values_only() {
        let th = load_theory(
            r#"(theory closed
                 (sort Elem (int-range 0 1) (vars "a"))
                 (declare-datatype L ((N) (C (hd Elem) (tl L))) (vars "l"))
                 (define-fun emptyl () L N)
                 (define-fun push ((a Elem) (l L)) L (C a l))
                 (stage (con "emptyl" emptyl) (con "push" push))
                 (universe (L (closure 2 emptyl push))))"#,
        )
        .unwrap();
        let uni = build_universe(&th).unwrap();
        let l = crate::term::SortId(2);
        // empty, 2 one-element lists, 4 two-element lists.
        assert_eq!(uni.sort_values(l).len(), 7);
    }
}
