//! Many-sorted first-order terms, signatures, substitutions, and the total
//! term order used for rule orientation and canonical output.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index of a sort in a [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub u32);

/// Index of a symbol in a [`Signature`]. Symbol identity is the declaration
/// index; printing names are not required to be unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// A sort declaration: its printing name and the variable names used when
/// printing laws over this sort.
#[derive(Debug, Clone, PartialEq)]
pub struct SortDecl {
    pub name: String,
    pub var_names: Vec<String>,
}

/// A signature symbol: a constant or function usable in enumerated terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDecl {
    /// Printing name; empty string means the symbol is invisible in output.
    pub name: String,
    pub arg_sorts: Vec<SortId>,
    pub result_sort: SortId,
    /// Background symbols may appear in laws but never carry one alone.
    pub background: bool,
    /// 1-based exploration stage this symbol joins in.
    pub stage: usize,
}

impl SymbolDecl {
    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }

    pub fn invisible(&self) -> bool {
        self.name.is_empty()
    }
}

/// The sorts and symbols terms are built from. Declaration order doubles as
/// the symbol precedence used by [`compare_terms`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature {
    pub sorts: Vec<SortDecl>,
    pub symbols: Vec<SymbolDecl>,
}

impl Signature {
    pub fn sort(&self, id: SortId) -> &SortDecl {
        &self.sorts[id.0 as usize]
    }

    pub fn symbol(&self, id: SymbolId) -> &SymbolDecl {
        &self.symbols[id.0 as usize]
    }

    pub fn sort_named(&self, name: &str) -> Option<SortId> {
        self.sorts
            .iter()
            .position(|s| s.name == name)
            .map(|i| SortId(i as u32))
    }

    /// Number of variables available for a sort (the length of its declared
    /// variable name list).
    pub fn vars_of_sort(&self, sort: SortId) -> usize {
        self.sort(sort).var_names.len()
    }

    pub fn var_name(&self, v: Variable) -> &str {
        &self.sort(v.sort).var_names[v.index as usize]
    }
}

/// A typed variable. `index` ranges over the sort's declared variable names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub sort: SortId,
    pub index: u32,
}

/// A first-order term: a variable or a saturated symbol application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Variable),
    App(SymbolId, Vec<Term>),
}

impl Term {
    pub fn var(sort: SortId, index: u32) -> Term {
        Term::Var(Variable { sort, index })
    }

    pub fn app(sym: SymbolId, args: Vec<Term>) -> Term {
        Term::App(sym, args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Number of symbol and variable occurrences. Constants and invisible
    /// symbols count one each.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// The sort of the term root, trusting well-formedness.
    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(v) => v.sort,
            Term::App(sym, _) => sig.symbol(*sym).result_sort,
        }
    }

    /// The set of distinct variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Occurrence count per variable, used by the orientation check.
    pub fn var_counts(&self) -> BTreeMap<Variable, usize> {
        let mut out = BTreeMap::new();
        self.count_vars(&mut out);
        out
    }

    fn count_vars(&self, out: &mut BTreeMap<Variable, usize>) {
        match self {
            Term::Var(v) => {
                *out.entry(*v).or_insert(0) += 1;
            }
            Term::App(_, args) => {
                for a in args {
                    a.count_vars(out);
                }
            }
        }
    }

    /// Preorder traversal over all subterms, the term itself included.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            if let Term::App(_, args) = t {
                for a in args.iter().rev() {
                    stack.push(a);
                }
            }
        }
        out
    }

    /// Full well-sortedness check. Returns the result sort, or the first
    /// ill-sorted subterm in preorder.
    pub fn infer_sort(&self, sig: &Signature) -> Result<SortId, SortError> {
        let mut path = Vec::new();
        self.infer_sort_at(sig, &mut path)
    }

    fn infer_sort_at(&self, sig: &Signature, path: &mut Vec<usize>) -> Result<SortId, SortError> {
        match self {
            Term::Var(v) => Ok(v.sort),
            Term::App(sym, args) => {
                let decl = sig.symbol(*sym);
                if args.len() != decl.arity() {
                    return Err(SortError {
                        path: path.clone(),
                        kind: SortErrorKind::Arity {
                            symbol: *sym,
                            expected: decl.arity(),
                            found: args.len(),
                        },
                    });
                }
                for (i, arg) in args.iter().enumerate() {
                    path.push(i);
                    let got = arg.infer_sort_at(sig, path)?;
                    let want = sig.symbol(*sym).arg_sorts[i];
                    if got != want {
                        return Err(SortError {
                            path: path.clone(),
                            kind: SortErrorKind::Sort {
                                expected: want,
                                found: got,
                            },
                        });
                    }
                    path.pop();
                }
                Ok(decl.result_sort)
            }
        }
    }

    /// Simple prefix rendering, `(+ x y)` style, used in diagnostics and the
    /// machine report format. Invisible symbols print as `#<index>`.
    pub fn prefix_string(&self, sig: &Signature) -> String {
        match self {
            Term::Var(v) => sig.var_name(*v).to_string(),
            Term::App(sym, args) => {
                let decl = sig.symbol(*sym);
                let name = if decl.invisible() {
                    format!("#{}", sym.0)
                } else {
                    decl.name.clone()
                };
                if args.is_empty() {
                    name
                } else {
                    let mut s = format!("({}", name);
                    for a in args {
                        s.push(' ');
                        s.push_str(&a.prefix_string(sig));
                    }
                    s.push(')');
                    s
                }
            }
        }
    }
}

/// Ill-sorted subterm report from [`Term::infer_sort`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortError {
    /// Argument indices from the root down to the offending subterm.
    pub path: Vec<usize>,
    pub kind: SortErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortErrorKind {
    Sort { expected: SortId, found: SortId },
    Arity { symbol: SymbolId, expected: usize, found: usize },
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SortErrorKind::Sort { expected, found } => write!(
                f,
                "ill-sorted subterm at path {:?}: expected sort #{}, found #{}",
                self.path, expected.0, found.0
            ),
            SortErrorKind::Arity { symbol, expected, found } => write!(
                f,
                "arity mismatch at path {:?}: symbol #{} takes {} arguments, given {}",
                self.path, symbol.0, expected, found
            ),
        }
    }
}

/// A sort-preserving partial map from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst(BTreeMap<Variable, Term>);

impl Subst {
    pub fn new() -> Subst {
        Subst(BTreeMap::new())
    }

    pub fn get(&self, v: Variable) -> Option<&Term> {
        self.0.get(&v)
    }

    pub fn insert(&mut self, v: Variable, t: Term) {
        self.0.insert(v, t);
    }

    pub fn bound_vars(&self) -> impl Iterator<Item = Variable> + '_ {
        self.0.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Simultaneous replacement; unbound variables pass through unchanged.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.0.get(v) {
                Some(u) => u.clone(),
                None => t.clone(),
            },
            Term::App(sym, args) => {
                Term::App(*sym, args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }
}

/// Syntactic matching: find a substitution sending `pattern` to `subject`.
/// Nonlinear patterns require structurally equal bindings.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut subst = Subst::new();
    if match_into(pattern, subject, &mut subst) {
        Some(subst)
    } else {
        None
    }
}

fn match_into(pattern: &Term, subject: &Term, subst: &mut Subst) -> bool {
    match pattern {
        Term::Var(v) => match subst.get(*v) {
            Some(bound) => bound == subject,
            None => {
                subst.insert(*v, subject.clone());
                true
            }
        },
        Term::App(sym, args) => match subject {
            Term::App(sub_sym, sub_args) if sym == sub_sym => args
                .iter()
                .zip(sub_args.iter())
                .all(|(p, s)| match_into(p, s, subst)),
            _ => false,
        },
    }
}

/// Total order on same-sort terms: size first, then fewer distinct variables,
/// then root precedence (declaration order, variables lowest), then
/// lexicographic on arguments. `Equal` only for identical terms. Symbol
/// precedence is the declaration index carried by `SymbolId`.
pub fn compare_terms(a: &Term, b: &Term) -> Ordering {
    match a.size().cmp(&b.size()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    match a.vars().len().cmp(&b.vars().len()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    compare_structure(a, b)
}

fn compare_structure(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x.cmp(y),
        (Term::Var(_), Term::App(..)) => Ordering::Less,
        (Term::App(..), Term::Var(_)) => Ordering::Greater,
        (Term::App(f, fa), Term::App(g, ga)) => match f.cmp(g) {
            Ordering::Equal => {
                for (x, y) in fa.iter().zip(ga.iter()) {
                    match x.size().cmp(&y.size()) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                    match x.vars().len().cmp(&y.vars().len()) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                    match compare_structure(x, y) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            ord => ord,
        },
    }
}

/// Renames variables across `terms` (in the given order, preorder within each
/// term) to fresh per-sort indices 0, 1, 2, ... by first occurrence. Applied
/// to an ordered equation this yields the canonical printed form.
pub fn canonical_renaming(terms: &[&Term]) -> Subst {
    let mut next: BTreeMap<SortId, u32> = BTreeMap::new();
    let mut subst = Subst::new();
    for t in terms {
        rename_walk(t, &mut next, &mut subst);
    }
    subst
}

fn rename_walk(t: &Term, next: &mut BTreeMap<SortId, u32>, subst: &mut Subst) {
    match t {
        Term::Var(v) => {
            if subst.get(*v).is_none() {
                let slot = next.entry(v.sort).or_insert(0);
                subst.insert(*v, Term::var(v.sort, *slot));
                *slot += 1;
            }
        }
        Term::App(_, args) => {
            for a in args {
                rename_walk(a, next, subst);
            }
        }
    }
}

/// True when the two equations are identical up to a variable bijection and
/// swapping of sides.
pub fn equations_equivalent(a: (&Term, &Term), b: (&Term, &Term)) -> bool {
    renaming_between(&[a.0, a.1], &[b.0, b.1])
        || renaming_between(&[a.0, a.1], &[b.1, b.0])
}

/// Attempts to build a variable bijection mapping the first term list onto
/// the second, position by position.
pub fn renaming_between(from: &[&Term], to: &[&Term]) -> bool {
    let mut fwd: BTreeMap<Variable, Variable> = BTreeMap::new();
    let mut bwd: BTreeMap<Variable, Variable> = BTreeMap::new();
    fn walk(
        a: &Term,
        b: &Term,
        fwd: &mut BTreeMap<Variable, Variable>,
        bwd: &mut BTreeMap<Variable, Variable>,
    ) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                if x.sort != y.sort {
                    return false;
                }
                match (fwd.get(x), bwd.get(y)) {
                    (None, None) => {
                        fwd.insert(*x, *y);
                        bwd.insert(*y, *x);
                        true
                    }
                    (Some(mapped), Some(back)) => mapped == y && back == x,
                    _ => false,
                }
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                f == g && fa.iter().zip(ga.iter()).all(|(x, y)| walk(x, y, fwd, bwd))
            }
            _ => false,
        }
    }
    from.len() == to.len()
        && from
            .iter()
            .zip(to.iter())
            .all(|(a, b)| walk(a, b, &mut fwd, &mut bwd))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two-sort test signature: Nat with 0, +, *, gcd (declaration order
    /// matches the bundled gcd theory).
    pub(crate) fn gcd_signature() -> Signature {
        let nat = SortId(0);
        Signature {
            sorts: vec![SortDecl {
                name: "Nat".into(),
                var_names: vec!["x".into(), "y".into(), "z".into()],
            }],
            symbols: vec![
                SymbolDecl {
                    name: "0".into(),
                    arg_sorts: vec![],
                    result_sort: nat,
                    background: false,
                    stage: 1,
                },
                SymbolDecl {
                    name: "1".into(),
                    arg_sorts: vec![],
                    result_sort: nat,
                    background: false,
                    stage: 1,
                },
                SymbolDecl {
                    name: "+".into(),
                    arg_sorts: vec![nat, nat],
                    result_sort: nat,
                    background: false,
                    stage: 1,
                },
                SymbolDecl {
                    name: "*".into(),
                    arg_sorts: vec![nat, nat],
                    result_sort: nat,
                    background: false,
                    stage: 1,
                },
                SymbolDecl {
                    name: "gcd".into(),
                    arg_sorts: vec![nat, nat],
                    result_sort: nat,
                    background: false,
                    stage: 2,
                },
            ],
        }
    }

    pub(crate) const ZERO: SymbolId = SymbolId(0);
    pub(crate) const PLUS: SymbolId = SymbolId(2);
    pub(crate) const TIMES: SymbolId = SymbolId(3);
    pub(crate) const GCD: SymbolId = SymbolId(4);

    fn x() -> Term {
        Term::var(SortId(0), 0)
    }
    fn y() -> Term {
        Term::var(SortId(0), 1)
    }
    fn z() -> Term {
        Term::var(SortId(0), 2)
    }
    fn zero() -> Term {
        Term::app(ZERO, vec![])
    }
    fn plus(a: Term, b: Term) -> Term {
        Term::app(PLUS, vec![a, b])
    }
    fn times(a: Term, b: Term) -> Term {
        Term::app(TIMES, vec![a, b])
    }
    fn gcd(a: Term, b: Term) -> Term {
        Term::app(GCD, vec![a, b])
    }

    /// All well-sorted Nat terms of exactly `size` over the gcd signature,
    /// built naively. Shared with the order-totality oracle below.
    pub(crate) fn all_terms(sig: &Signature, size: usize) -> Vec<Term> {
        if size == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        if size == 1 {
            for i in 0..3 {
                out.push(Term::var(SortId(0), i));
            }
        }
        for (i, sym) in sig.symbols.iter().enumerate() {
            if sym.arity() == 0 && size == 1 {
                out.push(Term::app(SymbolId(i as u32), vec![]));
            }
            if sym.arity() == 2 && size >= 3 {
                for left in 1..size - 1 {
                    let right = size - 1 - left;
                    for a in all_terms(sig, left) {
                        for b in all_terms(sig, right) {
                            out.push(Term::app(SymbolId(i as u32), vec![a.clone(), b]));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn size_counts_symbols_and_variables() {
        assert_eq!(x().size(), 1);
        assert_eq!(zero().size(), 1);
        // gcd(x*y, x*z) has 7 occurrences: gcd, *, x, y, *, x, z
        let t = gcd(times(x(), y()), times(x(), z()));
        assert_eq!(t.size(), 7);
    }

    #[test]
    fn infer_sort_accepts_well_sorted_terms() {
        let sig = gcd_signature();
        assert_eq!(plus(x(), y()).infer_sort(&sig), Ok(SortId(0)));
        assert_eq!(gcd(x(), zero()).infer_sort(&sig), Ok(SortId(0)));
    }

    #[test]
    fn infer_sort_reports_first_bad_subterm() {
        let mut sig = gcd_signature();
        // Add a second sort and a variable of it to provoke a mismatch.
        sig.sorts.push(SortDecl {
            name: "Key".into(),
            var_names: vec!["k".into()],
        });
        let k = Term::var(SortId(1), 0);
        let t = plus(x(), k);
        let err = t.infer_sort(&sig).unwrap_err();
        assert_eq!(err.path, vec![1]);
        assert_eq!(
            err.kind,
            SortErrorKind::Sort {
                expected: SortId(0),
                found: SortId(1)
            }
        );

        let bad_arity = Term::app(PLUS, vec![x()]);
        let err = bad_arity.infer_sort(&sig).unwrap_err();
        assert!(matches!(err.kind, SortErrorKind::Arity { expected: 2, found: 1, .. }));
    }

    #[test]
    fn match_pattern_binds_linear_patterns() {
        let pat = plus(x(), zero());
        let sub = plus(times(x(), y()), zero());
        let s = match_pattern(&pat, &sub).unwrap();
        assert_eq!(s.get(Variable { sort: SortId(0), index: 0 }), Some(&times(x(), y())));
        assert_eq!(s.apply(&pat), sub);

        let s = match_pattern(&plus(x(), y()), &plus(x(), zero())).unwrap();
        assert_eq!(s.apply(&plus(x(), y())), plus(x(), zero()));
    }

    #[test]
    fn match_pattern_rejects_nonlinear_conflicts() {
        // pattern x+x against a+b with a != b
        let pat = plus(x(), x());
        let sub = plus(y(), z());
        assert!(match_pattern(&pat, &sub).is_none());
        // but x+x matches a+a
        assert!(match_pattern(&pat, &plus(y(), y())).is_some());
    }

    #[test]
    fn apply_substitution_examples() {
        let mut s = Subst::new();
        s.insert(Variable { sort: SortId(0), index: 0 }, zero());
        assert_eq!(s.apply(&plus(x(), x())), plus(zero(), zero()));
        assert_eq!(Subst::new().apply(&plus(x(), y())), plus(x(), y()));
        let mut swap = Subst::new();
        swap.insert(Variable { sort: SortId(0), index: 0 }, y());
        assert_eq!(swap.apply(&plus(x(), y())), plus(y(), y()));
    }

    #[test]
    fn match_then_apply_roundtrips() {
        let sig = gcd_signature();
        let patterns = all_terms(&sig, 3);
        let subjects = all_terms(&sig, 5);
        let mut matched = 0;
        for p in &patterns {
            for s in &subjects {
                if let Some(sub) = match_pattern(p, s) {
                    assert_eq!(&sub.apply(p), s);
                    matched += 1;
                }
            }
        }
        assert!(matched > 0);
    }

    #[test]
    fn compare_is_size_first() {
        assert_eq!(compare_terms(&plus(x(), zero()), &x()), Ordering::Greater);
        let t = gcd(x(), y());
        assert_eq!(compare_terms(&t, &t), Ordering::Equal);
    }

    /// Brute-force totality/antisymmetry oracle over every pair of terms of
    /// size <= 5 in the gcd signature.
    #[test]
    fn compare_is_a_total_order_on_small_terms() {
        let sig = gcd_signature();
        let mut terms = Vec::new();
        for s in 1..=5 {
            terms.extend(all_terms(&sig, s));
        }
        for a in &terms {
            for b in &terms {
                let ab = compare_terms(a, b);
                let ba = compare_terms(b, a);
                match ab {
                    Ordering::Equal => {
                        assert_eq!(a, b, "Equal must mean structural identity");
                        assert_eq!(ba, Ordering::Equal);
                    }
                    Ordering::Less => assert_eq!(ba, Ordering::Greater),
                    Ordering::Greater => assert_eq!(ba, Ordering::Less),
                }
                if a.size() > b.size() {
                    assert_eq!(ab, Ordering::Greater);
                }
            }
        }
        // Transitivity spot-check on a fixed subsample.
        let sample: Vec<&Term> = terms.iter().step_by(97).collect();
        for a in &sample {
            for b in &sample {
                for c in &sample {
                    if compare_terms(a, b) == Ordering::Less
                        && compare_terms(b, c) == Ordering::Less
                    {
                        assert_eq!(compare_terms(a, c), Ordering::Less);
                    }
                }
            }
        }
    }

    #[test]
    fn commutative_pair_is_ordered_deterministically() {
        let ab = plus(x(), y());
        let ba = plus(y(), x());
        let ord = compare_terms(&ab, &ba);
        assert_ne!(ord, Ordering::Equal);
        assert_eq!(compare_terms(&ba, &ab), ord.reverse());
    }

    #[test]
    fn canonical_renaming_uses_first_occurrence() {
        // y+x with y seen first becomes x+y under renaming.
        let t = plus(y(), x());
        let s = canonical_renaming(&[&t]);
        assert_eq!(s.apply(&t), plus(x(), y()));
    }

    #[test]
    fn equation_equivalence_handles_renaming_and_symmetry() {
        let a = (plus(x(), y()), plus(y(), x()));
        let b = (plus(z(), y()), plus(y(), z()));
        assert!(equations_equivalent((&a.0, &a.1), (&b.0, &b.1)));
        assert!(equations_equivalent((&a.0, &a.1), (&b.1, &b.0)));
        let c = (plus(x(), x()), plus(x(), x()));
        assert!(!equations_equivalent((&a.0, &a.1), (&c.0, &c.1)));
    }
}
