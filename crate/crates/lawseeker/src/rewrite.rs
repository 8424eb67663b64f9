//! The store of discovered laws and the normal-form computation that keeps
//! enumeration restricted to irreducible terms.
//!
//! Oriented rules strictly shrink every instance. Equations that cannot be
//! oriented that way (commutativity and friends) are kept as unoriented
//! pairs and applied by ordered rewriting: an instance fires only when it
//! decreases the term order, which keeps normalization terminating without
//! a completion procedure.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::term::{compare_terms, match_pattern, Term, SymbolId};

/// An oriented rewrite rule. Invariants: `lhs` is greater than `rhs` in the
/// term order, the lhs is not a bare variable, and every variable of `rhs`
/// occurs at least as often in `lhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

/// Result of trying to orient an equation into a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orientation {
    Oriented(Rule),
    Unorientable,
}

/// True when every instance of `l -> r` strictly decreases the term order:
/// `l` is strictly larger and no variable occurs more often in `r`.
fn dominates(l: &Term, r: &Term) -> bool {
    if l.size() <= r.size() {
        return false;
    }
    let lc = l.var_counts();
    r.var_counts()
        .iter()
        .all(|(v, c)| lc.get(v).copied().unwrap_or(0) >= *c)
}

/// Orders an equation into a rule when one side dominates, regardless of the
/// order the sides are given in.
pub fn orient(a: &Term, b: &Term) -> Orientation {
    if dominates(a, b) {
        Orientation::Oriented(Rule { lhs: a.clone(), rhs: b.clone() })
    } else if dominates(b, a) {
        Orientation::Oriented(Rule { lhs: b.clone(), rhs: a.clone() })
    } else {
        Orientation::Unorientable
    }
}

/// What [`EquationStore::add`] did with an equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Added {
    Oriented,
    Unoriented,
    /// Both sides already had the same normal form.
    Redundant,
    /// Unusable for rewriting (bare-variable patterns in both directions).
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Rule(usize),
    /// Unoriented pair used in one direction: `forward` rewrites the stored
    /// greater side towards the smaller one.
    Pair { idx: usize, forward: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exclude {
    None,
    Rule(usize),
    Pair(usize),
}

/// Discovered laws, indexed by the root symbol of each usable pattern.
#[derive(Debug, Clone, Default)]
pub struct EquationStore {
    oriented: Vec<Rule>,
    /// Unorientable equations, greater side first.
    unoriented: Vec<(Term, Term)>,
    index: HashMap<SymbolId, Vec<Entry>>,
}

impl EquationStore {
    pub fn new() -> EquationStore {
        EquationStore::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.oriented
    }

    pub fn pairs(&self) -> &[(Term, Term)] {
        &self.unoriented
    }

    pub fn len(&self) -> usize {
        self.oriented.len() + self.unoriented.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oriented.is_empty() && self.unoriented.is_empty()
    }

    /// Inserts a discovered equation, normalizing it by the current store
    /// first, then interreducing the store against the newcomer.
    pub fn add(&mut self, a: &Term, b: &Term) -> Added {
        let a = self.normal_form(a);
        let b = self.normal_form(b);
        if a == b {
            return Added::Redundant;
        }
        let added = match orient(&a, &b) {
            Orientation::Oriented(rule) => {
                self.oriented.push(rule);
                Added::Oriented
            }
            Orientation::Unorientable => {
                let (first, second) = match compare_terms(&a, &b) {
                    Ordering::Greater => (a, b),
                    _ => (b, a),
                };
                if !pair_direction_usable(&first, &second)
                    && !pair_direction_usable(&second, &first)
                {
                    return Added::Degenerate;
                }
                self.unoriented.push((first, second));
                Added::Unoriented
            }
        };
        self.rebuild_index();
        self.interreduce();
        added
    }

    /// True iff both terms have the same normal form, i.e. the equation is a
    /// consequence of the store under rewriting.
    pub fn is_redundant(&self, lhs: &Term, rhs: &Term) -> bool {
        self.normal_form(lhs) == self.normal_form(rhs)
    }

    /// Exhaustive innermost-leftmost rewriting. Oriented rules always fire;
    /// unoriented pairs fire only on order-decreasing instances.
    pub fn normal_form(&self, t: &Term) -> Term {
        self.nf(t, Exclude::None)
    }

    fn nf(&self, t: &Term, ex: Exclude) -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::App(sym, args) => {
                let u = Term::App(*sym, args.iter().map(|a| self.nf(a, ex)).collect());
                match self.rewrite_root(&u, ex) {
                    Some(v) => self.nf(&v, ex),
                    None => u,
                }
            }
        }
    }

    fn rewrite_root(&self, t: &Term, ex: Exclude) -> Option<Term> {
        let root = match t {
            Term::App(sym, _) => *sym,
            Term::Var(_) => return None,
        };
        for entry in self.index.get(&root)?.iter() {
            match *entry {
                Entry::Rule(i) => {
                    if ex == Exclude::Rule(i) {
                        continue;
                    }
                    let rule = &self.oriented[i];
                    if let Some(s) = match_pattern(&rule.lhs, t) {
                        return Some(s.apply(&rule.rhs));
                    }
                }
                Entry::Pair { idx, forward } => {
                    if ex == Exclude::Pair(idx) {
                        continue;
                    }
                    let (greater, smaller) = &self.unoriented[idx];
                    let (pat, tgt) = if forward { (greater, smaller) } else { (smaller, greater) };
                    if let Some(s) = match_pattern(pat, t) {
                        let replacement = s.apply(tgt);
                        if compare_terms(t, &replacement) == Ordering::Greater {
                            return Some(replacement);
                        }
                    }
                }
            }
        }
        None
    }

    fn rebuild_index(&mut self) {
        self.index.clear();
        for (i, rule) in self.oriented.iter().enumerate() {
            if let Term::App(sym, _) = &rule.lhs {
                self.index.entry(*sym).or_default().push(Entry::Rule(i));
            }
        }
        for (i, (greater, smaller)) in self.unoriented.iter().enumerate() {
            if pair_direction_usable(greater, smaller) {
                if let Term::App(sym, _) = greater {
                    self.index
                        .entry(*sym)
                        .or_default()
                        .push(Entry::Pair { idx: i, forward: true });
                }
            }
            if pair_direction_usable(smaller, greater) {
                if let Term::App(sym, _) = smaller {
                    self.index
                        .entry(*sym)
                        .or_default()
                        .push(Entry::Pair { idx: i, forward: false });
                }
            }
        }
    }

    /// After an insertion: re-normalize rule right-hand sides and drop any
    /// law that is joinable by the rest of the store. One removal per round
    /// so survivors are always judged against the current store.
    fn interreduce(&mut self) {
        loop {
            let mut changed = false;
            for i in 0..self.oriented.len() {
                let nf = self.nf(&self.oriented[i].rhs, Exclude::None);
                if nf != self.oriented[i].rhs && dominates(&self.oriented[i].lhs, &nf) {
                    self.oriented[i].rhs = nf;
                    changed = true;
                }
            }
            let redundant_rule = (0..self.oriented.len()).find(|&i| {
                self.nf(&self.oriented[i].lhs, Exclude::Rule(i))
                    == self.nf(&self.oriented[i].rhs, Exclude::Rule(i))
            });
            if let Some(i) = redundant_rule {
                self.oriented.remove(i);
                self.rebuild_index();
                continue;
            }
            let redundant_pair = (0..self.unoriented.len()).find(|&i| {
                self.nf(&self.unoriented[i].0, Exclude::Pair(i))
                    == self.nf(&self.unoriented[i].1, Exclude::Pair(i))
            });
            if let Some(i) = redundant_pair {
                self.unoriented.remove(i);
                self.rebuild_index();
                continue;
            }
            if !changed {
                break;
            }
            self.rebuild_index();
        }
    }
}

/// A pair direction is usable when the pattern side is an application and
/// binds every variable of the replacement side.
fn pair_direction_usable(pattern: &Term, target: &Term) -> bool {
    if pattern.is_var() {
        return false;
    }
    let pv = pattern.vars();
    target.vars().iter().all(|v| pv.contains(v))
}
