//! The discovery loop: enumerate irreducible terms by size, classify by
//! fingerprint, confirm candidate equalities on fresh random cases, emit
//! conjectures, and feed laws back into the pruning store. Stages widen the
//! signature cumulatively; conditional laws run last over the retained
//! terms.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::eval::{case_observation, fingerprint, generate_testcase, Fingerprint, TestCase};
use crate::rewrite::EquationStore;
use crate::rng::{RandomStream, StreamId};
use crate::term::{canonical_renaming, compare_terms, equations_equivalent, SortId, SymbolId, Term, Variable};
use crate::theory::{Config, Theory};

/// A law that passed confirmation testing: an equation, optionally under a
/// declared predicate, canonically renamed with the greater side on the
/// left.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture {
    pub lhs: Term,
    pub rhs: Term,
    /// Predicate index into the theory plus its argument variables.
    pub precondition: Option<(usize, Vec<Variable>)>,
    pub stage: usize,
    pub effective_size: usize,
    pub tests_passed: usize,
}

/// Counters reported after a run.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct RunStats {
    /// Candidates built before the irreducibility filter.
    pub terms_generated: usize,
    /// Candidates skipped because their normal form differs.
    pub terms_pruned: usize,
    /// Candidates that survived the filter and were classified.
    pub terms_considered: usize,
    pub classes: usize,
    pub suite_size: usize,
    pub confirmation_tests: usize,
    pub laws_printed: usize,
    /// Laws stored for pruning but suppressed from output.
    pub laws_stored_only: usize,
    /// Laws dropped from the output because the remaining ones already
    /// rewrite both sides together (renamed copies and instances).
    pub laws_subsumed: usize,
}

/// Replayable record of what the run did, in order.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Considered {
        stage: usize,
        size: usize,
        term: Term,
    },
    Law {
        /// Position in the printed law list, if printed.
        printed_index: Option<usize>,
        lhs: Term,
        rhs: Term,
        redundant_at_emission: bool,
    },
}

#[derive(Debug, Clone)]
pub struct ExplorationReport {
    pub theory_name: String,
    pub config: Config,
    pub laws: Vec<Conjecture>,
    pub stats: RunStats,
    pub trace: Vec<TraceEvent>,
    pub warnings: Vec<String>,
    /// The rewrite store as it stood at the end of the run.
    pub store: EquationStore,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error("configuration error: {0}")]
    Config(String),
}

/// Runs the full exploration pipeline. `config` replaces the theory's own
/// option block for this run.
pub fn explore(theory: &Theory, config: &Config) -> Result<ExplorationReport, ExploreError> {
    config.validate().map_err(ExploreError::Config)?;
    if config.vars_per_sort != theory.config.vars_per_sort {
        return Err(ExploreError::Config(
            "vars-per-sort is fixed by the theory file and cannot be overridden".into(),
        ));
    }
    let mut th = theory.clone();
    th.config = config.clone();
    let mut explorer = Explorer::new(&th);
    explorer.run();
    Ok(explorer.into_report())
}

/// Every well-sorted term of exactly `size` over `active` symbols whose
/// subterms are themselves irreducible, minus any term whose normal form
/// under `store` differs from itself. Deterministic order: variables and
/// constants first at size 1, otherwise symbol declaration order, then
/// argument sizes, then argument order.
pub fn enumerate_terms(
    theory: &Theory,
    active: &[SymbolId],
    size: usize,
    store: &EquationStore,
) -> Vec<Term> {
    let mut retained: Vec<Vec<Vec<Term>>> = vec![empty_by_sort(theory); size + 1];
    for s in 1..=size {
        let mut keep = empty_by_sort(theory);
        let mut out = Vec::new();
        for t in build_candidates(theory, active, s, &retained) {
            if store.normal_form(&t) != t {
                continue;
            }
            let sort = t.sort(&theory.signature);
            keep[sort.0 as usize].push(t.clone());
            out.push(t);
        }
        retained[s] = keep;
        if s == size {
            return out;
        }
    }
    Vec::new()
}

fn empty_by_sort(theory: &Theory) -> Vec<Vec<Term>> {
    vec![Vec::new(); theory.signature.sorts.len()]
}

/// Sorts reachable from the active symbols; variables of exactly these sorts
/// participate in enumeration.
fn sorts_in_play(theory: &Theory, active: &[SymbolId]) -> Vec<SortId> {
    let mut seen = vec![false; theory.signature.sorts.len()];
    for sym in active {
        let decl = theory.signature.symbol(*sym);
        seen[decl.result_sort.0 as usize] = true;
        for s in &decl.arg_sorts {
            seen[s.0 as usize] = true;
        }
    }
    (0..seen.len() as u32)
        .map(SortId)
        .filter(|s| seen[s.0 as usize])
        .collect()
}

/// Raw candidates of one size: no irreducibility filter yet.
fn build_candidates(
    theory: &Theory,
    active: &[SymbolId],
    size: usize,
    retained: &[Vec<Vec<Term>>],
) -> Vec<Term> {
    let mut out = Vec::new();
    if size == 1 {
        for sort in sorts_in_play(theory, active) {
            for index in 0..theory.signature.vars_of_sort(sort) as u32 {
                out.push(Term::var(sort, index));
            }
        }
        for sym in active {
            if theory.signature.symbol(*sym).arity() == 0 {
                out.push(Term::app(*sym, vec![]));
            }
        }
        return out;
    }
    for sym in active {
        let decl = theory.signature.symbol(*sym);
        let arity = decl.arity();
        if arity == 0 || size < arity + 1 {
            continue;
        }
        let arg_sorts = decl.arg_sorts.clone();
        for_each_composition(size - 1, arity, &mut |parts| {
            let mut args: Vec<Term> = Vec::with_capacity(arity);
            fill_args(retained, &arg_sorts, parts, &mut args, *sym, &mut out);
        });
    }
    out
}

fn fill_args(
    retained: &[Vec<Vec<Term>>],
    arg_sorts: &[SortId],
    parts: &[usize],
    args: &mut Vec<Term>,
    sym: SymbolId,
    out: &mut Vec<Term>,
) {
    let pos = args.len();
    if pos == arg_sorts.len() {
        out.push(Term::app(sym, args.clone()));
        return;
    }
    let pool = &retained[parts[pos]][arg_sorts[pos].0 as usize];
    for t in pool {
        args.push(t.clone());
        fill_args(retained, arg_sorts, parts, args, sym, out);
        args.pop();
    }
}

/// All ways to split `total` into `k` positive parts, first position varying
/// slowest.
fn for_each_composition(total: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut parts = vec![0usize; k];
    fn rec(total: usize, pos: usize, parts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        let k = parts.len();
        if pos == k - 1 {
            parts[pos] = total;
            f(parts);
            return;
        }
        let remaining_mins = k - pos - 1;
        for first in 1..=total - remaining_mins {
            parts[pos] = first;
            rec(total - first, pos + 1, parts, f);
        }
    }
    if k == 0 {
        if total == 0 {
            f(&parts);
        }
        return;
    }
    if total < k {
        return;
    }
    rec(total, 0, &mut parts, f);
}

struct Class {
    sort: SortId,
    rep: Term,
    fp: Fingerprint,
}

enum Confirmation {
    Confirmed { passes: usize },
    Refuted(TestCase),
    /// Every fresh case was discarded as undefined; nothing learned.
    Inconclusive,
}

struct Explorer<'t> {
    theory: &'t Theory,
    suite: Vec<TestCase>,
    store: EquationStore,
    classes: Vec<Class>,
    lookup: HashMap<u64, Vec<usize>>,
    /// retained[size][sort] are the irreducible, reliable terms the current
    /// stage builds bigger terms from.
    retained: Vec<Vec<Vec<Term>>>,
    laws: Vec<Conjecture>,
    trace: Vec<TraceEvent>,
    warnings: Vec<String>,
    stats: RunStats,
    rng_confirm: RandomStream,
    rng_cond: RandomStream,
}

impl<'t> Explorer<'t> {
    fn new(theory: &'t Theory) -> Explorer<'t> {
        let mut rng_suite = RandomStream::new(theory.config.seed, StreamId::Suite);
        let suite: Vec<TestCase> = (0..theory.config.initial_suite)
            .map(|_| {
                generate_testcase(theory, &mut rng_suite, None)
                    .expect("unconditional generation cannot exhaust")
            })
            .collect();
        Explorer {
            theory,
            suite,
            store: EquationStore::new(),
            classes: Vec::new(),
            lookup: HashMap::new(),
            retained: Vec::new(),
            laws: Vec::new(),
            trace: Vec::new(),
            warnings: Vec::new(),
            stats: RunStats::default(),
            rng_confirm: RandomStream::new(theory.config.seed, StreamId::Confirm),
            rng_cond: RandomStream::new(theory.config.seed, StreamId::Conditional),
        }
    }

    fn run(&mut self) {
        for stage in 1..=self.theory.stage_count() {
            self.run_stage(stage);
        }
        self.discover_conditionals();
        self.prune_printed_laws();
        self.stats.classes = self.classes.len();
        self.stats.suite_size = self.suite.len();
        self.stats.laws_printed = self.laws.len();
    }

    /// Enumeration order can surface a specific instance of a law before its
    /// general form, and renamed copies of one law can land in separate
    /// classes within a single size pass. The store interreduces those, but
    /// the printed list would still carry them. Replay the unconditional
    /// laws most-general-first through a fresh store and drop every law the
    /// kept ones already join.
    fn prune_printed_laws(&mut self) {
        let generality = |laws: &[Conjecture], i: usize| {
            let law = &laws[i];
            let mut vars = law.lhs.vars();
            vars.extend(law.rhs.vars());
            (
                law.lhs.size().max(law.rhs.size()),
                usize::MAX - vars.len(),
                i,
            )
        };
        let mut keep = vec![true; self.laws.len()];

        let mut order: Vec<usize> = (0..self.laws.len())
            .filter(|&i| self.laws[i].precondition.is_none())
            .collect();
        order.sort_by_key(|&i| generality(&self.laws, i));
        let mut replay = EquationStore::new();
        let mut kept_unconditional: Vec<usize> = Vec::new();
        for &i in &order {
            let law = &self.laws[i];
            // Some true laws (both sides mentioning a variable the other
            // lacks) are unusable as rewrites, so the store cannot collapse
            // their renamed copies; drop those explicitly.
            if kept_unconditional.iter().any(|&j| {
                equations_equivalent(
                    (&self.laws[j].lhs, &self.laws[j].rhs),
                    (&law.lhs, &law.rhs),
                )
            }) || replay.is_redundant(&law.lhs, &law.rhs)
            {
                keep[i] = false;
                continue;
            }
            replay.add(&law.lhs, &law.rhs);
            kept_unconditional.push(i);
        }

        // Conditional laws with the same predicate and argument tuple are
        // interreduced against each other on top of the unconditional laws.
        let mut cond_order: Vec<usize> = (0..self.laws.len())
            .filter(|&i| self.laws[i].precondition.is_some())
            .collect();
        cond_order.sort_by_key(|&i| generality(&self.laws, i));
        let mut per_condition: HashMap<(usize, Vec<Variable>), EquationStore> = HashMap::new();
        let mut kept_conditional: Vec<usize> = Vec::new();
        for &i in &cond_order {
            let law = &self.laws[i];
            let key = law.precondition.clone().expect("conditional law");
            let renamed_copy = kept_conditional.iter().any(|&j| {
                self.laws[j].precondition == law.precondition
                    && equations_equivalent(
                        (&self.laws[j].lhs, &self.laws[j].rhs),
                        (&law.lhs, &law.rhs),
                    )
            });
            let store = per_condition
                .entry(key)
                .or_insert_with(|| replay.clone());
            if renamed_copy || store.is_redundant(&law.lhs, &law.rhs) {
                keep[i] = false;
                continue;
            }
            store.add(&law.lhs, &law.rhs);
            kept_conditional.push(i);
        }

        self.stats.laws_subsumed = keep.iter().filter(|k| !**k).count();
        let mut idx = 0;
        self.laws.retain(|_| {
            let kept = keep[idx];
            idx += 1;
            kept
        });
    }

    fn run_stage(&mut self, stage: usize) {
        let active: Vec<SymbolId> = (0..self.theory.signature.symbols.len() as u32)
            .map(SymbolId)
            .filter(|s| self.theory.signature.symbol(*s).stage <= stage)
            .collect();
        let max = self.theory.config.max_term_size;
        self.retained = vec![empty_by_sort(self.theory); max + 1];
        for size in 1..=max {
            self.run_size_pass(stage, size, &active);
        }
    }

    fn run_size_pass(&mut self, stage: usize, size: usize, active: &[SymbolId]) {
        let candidates = build_candidates(self.theory, active, size, &self.retained);
        for t in candidates {
            self.stats.terms_generated += 1;
            if self.store.normal_form(&t) != t {
                self.stats.terms_pruned += 1;
                continue;
            }
            self.stats.terms_considered += 1;
            self.trace.push(TraceEvent::Considered { stage, size, term: t.clone() });
            self.classify(t, stage, size);
        }
    }

    fn retain(&mut self, t: Term, size: usize) {
        let sort = t.sort(&self.theory.signature);
        self.retained[size][sort.0 as usize].push(t);
    }

    fn classify(&mut self, t: Term, stage: usize, size: usize) {
        let fuel = self.theory.config.fuel;
        let mut fp = fingerprint(&t, &self.suite, self.theory, fuel);
        if !fp.reliable() {
            return;
        }
        if !fp.all_defined() {
            // Usable as a building block, but partial terms never form
            // candidate equations.
            self.retain(t, size);
            return;
        }
        loop {
            let sort = t.sort(&self.theory.signature);
            let found = self.find_class(sort, &fp);
            match found {
                None => {
                    let hash = fp.stable_hash();
                    self.classes.push(Class { sort, rep: t.clone(), fp });
                    self.lookup.entry(hash).or_default().push(self.classes.len() - 1);
                    self.retain(t, size);
                    return;
                }
                Some(ci) if self.classes[ci].rep == t => {
                    // Re-encountered in a later stage; keep it in play.
                    self.retain(t, size);
                    return;
                }
                Some(ci) => {
                    let rep = self.classes[ci].rep.clone();
                    match self.confirm(&t, &rep, None) {
                        Ok(Confirmation::Confirmed { passes }) => {
                            self.emit(t, rep, ci, stage, size, passes);
                            return;
                        }
                        Ok(Confirmation::Refuted(case)) => {
                            self.refine(case, &t, &mut fp);
                        }
                        Ok(Confirmation::Inconclusive) => return,
                        Err(_) => unreachable!("unconditional confirmation cannot exhaust"),
                    }
                }
            }
        }
    }

    fn find_class(&self, sort: SortId, fp: &Fingerprint) -> Option<usize> {
        let bucket = self.lookup.get(&fp.stable_hash())?;
        bucket
            .iter()
            .copied()
            .find(|&ci| self.classes[ci].sort == sort && &self.classes[ci].fp == fp)
    }

    /// Tests `t = u` on up to `max_tests` fresh cases. Cases where either
    /// side is undefined are discarded.
    fn confirm(
        &mut self,
        t: &Term,
        u: &Term,
        condition: Option<(crate::theory::FnId, &[Variable])>,
    ) -> Result<Confirmation, crate::eval::ConditionExhausted> {
        let fuel = self.theory.config.fuel;
        let mut passes = 0usize;
        for _ in 0..self.theory.config.max_tests {
            let rng = if condition.is_some() { &mut self.rng_cond } else { &mut self.rng_confirm };
            let case = generate_testcase(self.theory, rng, condition)?;
            self.stats.confirmation_tests += 1;
            let a = case_observation(t, &case, self.theory, fuel);
            let b = case_observation(u, &case, self.theory, fuel);
            if a.fully_defined() && b.fully_defined() {
                if a == b {
                    passes += 1;
                } else {
                    return Ok(Confirmation::Refuted(case));
                }
            }
        }
        if passes == 0 {
            return Ok(Confirmation::Inconclusive);
        }
        Ok(Confirmation::Confirmed { passes })
    }

    /// A failing confirmation case joins the suite permanently; every class
    /// fingerprint and the candidate's are extended incrementally.
    fn refine(&mut self, case: TestCase, t: &Term, fp: &mut Fingerprint) {
        let fuel = self.theory.config.fuel;
        for class in &mut self.classes {
            class
                .fp
                .cases
                .push(case_observation(&class.rep, &case, self.theory, fuel));
        }
        fp.cases.push(case_observation(t, &case, self.theory, fuel));
        self.suite.push(case);
        self.lookup.clear();
        for (ci, class) in self.classes.iter().enumerate() {
            self.lookup.entry(class.fp.stable_hash()).or_default().push(ci);
        }
    }

    fn emit(&mut self, t: Term, rep: Term, ci: usize, stage: usize, size: usize, passes: usize) {
        let (lhs, rhs) = match compare_terms(&t, &rep) {
            Ordering::Greater => (t.clone(), rep.clone()),
            _ => (rep.clone(), t.clone()),
        };
        if compare_terms(&t, &rep) == Ordering::Less {
            self.classes[ci].rep = t.clone();
        }
        // The representative may have become reducible since it was
        // retained; a collision with it can then already be a consequence of
        // the store, in which case there is nothing new to report.
        let redundant = self.store.is_redundant(&lhs, &rhs);
        if redundant {
            if self.store.normal_form(&t) == t {
                self.retain(t, size);
            }
            return;
        }
        self.store.add(&lhs, &rhs);
        if self.store.normal_form(&t) == t {
            self.retain(t.clone(), size);
        }

        let renaming = canonical_renaming(&[&lhs, &rhs]);
        let clhs = renaming.apply(&lhs);
        let crhs = renaming.apply(&rhs);
        if std::env::var("LAWSEEKER_DEBUG_EMIT").is_ok() {
            eprintln!(
                "emit: t={} rep={} => {} = {}",
                t.prefix_string(&self.theory.signature),
                rep.prefix_string(&self.theory.signature),
                clhs.prefix_string(&self.theory.signature),
                crhs.prefix_string(&self.theory.signature)
            );
        }
        let printable = self.has_non_background(&clhs, &crhs)
            && self.mentions_stage(&clhs, &crhs, stage);
        let printed_index = if printable { Some(self.laws.len()) } else { None };
        self.trace.push(TraceEvent::Law {
            printed_index,
            lhs: clhs.clone(),
            rhs: crhs.clone(),
            redundant_at_emission: redundant,
        });
        if printable {
            self.laws.push(Conjecture {
                effective_size: clhs.size().max(crhs.size()),
                lhs: clhs,
                rhs: crhs,
                precondition: None,
                stage,
                tests_passed: passes,
            });
        } else {
            self.stats.laws_stored_only += 1;
        }
    }

    fn has_non_background(&self, lhs: &Term, rhs: &Term) -> bool {
        self.symbols_of(lhs, rhs)
            .iter()
            .any(|s| !self.theory.signature.symbol(*s).background)
    }

    fn mentions_stage(&self, lhs: &Term, rhs: &Term, stage: usize) -> bool {
        self.symbols_of(lhs, rhs)
            .iter()
            .any(|s| self.theory.signature.symbol(*s).stage == stage)
    }

    fn symbols_of(&self, lhs: &Term, rhs: &Term) -> Vec<SymbolId> {
        let mut out = Vec::new();
        for t in lhs.subterms().into_iter().chain(rhs.subterms()) {
            if let Term::App(sym, _) = t {
                out.push(*sym);
            }
        }
        out
    }

    fn max_symbol_stage(&self, lhs: &Term, rhs: &Term) -> usize {
        self.symbols_of(lhs, rhs)
            .iter()
            .map(|s| self.theory.signature.symbol(*s).stage)
            .max()
            .unwrap_or(1)
    }

    /// Conditional law discovery over the retained terms of the final stage.
    /// For each predicate and tuple of distinct variables: classify on a
    /// conditioned suite, and confirm pairs that the unconditional suite
    /// separates. Conditional laws never enter the rewrite store.
    fn discover_conditionals(&mut self) {
        if self.theory.predicates.is_empty() || self.theory.config.max_preconditions == 0 {
            return;
        }
        let fuel = self.theory.config.fuel;
        let max = self.theory.config.max_term_size;
        let candidates: Vec<Term> = self
            .retained
            .iter()
            .flatten()
            .flatten()
            .filter(|t| t.size() < max) // the precondition adds 1 to the size
            .cloned()
            .collect();
        if candidates.is_empty() {
            return;
        }

        let mut emitted: Vec<(usize, Term, Term)> = Vec::new();
        for pi in 0..self.theory.predicates.len() {
            let pred_fn = self.theory.predicates[pi].fun;
            let arg_sorts: Vec<SortId> = self
                .theory
                .fun(pred_fn)
                .params
                .iter()
                .map(|(_, s)| *s)
                .collect();
            let mut skip_predicate = false;
            for tuple in distinct_variable_tuples(self.theory, &arg_sorts) {
                if skip_predicate {
                    break;
                }
                // A conditioned suite the same size as the main one.
                let mut csuite = Vec::with_capacity(self.suite.len());
                let mut exhausted = false;
                for _ in 0..self.suite.len() {
                    match generate_testcase(self.theory, &mut self.rng_cond, Some((pred_fn, &tuple))) {
                        Ok(case) => csuite.push(case),
                        Err(e) => {
                            self.warnings.push(format!(
                                "skipping predicate '{}': {e}",
                                self.theory.predicates[pi].name
                            ));
                            exhausted = true;
                            break;
                        }
                    }
                }
                if exhausted {
                    break;
                }

                // Group candidates by conditioned fingerprint, in candidate
                // order so emission order is deterministic.
                let mut groups: Vec<Vec<usize>> = Vec::new();
                let mut group_of: HashMap<u64, Vec<usize>> = HashMap::new();
                let mut fps: Vec<Option<Fingerprint>> = Vec::new();
                for (i, t) in candidates.iter().enumerate() {
                    let fp = fingerprint(t, &csuite, self.theory, fuel);
                    if !fp.all_defined() {
                        fps.push(None);
                        continue;
                    }
                    let hash = fp.stable_hash();
                    let sort = t.sort(&self.theory.signature);
                    let mut placed = false;
                    if let Some(bucket) = group_of.get(&hash) {
                        for &gi in bucket {
                            let leader = groups[gi][0];
                            if candidates[leader].sort(&self.theory.signature) == sort
                                && fps[leader].as_ref() == Some(&fp)
                            {
                                groups[gi].push(i);
                                placed = true;
                                break;
                            }
                        }
                    }
                    if !placed {
                        group_of.entry(hash).or_default().push(groups.len());
                        groups.push(vec![i]);
                    }
                    fps.push(Some(fp));
                }

                for group in groups.iter().filter(|g| g.len() > 1) {
                    let rep_idx = *group
                        .iter()
                        .min_by(|&&a, &&b| compare_terms(&candidates[a], &candidates[b]))
                        .expect("non-empty group");
                    let rep = candidates[rep_idx].clone();
                    let rep_fp_uncond = fingerprint(&rep, &self.suite, self.theory, fuel);
                    for &i in group {
                        if i == rep_idx {
                            continue;
                        }
                        let t = candidates[i].clone();
                        // Only pairs the unconditional suite separates.
                        if fingerprint(&t, &self.suite, self.theory, fuel) == rep_fp_uncond {
                            continue;
                        }
                        // Suppressed when the unconditional version is
                        // already a consequence of the store.
                        if self.store.is_redundant(&t, &rep) {
                            continue;
                        }
                        match self.confirm(&t, &rep, Some((pred_fn, &tuple))) {
                            Err(e) => {
                                self.warnings.push(format!(
                                    "skipping predicate '{}': {e}",
                                    self.theory.predicates[pi].name
                                ));
                                skip_predicate = true;
                                break;
                            }
                            Ok(Confirmation::Confirmed { passes }) => {
                                if emitted.iter().any(|(p, l, r)| {
                                    *p == pi && equations_equivalent((l, r), (&t, &rep))
                                }) {
                                    continue;
                                }
                                emitted.push((pi, t.clone(), rep.clone()));
                                self.emit_conditional(pi, &tuple, t, rep.clone(), passes);
                            }
                            Ok(_) => {}
                        }
                    }
                    if skip_predicate {
                        break;
                    }
                }
            }
        }
    }

    fn emit_conditional(
        &mut self,
        pred: usize,
        tuple: &[Variable],
        t: Term,
        rep: Term,
        passes: usize,
    ) {
        let (lhs, rhs) = match compare_terms(&t, &rep) {
            Ordering::Greater => (t, rep),
            _ => (rep, t),
        };
        let arg_terms: Vec<Term> = tuple.iter().map(|v| Term::Var(*v)).collect();
        let mut order: Vec<&Term> = vec![&lhs, &rhs];
        order.extend(arg_terms.iter());
        let renaming = canonical_renaming(&order);
        let clhs = renaming.apply(&lhs);
        let crhs = renaming.apply(&rhs);
        let cargs: Vec<Variable> = arg_terms
            .iter()
            .map(|a| match renaming.apply(a) {
                Term::Var(v) => v,
                _ => unreachable!("renaming maps variables to variables"),
            })
            .collect();
        let stage = self.max_symbol_stage(&clhs, &crhs);
        let effective_size = clhs.size().max(crhs.size()) + 1;
        self.trace.push(TraceEvent::Law {
            printed_index: Some(self.laws.len()),
            lhs: clhs.clone(),
            rhs: crhs.clone(),
            redundant_at_emission: false,
        });
        self.laws.push(Conjecture {
            lhs: clhs,
            rhs: crhs,
            precondition: Some((pred, cargs)),
            stage,
            effective_size,
            tests_passed: passes,
        });
    }

    fn into_report(self) -> ExplorationReport {
        ExplorationReport {
            theory_name: self.theory.name.clone(),
            config: self.theory.config.clone(),
            laws: self.laws,
            stats: self.stats,
            trace: self.trace,
            warnings: self.warnings,
            store: self.store,
        }
    }
}

/// Ordered tuples of pairwise-distinct variables matching the given sorts.
fn distinct_variable_tuples(theory: &Theory, arg_sorts: &[SortId]) -> Vec<Vec<Variable>> {
    let mut out = Vec::new();
    let mut current: Vec<Variable> = Vec::new();
    fn rec(
        theory: &Theory,
        arg_sorts: &[SortId],
        current: &mut Vec<Variable>,
        out: &mut Vec<Vec<Variable>>,
    ) {
        let pos = current.len();
        if pos == arg_sorts.len() {
            out.push(current.clone());
            return;
        }
        let sort = arg_sorts[pos];
        for index in 0..theory.signature.vars_of_sort(sort) as u32 {
            let v = Variable { sort, index };
            if current.contains(&v) {
                continue;
            }
            current.push(v);
            rec(theory, arg_sorts, current, out);
            current.pop();
        }
    }
    rec(theory, arg_sorts, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_theory;

    const PLUS_THEORY: &str = r#"
(theory plus-only
  (sort Nat (int-range 0 30) (vars "x" "y" "z"))
  (define-fun add ((a Nat) (b Nat)) Nat (+ a b))
  (stage (con "0" (lit 0 Nat)) (con "+" add)))
"#;

    #[test]
    fn size_one_terms_are_variables_and_constants() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let active: Vec<SymbolId> = vec![SymbolId(0), SymbolId(1)];
        let store = EquationStore::new();
        let terms = enumerate_terms(&th, &active, 1, &store);
        assert_eq!(terms.len(), 4); // 0, x, y, z
    }

    #[test]
    fn size_three_terms_with_empty_store() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let active: Vec<SymbolId> = vec![SymbolId(0), SymbolId(1)];
        let store = EquationStore::new();
        let terms = enumerate_terms(&th, &active, 3, &store);
        assert_eq!(terms.len(), 16); // all a+b over the four size-1 terms
    }

    #[test]
    fn enumeration_skips_reducible_terms() {
        use crate::term::Term;
        let th = load_theory(PLUS_THEORY).unwrap();
        let active: Vec<SymbolId> = vec![SymbolId(0), SymbolId(1)];
        let mut store = EquationStore::new();
        let x = Term::var(SortId(1), 0);
        let y = Term::var(SortId(1), 1);
        let zero = Term::app(SymbolId(0), vec![]);
        let plus = |a: Term, b: Term| Term::app(SymbolId(1), vec![a, b]);
        store.add(&plus(x.clone(), zero.clone()), &x);
        store.add(&plus(x.clone(), y.clone()), &plus(y.clone(), x.clone()));

        let engine = enumerate_terms(&th, &active, 3, &store);
        // Independent oracle: generate everything, filter by normal form.
        let empty = EquationStore::new();
        let naive: Vec<Term> = enumerate_terms(&th, &active, 3, &empty)
            .into_iter()
            .filter(|t| store.normal_form(t) == *t)
            .collect();
        assert_eq!(engine, naive);
        assert!(engine.iter().all(|t| *t != plus(x.clone(), zero.clone())));
    }

    #[test]
    fn explore_single_constant_theory_finds_nothing() {
        let th = load_theory(
            r#"(theory lonely
                 (sort Nat (int-range 0 30) (vars "x" "y" "z"))
                 (stage (con "0" (lit 0 Nat))))"#,
        )
        .unwrap();
        let report = explore(&th, &th.config).unwrap();
        assert!(report.laws.is_empty());
    }

    #[test]
    fn explore_empty_signature_is_empty() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let mut th = th;
        th.signature.symbols.clear();
        th.symbol_refs.clear();
        let report = explore(&th, &th.config.clone()).unwrap();
        assert!(report.laws.is_empty());
        assert_eq!(report.stats.terms_considered, 0);
    }

    #[test]
    fn plus_theory_finds_commutativity_and_unit() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let mut config = th.config.clone();
        config.max_term_size = 3;
        let report = explore(&th, &config).unwrap();
        let x = Term::var(SortId(1), 0);
        let y = Term::var(SortId(1), 1);
        let zero = Term::app(SymbolId(0), vec![]);
        let plus = |a: Term, b: Term| Term::app(SymbolId(1), vec![a, b]);
        let want_comm = (plus(x.clone(), y.clone()), plus(y.clone(), x.clone()));
        let want_unit = (plus(x.clone(), zero.clone()), x.clone());
        let found = |target: &(Term, Term)| {
            report
                .laws
                .iter()
                .any(|law| equations_equivalent((&law.lhs, &law.rhs), (&target.0, &target.1)))
        };
        assert!(found(&want_comm), "commutativity not found: {:?}", report.laws);
        assert!(found(&want_unit), "unit law not found");
    }

    /// Two definitions of the same function are identified at size 2, and
    /// the law survives a brute-force check over a small domain.
    #[test]
    fn double_definition_is_discovered() {
        let th = load_theory(
            r#"(theory double
                 (sort Nat (int-range 0 30) (vars "x" "y" "z"))
                 (define-fun f ((a Nat)) Nat (+ a a))
                 (define-fun g ((a Nat)) Nat (* 2 a))
                 (stage (con "f" f) (con "g" g)))"#,
        )
        .unwrap();
        let report = explore(&th, &th.config).unwrap();
        let x = Term::var(SortId(1), 0);
        let f = Term::app(SymbolId(0), vec![x.clone()]);
        let g = Term::app(SymbolId(1), vec![x.clone()]);
        assert!(report
            .laws
            .iter()
            .any(|law| equations_equivalent((&law.lhs, &law.rhs), (&f, &g))));
        // Exhaustive oracle over [0, 10].
        use crate::eval::{eval_term, TestCase};
        use std::collections::BTreeMap;
        for v in 0..=10 {
            let mut valuation = BTreeMap::new();
            valuation.insert(
                Variable { sort: SortId(1), index: 0 },
                crate::eval::Value::Int(v.into()),
            );
            let tc = TestCase { valuation, contexts: BTreeMap::new() };
            assert_eq!(
                eval_term(&f, &tc, &th, 1000),
                eval_term(&g, &tc, &th, 1000)
            );
        }
    }

    #[test]
    fn gcd_stage_one_finds_commutativity_and_unit_at_size_three() {
        let th = crate::theories::bundled("gcd").unwrap().load().unwrap();
        let mut config = th.config.clone();
        config.max_term_size = 3;
        let report = explore(&th, &config).unwrap();
        let nat = th.signature.sort_named("Nat").unwrap();
        let x = Term::var(nat, 0);
        let y = Term::var(nat, 1);
        let zero = Term::app(SymbolId(0), vec![]);
        let plus = |a: Term, b: Term| Term::app(SymbolId(2), vec![a, b]);
        let stage1: Vec<&Conjecture> = report.laws.iter().filter(|l| l.stage == 1).collect();
        let comm = (plus(x.clone(), y.clone()), plus(y.clone(), x.clone()));
        let unit = (plus(x.clone(), zero.clone()), x.clone());
        for target in [&comm, &unit] {
            assert!(
                stage1
                    .iter()
                    .any(|l| equations_equivalent((&l.lhs, &l.rhs), (&target.0, &target.1))),
                "missing {:?}",
                target
            );
        }
    }

    #[test]
    fn invalid_configuration_aborts_before_enumeration() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let mut config = th.config.clone();
        config.contexts_per_case = 0;
        assert!(matches!(explore(&th, &config), Err(ExploreError::Config(_))));
        let mut config = th.config.clone();
        config.max_term_size = 0;
        assert!(matches!(explore(&th, &config), Err(ExploreError::Config(_))));
        // Variable name tables are fixed when the theory is checked.
        let mut config = th.config.clone();
        config.vars_per_sort = 2;
        assert!(matches!(explore(&th, &config), Err(ExploreError::Config(_))));
    }

    #[test]
    fn printed_laws_keep_background_and_stage_invariants() {
        let th = crate::theories::bundled("maps").unwrap().load().unwrap();
        let mut config = th.config.clone();
        config.max_term_size = 6;
        config.max_tests = 300;
        let report = explore(&th, &config).unwrap();
        assert!(!report.laws.is_empty());
        for law in &report.laws {
            let symbols: Vec<SymbolId> = law
                .lhs
                .subterms()
                .iter()
                .chain(law.rhs.subterms().iter())
                .filter_map(|t| match t {
                    Term::App(sym, _) => Some(*sym),
                    _ => None,
                })
                .collect();
            assert!(
                symbols.iter().any(|s| !th.signature.symbol(*s).background),
                "background-only law printed: {:?}",
                law
            );
            if law.precondition.is_none() {
                assert!(
                    symbols.iter().any(|s| th.signature.symbol(*s).stage == law.stage),
                    "law tagged stage {} mentions no symbol of that stage",
                    law.stage
                );
            }
        }
    }

    #[test]
    fn printed_variables_follow_first_occurrence_order() {
        for bundle in crate::theories::bundled_catalog() {
            let th = bundle.load().unwrap();
            let mut config = th.config.clone();
            config.max_term_size = 5;
            config.max_tests = 300;
            let report = explore(&th, &config).unwrap();
            for law in &report.laws {
                let mut next: std::collections::BTreeMap<SortId, u32> = Default::default();
                let mut walk = law.lhs.subterms();
                walk.extend(law.rhs.subterms());
                for t in walk {
                    if let Term::Var(v) = t {
                        let slot = next.entry(v.sort).or_insert(0);
                        assert!(
                            v.index <= *slot,
                            "variable index {} appears before {} in {:?}",
                            v.index,
                            *slot,
                            law
                        );
                        if v.index == *slot {
                            *slot += 1;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn determinism_same_config_same_laws() {
        let th = load_theory(PLUS_THEORY).unwrap();
        let a = explore(&th, &th.config).unwrap();
        let b = explore(&th, &th.config).unwrap();
        assert_eq!(a.laws, b.laws);
        assert_eq!(a.stats, b.stats);
    }
}
