//! Grounding: safety analysis, Herbrand instantiation, and the grade
//! lattice used to bound the solver's search.
//!
//! Object variables are split into *global* variables, replaced by every
//! constant of the Herbrand universe, and *set-local* variables, scoped to a
//! single symbolic fuzzy set and instantiated inside it. A variable is local
//! exactly when it occurs in one set and nowhere else in its rule. Guard
//! terms and grade constants never contribute constants to the universe.
//!
//! Safety requires every global object variable to occur in a positive body
//! literal (a plain atom, or anywhere inside a non-negated aggregate), and
//! every annotation variable to be bound by some positive atom that carries
//! it as its whole annotation — a body atom for rule-level variables, or a
//! set conjunct for set-level ones.
//!
//! The grade lattice assigns each ground atom the set of grades that any
//! rule chain could assign it, starting from 0. A rule extends the lattice
//! only while its body is still satisfiable under some assignment drawn from
//! the current lattice; aggregate bodies are bounded with interval analysis
//! over the items that could still contribute. Atoms whose lattice stays at
//! {0} can be pinned to 0 during answer-set search, and rules that never
//! become satisfiable can be skipped entirely.

use crate::model::*;
use num::rational::BigRational;
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct GroundConfig {
    /// Maximum nesting depth of object function terms; the universe is
    /// closed under function application up to this depth.
    pub func_depth: usize,
    /// Upper bound on the number of distinct grades in the lattice.
    pub lattice_cap: usize,
    /// Maximum number of lattice iterations before stopping.
    pub iter_cap: usize,
    /// Upper bound on ground rules and on terms in the universe.
    pub size_cap: usize,
}

impl Default for GroundConfig {
    fn default() -> GroundConfig {
        GroundConfig {
            func_depth: 0,
            lattice_cap: 10_000,
            iter_cap: 16,
            size_cap: 1_000_000,
        }
    }
}

#[derive(Error, Debug)]
pub enum GroundError {
    #[error("object variable {var} needs a positive body occurrence in rule: {rule}")]
    UnsafeObjectVar { rule: String, var: String },
    #[error("annotation variable {var} is not bound by any positive annotation in rule: {rule}")]
    UnboundAnnotationVar { rule: String, var: String },
    #[error("aggregate guard {guard} is not ground in rule instance: {rule}")]
    UngroundGuard { rule: String, guard: String },
    #[error("aggregate guard {guard} is not numeric in rule instance: {rule}")]
    GuardNotNumeric { rule: String, guard: String },
    #[error("term {term} exceeds the function nesting depth {max}")]
    TermDepthExceeded { term: String, max: usize },
    #[error("Herbrand universe exceeds {cap} terms")]
    UniverseTooLarge { cap: usize },
    #[error("ground program exceeds {cap} rules")]
    GroundingTooLarge { cap: usize },
    #[error("grade lattice exceeds {cap} entries")]
    LatticeOverflow { size: usize, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Result of grounding: the instantiated rules, the universe they were
/// built over, and warnings for set entries that were discarded.
#[derive(Clone, Debug)]
pub struct Grounding {
    pub program: Program,
    pub universe: Vec<Term>,
    pub warnings: Vec<String>,
}

/// Grades each ground atom can reach, plus which rules can ever fire.
#[derive(Clone, Debug)]
pub struct GradeLattice {
    pub per_atom: BTreeMap<Atom, BTreeSet<Grade>>,
    pub global: BTreeSet<Grade>,
    pub fired: Vec<bool>,
    pub converged: bool,
}

impl GradeLattice {
    /// Atoms whose lattice admits a nonzero grade.
    pub fn alive_atoms(&self) -> Vec<&Atom> {
        self.per_atom
            .iter()
            .filter(|(_, d)| d.len() > 1)
            .map(|(a, _)| a)
            .collect()
    }
}

/// Object-variable scoping for one rule: which variables are global and
/// which belong to the symbolic set of a given body literal.
struct VarScope {
    global: BTreeSet<String>,
    local: BTreeMap<usize, BTreeSet<String>>,
}

fn object_var_scope(rule: &Rule) -> VarScope {
    let mut outside = BTreeSet::new();
    for h in &rule.head {
        h.atom.vars(&mut outside);
    }
    let mut per_set: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, l) in rule.body.iter().enumerate() {
        match &l.expr {
            BodyExpr::Atom(a) => a.atom.vars(&mut outside),
            BodyExpr::Agg(agg) => {
                agg.guard.vars(&mut outside);
                if let SetTerm::Symbolic(p) = &agg.set {
                    let vars = per_set.entry(i).or_default();
                    p.item.vars(vars);
                    for c in &p.conj {
                        c.atom.vars(vars);
                    }
                }
            }
        }
    }
    let mut seen_in_sets: BTreeMap<&String, usize> = BTreeMap::new();
    for vars in per_set.values() {
        for v in vars {
            *seen_in_sets.entry(v).or_insert(0) += 1;
        }
    }
    let mut global = outside.clone();
    for (v, n) in seen_in_sets {
        if n >= 2 {
            global.insert(v.clone());
        }
    }
    let local = per_set
        .into_iter()
        .map(|(i, vars)| (i, vars.difference(&global).cloned().collect()))
        .collect();
    VarScope { global, local }
}

/// Validates variable use in every rule; see the module docs for the rules.
pub fn check_safety(p: &Program) -> Result<(), GroundError> {
    for rule in &p.rules {
        check_rule_safety(rule)?;
    }
    Ok(())
}

fn check_rule_safety(rule: &Rule) -> Result<(), GroundError> {
    let scope = object_var_scope(rule);
    // Object variables: every global variable needs a positive occurrence.
    let mut positive = BTreeSet::new();
    for l in &rule.body {
        if l.neg {
            continue;
        }
        match &l.expr {
            BodyExpr::Atom(a) => a.atom.vars(&mut positive),
            BodyExpr::Agg(agg) => {
                agg.guard.vars(&mut positive);
                if let SetTerm::Symbolic(p) = &agg.set {
                    p.item.vars(&mut positive);
                    for c in &p.conj {
                        c.atom.vars(&mut positive);
                    }
                }
            }
        }
    }
    for v in &scope.global {
        if !positive.contains(v) {
            return Err(GroundError::UnsafeObjectVar {
                rule: rule.to_string(),
                var: v.clone(),
            });
        }
    }
    // Annotation variables: collect binders, then check each use site.
    let mut rule_bound = BTreeSet::new();
    for l in &rule.body {
        if l.neg {
            continue;
        }
        if let BodyExpr::Atom(a) = &l.expr {
            if let Annotation::Var(v) = &a.ann {
                rule_bound.insert(v.clone());
            }
        }
    }
    let check = |ann: &Annotation, extra: Option<&BTreeSet<String>>| -> Option<String> {
        let mut vars = BTreeSet::new();
        ann.vars(&mut vars);
        vars.into_iter().find(|v| {
            !rule_bound.contains(v) && !extra.map_or(false, |set| set.contains(v))
        })
    };
    let fail = |var: String| GroundError::UnboundAnnotationVar {
        rule: rule.to_string(),
        var,
    };
    for h in &rule.head {
        if let Some(v) = check(&h.ann, None) {
            return Err(fail(v));
        }
    }
    for l in &rule.body {
        match &l.expr {
            BodyExpr::Atom(a) => {
                // A positive atom binds its own whole-variable annotation.
                if !l.neg && matches!(a.ann, Annotation::Var(_)) {
                    continue;
                }
                if let Some(v) = check(&a.ann, None) {
                    return Err(fail(v));
                }
            }
            BodyExpr::Agg(agg) => {
                if let Some(v) = check(&agg.ann, None) {
                    return Err(fail(v));
                }
                let pairs: Vec<&SetPair> = match &agg.set {
                    SetTerm::Symbolic(p) => vec![p],
                    SetTerm::Ground(ps) => ps.iter().collect(),
                };
                for p in pairs {
                    let mut set_bound = BTreeSet::new();
                    for c in &p.conj {
                        if let Annotation::Var(v) = &c.ann {
                            set_bound.insert(v.clone());
                        }
                    }
                    if let Some(v) = check(&p.grade, Some(&set_bound)) {
                        return Err(fail(v));
                    }
                    for c in &p.conj {
                        if matches!(c.ann, Annotation::Var(_)) {
                            continue;
                        }
                        if let Some(v) = check(&c.ann, Some(&set_bound)) {
                            return Err(fail(v));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn each_term<'a>(p: &'a Program, include_guards: bool, mut f: impl FnMut(&'a Term)) {
    for rule in &p.rules {
        for h in &rule.head {
            for t in &h.atom.args {
                f(t);
            }
        }
        for l in &rule.body {
            match &l.expr {
                BodyExpr::Atom(a) => {
                    for t in &a.atom.args {
                        f(t);
                    }
                }
                BodyExpr::Agg(agg) => {
                    if include_guards {
                        f(&agg.guard);
                    }
                    let pairs: Vec<&SetPair> = match &agg.set {
                        SetTerm::Symbolic(p) => vec![p],
                        SetTerm::Ground(ps) => ps.iter().collect(),
                    };
                    for p in pairs {
                        f(&p.item);
                        for c in &p.conj {
                            for t in &c.atom.args {
                                f(t);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// The constants of the program (guards excluded) closed under object
/// function application up to `func_depth`.
pub fn herbrand_universe(
    p: &Program,
    func_depth: usize,
    size_cap: usize,
) -> Result<BTreeSet<Term>, GroundError> {
    // Depth validation considers every term, guards included.
    let mut too_deep: Option<Term> = None;
    each_term(p, true, |t| {
        if t.depth() > func_depth && too_deep.is_none() {
            too_deep = Some(t.clone());
        }
    });
    if let Some(t) = too_deep {
        return Err(GroundError::TermDepthExceeded {
            term: t.to_string(),
            max: func_depth,
        });
    }
    let mut universe: BTreeSet<Term> = BTreeSet::new();
    let mut fsyms: BTreeSet<(String, usize)> = BTreeSet::new();
    each_term(p, false, |top| {
        let mut stack = vec![top];
        while let Some(t) = stack.pop() {
            match t {
                Term::Num(_) | Term::Sym(_) => {
                    universe.insert(t.clone());
                }
                Term::Var(_) => {}
                Term::Fn(name, args) => {
                    fsyms.insert((name.clone(), args.len()));
                    stack.extend(args.iter());
                }
            }
        }
    });
    for _ in 0..func_depth {
        let base: Vec<Term> = universe.iter().cloned().collect();
        for (name, arity) in &fsyms {
            if base.is_empty() {
                break;
            }
            let mut idx = vec![0usize; *arity];
            loop {
                let args: Vec<Term> = idx.iter().map(|&i| base[i].clone()).collect();
                let t = Term::Fn(name.clone(), args);
                if t.depth() <= func_depth {
                    universe.insert(t);
                    if universe.len() > size_cap {
                        return Err(GroundError::UniverseTooLarge { cap: size_cap });
                    }
                }
                // advance the index odometer
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < base.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(universe)
}

/// Iterates over all assignments of `vars` to terms of `universe`.
struct Assignments<'a> {
    vars: &'a [String],
    universe: &'a [Term],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> Assignments<'a> {
    fn new(vars: &'a [String], universe: &'a [Term]) -> Assignments<'a> {
        Assignments {
            vars,
            universe,
            idx: vec![0; vars.len()],
            done: vars.len() > 0 && universe.is_empty(),
        }
    }
}

impl<'a> Iterator for Assignments<'a> {
    type Item = BTreeMap<String, Term>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out: BTreeMap<String, Term> = self
            .vars
            .iter()
            .zip(self.idx.iter())
            .map(|(v, &i)| (v.clone(), self.universe[i].clone()))
            .collect();
        let mut k = 0;
        loop {
            if k == self.idx.len() {
                self.done = true;
                break;
            }
            self.idx[k] += 1;
            if self.idx[k] < self.universe.len() {
                break;
            }
            self.idx[k] = 0;
            k += 1;
        }
        Some(out)
    }
}

fn substitute_rule(rule: &Rule, sub: &BTreeMap<String, Term>) -> Rule {
    let head = rule.head.iter().map(|h| h.substitute(sub)).collect();
    let body = rule
        .body
        .iter()
        .map(|l| BodyLit {
            neg: l.neg,
            expr: match &l.expr {
                BodyExpr::Atom(a) => BodyExpr::Atom(a.substitute(sub)),
                BodyExpr::Agg(agg) => BodyExpr::Agg(AggAtom {
                    func: agg.func,
                    set: match &agg.set {
                        SetTerm::Symbolic(p) => SetTerm::Symbolic(p.substitute(sub)),
                        SetTerm::Ground(ps) => SetTerm::Ground(ps.clone()),
                    },
                    cmp: agg.cmp,
                    guard: agg.guard.substitute(sub),
                    ann: agg.ann.clone(),
                }),
            },
        })
        .collect();
    Rule { head, body }
}

/// Grounds a program over its Herbrand universe. Symbolic fuzzy sets become
/// explicit pair lists; entries with a non-numeric item are discarded from
/// numeric aggregates with a warning; duplicate pairs and duplicate rule
/// instances collapse.
pub fn ground_program(p: &Program, cfg: &GroundConfig) -> Result<Grounding, GroundError> {
    check_safety(p)?;
    let universe_set = herbrand_universe(p, cfg.func_depth, cfg.size_cap)?;
    let universe: Vec<Term> = universe_set.into_iter().collect();
    let mut warnings: BTreeSet<String> = BTreeSet::new();
    let mut rules: Vec<Rule> = Vec::new();
    for rule in &p.rules {
        let scope = object_var_scope(rule);
        let globals: Vec<String> = scope.global.iter().cloned().collect();
        // Bail out early if the instance count would exceed the cap.
        let mut count = 1usize;
        for _ in &globals {
            count = count.saturating_mul(universe.len());
        }
        if count.saturating_add(rules.len()) > cfg.size_cap {
            return Err(GroundError::GroundingTooLarge { cap: cfg.size_cap });
        }
        for sub in Assignments::new(&globals, &universe) {
            let mut inst = substitute_rule(rule, &sub);
            for (i, lit) in inst.body.iter_mut().enumerate() {
                let agg = match &mut lit.expr {
                    BodyExpr::Agg(agg) => agg,
                    BodyExpr::Atom(_) => continue,
                };
                if !agg.guard.is_ground() {
                    return Err(GroundError::UngroundGuard {
                        rule: rule.to_string(),
                        guard: agg.guard.to_string(),
                    });
                }
                if agg.guard.as_number().is_none() {
                    return Err(GroundError::GuardNotNumeric {
                        rule: rule.to_string(),
                        guard: agg.guard.to_string(),
                    });
                }
                let numeric = agg.func.numeric();
                let mut keep = |pair: SetPair, out: &mut Vec<SetPair>| {
                    if numeric && pair.item.as_number().is_none() {
                        warnings.insert(format!(
                            "dropped non-numeric item {} from a {} set",
                            pair.item,
                            agg.func.name()
                        ));
                        return;
                    }
                    if !out.contains(&pair) {
                        out.push(pair);
                    }
                };
                let mut pairs = Vec::new();
                match &agg.set {
                    SetTerm::Symbolic(sp) => {
                        let locals: Vec<String> = scope
                            .local
                            .get(&i)
                            .map(|s| s.iter().cloned().collect())
                            .unwrap_or_default();
                        let mut count = 1usize;
                        for _ in &locals {
                            count = count.saturating_mul(universe.len());
                        }
                        if count > cfg.size_cap {
                            return Err(GroundError::GroundingTooLarge { cap: cfg.size_cap });
                        }
                        for tau in Assignments::new(&locals, &universe) {
                            keep(sp.substitute(&tau), &mut pairs);
                        }
                    }
                    SetTerm::Ground(ps) => {
                        for pair in ps {
                            keep(pair.clone(), &mut pairs);
                        }
                    }
                }
                agg.set = SetTerm::Ground(pairs);
            }
            if !rules.contains(&inst) {
                rules.push(inst);
            }
            if rules.len() > cfg.size_cap {
                return Err(GroundError::GroundingTooLarge { cap: cfg.size_cap });
            }
        }
    }
    Ok(Grounding {
        program: Program::new(rules),
        universe,
        warnings: warnings.into_iter().collect(),
    })
}

type Domains = BTreeMap<Atom, BTreeSet<Grade>>;

fn max_grade<'a>(d: &'a Domains, atom: &Atom) -> &'a Grade {
    d.get(atom)
        .and_then(|set| set.iter().next_back())
        .unwrap_or_else(|| Grade::static_zero())
}

/// Could `atom : ann` still be satisfied by some interpretation drawn from
/// the lattice? Exact for constant thresholds, permissive for variables.
fn atom_possibly_sat(a: &AnnAtom, d: &Domains) -> Result<bool, GroundError> {
    match &a.ann {
        Annotation::Var(_) => Ok(true),
        Annotation::Const(c) => Ok(c <= max_grade(d, &a.atom)),
        Annotation::Fn(_, _) => {
            if a.ann.is_ground() {
                let c = a.ann.eval(&AnnBinding::new())?;
                Ok(&c <= max_grade(d, &a.atom))
            } else {
                Ok(true)
            }
        }
    }
}

/// Could this pair's grade evaluate above zero? The grade of a variable is
/// the meet of the atoms that carry it, so a carrier pinned at 0 pins the
/// pair's grade at 0 as well.
fn grade_possibly_positive(pair: &SetPair, d: &Domains) -> Result<bool, GroundError> {
    match &pair.grade {
        Annotation::Const(c) => Ok(!c.is_zero()),
        Annotation::Var(v) => {
            let carriers: Vec<&AnnAtom> = pair
                .conj
                .iter()
                .filter(|c| c.ann == Annotation::Var(v.clone()))
                .collect();
            if carriers.is_empty() {
                return Ok(true);
            }
            Ok(carriers.iter().all(|c| !max_grade(d, &c.atom).is_zero()))
        }
        Annotation::Fn(_, _) => {
            if pair.grade.is_ground() {
                Ok(!pair.grade.eval(&AnnBinding::new())?.is_zero())
            } else {
                Ok(true)
            }
        }
    }
}

fn agg_possibly_sat(agg: &AggAtom, d: &Domains) -> Result<bool, GroundError> {
    let pairs = match &agg.set {
        SetTerm::Ground(ps) => ps,
        SetTerm::Symbolic(_) => return Err(GroundError::Eval(EvalError::SymbolicSet)),
    };
    let guard = match agg.guard.as_number() {
        Some(g) => g.clone(),
        None => {
            return Err(GroundError::GuardNotNumeric {
                rule: agg.to_string(),
                guard: agg.guard.to_string(),
            })
        }
    };
    // Items that could still contribute under some lattice assignment.
    let mut items: Vec<BigRational> = Vec::new();
    let mut nonnumeric = 0usize;
    for pair in pairs {
        let mut alive = grade_possibly_positive(pair, d)?;
        for c in &pair.conj {
            if !alive {
                break;
            }
            alive = atom_possibly_sat(c, d)?;
        }
        if !alive {
            continue;
        }
        match pair.item.as_number() {
            Some(n) => items.push(n.clone()),
            None => nonnumeric += 1,
        }
    }
    let possible = match agg.func {
        AggFn::Min | AggFn::Max => items.iter().any(|i| agg.cmp.holds(i, &guard)),
        AggFn::Count => {
            let n = BigRational::from_integer((items.len() + nonnumeric).into());
            let lo = BigRational::zero();
            interval_admits(agg.cmp, &lo, &n, &guard)
        }
        AggFn::Sum => {
            let lo: BigRational = items.iter().filter(|i| i.is_negative()).cloned().sum();
            let hi: BigRational = items.iter().filter(|i| i.is_positive()).cloned().sum();
            interval_admits(agg.cmp, &lo, &hi, &guard)
        }
        AggFn::Times => true,
    };
    Ok(possible)
}

/// Whether some value in `[lo, hi]` can satisfy the comparison; assumes the
/// extremes are attainable.
fn interval_admits(cmp: CmpOp, lo: &BigRational, hi: &BigRational, guard: &BigRational) -> bool {
    match cmp {
        CmpOp::Gt => hi > guard,
        CmpOp::Ge => hi >= guard,
        CmpOp::Lt => lo < guard,
        CmpOp::Le => lo <= guard,
        CmpOp::Eq => lo <= guard && guard <= hi,
        CmpOp::Ne => !(lo == hi && lo == guard),
    }
}

fn body_possibly_sat(rule: &Rule, d: &Domains) -> Result<bool, GroundError> {
    for l in &rule.body {
        if l.neg {
            continue;
        }
        let sat = match &l.expr {
            BodyExpr::Atom(a) => atom_possibly_sat(a, d)?,
            BodyExpr::Agg(agg) => agg_possibly_sat(agg, d)?,
        };
        if !sat {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Computes the grade lattice of a ground program by iterating rule firings
/// to a fixpoint (or until the iteration cap).
pub fn grade_lattice(p: &Program, cfg: &GroundConfig) -> Result<GradeLattice, GroundError> {
    let mut per_atom: Domains = BTreeMap::new();
    let zero = || {
        let mut s = BTreeSet::new();
        s.insert(Grade::zero());
        s
    };
    for rule in &p.rules {
        for h in &rule.head {
            per_atom.entry(h.atom.clone()).or_insert_with(zero);
        }
        for l in &rule.body {
            match &l.expr {
                BodyExpr::Atom(a) => {
                    per_atom.entry(a.atom.clone()).or_insert_with(zero);
                }
                BodyExpr::Agg(agg) => {
                    let pairs: Vec<&SetPair> = match &agg.set {
                        SetTerm::Symbolic(sp) => vec![sp],
                        SetTerm::Ground(ps) => ps.iter().collect(),
                    };
                    for pair in pairs {
                        for c in &pair.conj {
                            per_atom.entry(c.atom.clone()).or_insert_with(zero);
                        }
                    }
                }
            }
        }
    }
    let mut fired = vec![false; p.rules.len()];
    let mut converged = false;
    for _ in 0..cfg.iter_cap {
        let mut changed = false;
        for (i, rule) in p.rules.iter().enumerate() {
            if !body_possibly_sat(rule, &per_atom)? {
                continue;
            }
            if !fired[i] {
                fired[i] = true;
                changed = true;
            }
            for h in &rule.head {
                let mut vars = BTreeSet::new();
                h.ann.vars(&mut vars);
                let vars: Vec<String> = vars.into_iter().collect();
                // Each annotation variable ranges over the lattice values of
                // the positive body atoms that carry it.
                let mut choices: Vec<Vec<Grade>> = Vec::new();
                let mut combos = 1usize;
                for v in &vars {
                    let mut vals: BTreeSet<Grade> = BTreeSet::new();
                    vals.insert(Grade::zero());
                    for l in &rule.body {
                        if l.neg {
                            continue;
                        }
                        if let BodyExpr::Atom(a) = &l.expr {
                            if a.ann == Annotation::Var(v.clone()) {
                                if let Some(dom) = per_atom.get(&a.atom) {
                                    vals.extend(dom.iter().cloned());
                                }
                            }
                        }
                    }
                    combos = combos.saturating_mul(vals.len());
                    choices.push(vals.into_iter().collect());
                }
                if combos > cfg.lattice_cap.saturating_mul(16) {
                    return Err(GroundError::LatticeOverflow {
                        size: combos,
                        cap: cfg.lattice_cap,
                    });
                }
                let dom = per_atom.entry(h.atom.clone()).or_insert_with(zero);
                let mut idx = vec![0usize; vars.len()];
                loop {
                    let binding: AnnBinding = vars
                        .iter()
                        .enumerate()
                        .map(|(j, v)| (v.clone(), choices[j][idx[j]].clone()))
                        .collect();
                    let g = h.ann.eval(&binding)?;
                    if dom.insert(g) {
                        changed = true;
                    }
                    let mut k = 0;
                    loop {
                        if k == idx.len() {
                            break;
                        }
                        idx[k] += 1;
                        if idx[k] < choices[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
            }
        }
        let global: BTreeSet<Grade> = per_atom.values().flatten().cloned().collect();
        if global.len() > cfg.lattice_cap {
            return Err(GroundError::LatticeOverflow {
                size: global.len(),
                cap: cfg.lattice_cap,
            });
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let global: BTreeSet<Grade> = per_atom.values().flatten().cloned().collect();
    Ok(GradeLattice {
        per_atom,
        global,
        fired,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    const DICE: &str = include_str!("../fixtures/dice.dflp");
    const COMPANY: &str = include_str!("../fixtures/company_fuzzy.dflp");

    fn ground(src: &str) -> Grounding {
        let p = parse_program(src).expect("parse");
        ground_program(&p, &GroundConfig::default()).expect("ground")
    }

    fn lattice(src: &str) -> (Grounding, GradeLattice) {
        let g = ground(src);
        let l = grade_lattice(&g.program, &GroundConfig::default()).expect("lattice");
        (g, l)
    }

    fn atom(s: &str) -> Atom {
        let p = parse_program(&format!("{}.", s)).expect("atom");
        p.rules[0].head[0].atom.clone()
    }

    fn grades(l: &GradeLattice, s: &str) -> Vec<Grade> {
        l.per_atom[&atom(s)].iter().cloned().collect()
    }

    #[test]
    fn dice_universe_is_the_face_constants() {
        let g = ground(DICE);
        assert_eq!(g.universe, vec![Term::num_i64(1), Term::num_i64(2)]);
        assert_eq!(g.program.rules.len(), 3);
    }

    #[test]
    fn dice_set_grounds_to_four_entries_spanning_both_dice() {
        let g = ground(DICE);
        let agg = match &g.program.rules[2].body[1].expr {
            BodyExpr::Agg(agg) => agg,
            _ => panic!("expected aggregate"),
        };
        match &agg.set {
            SetTerm::Ground(pairs) => {
                assert_eq!(pairs.len(), 4);
                let conjs: Vec<String> =
                    pairs.iter().map(|p| p.conj[0].atom.to_string()).collect();
                assert!(conjs.contains(&"a(1,2)".to_string()));
                assert!(conjs.contains(&"a(2,2)".to_string()));
            }
            _ => panic!("expected ground set"),
        }
    }

    #[test]
    fn global_variables_ground_over_the_cross_product() {
        let g = ground("q(a). q(b). r(c).\np(X,Y) :- q(X), r(Y).");
        assert_eq!(g.universe.len(), 3);
        assert_eq!(g.program.rules.len(), 3 + 9);
    }

    #[test]
    fn company_grounds_to_the_expected_rule_count() {
        let g = ground(COMPANY);
        assert_eq!(g.universe.len(), 5, "{:?}", g.universe);
        // 4 facts + 125 direct + 625 indirect + 25 control rules
        assert_eq!(g.program.rules.len(), 779);
        // share percentages are kept, company names are dropped from #sum_f
        assert!(!g.warnings.is_empty());
        assert!(g.warnings.iter().any(|w| w.contains("#sum_f")));
    }

    #[test]
    fn dice_lattice_matches_the_head_annotations() {
        let (_, l) = lattice(DICE);
        assert_eq!(grades(&l, "a(1,1)"), vec![Grade::zero(), Grade::ratio(4, 5)]);
        assert_eq!(grades(&l, "a(1,2)"), vec![Grade::zero(), Grade::ratio(2, 5)]);
        assert_eq!(grades(&l, "a(2,1)"), vec![Grade::zero(), Grade::ratio(3, 10)]);
        assert_eq!(grades(&l, "a(2,2)"), vec![Grade::zero(), Grade::ratio(9, 10)]);
        assert_eq!(grades(&l, "gamma"), vec![Grade::zero(), Grade::one()]);
        assert!(l.converged);
        assert_eq!(l.fired.iter().filter(|f| **f).count(), 3);
    }

    #[test]
    fn company_lattice_pins_everything_but_direct_holdings_at_zero() {
        let (g, l) = lattice(COMPANY);
        let alive = l.alive_atoms();
        assert_eq!(alive.len(), 8, "{:?}", alive);
        for a in &alive {
            let name = a.to_string();
            assert!(
                name.starts_with("ownsStk") || name.starts_with("controlStk"),
                "{}",
                name
            );
        }
        assert_eq!(
            grades(&l, "controlStk(a,a,b,40)"),
            vec![Grade::zero(), Grade::ratio(7, 10)]
        );
        assert_eq!(grades(&l, "controls(a,b)"), vec![Grade::zero()]);
        // every control-deriving rule is provably unsatisfiable
        for (i, rule) in g.program.rules.iter().enumerate() {
            if rule.head[0].atom.pred == "controls" {
                assert!(!l.fired[i], "{}", rule);
            }
        }
    }

    #[test]
    fn annotation_chains_propagate_through_functions() {
        let (_, l) = lattice("a : 0.5.\nb : prod(V,0.5) :- a : V.");
        assert_eq!(grades(&l, "b"), vec![Grade::zero(), Grade::ratio(1, 4)]);
    }

    #[test]
    fn attenuating_loop_stops_at_the_iteration_cap() {
        let cfg = GroundConfig::default();
        let p = parse_program("b : 0.5.\nb : prod(V,0.5) :- b : V.").unwrap();
        let g = ground_program(&p, &cfg).unwrap();
        let l = grade_lattice(&g.program, &cfg).unwrap();
        assert!(!l.converged);
        let d = &l.per_atom[&atom("b")];
        assert!(d.len() <= cfg.iter_cap + 2);
        assert!(d.contains(&Grade::ratio(1, 4)));
    }

    #[test]
    fn lattice_growth_beyond_the_cap_is_an_error() {
        let cfg = GroundConfig {
            lattice_cap: 4,
            ..GroundConfig::default()
        };
        let p = parse_program("b : 0.5.\nb : prod(V,0.5) :- b : V.").unwrap();
        let g = ground_program(&p, &cfg).unwrap();
        match grade_lattice(&g.program, &cfg) {
            Err(GroundError::LatticeOverflow { .. }) => {}
            other => panic!("expected lattice overflow, got {:?}", other),
        }
    }

    #[test]
    fn head_only_variable_is_unsafe() {
        let p = parse_program("p(X).").unwrap();
        match ground_program(&p, &GroundConfig::default()) {
            Err(GroundError::UnsafeObjectVar { var, .. }) => assert_eq!(var, "X"),
            other => panic!("expected unsafe variable, got {:?}", other),
        }
    }

    #[test]
    fn negation_only_variable_is_unsafe() {
        let p = parse_program("q(a). p :- not q(X).").unwrap();
        assert!(matches!(
            ground_program(&p, &GroundConfig::default()),
            Err(GroundError::UnsafeObjectVar { .. })
        ));
    }

    #[test]
    fn aggregate_occurrence_makes_a_variable_safe() {
        let src = "s(a,b,1) : 0.9.\nc(X,Y) :- #sum_f{ P : V | s(X,Y,P) : V } > 0.";
        let g = ground(src);
        assert_eq!(g.program.rules.len(), 1 + 9);
    }

    #[test]
    fn unbound_annotation_variables_are_rejected() {
        for src in [
            "p : V :- not q : V.",
            "p : V :- q : W.",
            "p :- q : prod(V,0.5).",
            "p :- #sum_f{ X : W | q(X) : U } > 0.",
        ] {
            let p = parse_program(src).unwrap();
            assert!(
                matches!(
                    ground_program(&p, &GroundConfig::default()),
                    Err(GroundError::UnboundAnnotationVar { .. })
                ),
                "{}",
                src
            );
        }
    }

    #[test]
    fn set_conjuncts_bind_grade_variables() {
        let src = "q(1) : 0.3.\np :- #sum_f{ X : U | q(X) : U } > 0.";
        let g = ground(src);
        assert_eq!(g.program.rules.len(), 2);
    }

    #[test]
    fn non_numeric_items_are_dropped_with_a_warning() {
        let g = ground("p(a) : 1. p(2) : 1.\nq :- #sum_f{ X : U | p(X) : U } > 1.");
        let agg = match &g.program.rules[2].body[0].expr {
            BodyExpr::Agg(agg) => agg,
            _ => panic!("expected aggregate"),
        };
        match &agg.set {
            SetTerm::Ground(pairs) => {
                assert_eq!(pairs.len(), 1);
                assert_eq!(pairs[0].item, Term::num_i64(2));
            }
            _ => panic!("expected ground set"),
        }
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn count_sets_keep_non_numeric_items() {
        let g = ground("p(a) : 1. p(2) : 1.\nq :- #count_f{ X : U | p(X) : U } >= 2.");
        let agg = match &g.program.rules[2].body[0].expr {
            BodyExpr::Agg(agg) => agg,
            _ => panic!("expected aggregate"),
        };
        match &agg.set {
            SetTerm::Ground(pairs) => assert_eq!(pairs.len(), 2),
            _ => panic!("expected ground set"),
        }
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn symbolic_guards_must_be_numeric() {
        let p = parse_program("p(1) : 1.\nq :- #count_f{ X : U | p(X) : U } >= c.").unwrap();
        assert!(matches!(
            ground_program(&p, &GroundConfig::default()),
            Err(GroundError::GuardNotNumeric { .. })
        ));
    }

    #[test]
    fn guard_constants_stay_out_of_the_universe() {
        let g = ground("p(1) : 1.\nq :- #count_f{ X : U | p(X) : U } >= 7.");
        assert_eq!(g.universe, vec![Term::num_i64(1)]);
    }

    #[test]
    fn function_terms_respect_the_depth_limit() {
        let p = parse_program("p(f(a)).").unwrap();
        assert!(matches!(
            ground_program(&p, &GroundConfig::default()),
            Err(GroundError::TermDepthExceeded { .. })
        ));
        let cfg = GroundConfig {
            func_depth: 1,
            ..GroundConfig::default()
        };
        let g = ground_program(&p, &cfg).unwrap();
        assert_eq!(g.universe.len(), 2); // a and f(a)
        let p2 = parse_program("p(f(a)). q(X) :- p(X).").unwrap();
        let g2 = ground_program(&p2, &cfg).unwrap();
        assert_eq!(g2.program.rules.len(), 1 + 2);
    }
}
