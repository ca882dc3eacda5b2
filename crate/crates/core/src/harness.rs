//! Differential-testing harness: seeded program generators, a brute-force
//! answer-set finder, and drivers that compare it against the solver.
//!
//! The brute-force route re-derives annotation binding, satisfaction, reducts
//! and minimality from the definitions and enumerates candidates over a value
//! pool read off the program text; it shares only the data model and grade
//! arithmetic with the solver. A disagreement between the two routes is
//! packaged as a [`Discrepancy`] that can be written out as a repro file.
//!
//! The pool enumeration is exact for programs whose annotations are all
//! constants: any model rounds down, atom by atom, to a pool-valued model
//! satisfying the same literals, so grid minimality coincides with true
//! minimality. With annotation variables the pool stays meet-closed (meet is
//! min), and the grid search remains a sound refutation device: any smaller
//! grid model it finds genuinely violates minimality.

use crate::classical::{
    classical_answer_sets, embed, extract, parse_classical_program, render_atom_set,
    ClassicalError,
};
use crate::model::*;
use crate::parse::{parse_program, print_program};
use crate::solver::{enumerate_answer_sets, SolveConfig, SolveError};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("brute-force grid of {space} interpretations exceeds the cap of {cap}")]
    GridTooLarge { space: u128, cap: u128 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

// ---------------------------------------------------------------------------
// Reference satisfaction. Deliberately re-implemented rather than calling
// into solver.rs / aggregate.rs, so a bug there is not mirrored here.
// ---------------------------------------------------------------------------

fn oracle_binding(rule: &Rule, interp: &Interp) -> AnnBinding {
    let mut binding = AnnBinding::new();
    for l in &rule.body {
        if l.neg {
            continue;
        }
        let BodyExpr::Atom(a) = &l.expr else { continue };
        let Annotation::Var(v) = &a.ann else { continue };
        let g = interp.grade(&a.atom);
        let tight = match binding.get(v) {
            Some(cur) => cur.meet(g),
            None => g.clone(),
        };
        binding.insert(v.clone(), tight);
    }
    binding
}

fn oracle_agg_holds(
    agg: &AggAtom,
    interp: &Interp,
    outer: &AnnBinding,
) -> Result<bool, EvalError> {
    let guard = agg
        .guard
        .as_number()
        .ok_or_else(|| EvalError::GuardNotNumeric(agg.guard.clone()))?;
    let mu = agg.ann.eval(outer)?;
    let pairs = match &agg.set {
        SetTerm::Ground(ps) => ps,
        SetTerm::Symbolic(_) => return Err(EvalError::SymbolicSet),
    };
    let mut entries: Vec<(&Term, Grade)> = Vec::new();
    'entries: for pair in pairs {
        let mut binding = outer.clone();
        for c in &pair.conj {
            if let Annotation::Var(v) = &c.ann {
                let g = interp.grade(&c.atom);
                let tight = match binding.get(v) {
                    Some(cur) => cur.meet(g),
                    None => g.clone(),
                };
                binding.insert(v.clone(), tight);
            }
        }
        for c in &pair.conj {
            if !(c.ann.eval(&binding)? <= *interp.grade(&c.atom)) {
                continue 'entries;
            }
        }
        let g = pair.grade.eval(&binding)?;
        if g.is_zero() {
            continue;
        }
        entries.push((&pair.item, g));
    }
    let folded = if entries.is_empty() {
        match agg.func {
            AggFn::Sum | AggFn::Count => Some((BigRational::zero(), Grade::one())),
            AggFn::Times => Some((BigRational::one(), Grade::one())),
            AggFn::Min | AggFn::Max => None,
        }
    } else {
        let mut nu = entries[0].1.clone();
        for (_, g) in &entries[1..] {
            nu = nu.meet(g);
        }
        let value = if agg.func == AggFn::Count {
            BigRational::from_integer(BigInt::from(entries.len()))
        } else {
            let mut nums = Vec::with_capacity(entries.len());
            for (item, _) in &entries {
                match item.as_number() {
                    Some(n) => nums.push(n.clone()),
                    None => return Err(EvalError::NonNumericItem((*item).clone())),
                }
            }
            match agg.func {
                AggFn::Sum => nums.iter().fold(BigRational::zero(), |acc, n| acc + n),
                AggFn::Times => nums.iter().fold(BigRational::one(), |acc, n| acc * n),
                AggFn::Min => nums.iter().min().unwrap().clone(),
                AggFn::Max => nums.iter().max().unwrap().clone(),
                AggFn::Count => unreachable!(),
            }
        };
        Some((value, nu))
    };
    Ok(match folded {
        None => false,
        Some((value, nu)) => agg.cmp.holds(&value, guard) && mu <= nu,
    })
}

fn oracle_body_sat(rule: &Rule, interp: &Interp, binding: &AnnBinding) -> Result<bool, EvalError> {
    for l in &rule.body {
        let holds = match &l.expr {
            BodyExpr::Atom(a) => a.ann.eval(binding)? <= *interp.grade(&a.atom),
            BodyExpr::Agg(agg) => oracle_agg_holds(agg, interp, binding)?,
        };
        if holds == l.neg {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Model check over a slice of rules: every rule whose body holds must have a
/// satisfied head disjunct, and the largest satisfied head grade per atom must
/// stay below the atom's assigned grade.
pub fn oracle_rules_model(rules: &[&Rule], interp: &Interp) -> Result<bool, EvalError> {
    let mut needed: BTreeMap<Atom, Grade> = BTreeMap::new();
    for rule in rules {
        let binding = oracle_binding(rule, interp);
        if !oracle_body_sat(rule, interp, &binding)? {
            continue;
        }
        let mut head_ok = false;
        for h in &rule.head {
            let need = h.ann.eval(&binding)?;
            if need <= *interp.grade(&h.atom) {
                head_ok = true;
                let slot = needed.entry(h.atom.clone()).or_insert_with(Grade::zero);
                if need > *slot {
                    *slot = need;
                }
            }
        }
        if !head_ok {
            return Ok(false);
        }
    }
    Ok(needed.iter().all(|(atom, max)| max <= interp.grade(atom)))
}

/// Model check for a whole ground program.
pub fn oracle_model(p: &Program, interp: &Interp) -> Result<bool, EvalError> {
    let rules: Vec<&Rule> = p.rules.iter().collect();
    oracle_rules_model(&rules, interp)
}

/// The rules whose body `interp` satisfies, kept verbatim.
pub fn oracle_reduct<'a>(p: &'a Program, interp: &Interp) -> Result<Vec<&'a Rule>, EvalError> {
    let mut keep = Vec::new();
    for rule in &p.rules {
        let binding = oracle_binding(rule, interp);
        if oracle_body_sat(rule, interp, &binding)? {
            keep.push(rule);
        }
    }
    Ok(keep)
}

// ---------------------------------------------------------------------------
// Brute-force enumeration over the syntactic value pool.
// ---------------------------------------------------------------------------

fn pool_from_ann(ann: &Annotation, pool: &mut BTreeSet<Grade>) {
    match ann {
        Annotation::Const(g) => {
            pool.insert(g.clone());
        }
        Annotation::Var(_) => {}
        Annotation::Fn(_, args) => {
            if ann.is_ground() {
                if let Ok(g) = ann.eval(&AnnBinding::new()) {
                    pool.insert(g);
                }
            }
            for a in args {
                pool_from_ann(a, pool);
            }
        }
    }
}

fn pool_from_set(set: &SetTerm, pool: &mut BTreeSet<Grade>) {
    let pairs: Vec<&SetPair> = match set {
        SetTerm::Symbolic(p) => vec![p],
        SetTerm::Ground(ps) => ps.iter().collect(),
    };
    for p in pairs {
        pool_from_ann(&p.grade, pool);
        for c in &p.conj {
            pool_from_ann(&c.ann, pool);
        }
    }
}

/// Every grade constant appearing in the program (including the values of
/// variable-free annotation functions), plus 0, ascending.
pub fn grade_pool(p: &Program) -> Vec<Grade> {
    let mut pool = BTreeSet::new();
    pool.insert(Grade::zero());
    for rule in &p.rules {
        for h in &rule.head {
            pool_from_ann(&h.ann, &mut pool);
        }
        for l in &rule.body {
            match &l.expr {
                BodyExpr::Atom(a) => pool_from_ann(&a.ann, &mut pool),
                BodyExpr::Agg(agg) => {
                    pool_from_ann(&agg.ann, &mut pool);
                    pool_from_set(&agg.set, &mut pool);
                }
            }
        }
    }
    pool.into_iter().collect()
}

fn collect_atoms(p: &Program) -> Vec<Atom> {
    let mut set = BTreeSet::new();
    for rule in &p.rules {
        for h in &rule.head {
            set.insert(h.atom.clone());
        }
        for l in &rule.body {
            match &l.expr {
                BodyExpr::Atom(a) => {
                    set.insert(a.atom.clone());
                }
                BodyExpr::Agg(agg) => {
                    if let SetTerm::Ground(pairs) = &agg.set {
                        for p in pairs {
                            for c in &p.conj {
                                set.insert(c.atom.clone());
                            }
                        }
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

fn bump(idx: &mut [usize], limits: &[usize]) -> bool {
    for k in 0..idx.len() {
        idx[k] += 1;
        if idx[k] < limits[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn interp_at(atoms: &[Atom], choices: &[Vec<Grade>], idx: &[usize]) -> Interp {
    let mut interp = Interp::empty();
    for (k, &x) in idx.iter().enumerate() {
        let g = choices[k][x].clone();
        if !g.is_zero() {
            interp.set(atoms[k].clone(), g);
        }
    }
    interp
}

/// Answer sets of a ground program by exhaustive search: every pool-valued
/// interpretation is model-checked, and each model is kept iff no pool-valued
/// interpretation below it models its reduct. Results are sorted by their
/// printed form, like the solver's.
pub fn brute_force_answer_sets(p: &Program, cap: u128) -> Result<Vec<Interp>, HarnessError> {
    let atoms = collect_atoms(p);
    let pool = grade_pool(p);
    let mut space = 1u128;
    for _ in &atoms {
        space = space.saturating_mul(pool.len() as u128);
    }
    if space > cap {
        return Err(HarnessError::GridTooLarge { space, cap });
    }
    let choices: Vec<Vec<Grade>> = atoms.iter().map(|_| pool.clone()).collect();
    let limits: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    let mut models: Vec<(Vec<usize>, Interp)> = Vec::new();
    let mut idx = vec![0usize; atoms.len()];
    loop {
        let interp = interp_at(&atoms, &choices, &idx);
        if oracle_model(p, &interp)? {
            models.push((idx.clone(), interp));
        }
        if !bump(&mut idx, &limits) {
            break;
        }
    }
    let mut answers = Vec::new();
    'models: for (top, interp) in &models {
        let reduct = oracle_reduct(p, interp)?;
        let sub_limits: Vec<usize> = top.iter().map(|&x| x + 1).collect();
        let mut sub = vec![0usize; top.len()];
        loop {
            if sub != *top {
                let below = interp_at(&atoms, &choices, &sub);
                if oracle_rules_model(&reduct, &below)? {
                    continue 'models;
                }
            }
            if !bump(&mut sub, &sub_limits) {
                break;
            }
        }
        answers.push(interp.clone());
    }
    answers.sort_by_key(|i| i.to_string());
    Ok(answers)
}

/// Searches for a model of the reduct strictly below `interp`, over the pool
/// grid restricted to `interp`'s support. `None` means no witness was found.
pub fn refute_minimality(
    ground: &Program,
    interp: &Interp,
    cap: u128,
) -> Result<Option<Interp>, HarnessError> {
    let reduct = oracle_reduct(ground, interp)?;
    let mut pool: BTreeSet<Grade> = grade_pool(ground).into_iter().collect();
    for (_, g) in interp.iter() {
        pool.insert(g.clone());
    }
    let support: Vec<Atom> = interp.iter().map(|(a, _)| a.clone()).collect();
    let choices: Vec<Vec<Grade>> = interp
        .iter()
        .map(|(_, top)| pool.iter().filter(|g| *g <= top).cloned().collect())
        .collect();
    let mut space = 1u128;
    for c in &choices {
        space = space.saturating_mul(c.len() as u128);
    }
    if space > cap {
        return Err(HarnessError::GridTooLarge { space, cap });
    }
    let limits: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let below = interp_at(&support, &choices, &idx);
        if below != *interp && oracle_rules_model(&reduct, &below)? {
            return Ok(Some(below));
        }
        if !bump(&mut idx, &limits) {
            return Ok(None);
        }
    }
}

// ---------------------------------------------------------------------------
// Seeded generators.
// ---------------------------------------------------------------------------

/// Tunables for the random program generator; everything is derived
/// deterministically from `seed`.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// How many zero-ary predicates to draw plain atoms from.
    pub props: usize,
    pub rules: usize,
    /// Non-zero grade constants for annotations.
    pub grades: Vec<Grade>,
    pub max_head: usize,
    pub max_body: usize,
    pub negation: bool,
    pub aggregates: bool,
    pub ann_vars: bool,
    pub ann_fns: bool,
    /// Universe size for the unary facts feeding aggregate sets.
    pub agg_facts: usize,
}

impl GenConfig {
    /// Full feature mix (aggregates, annotation variables, disjunction,
    /// negation) at sizes both search routes handle comfortably.
    pub fn invariants(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            props: 4,
            rules: 4,
            grades: vec![Grade::ratio(3, 10), Grade::ratio(1, 2), Grade::ratio(4, 5)],
            max_head: 2,
            max_body: 3,
            negation: true,
            aggregates: true,
            ann_vars: true,
            ann_fns: true,
            agg_facts: 2,
        }
    }

    /// Aggregate-free programs with constant annotations only: the class on
    /// which the brute-force grid provably finds every answer set.
    pub fn plain(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            props: 5,
            rules: 5,
            grades: vec![Grade::ratio(2, 5), Grade::ratio(7, 10), Grade::ratio(9, 10)],
            max_head: 2,
            max_body: 3,
            negation: true,
            aggregates: false,
            ann_vars: false,
            ann_fns: false,
            agg_facts: 0,
        }
    }
}

fn pick_grade(rng: &mut ChaCha8Rng, grades: &[Grade]) -> Grade {
    grades[rng.gen_range(0..grades.len())].clone()
}

/// Generates a safe program: annotation variables always have a positive
/// carrier, set-local variables stay inside their set, and head annotation
/// functions are kept monotone so the solver's grade lattice stays exact.
pub fn generate_program(cfg: &GenConfig) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rules = Vec::new();
    let props: Vec<Atom> = (0..cfg.props)
        .map(|k| Atom::new(&format!("p{}", k), Vec::new()))
        .collect();

    if cfg.aggregates {
        for k in 1..=cfg.agg_facts {
            if rng.gen_bool(0.8) {
                rules.push(Rule::fact(AnnAtom::new(
                    Atom::new("v", vec![Term::num_i64(k as i64)]),
                    Annotation::Const(pick_grade(&mut rng, &cfg.grades)),
                )));
            }
        }
    }

    for _ in 0..cfg.rules {
        let mut body = Vec::new();
        let mut carrier = false;
        for _ in 0..rng.gen_range(0..=cfg.max_body) {
            let atom = props[rng.gen_range(0..props.len())].clone();
            let neg = cfg.negation && rng.gen_bool(0.3);
            let ann = if !neg && cfg.ann_vars && rng.gen_bool(0.25) {
                carrier = true;
                Annotation::Var("V".into())
            } else if carrier && cfg.ann_fns && rng.gen_bool(0.2) {
                Annotation::Fn(
                    AnnFn::Prod,
                    vec![
                        Annotation::Var("V".into()),
                        Annotation::Const(pick_grade(&mut rng, &cfg.grades)),
                    ],
                )
            } else {
                Annotation::Const(pick_grade(&mut rng, &cfg.grades))
            };
            body.push(BodyLit {
                neg,
                expr: BodyExpr::Atom(AnnAtom::new(atom, ann)),
            });
        }

        if cfg.aggregates && rng.gen_bool(0.45) {
            let funcs = [AggFn::Sum, AggFn::Count, AggFn::Min, AggFn::Max, AggFn::Times];
            let cmps = [CmpOp::Le, CmpOp::Ge, CmpOp::Lt, CmpOp::Gt, CmpOp::Eq, CmpOp::Ne];
            let (pair_grade, conj_ann) = if rng.gen_bool(0.7) {
                (Annotation::Var("U".into()), Annotation::Var("U".into()))
            } else {
                let conj = if rng.gen_bool(0.5) {
                    Annotation::Var("U".into())
                } else {
                    Annotation::Const(pick_grade(&mut rng, &cfg.grades))
                };
                (Annotation::Const(pick_grade(&mut rng, &cfg.grades)), conj)
            };
            let ann = if carrier && rng.gen_bool(0.2) {
                Annotation::Var("V".into())
            } else {
                Annotation::Const(pick_grade(&mut rng, &cfg.grades))
            };
            body.push(BodyLit {
                neg: cfg.negation && rng.gen_bool(0.25),
                expr: BodyExpr::Agg(AggAtom {
                    func: funcs[rng.gen_range(0..funcs.len())],
                    set: SetTerm::Symbolic(SetPair {
                        item: Term::var("X"),
                        grade: pair_grade,
                        conj: vec![AnnAtom::new(
                            Atom::new("v", vec![Term::var("X")]),
                            conj_ann,
                        )],
                    }),
                    cmp: cmps[rng.gen_range(0..cmps.len())],
                    guard: Term::num_i64(rng.gen_range(0..=(cfg.agg_facts as i64 + 2))),
                    ann,
                }),
            });
        }

        let extra_heads = if cfg.max_head > 1 && rng.gen_bool(0.3) {
            rng.gen_range(1..cfg.max_head)
        } else {
            0
        };
        let mut head = Vec::new();
        for _ in 0..=extra_heads {
            let atom = props[rng.gen_range(0..props.len())].clone();
            let ann = if carrier && cfg.ann_vars && rng.gen_bool(0.3) {
                if cfg.ann_fns && rng.gen_bool(0.4) {
                    let f = if rng.gen_bool(0.5) { AnnFn::Min } else { AnnFn::Max };
                    Annotation::Fn(
                        f,
                        vec![
                            Annotation::Var("V".into()),
                            Annotation::Const(pick_grade(&mut rng, &cfg.grades)),
                        ],
                    )
                } else {
                    Annotation::Var("V".into())
                }
            } else {
                Annotation::Const(pick_grade(&mut rng, &cfg.grades))
            };
            head.push(AnnAtom::new(atom, ann));
        }
        rules.push(Rule { head, body });
    }

    if cfg.aggregates && cfg.agg_facts > 0 && rng.gen_bool(0.35) {
        let graded = rng.gen_bool(0.5);
        let (head_ann, body_ann) = if graded {
            (Annotation::Var("V".into()), Annotation::Var("V".into()))
        } else {
            (
                Annotation::Const(pick_grade(&mut rng, &cfg.grades)),
                Annotation::Const(pick_grade(&mut rng, &cfg.grades)),
            )
        };
        rules.push(Rule {
            head: vec![AnnAtom::new(
                Atom::new("w", vec![Term::var("X")]),
                head_ann,
            )],
            body: vec![BodyLit::pos_atom(AnnAtom::new(
                Atom::new("v", vec![Term::var("X")]),
                body_ann,
            ))],
        });
    }

    Program::new(rules)
}

/// Generates a parser-oriented program: arities are consistent by naming
/// convention (`q1` is unary, `g2` binary, ...), grades stick to values with
/// exact decimal renderings, and everything else is drawn freely across the
/// grammar, including ground set entries, nested terms and annotation
/// functions. Not necessarily safe or meaningful to solve.
pub fn generate_ast(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    fn rt_grade(rng: &mut ChaCha8Rng) -> Grade {
        let pool = [
            Grade::zero(),
            Grade::one(),
            Grade::ratio(1, 4),
            Grade::ratio(1, 2),
            Grade::ratio(11, 20),
            Grade::ratio(3, 4),
            Grade::ratio(9, 10),
        ];
        pool[rng.gen_range(0..pool.len())].clone()
    }

    fn rt_ann(rng: &mut ChaCha8Rng, depth: usize) -> Annotation {
        let top = if depth > 0 { 5 } else { 4 };
        match rng.gen_range(0..top) {
            0 | 1 | 2 => Annotation::Const(rt_grade(rng)),
            3 => {
                let vars = ["U", "V", "W"];
                Annotation::Var(vars[rng.gen_range(0..vars.len())].into())
            }
            _ => {
                let fns = [
                    AnnFn::Min,
                    AnnFn::Max,
                    AnnFn::Prod,
                    AnnFn::Bsum,
                    AnnFn::Comp,
                    AnnFn::Avg,
                ];
                let f = fns[rng.gen_range(0..fns.len())];
                let args = (0..f.arity()).map(|_| rt_ann(rng, depth - 1)).collect();
                Annotation::Fn(f, args)
            }
        }
    }

    fn rt_term(rng: &mut ChaCha8Rng, depth: usize, ground: bool) -> Term {
        let top = if depth > 0 { 4 } else { 3 };
        match rng.gen_range(0..top) {
            0 => {
                let nums = [
                    BigRational::from_integer(BigInt::from(-2)),
                    BigRational::from_integer(BigInt::from(0)),
                    BigRational::from_integer(BigInt::from(1)),
                    BigRational::from_integer(BigInt::from(3)),
                    BigRational::new(BigInt::from(5), BigInt::from(2)),
                ];
                Term::Num(nums[rng.gen_range(0..nums.len())].clone())
            }
            1 => {
                let syms = ["a", "b", "c"];
                Term::sym(syms[rng.gen_range(0..syms.len())])
            }
            2 => {
                if ground {
                    Term::sym("c")
                } else {
                    let vars = ["X", "Y", "Z"];
                    Term::var(vars[rng.gen_range(0..vars.len())])
                }
            }
            _ => {
                if rng.gen_bool(0.5) {
                    Term::Fn("f1".into(), vec![rt_term(rng, depth - 1, ground)])
                } else {
                    Term::Fn(
                        "g2".into(),
                        vec![
                            rt_term(rng, depth - 1, ground),
                            rt_term(rng, depth - 1, ground),
                        ],
                    )
                }
            }
        }
    }

    fn rt_atom(rng: &mut ChaCha8Rng, ground: bool) -> Atom {
        match rng.gen_range(0..4) {
            0 => Atom::new("p0", Vec::new()),
            1 => Atom::new("q1", vec![rt_term(rng, 2, ground)]),
            2 => Atom::new("s1", vec![rt_term(rng, 1, ground)]),
            _ => Atom::new(
                "r2",
                vec![rt_term(rng, 1, ground), rt_term(rng, 1, ground)],
            ),
        }
    }

    fn rt_ann_atom(rng: &mut ChaCha8Rng, ground: bool) -> AnnAtom {
        AnnAtom::new(rt_atom(rng, ground), rt_ann(rng, 2))
    }

    fn rt_agg(rng: &mut ChaCha8Rng) -> AggAtom {
        let funcs = [AggFn::Sum, AggFn::Times, AggFn::Min, AggFn::Max, AggFn::Count];
        let cmps = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];
        let set = if rng.gen_bool(0.6) {
            SetTerm::Symbolic(SetPair {
                item: rt_term(rng, 1, false),
                grade: rt_ann(rng, 1),
                conj: (0..rng.gen_range(1..=2)).map(|_| rt_ann_atom(rng, false)).collect(),
            })
        } else {
            SetTerm::Ground(
                (0..rng.gen_range(1..=2))
                    .map(|_| SetPair {
                        item: rt_term(rng, 1, true),
                        grade: rt_ann(rng, 1),
                        conj: (0..rng.gen_range(1..=2)).map(|_| rt_ann_atom(rng, true)).collect(),
                    })
                    .collect(),
            )
        };
        AggAtom {
            func: funcs[rng.gen_range(0..funcs.len())],
            set,
            cmp: cmps[rng.gen_range(0..cmps.len())],
            guard: rt_term(rng, 1, false),
            ann: rt_ann(rng, 1),
        }
    }

    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let head = (0..rng.gen_range(1..=2)).map(|_| rt_ann_atom(&mut rng, false)).collect();
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let neg = rng.gen_bool(0.3);
            let expr = if rng.gen_bool(0.3) {
                BodyExpr::Agg(rt_agg(&mut rng))
            } else {
                BodyExpr::Atom(rt_ann_atom(&mut rng, false))
            };
            body.push(BodyLit { neg, expr });
        }
        rules.push(Rule { head, body });
    }
    Program::new(rules)
}

/// Generates classical program text: propositional rules with disjunction and
/// negation, optionally a safe unary rule, and classical aggregates whose
/// tuples determine their condition instances.
pub fn generate_classical(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for k in 1..=3 {
        if rng.gen_bool(0.7) {
            out.push_str(&format!("e({}).\n", k));
        }
    }
    let pair_facts = rng.gen_bool(0.4);
    if pair_facts {
        for k in 1..=2 {
            for l in 1..=2 {
                if rng.gen_bool(0.5) {
                    out.push_str(&format!("d({},{}).\n", k, l));
                }
            }
        }
    }
    for k in 0..3 {
        if rng.gen_bool(0.25) {
            out.push_str(&format!("p{}.\n", k));
        }
    }
    let cmps = ["<", ">", "<=", ">=", "=", "!="];
    for _ in 0..rng.gen_range(2..=4) {
        if rng.gen_bool(0.25) {
            let tail = if rng.gen_bool(0.5) {
                format!(", not p{}", rng.gen_range(0..3))
            } else {
                String::new()
            };
            out.push_str(&format!("q(X) :- e(X){}.\n", tail));
            continue;
        }
        let mut heads = vec![format!("p{}", rng.gen_range(0..3))];
        if rng.gen_bool(0.3) {
            heads.push(format!("p{}", rng.gen_range(0..3)));
        }
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let neg = if rng.gen_bool(0.4) { "not " } else { "" };
            body.push(format!("{}p{}", neg, rng.gen_range(0..3)));
        }
        if rng.gen_bool(0.6) {
            let neg = if rng.gen_bool(0.2) { "not " } else { "" };
            let cmp = cmps[rng.gen_range(0..cmps.len())];
            let guard = rng.gen_range(0..=4);
            if pair_facts && rng.gen_bool(0.4) {
                let f = if rng.gen_bool(0.5) { "#sum" } else { "#count" };
                body.push(format!("{}{}{{ X, Y : d(X,Y) }} {} {}", neg, f, cmp, guard));
            } else {
                let fns = ["#sum", "#count", "#min", "#max", "#times"];
                let f = fns[rng.gen_range(0..fns.len())];
                body.push(format!("{}{}{{ X : e(X) }} {} {}", neg, f, cmp, guard));
            }
        }
        if body.is_empty() {
            out.push_str(&format!("{}.\n", heads.join(" | ")));
        } else {
            out.push_str(&format!("{} :- {}.\n", heads.join(" | "), body.join(", ")));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Differential drivers.
// ---------------------------------------------------------------------------

/// A reproducible disagreement between the solver and a reference route.
#[derive(Debug)]
pub struct Discrepancy {
    pub seed: u64,
    pub phase: &'static str,
    pub program: String,
    pub detail: String,
}

impl Discrepancy {
    /// Writes a self-contained repro file under `dir` and returns its path.
    pub fn save(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("seed{}_{}.txt", self.seed, self.phase));
        std::fs::write(&path, format!("{}\n", self))?;
        Ok(path)
    }
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seed {}: disagreement in {}\nprogram:\n{}{}",
            self.seed, self.phase, self.program, self.detail
        )
    }
}

#[derive(Debug)]
pub enum DiffOutcome {
    Agree { answer_sets: usize },
    Skipped { reason: String },
    Disagree(Box<Discrepancy>),
}

fn disagree(seed: u64, phase: &'static str, program: String, detail: String) -> DiffOutcome {
    DiffOutcome::Disagree(Box::new(Discrepancy {
        seed,
        phase,
        program,
        detail,
    }))
}

fn render_interps(interps: &[Interp]) -> String {
    if interps.is_empty() {
        return "(none)".into();
    }
    interps
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs the solver and the brute-force route on the same program and compares
/// the full answer-set lists.
pub fn differential_answer_sets(
    p: &Program,
    seed: u64,
    cfg: &SolveConfig,
    grid_cap: u128,
) -> DiffOutcome {
    let source = print_program(p);
    let solved = match enumerate_answer_sets(p, cfg) {
        Ok(r) => r,
        Err(SolveError::CandidateSpaceOverflow { space, cap }) => {
            return DiffOutcome::Skipped {
                reason: format!("candidate space {} exceeds the cap of {}", space, cap),
            }
        }
        Err(e) => return disagree(seed, "solve", source, format!("solver failed: {}", e)),
    };
    let brute = match brute_force_answer_sets(&solved.grounding.program, grid_cap) {
        Ok(b) => b,
        Err(HarnessError::GridTooLarge { space, cap }) => {
            return DiffOutcome::Skipped {
                reason: format!("brute-force grid {} exceeds the cap of {}", space, cap),
            }
        }
        Err(HarnessError::Eval(e)) => {
            return disagree(seed, "oracle", source, format!("brute force failed: {}", e))
        }
    };
    let left: Vec<String> = solved.answer_sets.iter().map(|i| i.to_string()).collect();
    let right: Vec<String> = brute.iter().map(|i| i.to_string()).collect();
    if left == right {
        DiffOutcome::Agree {
            answer_sets: left.len(),
        }
    } else {
        disagree(
            seed,
            "answer-sets",
            source,
            format!(
                "ground program:\n{}solver:\n{}\nbrute force:\n{}",
                print_program(&solved.grounding.program),
                render_interps(&solved.answer_sets),
                render_interps(&brute),
            ),
        )
    }
}

/// Solves a program and checks each reported answer set independently: it
/// must model the full ground program, no smaller pool-grid model of its
/// reduct may exist, and the reported sets must be pairwise incomparable.
pub fn check_invariants(
    p: &Program,
    seed: u64,
    cfg: &SolveConfig,
    witness_cap: u128,
) -> DiffOutcome {
    let source = print_program(p);
    let solved = match enumerate_answer_sets(p, cfg) {
        Ok(r) => r,
        Err(SolveError::CandidateSpaceOverflow { space, cap }) => {
            return DiffOutcome::Skipped {
                reason: format!("candidate space {} exceeds the cap of {}", space, cap),
            }
        }
        Err(e) => return disagree(seed, "solve", source, format!("solver failed: {}", e)),
    };
    let ground = &solved.grounding.program;
    for answer in &solved.answer_sets {
        match oracle_model(ground, answer) {
            Ok(true) => {}
            Ok(false) => {
                return disagree(
                    seed,
                    "model-check",
                    source,
                    format!(
                        "reported answer set {} does not model the ground program:\n{}",
                        answer,
                        print_program(ground)
                    ),
                )
            }
            Err(e) => return disagree(seed, "oracle", source, format!("model check failed: {}", e)),
        }
        match refute_minimality(ground, answer, witness_cap) {
            Ok(None) => {}
            Ok(Some(witness)) => {
                return disagree(
                    seed,
                    "minimality",
                    source,
                    format!(
                        "answer set {} has a smaller reduct model {}\nground program:\n{}",
                        answer,
                        witness,
                        print_program(ground)
                    ),
                )
            }
            Err(HarnessError::GridTooLarge { space, cap }) => {
                return DiffOutcome::Skipped {
                    reason: format!("witness grid {} exceeds the cap of {}", space, cap),
                }
            }
            Err(HarnessError::Eval(e)) => {
                return disagree(seed, "oracle", source, format!("witness search failed: {}", e))
            }
        }
    }
    for (k, a) in solved.answer_sets.iter().enumerate() {
        for b in &solved.answer_sets[k + 1..] {
            if a.leq(b) || b.leq(a) {
                return disagree(
                    seed,
                    "incomparability",
                    source,
                    format!("answer sets {} and {} are comparable", a, b),
                );
            }
        }
    }
    DiffOutcome::Agree {
        answer_sets: solved.answer_sets.len(),
    }
}

/// Parses classical text, solves it through the graded embedding, and
/// compares the extracted atom sets against the independent classical
/// reference solver. Programs whose relevant ground atoms exceed `atom_cap`
/// are skipped rather than judged.
pub fn classical_differential(src: &str, seed: u64, atom_cap: usize) -> DiffOutcome {
    let cp = match parse_classical_program(src) {
        Ok(cp) => cp,
        Err(errors) => {
            let msgs: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
            return disagree(seed, "classical-parse", src.into(), msgs.join("\n"));
        }
    };
    let embedded = embed(&cp);
    let solved = match enumerate_answer_sets(&embedded, &SolveConfig::default()) {
        Ok(r) => r,
        Err(SolveError::CandidateSpaceOverflow { space, cap }) => {
            return DiffOutcome::Skipped {
                reason: format!("candidate space {} exceeds the cap of {}", space, cap),
            }
        }
        Err(e) => return disagree(seed, "solve", src.into(), format!("solver failed: {}", e)),
    };
    let mut via_embedding = Vec::new();
    for interp in &solved.answer_sets {
        match extract(interp) {
            Ok(set) => via_embedding.push(render_atom_set(&set)),
            Err(e) => {
                return disagree(seed, "extract", src.into(), format!("extraction failed: {}", e))
            }
        }
    }
    via_embedding.sort();
    let via_reference = match classical_answer_sets(&cp, atom_cap) {
        Ok(sets) => sets.iter().map(render_atom_set).collect::<Vec<_>>(),
        Err(e @ (ClassicalError::TooManyAtoms { .. } | ClassicalError::TooManyRules { .. })) => {
            return DiffOutcome::Skipped {
                reason: e.to_string(),
            }
        }
        Err(e) => {
            return disagree(seed, "oracle", src.into(), format!("reference solver failed: {}", e))
        }
    };
    if via_embedding == via_reference {
        DiffOutcome::Agree {
            answer_sets: via_embedding.len(),
        }
    } else {
        disagree(
            seed,
            "classical",
            src.into(),
            format!(
                "embedding route:\n{}\nreference solver:\n{}",
                if via_embedding.is_empty() { "(none)".into() } else { via_embedding.join("\n") },
                if via_reference.is_empty() { "(none)".into() } else { via_reference.join("\n") },
            ),
        )
    }
}

/// Prints a program, parses it back, and requires both the tree and a second
/// print to be identical.
pub fn round_trip(p: &Program) -> Result<(), String> {
    let first = print_program(p);
    let parsed = parse_program(&first).map_err(|errors| {
        let msgs: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        format!("reparse failed:\n{}{}", first, msgs.join("\n"))
    })?;
    if parsed != *p {
        return Err(format!("reparse changed the tree:\n{}", first));
    }
    let second = print_program(&parsed);
    if first != second {
        return Err(format!(
            "printing is unstable:\nfirst:\n{}second:\n{}",
            first, second
        ));
    }
    Ok(())
}
