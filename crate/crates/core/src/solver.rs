//! Answer-set search.
//!
//! Satisfaction follows the usual reading: a rule holds when its head holds
//! whenever its body does, and an interpretation is a model when every rule
//! holds (together with the head-grade condition, which requires each
//! satisfied head disjunct's grade to stay below the atom's assigned grade).
//! The reduct of a program w.r.t. `I` keeps exactly the rules whose body `I`
//! satisfies, bodies verbatim; `I` is an answer set when it is a minimal
//! model of its own reduct.
//!
//! The search itself enumerates candidates over the grade lattice: each atom
//! ranges over the grades some rule chain could assign it, and atoms whose
//! lattice is pinned at {0} are never varied. This grid is exhaustive for
//! programs whose head annotations are constants or monotone functions of
//! body grades; head grades produced by nonmonotone annotation functions of
//! variables may in principle fall between lattice points, and such models
//! are not reported. Every reported answer set is verified against the full
//! ground program before it is returned.

use crate::aggregate::satisfies_agg;
use crate::ground::{grade_lattice, ground_program, GradeLattice, GroundConfig, GroundError, Grounding};
use crate::model::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, Default)]
pub struct SolveConfig {
    pub ground: GroundConfig,
    /// Upper bound on the candidate grid size.
    pub candidate_cap: Option<usize>,
    /// Keep at most this many answer sets (after sorting).
    pub max_answer_sets: Option<usize>,
}

impl SolveConfig {
    pub fn candidate_cap(&self) -> usize {
        self.candidate_cap.unwrap_or(10_000_000)
    }
}

#[derive(Error, Debug)]
pub enum SolveError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("candidate space of {space} interpretations exceeds the cap of {cap}")]
    CandidateSpaceOverflow { space: u128, cap: usize },
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub universe_size: usize,
    pub ground_rules: usize,
    pub fired_rules: usize,
    pub alive_atoms: usize,
    pub candidate_space: u128,
    pub candidates_checked: usize,
    pub lattice_converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct SolveResult {
    pub answer_sets: Vec<Interp>,
    pub stats: SolveStats,
    pub grounding: Grounding,
    pub lattice: GradeLattice,
}

/// Rule-level annotation binding: each variable carried as the whole
/// annotation of a positive body atom takes the meet of `I` over its
/// carriers.
pub fn body_binding(rule: &Rule, interp: &Interp) -> AnnBinding {
    let mut binding = AnnBinding::new();
    for l in &rule.body {
        if l.neg {
            continue;
        }
        if let BodyExpr::Atom(a) = &l.expr {
            if let Annotation::Var(v) = &a.ann {
                let g = interp.grade(&a.atom).clone();
                binding
                    .entry(v.clone())
                    .and_modify(|cur| *cur = cur.meet(&g))
                    .or_insert(g);
            }
        }
    }
    binding
}

pub fn satisfies_body(rule: &Rule, interp: &Interp) -> Result<bool, EvalError> {
    let binding = body_binding(rule, interp);
    for l in &rule.body {
        let sat = match &l.expr {
            BodyExpr::Atom(a) => {
                let need = a.ann.eval(&binding)?;
                let holds = &need <= interp.grade(&a.atom);
                if l.neg {
                    !holds
                } else {
                    holds
                }
            }
            BodyExpr::Agg(agg) => satisfies_agg(agg, l.neg, interp, &binding)?,
        };
        if !sat {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn satisfies_head(rule: &Rule, interp: &Interp) -> Result<bool, EvalError> {
    let binding = body_binding(rule, interp);
    for h in &rule.head {
        let need = h.ann.eval(&binding)?;
        if &need <= interp.grade(&h.atom) {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn satisfies_rule(rule: &Rule, interp: &Interp) -> Result<bool, EvalError> {
    Ok(!satisfies_body(rule, interp)? || satisfies_head(rule, interp)?)
}

/// Model check for a ground program: every rule holds, and for every atom
/// the largest satisfied head grade across body-satisfied rules stays below
/// the atom's assigned grade.
pub fn satisfies_program(p: &Program, interp: &Interp) -> Result<bool, EvalError> {
    let mut head_grades: BTreeMap<&Atom, Grade> = BTreeMap::new();
    for rule in &p.rules {
        if !satisfies_body(rule, interp)? {
            continue;
        }
        let binding = body_binding(rule, interp);
        let mut any = false;
        for h in &rule.head {
            let need = h.ann.eval(&binding)?;
            if &need <= interp.grade(&h.atom) {
                any = true;
                head_grades
                    .entry(&h.atom)
                    .and_modify(|cur| *cur = cur.join(&need))
                    .or_insert(need);
            }
        }
        if !any {
            return Ok(false);
        }
    }
    for (atom, max) in head_grades {
        if !(&max <= interp.grade(atom)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The reduct w.r.t. `I`: the rules whose body `I` satisfies, kept verbatim.
pub fn reduct(p: &Program, interp: &Interp) -> Result<Program, EvalError> {
    let mut rules = Vec::new();
    for rule in &p.rules {
        if satisfies_body(rule, interp)? {
            rules.push(rule.clone());
        }
    }
    Ok(Program::new(rules))
}

/// The candidate grid: alive atoms with their grade choices, ascending.
struct Grid {
    atoms: Vec<Atom>,
    choices: Vec<Vec<Grade>>,
}

impl Grid {
    fn from_lattice(lattice: &GradeLattice) -> Grid {
        let mut atoms = Vec::new();
        let mut choices = Vec::new();
        for (atom, dom) in &lattice.per_atom {
            if dom.len() > 1 {
                atoms.push(atom.clone());
                choices.push(dom.iter().cloned().collect());
            }
        }
        Grid { atoms, choices }
    }

    fn space(&self) -> u128 {
        self.choices
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    fn interp_at(&self, idx: &[usize]) -> Interp {
        let mut interp = Interp::empty();
        for (k, &i) in idx.iter().enumerate() {
            let g = self.choices[k][i].clone();
            if !g.is_zero() {
                interp.set(self.atoms[k].clone(), g);
            }
        }
        interp
    }
}

fn advance(idx: &mut [usize], limits: &[Vec<Grade>]) -> bool {
    let mut k = 0;
    loop {
        if k == idx.len() {
            return false;
        }
        idx[k] += 1;
        if idx[k] < limits[k].len() {
            return true;
        }
        idx[k] = 0;
        k += 1;
    }
}

/// Is `I` (at grid position `idx`) a minimal model of `reduct`? Scans every
/// strictly smaller grid point, early-exiting on the first smaller model.
fn grid_minimal(
    grid: &Grid,
    idx: &[usize],
    reduct: &Program,
) -> Result<bool, EvalError> {
    let limits: Vec<Vec<Grade>> = idx
        .iter()
        .enumerate()
        .map(|(k, &i)| grid.choices[k][..=i].to_vec())
        .collect();
    let mut sub = vec![0usize; idx.len()];
    loop {
        if sub.as_slice() != idx {
            let mut candidate = Interp::empty();
            for (k, &i) in sub.iter().enumerate() {
                let g = limits[k][i].clone();
                if !g.is_zero() {
                    candidate.set(grid.atoms[k].clone(), g);
                }
            }
            if satisfies_program(reduct, &candidate)? {
                return Ok(false);
            }
        }
        if !advance(&mut sub, &limits) {
            return Ok(true);
        }
    }
}

/// Enumerates the answer sets of a program: parse-level input, grounding,
/// lattice construction, and exhaustive search over the candidate grid.
/// Results are sorted by their printed form.
pub fn enumerate_answer_sets(p: &Program, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    let grounding = ground_program(p, &cfg.ground)?;
    let lattice = grade_lattice(&grounding.program, &cfg.ground)?;
    let grid = Grid::from_lattice(&lattice);
    let space = grid.space();
    if space > cfg.candidate_cap() as u128 {
        return Err(SolveError::CandidateSpaceOverflow {
            space,
            cap: cfg.candidate_cap(),
        });
    }
    let ground = &grounding.program;
    let fired: Vec<&Rule> = ground
        .rules
        .iter()
        .zip(lattice.fired.iter())
        .filter(|(_, f)| **f)
        .map(|(r, _)| r)
        .collect();
    let fired_program = Program::new(fired.iter().map(|r| (*r).clone()).collect());

    let mut answer_sets: Vec<Interp> = Vec::new();
    let mut idx = vec![0usize; grid.atoms.len()];
    let mut checked = 0usize;
    loop {
        checked += 1;
        let interp = grid.interp_at(&idx);
        if satisfies_program(&fired_program, &interp)? {
            let r = reduct(&fired_program, &interp)?;
            if grid_minimal(&grid, &idx, &r)? {
                // Re-verify against the complete ground program, including
                // rules the lattice proved unsatisfiable.
                assert!(
                    satisfies_program(ground, &interp)?,
                    "internal error: reported answer set fails the full ground program"
                );
                answer_sets.push(interp);
            }
        }
        if !advance(&mut idx, &grid.choices) {
            break;
        }
    }
    answer_sets.sort_by_key(|i| i.to_string());
    if let Some(cap) = cfg.max_answer_sets {
        answer_sets.truncate(cap);
    }
    let stats = SolveStats {
        universe_size: grounding.universe.len(),
        ground_rules: ground.rules.len(),
        fired_rules: fired.len(),
        alive_atoms: grid.atoms.len(),
        candidate_space: space,
        candidates_checked: checked,
        lattice_converged: lattice.converged,
        warnings: grounding.warnings.clone(),
    };
    Ok(SolveResult {
        answer_sets,
        stats,
        grounding,
        lattice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    const DICE: &str = include_str!("../fixtures/dice.dflp");
    const COMPANY: &str = include_str!("../fixtures/company_fuzzy.dflp");

    fn solve(src: &str) -> SolveResult {
        let p = parse_program(src).expect("parse");
        enumerate_answer_sets(&p, &SolveConfig::default()).expect("solve")
    }

    fn rendered(res: &SolveResult) -> Vec<String> {
        res.answer_sets.iter().map(|i| i.to_string()).collect()
    }

    #[test]
    fn dice_program_has_exactly_three_answer_sets() {
        let res = solve(DICE);
        assert_eq!(res.stats.candidate_space, 32);
        assert_eq!(
            rendered(&res),
            vec![
                "{ a(1,1):0.8, a(2,1):0.3 }",
                "{ a(1,2):0.4, a(2,1):0.3 }",
                "{ a(1,2):0.4, a(2,2):0.9 }",
            ]
        );
    }

    #[test]
    fn dice_rejects_the_high_faces_model() {
        // a(1,1):0.8 with a(2,2):0.9 satisfies the forbidden aggregate, so
        // the constraint rule enters the reduct and gamma cannot be met.
        let res = solve(DICE);
        assert!(!rendered(&res)
            .iter()
            .any(|s| s.contains("a(1,1)") && s.contains("a(2,2)")));
    }

    #[test]
    fn company_has_the_single_direct_holdings_answer_set() {
        let res = solve(COMPANY);
        assert_eq!(res.stats.alive_atoms, 8);
        assert_eq!(res.stats.candidate_space, 256);
        assert_eq!(
            rendered(&res),
            vec![
                "{ controlStk(a,a,b,40):0.7, controlStk(a,a,c,40):0.9, \
                 controlStk(b,b,c,20):0.8, controlStk(c,c,b,20):0.6, \
                 ownsStk(a,b,40):0.7, ownsStk(a,c,40):0.9, \
                 ownsStk(b,c,20):0.8, ownsStk(c,b,20):0.6 }"
            ]
        );
    }

    #[test]
    fn controls_appear_once_a_holding_crosses_the_threshold() {
        // raise one direct holding above 50%: a then controls b outright
        let src = COMPANY.replace("ownsStk(a,b,40) : 0.7.", "ownsStk(a,b,60) : 0.7.");
        let res = solve(&src);
        assert_eq!(res.answer_sets.len(), 1);
        let text = rendered(&res).remove(0);
        assert!(text.contains("controls(a,b):0.55"), "{}", text);
    }

    #[test]
    fn odd_loop_has_no_answer_set() {
        let res = solve("p :- not p.");
        assert!(res.answer_sets.is_empty());
        assert_eq!(res.stats.candidate_space, 2);
    }

    #[test]
    fn empty_program_has_the_empty_answer_set() {
        let res = solve("");
        assert_eq!(rendered(&res), vec!["{ }"]);
    }

    #[test]
    fn facts_accumulate_to_the_join_of_their_grades() {
        let res = solve("p : 0.3.\np : 0.6.");
        assert_eq!(rendered(&res), vec!["{ p:0.6 }"]);
    }

    #[test]
    fn negation_chooses_the_stable_side() {
        let res = solve("p : 0.4 :- not q : 0.5.\nq : 0.5 :- not p : 0.4.");
        assert_eq!(rendered(&res), vec!["{ p:0.4 }", "{ q:0.5 }"]);
    }

    #[test]
    fn annotation_variables_propagate_grades() {
        let res = solve("a : 0.8.\nb : prod(V,0.5) :- a : V.");
        assert_eq!(rendered(&res), vec!["{ a:0.8, b:0.4 }"]);
    }

    #[test]
    fn minimality_discards_padded_models() {
        // q is derivable only at 0.3; anything higher is never minimal
        let res = solve("q : 0.3.\nr : 0.2 :- q : 0.3.");
        assert_eq!(rendered(&res), vec!["{ q:0.3, r:0.2 }"]);
    }

    #[test]
    fn disjunction_yields_incomparable_answer_sets() {
        let res = solve("p : 0.6 | q : 0.9.");
        assert_eq!(rendered(&res), vec!["{ p:0.6 }", "{ q:0.9 }"]);
        let a = &res.answer_sets[0];
        let b = &res.answer_sets[1];
        assert!(!a.leq(b) && !b.leq(a));
    }

    #[test]
    fn candidate_space_overflow_is_reported() {
        let mut cfg = SolveConfig::default();
        cfg.candidate_cap = Some(16);
        let p = parse_program(DICE).unwrap();
        match enumerate_answer_sets(&p, &cfg) {
            Err(SolveError::CandidateSpaceOverflow { space: 32, cap: 16 }) => {}
            other => panic!("expected overflow, got {:?}", other),
        }
    }

    #[test]
    fn max_answer_sets_truncates_after_sorting() {
        let mut cfg = SolveConfig::default();
        cfg.max_answer_sets = Some(1);
        let p = parse_program("p : 0.6 | q : 0.9.").unwrap();
        let res = enumerate_answer_sets(&p, &cfg).unwrap();
        assert_eq!(rendered(&res), vec!["{ p:0.6 }"]);
    }

    #[test]
    fn aggregates_can_derive_new_grades() {
        let src = "\
p(1) : 0.9. p(2) : 0.7.
big : 0.5 :- #sum_f{ X : U | p(X) : U } >= 3 : 0.6.";
        let res = solve(src);
        assert_eq!(
            rendered(&res),
            vec!["{ big:0.5, p(1):0.9, p(2):0.7 }"]
        );
    }

    #[test]
    fn aggregate_support_is_not_self_justifying() {
        // q feeds the set that would justify q; the reduct must reject it
        let src = "q : 0.8 :- #count_f{ X : U | p(X) : U } >= 1 : 0.1.\np(1) : 0.5 :- q : 0.8.";
        let res = solve(src);
        assert_eq!(rendered(&res), vec!["{ }"]);
    }
}
