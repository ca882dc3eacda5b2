//! Evaluation of fuzzy aggregates over ground fuzzy sets.
//!
//! Against an interpretation `I`, a ground set term denotes the multiset
//! `S_I` of `value : grade` elements contributed by its entries. An entry
//! `< item : grade | conj >` contributes when every conjunct is satisfied by
//! `I` and its grade evaluates above 0; annotation variables are bound to
//! the meet of `I` over the atoms that carry them as their whole annotation,
//! which is the greatest binding that still satisfies those conjuncts. An
//! aggregate folds the values of `S_I` classically and pairs the result with
//! the meet of the grades: `#sum_f` / `#times_f` / `#count_f` return
//! `(0,1)` / `(1,1)` / `(0,1)` on the empty multiset, while `#min_f` and
//! `#max_f` are undefined on it.
//!
//! A positive aggregate atom `f{S} < T : u` holds when the fold `(x, v)` is
//! defined, `x < T` holds classically, and `u <= v`; its negation holds in
//! exactly the remaining cases.

use crate::model::*;
use num::rational::BigRational;
use num::{One, Zero};

/// The multiset `S_I`: each contributing entry's item value with its grade.
pub type Multiset = Vec<(Term, Grade)>;

/// Binds the annotation variables of one set entry: the given rule-level
/// binding extended with (or tightened by) the conjuncts that carry each
/// variable as their whole annotation.
fn entry_binding(pair: &SetPair, interp: &Interp, outer: &AnnBinding) -> AnnBinding {
    let mut binding = outer.clone();
    for c in &pair.conj {
        if let Annotation::Var(v) = &c.ann {
            let g = interp.grade(&c.atom).clone();
            binding
                .entry(v.clone())
                .and_modify(|cur| *cur = cur.meet(&g))
                .or_insert(g);
        }
    }
    binding
}

/// Builds `S_I` for a list of ground set entries.
pub fn build_multiset(
    pairs: &[SetPair],
    interp: &Interp,
    outer: &AnnBinding,
) -> Result<Multiset, EvalError> {
    let mut out = Multiset::new();
    'pairs: for pair in pairs {
        let binding = entry_binding(pair, interp, outer);
        for c in &pair.conj {
            let need = c.ann.eval(&binding)?;
            if !(&need <= interp.grade(&c.atom)) {
                continue 'pairs;
            }
        }
        let grade = pair.grade.eval(&binding)?;
        if grade.is_zero() {
            continue;
        }
        out.push((pair.item.clone(), grade));
    }
    Ok(out)
}

/// Folds a multiset; `None` is the undefined result.
pub fn apply_aggregate(
    func: AggFn,
    multiset: &Multiset,
) -> Result<Option<(BigRational, Grade)>, EvalError> {
    if multiset.is_empty() {
        return Ok(match func {
            AggFn::Sum | AggFn::Count => Some((BigRational::zero(), Grade::one())),
            AggFn::Times => Some((BigRational::one(), Grade::one())),
            AggFn::Min | AggFn::Max => None,
        });
    }
    let grade = multiset
        .iter()
        .map(|(_, g)| g)
        .fold(Grade::one(), |acc, g| acc.meet(g));
    if func == AggFn::Count {
        return Ok(Some((
            BigRational::from_integer(multiset.len().into()),
            grade,
        )));
    }
    let mut values = Vec::with_capacity(multiset.len());
    for (item, _) in multiset {
        match item.as_number() {
            Some(n) => values.push(n.clone()),
            None => return Err(EvalError::NonNumericItem(item.clone())),
        }
    }
    let value = match func {
        AggFn::Sum => values.into_iter().sum(),
        AggFn::Times => values.into_iter().product(),
        AggFn::Min => values.into_iter().min().unwrap(),
        AggFn::Max => values.into_iter().max().unwrap(),
        AggFn::Count => unreachable!(),
    };
    Ok(Some((value, grade)))
}

/// Evaluates a ground aggregate atom against `I`: the fold of `S_I`, or
/// `None` when undefined.
pub fn eval_aggregate(
    agg: &AggAtom,
    interp: &Interp,
    outer: &AnnBinding,
) -> Result<Option<(BigRational, Grade)>, EvalError> {
    let pairs = match &agg.set {
        SetTerm::Ground(ps) => ps,
        SetTerm::Symbolic(_) => return Err(EvalError::SymbolicSet),
    };
    let multiset = build_multiset(pairs, interp, outer)?;
    apply_aggregate(agg.func, &multiset)
}

/// Truth of an aggregate atom (or its negation) w.r.t. `I`.
pub fn satisfies_agg(
    agg: &AggAtom,
    neg: bool,
    interp: &Interp,
    outer: &AnnBinding,
) -> Result<bool, EvalError> {
    let guard = match agg.guard.as_number() {
        Some(g) => g.clone(),
        None => return Err(EvalError::GuardNotNumeric(agg.guard.clone())),
    };
    let mu = agg.ann.eval(outer)?;
    let positive = match eval_aggregate(agg, interp, outer)? {
        None => false,
        Some((value, nu)) => agg.cmp.holds(&value, &guard) && mu <= nu,
    };
    Ok(if neg { !positive } else { positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_program, GroundConfig};
    use crate::parse::parse_program;

    const DICE: &str = include_str!("../fixtures/dice.dflp");

    fn atom(s: &str) -> Atom {
        parse_program(&format!("{}.", s)).unwrap().rules[0].head[0]
            .atom
            .clone()
    }

    fn interp(pairs: &[(&str, Grade)]) -> Interp {
        Interp::from_pairs(
            pairs
                .iter()
                .map(|(s, g)| (atom(s), g.clone()))
                .collect(),
        )
    }

    fn dice_aggregate() -> AggAtom {
        let p = parse_program(DICE).unwrap();
        let g = ground_program(&p, &GroundConfig::default()).unwrap();
        match &g.program.rules[2].body[1].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        }
    }

    #[test]
    fn dice_min_aggregate_under_two_interpretations() {
        let agg = dice_aggregate();
        let outer = AnnBinding::new();

        // I assigns 0.4 to a(1,2) and 0.9 to a(2,2): the multiset is
        // {2:0.4, 2:0.9}, the fold (2, 0.4), and 2 <= 1 fails.
        let i = interp(&[("a(1,2)", Grade::ratio(2, 5)), ("a(2,2)", Grade::ratio(9, 10))]);
        let (value, nu) = eval_aggregate(&agg, &i, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::from_integer(2.into()));
        assert_eq!(nu, Grade::ratio(2, 5));
        assert!(!satisfies_agg(&agg, false, &i, &outer).unwrap());
        assert!(satisfies_agg(&agg, true, &i, &outer).unwrap());

        // I' assigns 0.8 to a(1,1) and 0.9 to a(2,2): the fold is (1, 0.8),
        // 1 <= 1 holds, and 0.4 <= 0.8 holds.
        let i2 = interp(&[("a(1,1)", Grade::ratio(4, 5)), ("a(2,2)", Grade::ratio(9, 10))]);
        let (value, nu) = eval_aggregate(&agg, &i2, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::from_integer(1.into()));
        assert_eq!(nu, Grade::ratio(4, 5));
        assert!(satisfies_agg(&agg, false, &i2, &outer).unwrap());
        assert!(!satisfies_agg(&agg, true, &i2, &outer).unwrap());
    }

    #[test]
    fn zero_grade_entries_stay_out_of_the_multiset() {
        let agg = dice_aggregate();
        let i = interp(&[("a(1,2)", Grade::ratio(2, 5))]);
        let pairs = match &agg.set {
            SetTerm::Ground(ps) => ps,
            _ => unreachable!(),
        };
        let s = build_multiset(pairs, &i, &AnnBinding::new()).unwrap();
        assert_eq!(s, vec![(Term::num_i64(2), Grade::ratio(2, 5))]);
    }

    #[test]
    fn empty_multiset_conventions() {
        let empty = Multiset::new();
        assert_eq!(
            apply_aggregate(AggFn::Sum, &empty).unwrap(),
            Some((BigRational::zero(), Grade::one()))
        );
        assert_eq!(
            apply_aggregate(AggFn::Times, &empty).unwrap(),
            Some((BigRational::one(), Grade::one()))
        );
        assert_eq!(
            apply_aggregate(AggFn::Count, &empty).unwrap(),
            Some((BigRational::zero(), Grade::one()))
        );
        assert_eq!(apply_aggregate(AggFn::Min, &empty).unwrap(), None);
        assert_eq!(apply_aggregate(AggFn::Max, &empty).unwrap(), None);
    }

    #[test]
    fn undefined_folds_falsify_positive_atoms_and_satisfy_negated_ones() {
        // No interpretation grade is above 0, so S_I is empty.
        let src = "q :- #min_f{ X : U | p(X) : U } <= 5.\np(1) : 0.5.";
        let p = parse_program(src).unwrap();
        let g = ground_program(&p, &GroundConfig::default()).unwrap();
        let agg = match &g.program.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let empty = Interp::empty();
        let outer = AnnBinding::new();
        assert_eq!(eval_aggregate(&agg, &empty, &outer).unwrap(), None);
        assert!(!satisfies_agg(&agg, false, &empty, &outer).unwrap());
        assert!(satisfies_agg(&agg, true, &empty, &outer).unwrap());
    }

    #[test]
    fn grade_variables_take_the_meet_of_their_carriers() {
        let src = "r :- #sum_f{ 1 : U | p : U, q : U } > 0.";
        let p = parse_program(src).unwrap();
        let g = ground_program(&p, &GroundConfig::default()).unwrap();
        let agg = match &g.program.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let pairs = match &agg.set {
            SetTerm::Ground(ps) => ps.clone(),
            _ => unreachable!(),
        };
        let i = interp(&[("p", Grade::ratio(3, 10)), ("q", Grade::ratio(7, 10))]);
        let s = build_multiset(&pairs, &i, &AnnBinding::new()).unwrap();
        assert_eq!(s, vec![(Term::num_i64(1), Grade::ratio(3, 10))]);
    }

    #[test]
    fn distinct_conditions_contribute_separate_elements() {
        let text = "r :- #sum_f{ < 2 : 1 | p : 0.1 >, < 2 : 1 | q : 0.1 > } > 3.";
        let p = parse_program(text).unwrap();
        let agg = match &p.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let i = interp(&[("p", Grade::ratio(1, 2)), ("q", Grade::ratio(1, 2))]);
        let outer = AnnBinding::new();
        let (value, nu) = eval_aggregate(&agg, &i, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::from_integer(4.into()));
        assert_eq!(nu, Grade::one());
        assert!(satisfies_agg(&agg, false, &i, &outer).unwrap());
    }

    #[test]
    fn times_and_count_fold_classically() {
        let text = "r :- #times_f{ < 3 : 0.6 | p : 0.1 >, < 4 : 0.8 | q : 0.1 > } = 12 : 0.6.";
        let p = parse_program(text).unwrap();
        let agg = match &p.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let i = interp(&[("p", Grade::one()), ("q", Grade::one())]);
        let outer = AnnBinding::new();
        let (value, nu) = eval_aggregate(&agg, &i, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::from_integer(12.into()));
        assert_eq!(nu, Grade::ratio(3, 5));
        assert!(satisfies_agg(&agg, false, &i, &outer).unwrap());

        let text = "r :- #count_f{ < a : 0.9 | p : 0.1 >, < 5 : 0.7 | q : 0.1 > } = 2.";
        let p = parse_program(text).unwrap();
        let agg = match &p.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let (value, nu) = eval_aggregate(&agg, &i, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::from_integer(2.into()));
        assert_eq!(nu, Grade::ratio(7, 10));
    }

    #[test]
    fn outer_bindings_reach_set_grades() {
        let text = "r :- #sum_f{ < 1 : prod(V,0.5) | p : 0.1 > } > 0 : V.";
        let p = parse_program(text).unwrap();
        let agg = match &p.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => agg.clone(),
            _ => panic!("expected aggregate"),
        };
        let i = interp(&[("p", Grade::one())]);
        let mut outer = AnnBinding::new();
        outer.insert("V".into(), Grade::ratio(4, 5));
        let (value, nu) = eval_aggregate(&agg, &i, &outer).unwrap().unwrap();
        assert_eq!(value, BigRational::one());
        assert_eq!(nu, Grade::ratio(2, 5));
        // the outer V is also the aggregate's own annotation: 0.8 <= 0.4 fails
        assert!(!satisfies_agg(&agg, false, &i, &outer).unwrap());
        assert!(satisfies_agg(&agg, true, &i, &outer).unwrap());
    }

    #[test]
    fn negation_is_the_exact_complement() {
        let agg = dice_aggregate();
        let grids = [Grade::zero(), Grade::ratio(2, 5), Grade::ratio(4, 5)];
        let outer = AnnBinding::new();
        for g1 in &grids {
            for g2 in &grids {
                let i = interp(&[("a(1,1)", g1.clone()), ("a(2,2)", g2.clone())]);
                let pos = satisfies_agg(&agg, false, &i, &outer).unwrap();
                let neg = satisfies_agg(&agg, true, &i, &outer).unwrap();
                assert_ne!(pos, neg);
            }
        }
    }
}
