//! Acceptance gate for the whole workspace: each test checks one release
//! criterion end to end and prints a single `PASS`/`FAIL` line (visible with
//! `--nocapture`). The criteria are exact — grade comparisons use the
//! rational arithmetic of the solver itself, never floating point — and the
//! bulk checks drive the solver against the independent oracle routes over
//! generated corpora.

use fasolve_core::aggregate::{
    apply_aggregate, build_multiset, eval_aggregate, satisfies_agg, Multiset,
};
use fasolve_core::classical::{
    classical_answer_sets, embed, parse_classical_program, render_atom_set,
};
use fasolve_core::ground::{ground_program, GroundConfig};
use fasolve_core::harness::{
    check_invariants, classical_differential, differential_answer_sets, generate_ast,
    generate_classical, generate_program, round_trip, DiffOutcome, Discrepancy, GenConfig,
};
use fasolve_core::model::{
    AggAtom, AggFn, AnnBinding, Atom, BodyExpr, Grade, Interp, SetTerm, Term,
};
use fasolve_core::parse::parse_program;
use fasolve_core::solver::{enumerate_answer_sets, SolveConfig, SolveResult};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

fn report_pass(name: &str, detail: String) {
    println!("PASS {}: {}", name, detail);
}

fn fail(name: &str, detail: String) -> ! {
    println!("FAIL {}: {}", name, detail);
    panic!("{}: {}", name, detail);
}

/// Runs one seeded trial per seed in `0..total`, spreading the seeds over the
/// available cores; the result order is deterministic.
fn run_trials<F>(total: u64, f: F) -> Vec<(u64, DiffOutcome)>
where
    F: Fn(u64) -> DiffOutcome + Sync,
{
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = (total as usize).div_ceil(threads).max(1);
    let mut out: Vec<(u64, DiffOutcome)> = Vec::with_capacity(total as usize);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        let f = &f;
        for t in 0..threads {
            let lo = ((t * chunk) as u64).min(total);
            let hi = (((t + 1) * chunk) as u64).min(total);
            if lo >= hi {
                break;
            }
            handles.push(scope.spawn(move || (lo..hi).map(|s| (s, f(s))).collect::<Vec<_>>()));
        }
        for h in handles {
            out.extend(h.join().expect("trial thread"));
        }
    });
    out.sort_by_key(|(s, _)| *s);
    out
}

struct Tally {
    agreed: usize,
    skipped: usize,
    answer_sets: usize,
    agreed_seeds: Vec<u64>,
    failures: Vec<Discrepancy>,
}

fn tally(outcomes: Vec<(u64, DiffOutcome)>) -> Tally {
    let mut t = Tally {
        agreed: 0,
        skipped: 0,
        answer_sets: 0,
        agreed_seeds: Vec::new(),
        failures: Vec::new(),
    };
    for (seed, outcome) in outcomes {
        match outcome {
            DiffOutcome::Agree { answer_sets } => {
                t.agreed += 1;
                t.answer_sets += answer_sets;
                t.agreed_seeds.push(seed);
            }
            DiffOutcome::Skipped { .. } => t.skipped += 1,
            DiffOutcome::Disagree(d) => t.failures.push(*d),
        }
    }
    t
}

/// Saves every disagreement as a repro file and fails the criterion.
fn fail_discrepancies(name: &str, failures: &[Discrepancy]) -> ! {
    let dir = std::env::temp_dir().join("fasolve-acceptance");
    let mut saved = Vec::new();
    for d in failures {
        match d.save(&dir) {
            Ok(path) => saved.push(format!("repro saved to {}", path.display())),
            Err(e) => saved.push(format!("could not save a repro: {}", e)),
        }
    }
    fail(
        name,
        format!(
            "{} disagreement(s); first:\n{}\n{}",
            failures.len(),
            failures[0],
            saved.join("\n")
        ),
    )
}

const DICE: &str = include_str!("../fixtures/dice.dflp");
const COMPANY_FUZZY: &str = include_str!("../fixtures/company_fuzzy.dflp");
const COMPANY_CLASSICAL: &str = include_str!("../fixtures/company_classical.dflp");

fn solve(src: &str) -> SolveResult {
    let p = parse_program(src).expect("fixture parses");
    enumerate_answer_sets(&p, &SolveConfig::default()).expect("fixture solves")
}

/// The two-dice program has exactly three answer sets, with exact grades and
/// no extra or missing atoms; order is irrelevant.
#[test]
fn dice_program_answer_sets_match_exactly() {
    let name = "dice answer sets";
    let expected = [
        "{ a(1,1):0.8, a(2,1):0.3 }",
        "{ a(1,2):0.4, a(2,1):0.3 }",
        "{ a(1,2):0.4, a(2,2):0.9 }",
    ];
    let res = solve(DICE);
    let mut rendered: Vec<String> = res.answer_sets.iter().map(|i| i.to_string()).collect();
    rendered.sort();
    if rendered != expected {
        fail(
            name,
            format!("expected {:?} but the solver returned {:?}", expected, rendered),
        );
    }
    report_pass(name, "exactly the three expected answer sets, exact grades".into());
}

/// The dice minimum aggregate evaluates exactly: under the roll with faces
/// {a(1,2):0.4, a(2,2):0.9} the interpreted multiset is {2:0.4, 2:0.9}, the
/// fold yields (2, 0.4), and `<= 1 : 0.4` is unsatisfied; under the roll
/// {a(1,1):0.8, a(2,2):0.9} the fold yields (1, 0.8) and it is satisfied.
#[test]
fn min_aggregate_evaluation_is_exact_on_the_dice_interpretations() {
    let name = "min aggregate evaluation";
    let p = parse_program(DICE).expect("fixture parses");
    let grounding = ground_program(&p, &GroundConfig::default()).expect("fixture grounds");
    let agg: AggAtom = grounding
        .program
        .rules
        .iter()
        .flat_map(|r| r.body.iter())
        .find_map(|l| match (&l.expr, l.neg) {
            (BodyExpr::Agg(a), false) => Some(a.clone()),
            _ => None,
        })
        .expect("the grounding keeps the aggregate literal");
    let pairs = match &agg.set {
        SetTerm::Ground(pairs) => pairs,
        SetTerm::Symbolic(_) => fail(name, "the ground set is still symbolic".into()),
    };
    let atom = |x: i64, y: i64| Atom::new("a", vec![Term::num_i64(x), Term::num_i64(y)]);
    let outer = AnnBinding::new();

    let low = Interp::from_pairs(vec![
        (atom(1, 2), Grade::ratio(4, 10)),
        (atom(2, 2), Grade::ratio(9, 10)),
    ]);
    let multiset: Vec<String> = {
        let mut m: Vec<String> = build_multiset(pairs, &low, &outer)
            .expect("multiset builds")
            .iter()
            .map(|(item, grade)| format!("{}:{}", item, grade))
            .collect();
        m.sort();
        m
    };
    if multiset != ["2:0.4", "2:0.9"] {
        fail(name, format!("interpreted multiset is {:?}", multiset));
    }
    let folded = eval_aggregate(&agg, &low, &outer).expect("fold succeeds");
    let expect_low = Some((BigRational::from_integer(BigInt::from(2)), Grade::ratio(4, 10)));
    if folded != expect_low {
        fail(name, format!("fold over {{2:0.4, 2:0.9}} returned {:?}", folded));
    }
    if satisfies_agg(&agg, false, &low, &outer).expect("truth check succeeds") {
        fail(name, "<= 1 : 0.4 should be unsatisfied when the minimum face is 2".into());
    }

    let high = Interp::from_pairs(vec![
        (atom(1, 1), Grade::ratio(8, 10)),
        (atom(2, 2), Grade::ratio(9, 10)),
    ]);
    let folded = eval_aggregate(&agg, &high, &outer).expect("fold succeeds");
    let expect_high = Some((BigRational::from_integer(BigInt::from(1)), Grade::ratio(8, 10)));
    if folded != expect_high {
        fail(name, format!("fold over {{1:0.8, 2:0.9}} returned {:?}", folded));
    }
    if !satisfies_agg(&agg, false, &high, &outer).expect("truth check succeeds") {
        fail(name, "<= 1 : 0.4 should be satisfied when the fold is (1, 0.8)".into());
    }
    report_pass(
        name,
        "folds (2, 0.4) and (1, 0.8) are exact; the guarded atom flips accordingly".into(),
    );
}

/// The fuzzy company program has a unique answer set: the four ownership
/// facts plus exactly four direct-holding atoms at exact grades, and no
/// `controls` atom at a positive grade.
#[test]
fn company_control_answer_set_is_unique_and_exact() {
    let name = "fuzzy company control";
    let expected = "{ controlStk(a,a,b,40):0.7, controlStk(a,a,c,40):0.9, \
                    controlStk(b,b,c,20):0.8, controlStk(c,c,b,20):0.6, \
                    ownsStk(a,b,40):0.7, ownsStk(a,c,40):0.9, \
                    ownsStk(b,c,20):0.8, ownsStk(c,b,20):0.6 }";
    let res = solve(COMPANY_FUZZY);
    let rendered: Vec<String> = res.answer_sets.iter().map(|i| i.to_string()).collect();
    if rendered.len() != 1 {
        fail(name, format!("expected a unique answer set, got {}", rendered.len()));
    }
    if rendered[0] != expected {
        fail(name, format!("expected {} but the solver returned {}", expected, rendered[0]));
    }
    if rendered[0].contains("controls(") {
        fail(name, format!("a controls atom has a positive grade: {}", rendered[0]));
    }
    report_pass(
        name,
        "unique answer set with the four direct holdings at exact grades and no controls atom"
            .into(),
    );
}

/// Folding the empty multiset follows the conventions: sum and count give
/// (0, 1), product gives (1, 1), and minimum and maximum are undefined.
#[test]
fn empty_multiset_conventions_hold_exactly() {
    let name = "empty multiset conventions";
    let empty = Multiset::new();
    let zero_one = Some((BigRational::zero(), Grade::one()));
    let one_one = Some((BigRational::one(), Grade::one()));
    let cases = [
        (AggFn::Sum, zero_one.clone()),
        (AggFn::Times, one_one),
        (AggFn::Count, zero_one),
        (AggFn::Min, None),
        (AggFn::Max, None),
    ];
    for (func, expected) in cases {
        let got = apply_aggregate(func, &empty).expect("empty fold succeeds");
        if got != expected {
            fail(
                name,
                format!("{} over the empty multiset returned {:?}", func.name(), got),
            );
        }
    }
    report_pass(
        name,
        "sum (0,1), product (1,1), count (0,1), min and max undefined".into(),
    );
}

/// Over 500 generated programs (full feature mix), every reported answer set
/// models the original ground program, admits no smaller grid model of its
/// reduct, and the reported sets are pairwise incomparable.
#[test]
fn generated_programs_uphold_model_minimality_and_incomparability() {
    let name = "answer-set invariants";
    let total = 500;
    let outcomes = run_trials(total, |seed| {
        let p = generate_program(&GenConfig::invariants(seed));
        check_invariants(&p, seed, &SolveConfig::default(), 1 << 23)
    });
    let t = tally(outcomes);
    if !t.failures.is_empty() {
        fail_discrepancies(name, &t.failures);
    }
    if t.agreed + t.skipped != total as usize || t.agreed < 450 {
        fail(
            name,
            format!("only {} of {} programs were fully checked ({} skipped)", t.agreed, total, t.skipped),
        );
    }
    report_pass(
        name,
        format!(
            "{} programs checked ({} answer sets), {} skipped at the witness cap, zero violations",
            t.agreed, t.answer_sets, t.skipped
        ),
    );
}

/// Over generated classical programs (with and without aggregates, at most
/// 12 relevant ground atoms), solving through the grade-1 embedding and
/// extracting boolean atom sets matches the independent classical solver on
/// at least 200 programs; the classical company program is reproduced too.
#[test]
fn classical_programs_agree_with_the_reference_solver_through_the_embedding() {
    let name = "classical differential";
    let company = classical_differential(COMPANY_CLASSICAL, u64::MAX, 20);
    match company {
        DiffOutcome::Agree { answer_sets: 1 } => {}
        DiffOutcome::Agree { answer_sets } => {
            fail(name, format!("the company program returned {} answer sets", answer_sets))
        }
        DiffOutcome::Skipped { reason } => {
            fail(name, format!("the company program was skipped: {}", reason))
        }
        DiffOutcome::Disagree(d) => fail_discrepancies(name, &[*d]),
    }
    let cp = parse_classical_program(COMPANY_CLASSICAL).expect("fixture parses");
    let sets = classical_answer_sets(&cp, 20).expect("reference solver finishes");
    let rendered: Vec<String> = sets.iter().map(render_atom_set).collect();
    let expected = "{ controlStk(a,a,b,40), controlStk(a,a,c,40), \
                    controlStk(b,b,c,20), controlStk(c,c,b,20), \
                    ownsStk(a,b,40), ownsStk(a,c,40), ownsStk(b,c,20), \
                    ownsStk(c,b,20) }";
    if rendered != [expected] || rendered[0].contains("controls(") {
        fail(name, format!("company answer sets were {:?}", rendered));
    }

    let total = 400;
    let outcomes = run_trials(total, |seed| {
        classical_differential(&generate_classical(seed), seed, 12)
    });
    let t = tally(outcomes);
    if !t.failures.is_empty() {
        fail_discrepancies(name, &t.failures);
    }
    let with_aggregates = t
        .agreed_seeds
        .iter()
        .filter(|&&seed| generate_classical(seed).contains('#'))
        .count();
    if t.agreed < 200 || with_aggregates == 0 || with_aggregates == t.agreed {
        fail(
            name,
            format!(
                "{} of {} programs agreed ({} skipped; {} with aggregates)",
                t.agreed, total, t.skipped, with_aggregates
            ),
        );
    }
    report_pass(
        name,
        format!(
            "company program plus {} generated programs agree ({} with aggregates, {} plain, {} skipped over the atom cap)",
            t.agreed,
            with_aggregates,
            t.agreed - with_aggregates,
            t.skipped
        ),
    );
}

/// Over generated aggregate-free programs with constant annotations, the
/// solver's full answer-set list equals the brute-force grid search on at
/// least 200 programs, with zero discrepancies.
#[test]
fn plain_programs_match_the_brute_force_oracle_exactly() {
    let name = "brute-force differential";
    let total = 300;
    let outcomes = run_trials(total, |seed| {
        let p = generate_program(&GenConfig::plain(seed));
        differential_answer_sets(&p, seed, &SolveConfig::default(), 1 << 22)
    });
    let t = tally(outcomes);
    if !t.failures.is_empty() {
        fail_discrepancies(name, &t.failures);
    }
    if t.agreed < 200 {
        fail(
            name,
            format!("only {} of {} programs agreed ({} skipped)", t.agreed, total, t.skipped),
        );
    }
    report_pass(
        name,
        format!(
            "{} programs agree exactly ({} answer sets compared, {} skipped over the grid cap)",
            t.agreed, t.answer_sets, t.skipped
        ),
    );
}

/// Printing and reparsing is the identity on 1,000 generated trees, and every
/// shipped example program parses and re-prints equivalently.
#[test]
fn printer_parser_round_trip_holds_on_generated_trees_and_fixtures() {
    let name = "round trip";
    for seed in 0..1000 {
        let p = generate_ast(seed);
        if let Err(e) = round_trip(&p) {
            fail(name, format!("seed {}: {}", seed, e));
        }
    }
    for (label, src) in [("dice", DICE), ("fuzzy company", COMPANY_FUZZY)] {
        let p = parse_program(src).expect("fixture parses");
        if let Err(e) = round_trip(&p) {
            fail(name, format!("{} fixture: {}", label, e));
        }
    }
    let cp = parse_classical_program(COMPANY_CLASSICAL).expect("fixture parses");
    if let Err(e) = round_trip(&embed(&cp)) {
        fail(name, format!("classical company fixture: {}", e));
    }
    report_pass(name, "1000 generated trees and all three fixtures round-trip".into());
}
