//! Core data model: grades, terms, atoms, annotations, aggregate atoms, rules,
//! programs and interpretations, plus the canonical text rendering for all of
//! them. Everything downstream (parser, grounder, solver, oracles) works on
//! these types.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

/// A truth grade: an exact rational in [0, 1].
///
/// Grades form a complete lattice under the usual order, with join = max and
/// meet = min. Arithmetic stays exact; 0.55 is literally 11/20.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grade(BigRational);

impl Grade {
    pub fn new(value: BigRational) -> Result<Grade, EvalError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(EvalError::GradeRange(value));
        }
        Ok(Grade(value))
    }

    pub fn zero() -> Grade {
        Grade(BigRational::zero())
    }

    pub fn one() -> Grade {
        Grade(BigRational::one())
    }

    /// Convenience constructor from an integer fraction; panics outside [0, 1].
    pub fn ratio(num: i64, den: i64) -> Grade {
        Grade::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
            .expect("grade out of range")
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Lattice join (max).
    pub fn join(&self, other: &Grade) -> Grade {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Lattice meet (min).
    pub fn meet(&self, other: &Grade) -> Grade {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Parses either a decimal literal ("0.55") or a fraction ("11/20").
    pub fn parse_str(s: &str) -> Option<Grade> {
        let r = parse_rational_str(s)?;
        Grade::new(r).ok()
    }

    pub(crate) fn static_zero() -> &'static Grade {
        static ZERO: OnceLock<Grade> = OnceLock::new();
        ZERO.get_or_init(Grade::zero)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rational_to_string(&self.0))
    }
}

impl fmt::Debug for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Renders a rational as its shortest exact decimal when the reduced
/// denominator is of the form 2^a * 5^b, and as "p/q" otherwise.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scale = BigInt::from(10).pow(digits);
    let scaled = (r * BigRational::from_integer(scale)).to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    let digits = digits as usize;
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits - s.len() + 1), s);
    }
    s.insert(s.len() - digits, '.');
    if neg {
        s.insert(0, '-');
    }
    s
}

/// Parses "p/q" or a (possibly signed) decimal literal into an exact rational.
pub fn parse_rational_str(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let r = match body.split_once('.') {
        None => BigRational::from_integer(body.parse::<BigInt>().ok()?),
        Some((int, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let int: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
            let num: BigInt = frac.parse().ok()?;
            let den = BigInt::from(10).pow(frac.len() as u32);
            BigRational::from_integer(int) + BigRational::new(num, den)
        }
    };
    Some(r * BigRational::from_integer(BigInt::from(sign)))
}

/// The fixed library of fuzzy annotation functions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AnnFn {
    Min,
    Max,
    Prod,
    Bsum,
    Comp,
    Avg,
}

impl AnnFn {
    pub fn name(&self) -> &'static str {
        match self {
            AnnFn::Min => "min",
            AnnFn::Max => "max",
            AnnFn::Prod => "prod",
            AnnFn::Bsum => "bsum",
            AnnFn::Comp => "comp",
            AnnFn::Avg => "avg",
        }
    }

    pub fn from_name(name: &str) -> Option<AnnFn> {
        Some(match name {
            "min" => AnnFn::Min,
            "max" => AnnFn::Max,
            "prod" => AnnFn::Prod,
            "bsum" => AnnFn::Bsum,
            "comp" => AnnFn::Comp,
            "avg" => AnnFn::Avg,
            _ => return None,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            AnnFn::Comp => 1,
            _ => 2,
        }
    }

    /// True when the function is monotone in every argument. `comp` is the
    /// only antitone member of the library.
    pub fn monotone(&self) -> bool {
        !matches!(self, AnnFn::Comp)
    }

    /// Applies the function; all library members are total on [0, 1] and map
    /// back into [0, 1].
    pub fn apply(&self, args: &[Grade]) -> Result<Grade, EvalError> {
        if args.len() != self.arity() {
            return Err(EvalError::ArityMismatch {
                func: self.name(),
                expected: self.arity(),
                got: args.len(),
            });
        }
        Ok(match self {
            AnnFn::Min => args[0].meet(&args[1]),
            AnnFn::Max => args[0].join(&args[1]),
            AnnFn::Prod => Grade(args[0].0.clone() * args[1].0.clone()),
            AnnFn::Bsum => {
                let s = args[0].0.clone() + args[1].0.clone();
                if s > BigRational::one() {
                    Grade::one()
                } else {
                    Grade(s)
                }
            }
            AnnFn::Comp => Grade(BigRational::one() - args[0].0.clone()),
            AnnFn::Avg => Grade((args[0].0.clone() + args[1].0.clone()) / BigRational::from_integer(BigInt::from(2))),
        })
    }
}

/// A fuzzy annotation: a constant grade, an annotation variable, or an
/// application of one of the builtin annotation functions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Annotation {
    Const(Grade),
    Var(String),
    Fn(AnnFn, Vec<Annotation>),
}

/// Binding of annotation variables to grades, produced while evaluating a
/// rule body or a fuzzy set against an interpretation.
pub type AnnBinding = BTreeMap<String, Grade>;

impl Annotation {
    pub fn one() -> Annotation {
        Annotation::Const(Grade::one())
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Annotation::Const(_) => {}
            Annotation::Var(v) => {
                out.insert(v.clone());
            }
            Annotation::Fn(_, args) => {
                for a in args {
                    a.vars(out);
                }
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Annotation::Const(_) => true,
            Annotation::Var(_) => false,
            Annotation::Fn(_, args) => args.iter().all(|a| a.is_ground()),
        }
    }

    pub fn eval(&self, binding: &AnnBinding) -> Result<Grade, EvalError> {
        match self {
            Annotation::Const(g) => Ok(g.clone()),
            Annotation::Var(v) => binding
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::UnboundAnnotationVar(v.clone())),
            Annotation::Fn(f, args) => {
                let vals: Result<Vec<Grade>, EvalError> =
                    args.iter().map(|a| a.eval(binding)).collect();
                f.apply(&vals?)
            }
        }
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Annotation::Const(g) => write!(f, "{}", g),
            Annotation::Var(v) => write!(f, "{}", v),
            Annotation::Fn(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An object-level term. Numbers are exact rationals so aggregate values stay
/// exact as well.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Num(BigRational),
    Sym(String),
    Var(String),
    Fn(String, Vec<Term>),
}

impl Term {
    pub fn num_i64(n: i64) -> Term {
        Term::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn sym(s: &str) -> Term {
        Term::Sym(s.to_string())
    }

    pub fn var(s: &str) -> Term {
        Term::Var(s.to_string())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Num(_) | Term::Sym(_) => true,
            Term::Var(_) => false,
            Term::Fn(_, args) => args.iter().all(|t| t.is_ground()),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Num(_) | Term::Sym(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Fn(_, args) => {
                for t in args {
                    t.vars(out);
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Fn(_, args) => 1 + args.iter().map(|t| t.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match self {
            Term::Num(n) => Some(n),
            _ => None,
        }
    }

    /// Applies an object-variable substitution.
    pub fn substitute(&self, subst: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Num(_) | Term::Sym(_) => self.clone(),
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Fn(name, args) => Term::Fn(
                name.clone(),
                args.iter().map(|t| t.substitute(subst)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(n) => write!(f, "{}", rational_to_string(n)),
            Term::Sym(s) => write!(f, "{}", s),
            Term::Var(v) => write!(f, "{}", v),
            Term::Fn(name, args) => {
                write!(f, "{}(", name)?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", t)?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: pred.to_string(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| t.is_ground())
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        for t in &self.args {
            t.vars(out);
        }
    }

    pub fn substitute(&self, subst: &BTreeMap<String, Term>) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| t.substitute(subst)).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", t)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A fuzzy annotated atom `a : mu`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AnnAtom {
    pub atom: Atom,
    pub ann: Annotation,
}

impl AnnAtom {
    pub fn new(atom: Atom, ann: Annotation) -> AnnAtom {
        AnnAtom { atom, ann }
    }

    pub fn substitute(&self, subst: &BTreeMap<String, Term>) -> AnnAtom {
        AnnAtom {
            atom: self.atom.substitute(subst),
            ann: self.ann.clone(),
        }
    }
}

impl fmt::Display for AnnAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.atom, self.ann)
    }
}

/// The five fuzzy aggregate functions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AggFn {
    Sum,
    Times,
    Min,
    Max,
    Count,
}

impl AggFn {
    pub fn name(&self) -> &'static str {
        match self {
            AggFn::Sum => "#sum_f",
            AggFn::Times => "#times_f",
            AggFn::Min => "#min_f",
            AggFn::Max => "#max_f",
            AggFn::Count => "#count_f",
        }
    }

    pub fn from_name(name: &str) -> Option<AggFn> {
        Some(match name {
            "#sum_f" => AggFn::Sum,
            "#times_f" => AggFn::Times,
            "#min_f" => AggFn::Min,
            "#max_f" => AggFn::Max,
            "#count_f" => AggFn::Count,
            _ => return None,
        })
    }

    /// Numeric aggregates require numeric item terms; `#count_f` counts any
    /// ground term.
    pub fn numeric(&self) -> bool {
        !matches!(self, AggFn::Count)
    }

    pub fn classical_name(&self) -> &'static str {
        match self {
            AggFn::Sum => "#sum",
            AggFn::Times => "#times",
            AggFn::Min => "#min",
            AggFn::Max => "#max",
            AggFn::Count => "#count",
        }
    }

    pub fn from_classical_name(name: &str) -> Option<AggFn> {
        Some(match name {
            "#sum" => AggFn::Sum,
            "#times" => AggFn::Times,
            "#min" => AggFn::Min,
            "#max" => AggFn::Max,
            "#count" => AggFn::Count,
            _ => return None,
        })
    }
}

/// Comparison operator used as an aggregate guard relation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(&self, lhs: &BigRational, rhs: &BigRational) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One entry of a fuzzy set term: an item term, its grade annotation, and the
/// conjunction that guards it. A symbolic set is one such template with local
/// variables; a ground set is an explicit list of variable-free entries whose
/// grade slot may still carry an annotation variable bound per entry at
/// evaluation time.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SetPair {
    pub item: Term,
    pub grade: Annotation,
    pub conj: Vec<AnnAtom>,
}

impl SetPair {
    pub fn substitute(&self, subst: &BTreeMap<String, Term>) -> SetPair {
        SetPair {
            item: self.item.substitute(subst),
            grade: self.grade.clone(),
            conj: self.conj.iter().map(|c| c.substitute(subst)).collect(),
        }
    }
}

/// A fuzzy set term: either still symbolic or already instantiated.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SetTerm {
    Symbolic(SetPair),
    Ground(Vec<SetPair>),
}

/// A fuzzy aggregate atom `f(S) cmp guard : mu`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AggAtom {
    pub func: AggFn,
    pub set: SetTerm,
    pub cmp: CmpOp,
    pub guard: Term,
    pub ann: Annotation,
}

impl fmt::Display for AggAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{ ", self.func.name())?;
        match &self.set {
            SetTerm::Symbolic(p) => {
                write!(f, "{} : {} | ", p.item, p.grade)?;
                for (i, c) in p.conj.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", c)?;
                }
            }
            SetTerm::Ground(pairs) => {
                for (i, p) in pairs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "< {} : {} | ", p.item, p.grade)?;
                    for (j, c) in p.conj.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", c)?;
                    }
                    write!(f, " >")?;
                }
            }
        }
        write!(f, " }} {} {} : {}", self.cmp, self.guard, self.ann)
    }
}

/// A body element: an annotated atom or an aggregate atom, possibly negated.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BodyExpr {
    Atom(AnnAtom),
    Agg(AggAtom),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BodyLit {
    pub neg: bool,
    pub expr: BodyExpr,
}

impl BodyLit {
    pub fn pos_atom(atom: AnnAtom) -> BodyLit {
        BodyLit {
            neg: false,
            expr: BodyExpr::Atom(atom),
        }
    }

    pub fn neg_atom(atom: AnnAtom) -> BodyLit {
        BodyLit {
            neg: true,
            expr: BodyExpr::Atom(atom),
        }
    }
}

impl fmt::Display for BodyLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "not ")?;
        }
        match &self.expr {
            BodyExpr::Atom(a) => write!(f, "{}", a),
            BodyExpr::Agg(a) => write!(f, "{}", a),
        }
    }
}

/// A rule `h1 : m1 | ... | hk : mk :- body.`; the head is never empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rule {
    pub head: Vec<AnnAtom>,
    pub body: Vec<BodyLit>,
}

impl Rule {
    pub fn fact(head: AnnAtom) -> Rule {
        Rule {
            head: vec![head],
            body: Vec::new(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{}", h)?;
        }
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", l)?;
            }
        }
        write!(f, ".")
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        Program { rules }
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(|r| {
            let mut vars = BTreeSet::new();
            collect_object_vars(r, &mut vars);
            vars.is_empty()
        })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", r)?;
        }
        Ok(())
    }
}

/// Collects every object variable occurring in a rule, including inside
/// fuzzy set terms and guards.
pub fn collect_object_vars(rule: &Rule, out: &mut BTreeSet<String>) {
    for h in &rule.head {
        h.atom.vars(out);
    }
    for l in &rule.body {
        match &l.expr {
            BodyExpr::Atom(a) => a.atom.vars(out),
            BodyExpr::Agg(agg) => {
                agg.guard.vars(out);
                match &agg.set {
                    SetTerm::Symbolic(p) => {
                        p.item.vars(out);
                        for c in &p.conj {
                            c.atom.vars(out);
                        }
                    }
                    SetTerm::Ground(pairs) => {
                        for p in pairs {
                            p.item.vars(out);
                            for c in &p.conj {
                                c.atom.vars(out);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// A fuzzy interpretation: a total map from ground atoms to grades, stored
/// sparsely. Atoms absent from the map have grade 0.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Interp {
    map: BTreeMap<Atom, Grade>,
}

impl Interp {
    pub fn empty() -> Interp {
        Interp::default()
    }

    pub fn from_pairs(pairs: Vec<(Atom, Grade)>) -> Interp {
        let mut i = Interp::empty();
        for (a, g) in pairs {
            i.set(a, g);
        }
        i
    }

    pub fn grade(&self, atom: &Atom) -> &Grade {
        self.map.get(atom).unwrap_or_else(|| Grade::static_zero())
    }

    pub fn set(&mut self, atom: Atom, grade: Grade) {
        if grade.is_zero() {
            self.map.remove(&atom);
        } else {
            self.map.insert(atom, grade);
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &Grade)> {
        self.map.iter()
    }

    /// Pointwise order: `self <= other` iff self(a) <= other(a) for every atom.
    pub fn leq(&self, other: &Interp) -> bool {
        self.map.iter().all(|(a, g)| g <= other.grade(a))
    }

    /// Strict pointwise order.
    pub fn lt(&self, other: &Interp) -> bool {
        self.leq(other) && self != other
    }
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return write!(f, "{{ }}");
        }
        write!(f, "{{ ")?;
        for (i, (a, g)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", a, g)?;
        }
        write!(f, " }}")
    }
}

/// Errors raised while evaluating annotations, aggregates, or classical
/// extraction.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EvalError {
    #[error("grade {} is outside [0, 1]", rational_to_string(.0))]
    GradeRange(BigRational),
    #[error("annotation variable {0} is unbound at evaluation time")]
    UnboundAnnotationVar(String),
    #[error("annotation function {func} expects {expected} arguments, got {got}")]
    ArityMismatch {
        func: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("aggregate guard {0} is not numeric")]
    GuardNotNumeric(Term),
    #[error("non-numeric item {0} in a numeric aggregate")]
    NonNumericItem(Term),
    #[error("fuzzy set is still symbolic at evaluation time")]
    SymbolicSet,
    #[error("atom {atom} has non-boolean grade {grade} in classical extraction")]
    NonBooleanGrade { atom: Atom, grade: Grade },
}
