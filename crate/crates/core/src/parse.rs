//! Concrete syntax for `.dflp` programs.
//!
//! A program is a sequence of rules terminated by `.`. Heads are `|`-separated
//! annotated atoms, bodies are comma-separated literals, `not` negates, `%`
//! starts a line comment. Annotations follow a `:` and are grade constants,
//! annotation variables, or builtin functions (min, max, prod, bsum, comp,
//! avg). Aggregate atoms look like
//! `#sum_f{ P : V | owns(C,P) : V } > 50 : 0.6`; already-instantiated set
//! terms are written as `< item : grade | conj >` entries. Variables are
//! capitalized; a name may not be used both as an object variable and as an
//! annotation variable in the same rule.
//!
//! The parser recovers at rule boundaries: on error it records a diagnostic,
//! skips to the next `.`, and keeps going, so one bad rule does not mask
//! later ones. `print_program` renders the canonical form; parsing it back
//! yields a structurally identical program.

use crate::model::*;
use num::rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Lex,
    Syntax,
    AnnotationRange,
    Arity,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Lex => "lex",
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::AnnotationRange => "annotation range",
            ParseErrorKind::Arity => "arity",
        };
        write!(f, "{}", s)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.kind, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Num(BigRational),
    Agg(String),
    Not,
    Colon,
    If,
    Dot,
    Comma,
    Pipe,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Minus,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{}'", s),
            Tok::Var(s) => format!("variable '{}'", s),
            Tok::Num(n) => format!("number {}", rational_to_string(n)),
            Tok::Agg(s) => format!("'{}'", s),
            Tok::Not => "'not'".into(),
            Tok::Colon => "':'".into(),
            Tok::If => "':-'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Comma => "','".into(),
            Tok::Pipe => "'|'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Eq => "'='".into(),
            Tok::Ne => "'!='".into(),
            Tok::Minus => "'-'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(src: &str) -> (Vec<Spanned>, Vec<ParseError>) {
    let mut toks = Vec::new();
    let mut errors = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    macro_rules! push {
        ($t:expr, $l:expr, $c:expr) => {
            toks.push(Spanned {
                tok: $t,
                line: $l,
                col: $c,
            })
        };
    }
    while i < bytes.len() {
        let c = bytes[i];
        let (l0, c0) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if bytes[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '%' {
            while i < bytes.len() && bytes[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                s.push(bytes[i]);
                advance(&mut i, &mut line, &mut col);
            }
            if i + 1 < bytes.len() && bytes[i] == '.' && bytes[i + 1].is_ascii_digit() {
                s.push('.');
                advance(&mut i, &mut line, &mut col);
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    s.push(bytes[i]);
                    advance(&mut i, &mut line, &mut col);
                }
            }
            match parse_rational_str(&s) {
                Some(n) => push!(Tok::Num(n), l0, c0),
                None => errors.push(ParseError {
                    line: l0,
                    col: c0,
                    kind: ParseErrorKind::Lex,
                    msg: format!("malformed number '{}'", s),
                }),
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                advance(&mut i, &mut line, &mut col);
            }
            if s == "not" {
                push!(Tok::Not, l0, c0);
            } else if s.chars().next().unwrap().is_ascii_uppercase() {
                push!(Tok::Var(s), l0, c0);
            } else {
                push!(Tok::Ident(s), l0, c0);
            }
            continue;
        }
        if c == '#' {
            let mut s = String::from("#");
            advance(&mut i, &mut line, &mut col);
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                advance(&mut i, &mut line, &mut col);
            }
            push!(Tok::Agg(s), l0, c0);
            continue;
        }
        let two = if i + 1 < bytes.len() {
            Some((bytes[i], bytes[i + 1]))
        } else {
            None
        };
        let tok2 = match two {
            Some((':', '-')) => Some(Tok::If),
            Some(('<', '=')) => Some(Tok::Le),
            Some(('>', '=')) => Some(Tok::Ge),
            Some(('!', '=')) => Some(Tok::Ne),
            _ => None,
        };
        if let Some(t) = tok2 {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            push!(t, l0, c0);
            continue;
        }
        let tok1 = match c {
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Pipe),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '=' => Some(Tok::Eq),
            '-' => Some(Tok::Minus),
            _ => None,
        };
        advance(&mut i, &mut line, &mut col);
        match tok1 {
            Some(t) => push!(t, l0, c0),
            None => errors.push(ParseError {
                line: l0,
                col: c0,
                kind: ParseErrorKind::Lex,
                msg: format!("unexpected character '{}'", c),
            }),
        }
    }
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    (toks, errors)
}

pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<Spanned>) -> Cursor {
        Cursor { toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn error(&self, kind: ParseErrorKind, msg: String) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            kind,
            msg,
        }
    }

    pub(crate) fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(
                ParseErrorKind::Syntax,
                format!("expected {} but found {}", what, self.peek().describe()),
            ))
        }
    }

    /// Skips past the next `.` (or to end of input), for error recovery.
    pub(crate) fn sync_to_dot(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Dot => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }
}

/// Parses a `.dflp` program. All diagnostics are collected; the parser
/// resynchronizes at rule boundaries after an error.
pub fn parse_program(src: &str) -> Result<Program, Vec<ParseError>> {
    let (toks, mut errors) = lex(src);
    let mut cur = Cursor::new(toks);
    let mut rules = Vec::new();
    while !cur.at_eof() {
        match parse_rule(&mut cur) {
            Ok(rule) => rules.push(rule),
            Err(e) => {
                errors.push(e);
                cur.sync_to_dot();
            }
        }
    }
    let program = Program::new(rules);
    check_arities(&program, &mut errors);
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

/// Renders the canonical text of a program; `parse_program` applied to the
/// result reproduces the same AST.
pub fn print_program(p: &Program) -> String {
    p.to_string()
}

fn parse_rule(cur: &mut Cursor) -> Result<Rule, ParseError> {
    let mut head = vec![parse_ann_atom(cur)?];
    while matches!(cur.peek(), Tok::Pipe) {
        cur.bump();
        head.push(parse_ann_atom(cur)?);
    }
    let mut body = Vec::new();
    if matches!(cur.peek(), Tok::If) {
        cur.bump();
        body.push(parse_literal(cur)?);
        while matches!(cur.peek(), Tok::Comma) {
            cur.bump();
            body.push(parse_literal(cur)?);
        }
    }
    cur.expect(&Tok::Dot, "'.' at end of rule")?;
    let rule = Rule { head, body };
    check_var_kinds(&rule, cur)?;
    Ok(rule)
}

fn parse_literal(cur: &mut Cursor) -> Result<BodyLit, ParseError> {
    let neg = if matches!(cur.peek(), Tok::Not) {
        cur.bump();
        true
    } else {
        false
    };
    let expr = if matches!(cur.peek(), Tok::Agg(_)) {
        BodyExpr::Agg(parse_aggregate(cur)?)
    } else {
        BodyExpr::Atom(parse_ann_atom(cur)?)
    };
    Ok(BodyLit { neg, expr })
}

fn parse_ann_atom(cur: &mut Cursor) -> Result<AnnAtom, ParseError> {
    let atom = parse_atom(cur)?;
    let ann = if matches!(cur.peek(), Tok::Colon) {
        cur.bump();
        parse_annotation(cur)?
    } else {
        Annotation::one()
    };
    Ok(AnnAtom { atom, ann })
}

fn parse_atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    let pred = match cur.peek().clone() {
        Tok::Ident(name) => {
            cur.bump();
            name
        }
        other => {
            return Err(cur.error(
                ParseErrorKind::Syntax,
                format!("expected a predicate name but found {}", other.describe()),
            ))
        }
    };
    let mut args = Vec::new();
    if matches!(cur.peek(), Tok::LParen) {
        cur.bump();
        args.push(parse_term(cur)?);
        while matches!(cur.peek(), Tok::Comma) {
            cur.bump();
            args.push(parse_term(cur)?);
        }
        cur.expect(&Tok::RParen, "')'")?;
    }
    Ok(Atom { pred, args })
}

pub(crate) fn parse_term(cur: &mut Cursor) -> Result<Term, ParseError> {
    match cur.peek().clone() {
        Tok::Num(n) => {
            cur.bump();
            Ok(Term::Num(n))
        }
        Tok::Minus => {
            cur.bump();
            match cur.peek().clone() {
                Tok::Num(n) => {
                    cur.bump();
                    Ok(Term::Num(-n))
                }
                other => Err(cur.error(
                    ParseErrorKind::Syntax,
                    format!("expected a number after '-' but found {}", other.describe()),
                )),
            }
        }
        Tok::Var(v) => {
            cur.bump();
            Ok(Term::Var(v))
        }
        Tok::Ident(name) => {
            cur.bump();
            if matches!(cur.peek(), Tok::LParen) {
                cur.bump();
                let mut args = vec![parse_term(cur)?];
                while matches!(cur.peek(), Tok::Comma) {
                    cur.bump();
                    args.push(parse_term(cur)?);
                }
                cur.expect(&Tok::RParen, "')'")?;
                Ok(Term::Fn(name, args))
            } else {
                Ok(Term::Sym(name))
            }
        }
        other => Err(cur.error(
            ParseErrorKind::Syntax,
            format!("expected a term but found {}", other.describe()),
        )),
    }
}

fn parse_annotation(cur: &mut Cursor) -> Result<Annotation, ParseError> {
    match cur.peek().clone() {
        Tok::Num(n) => {
            let here = cur.error(
                ParseErrorKind::AnnotationRange,
                format!(
                    "annotation {} is outside the [0,1] grade range",
                    rational_to_string(&n)
                ),
            );
            cur.bump();
            match Grade::new(n) {
                Ok(g) => Ok(Annotation::Const(g)),
                Err(_) => Err(here),
            }
        }
        Tok::Var(v) => {
            cur.bump();
            Ok(Annotation::Var(v))
        }
        Tok::Ident(name) => {
            let func = AnnFn::from_name(&name).ok_or_else(|| {
                cur.error(
                    ParseErrorKind::Syntax,
                    format!(
                        "unknown annotation function '{}' (builtins: min, max, prod, bsum, comp, avg)",
                        name
                    ),
                )
            })?;
            let arity_err = cur.error(
                ParseErrorKind::Arity,
                format!(
                    "annotation function '{}' takes {} argument(s)",
                    name,
                    func.arity()
                ),
            );
            cur.bump();
            cur.expect(&Tok::LParen, "'(' after annotation function")?;
            let mut args = vec![parse_annotation(cur)?];
            while matches!(cur.peek(), Tok::Comma) {
                cur.bump();
                args.push(parse_annotation(cur)?);
            }
            cur.expect(&Tok::RParen, "')'")?;
            if args.len() != func.arity() {
                return Err(arity_err);
            }
            Ok(Annotation::Fn(func, args))
        }
        other => Err(cur.error(
            ParseErrorKind::Syntax,
            format!(
                "expected a grade constant, annotation variable, or annotation function but found {}",
                other.describe()
            ),
        )),
    }
}

fn parse_aggregate(cur: &mut Cursor) -> Result<AggAtom, ParseError> {
    let func = match cur.peek().clone() {
        Tok::Agg(name) => {
            let f = AggFn::from_name(&name).ok_or_else(|| {
                cur.error(
                    ParseErrorKind::Syntax,
                    format!(
                        "unknown aggregate '{}' (expected #sum_f, #times_f, #min_f, #max_f, #count_f)",
                        name
                    ),
                )
            })?;
            cur.bump();
            f
        }
        other => {
            return Err(cur.error(
                ParseErrorKind::Syntax,
                format!("expected an aggregate name but found {}", other.describe()),
            ))
        }
    };
    cur.expect(&Tok::LBrace, "'{'")?;
    let set = if matches!(cur.peek(), Tok::Lt) {
        let mut pairs = vec![parse_ground_pair(cur)?];
        while matches!(cur.peek(), Tok::Comma) {
            cur.bump();
            pairs.push(parse_ground_pair(cur)?);
        }
        SetTerm::Ground(pairs)
    } else {
        let item = parse_term(cur)?;
        cur.expect(&Tok::Colon, "':' after set item")?;
        let grade = parse_annotation(cur)?;
        cur.expect(&Tok::Pipe, "'|' before set condition")?;
        let conj = parse_conj(cur)?;
        SetTerm::Symbolic(SetPair { item, grade, conj })
    };
    cur.expect(&Tok::RBrace, "'}'")?;
    let cmp = parse_cmp(cur)?;
    let guard = parse_term(cur)?;
    let ann = if matches!(cur.peek(), Tok::Colon) {
        cur.bump();
        parse_annotation(cur)?
    } else {
        Annotation::one()
    };
    Ok(AggAtom {
        func,
        set,
        cmp,
        guard,
        ann,
    })
}

fn parse_ground_pair(cur: &mut Cursor) -> Result<SetPair, ParseError> {
    let open = cur.here();
    cur.expect(&Tok::Lt, "'<'")?;
    let item = parse_term(cur)?;
    cur.expect(&Tok::Colon, "':' after set item")?;
    let grade = parse_annotation(cur)?;
    cur.expect(&Tok::Pipe, "'|' before entry condition")?;
    let conj = parse_conj(cur)?;
    cur.expect(&Tok::Gt, "'>'")?;
    let pair = SetPair { item, grade, conj };
    let mut vars = BTreeSet::new();
    pair.item.vars(&mut vars);
    for c in &pair.conj {
        c.atom.vars(&mut vars);
    }
    if !vars.is_empty() {
        return Err(ParseError {
            line: open.0,
            col: open.1,
            kind: ParseErrorKind::Syntax,
            msg: format!(
                "instantiated set entry contains object variables: {}",
                vars.into_iter().collect::<Vec<_>>().join(", ")
            ),
        });
    }
    Ok(pair)
}

fn parse_conj(cur: &mut Cursor) -> Result<Vec<AnnAtom>, ParseError> {
    let mut conj = vec![parse_ann_atom(cur)?];
    while matches!(cur.peek(), Tok::Comma) {
        cur.bump();
        conj.push(parse_ann_atom(cur)?);
    }
    Ok(conj)
}

pub(crate) fn parse_cmp(cur: &mut Cursor) -> Result<CmpOp, ParseError> {
    let op = match cur.peek() {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Gt => CmpOp::Gt,
        Tok::Le => CmpOp::Le,
        Tok::Ge => CmpOp::Ge,
        other => {
            return Err(cur.error(
                ParseErrorKind::Syntax,
                format!(
                    "expected a comparison (=, !=, <, >, <=, >=) but found {}",
                    other.describe()
                ),
            ))
        }
    };
    cur.bump();
    Ok(op)
}

/// Rejects rules that use one name both as an object variable and as an
/// annotation variable; the two namespaces share the capitalized-identifier
/// lexical form, so a shared name would be ambiguous.
fn check_var_kinds(rule: &Rule, cur: &Cursor) -> Result<(), ParseError> {
    let mut object = BTreeSet::new();
    collect_object_vars(rule, &mut object);
    let mut annotation = BTreeSet::new();
    for h in &rule.head {
        h.ann.vars(&mut annotation);
    }
    for l in &rule.body {
        match &l.expr {
            BodyExpr::Atom(a) => a.ann.vars(&mut annotation),
            BodyExpr::Agg(agg) => {
                agg.ann.vars(&mut annotation);
                let pairs: Vec<&SetPair> = match &agg.set {
                    SetTerm::Symbolic(p) => vec![p],
                    SetTerm::Ground(ps) => ps.iter().collect(),
                };
                for p in pairs {
                    p.grade.vars(&mut annotation);
                    for c in &p.conj {
                        c.ann.vars(&mut annotation);
                    }
                }
            }
        }
    }
    if let Some(shared) = object.intersection(&annotation).next() {
        let (line, col) = cur.here();
        return Err(ParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax,
            msg: format!(
                "variable {} is used both as an object variable and as an annotation variable",
                shared
            ),
        });
    }
    Ok(())
}

/// Every predicate and every object function symbol must be used with a
/// single arity throughout the program.
pub(crate) fn check_arities(p: &Program, errors: &mut Vec<ParseError>) {
    let mut preds: BTreeMap<String, usize> = BTreeMap::new();
    let mut funcs: BTreeMap<String, usize> = BTreeMap::new();
    let mut check_atom = |atom: &Atom, errors: &mut Vec<ParseError>| {
        if let Some(&seen) = preds.get(&atom.pred) {
            if seen != atom.args.len() {
                errors.push(ParseError {
                    line: 0,
                    col: 0,
                    kind: ParseErrorKind::Arity,
                    msg: format!(
                        "predicate '{}' is used with arities {} and {}",
                        atom.pred,
                        seen,
                        atom.args.len()
                    ),
                });
            }
        } else {
            preds.insert(atom.pred.clone(), atom.args.len());
        }
        let mut stack: Vec<&Term> = atom.args.iter().collect();
        while let Some(t) = stack.pop() {
            if let Term::Fn(name, args) = t {
                if let Some(&seen) = funcs.get(name) {
                    if seen != args.len() {
                        errors.push(ParseError {
                            line: 0,
                            col: 0,
                            kind: ParseErrorKind::Arity,
                            msg: format!(
                                "function '{}' is used with arities {} and {}",
                                name,
                                seen,
                                args.len()
                            ),
                        });
                    }
                } else {
                    funcs.insert(name.clone(), args.len());
                }
                stack.extend(args.iter());
            }
        }
    };
    for rule in &p.rules {
        for h in &rule.head {
            check_atom(&h.atom, errors);
        }
        for l in &rule.body {
            match &l.expr {
                BodyExpr::Atom(a) => check_atom(&a.atom, errors),
                BodyExpr::Agg(agg) => {
                    let pairs: Vec<&SetPair> = match &agg.set {
                        SetTerm::Symbolic(p) => vec![p],
                        SetTerm::Ground(ps) => ps.iter().collect(),
                    };
                    for p in pairs {
                        for c in &p.conj {
                            check_atom(&c.atom, errors);
                        }
                    }
                }
            }
        }
    }
    // dedupe repeated reports of the same clash
    errors.dedup_by(|a, b| a.kind == b.kind && a.msg == b.msg);
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn parse_ok(src: &str) -> Program {
        match parse_program(src) {
            Ok(p) => p,
            Err(es) => panic!("unexpected parse errors: {:?}", es),
        }
    }

    fn parse_errs(src: &str) -> Vec<ParseError> {
        parse_program(src).expect_err("expected parse errors")
    }

    #[test]
    fn fact_with_annotation() {
        let p = parse_ok("a(1,2):0.4.");
        assert_eq!(p.rules.len(), 1);
        assert_eq!(print_program(&p), "a(1,2) : 0.4.\n");
        let h = &p.rules[0].head[0];
        assert_eq!(h.atom, Atom::new("a", vec![Term::num_i64(1), Term::num_i64(2)]));
        assert_eq!(h.ann, Annotation::Const(Grade::ratio(2, 5)));
    }

    #[test]
    fn missing_annotation_defaults_to_one() {
        let p = parse_ok("p :- q, not r.");
        let r = &p.rules[0];
        assert_eq!(r.head[0].ann, Annotation::one());
        assert_eq!(r.body.len(), 2);
        assert!(!r.body[0].neg);
        assert!(r.body[1].neg);
        match &r.body[1].expr {
            BodyExpr::Atom(a) => assert_eq!(a.ann, Annotation::one()),
            _ => panic!("expected atom"),
        }
        assert_eq!(print_program(&p), "p : 1 :- q : 1, not r : 1.\n");
    }

    #[test]
    fn disjunctive_heads_and_variables() {
        let p = parse_ok("a(1,1):0.8 | a(1,2):0.4.\nh(X):V :- q(X):V.");
        assert_eq!(p.rules[0].head.len(), 2);
        let r = &p.rules[1];
        assert_eq!(r.head[0].atom.args[0], Term::var("X"));
        assert_eq!(r.head[0].ann, Annotation::Var("V".into()));
    }

    #[test]
    fn aggregate_atom_round_trips_to_canonical_text() {
        let src = "controls(C1,C3):0.55 :- #sum_f{ P : V | controlStk(C1,C2,C3,P) : V } > 50 : 0.6.";
        let p = parse_ok(src);
        let text = print_program(&p);
        assert!(text.contains("#sum_f{ P : V | controlStk(C1,C2,C3,P) : V } > 50 : 0.6"));
        let p2 = parse_ok(&text);
        assert_eq!(p, p2);
    }

    #[test]
    fn instantiated_set_entries_parse_and_round_trip() {
        let src = "small :- #sum_f{ < 2 : 0.4 | a(1,2) : 0.4 >, < 5 : 0.7 | a(1,5) : 0.7 > } <= 11.";
        let p = parse_ok(src);
        match &p.rules[0].body[0].expr {
            BodyExpr::Agg(agg) => match &agg.set {
                SetTerm::Ground(pairs) => {
                    assert_eq!(pairs.len(), 2);
                    assert_eq!(pairs[0].item, Term::num_i64(2));
                }
                _ => panic!("expected instantiated set"),
            },
            _ => panic!("expected aggregate"),
        }
        let text = print_program(&p);
        assert_eq!(parse_ok(&text), p);
    }

    #[test]
    fn annotation_functions_parse_with_arity_checks() {
        let p = parse_ok("b:prod(V,0.5) :- a:V.");
        assert_eq!(
            p.rules[0].head[0].ann,
            Annotation::Fn(
                AnnFn::Prod,
                vec![Annotation::Var("V".into()), Annotation::Const(Grade::ratio(1, 2))]
            )
        );
        let errs = parse_errs("b:prod(V) :- a:V.");
        assert!(errs.iter().any(|e| e.kind == ParseErrorKind::Arity));
        let errs = parse_errs("b:foo(V) :- a:V.");
        assert!(errs.iter().any(|e| e.msg.contains("unknown annotation function")));
    }

    #[test]
    fn annotation_out_of_range_is_reported() {
        let errs = parse_errs("a : 1.5.");
        assert!(errs
            .iter()
            .any(|e| e.kind == ParseErrorKind::AnnotationRange && e.msg.contains("[0,1]")));
    }

    #[test]
    fn predicate_arity_clash_is_reported() {
        let errs = parse_errs("p(a).\np(a,b).");
        assert!(errs
            .iter()
            .any(|e| e.kind == ParseErrorKind::Arity && e.msg.contains("'p'")));
    }

    #[test]
    fn shared_object_and_annotation_variable_is_rejected() {
        let errs = parse_errs("p(X) : X :- q(X).");
        assert!(errs.iter().any(|e| e.msg.contains("both as an object variable")));
    }

    #[test]
    fn recovery_continues_after_a_bad_rule() {
        let res = parse_program("p :- .\nq.\nr :- s");
        let errs = res.expect_err("errors expected");
        assert_eq!(errs.len(), 2, "{:?}", errs);
        assert!(errs[0].line == 1);
        assert!(errs[1].line >= 3);
    }

    #[test]
    fn comments_and_whitespace_are_skipped() {
        let p = parse_ok("% a comment\n  a : 0.3. % trailing\n%last");
        assert_eq!(p.rules.len(), 1);
    }

    #[test]
    fn negated_aggregate_parses() {
        let src = "gamma :- not gamma, #min_f{ Y : U | a(X,Y) : U } <= 1 : 0.4.";
        let p = parse_ok(src);
        let r = &p.rules[0];
        assert!(r.body[0].neg);
        assert!(r.body[1].neg == false);
        match &r.body[1].expr {
            BodyExpr::Agg(agg) => {
                assert_eq!(agg.func, AggFn::Min);
                assert_eq!(agg.cmp, CmpOp::Le);
                assert_eq!(agg.guard, Term::num_i64(1));
                assert_eq!(agg.ann, Annotation::Const(Grade::ratio(2, 5)));
            }
            _ => panic!("expected aggregate"),
        }
        assert_eq!(parse_ok(&print_program(&p)), p);
    }

    #[test]
    fn negative_numbers_in_terms_and_guards() {
        let p = parse_ok("p(-2).\nq :- #sum_f{ X : U | p(X) : U } > -3.");
        assert_eq!(
            p.rules[0].head[0].atom.args[0],
            Term::Num(BigRational::from_integer(BigInt::from(-2)))
        );
        assert_eq!(parse_ok(&print_program(&p)), p);
    }

    #[test]
    fn variable_guards_parse() {
        let p = parse_ok("over(X) :- bound(X), #count_f{ Y : U | hit(Y) : U } >= X : 0.5.");
        match &p.rules[0].body[1].expr {
            BodyExpr::Agg(agg) => assert_eq!(agg.guard, Term::var("X")),
            _ => panic!("expected aggregate"),
        }
    }
}
