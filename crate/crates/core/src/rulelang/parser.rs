//! Recursive-descent parser for `.kb` rule files.
//!
//! ```text
//! program    ::= statement*
//! statement  ::= atom "."                         (fact, may pool / use intervals)
//!              | atom ":-" body "."               (rule)
//!              | ":-" body "."                    (constraint)
//! body       ::= literal ("," literal)*
//! literal    ::= "not" atom | atom | term cmp term
//! atom       ::= IDENT [ "(" arg ("," arg)* ")" ]
//! arg        ::= alt (";" alt)*                   (pool, facts only)
//! alt        ::= INT ".." INT | term              (interval, facts only)
//! term       ::= primary (("+" | "-") primary)*
//! primary    ::= INT | "-" INT | IDENT | VAR | "(" term ")"
//! cmp        ::= "<" | "<=" | ">" | ">=" | "=" | "!="
//! ```

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// One alternative inside a pooled argument position.
#[derive(Clone, Debug)]
enum Alt {
    Term(Term),
    Interval(i64, i64),
}

/// A head atom before pool / interval expansion.
#[derive(Clone, Debug)]
struct RawAtom {
    predicate: String,
    args: Vec<Vec<Alt>>,
    line: usize,
    col: usize,
}

impl RawAtom {
    fn is_plain(&self) -> bool {
        self.args
            .iter()
            .all(|alts| alts.len() == 1 && matches!(alts[0], Alt::Term(_)))
    }

    fn into_plain(self) -> Atom {
        let args = self
            .args
            .into_iter()
            .map(|mut alts| match alts.pop() {
                Some(Alt::Term(t)) => t,
                _ => unreachable!("checked by is_plain"),
            })
            .collect();
        Atom {
            predicate: Arc::from(self.predicate.as_str()),
            args,
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

/// Parses rule-language source text into an expanded, safety-checked
/// [`Program`].
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let eof = src
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, eof };
    let mut rules = Vec::new();
    while !p.at_end() {
        p.statement(&mut rules)?;
    }
    let program = Program::new(rules);
    check_arities(&program)?;
    for rule in &program.rules {
        check_safety(rule)?;
    }
    Ok(program)
}

/// Parses a single ground atom such as `pump_flow(condensate_pump_a,100,0)`.
pub fn parse_ground_atom(src: &str) -> Result<(Symbol, Vec<Value>), ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof: (1, src.chars().count() + 1),
    };
    let raw = p.atom()?;
    if !p.at_end() {
        let t = p.peek_tok().unwrap();
        return Err(p.error_here(format!("unexpected {} after atom", t.describe())));
    }
    if !raw.is_plain() {
        return Err(ParseError::syntax(
            raw.line,
            raw.col,
            "a ground atom cannot contain pools or intervals",
        ));
    }
    let atom = raw.into_plain();
    let mut args = Vec::with_capacity(atom.args.len());
    for t in &atom.args {
        match t.eval(&|_| None) {
            Some(v) => args.push(v),
            None => {
                return Err(ParseError::syntax(
                    1,
                    1,
                    format!("atom `{src}` is not ground"),
                ))
            }
        }
    }
    Ok((atom.predicate, args))
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn error_here(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::syntax(l, c, msg)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek_tok() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error_here(format!(
                "expected {}, found {}",
                want.describe(),
                t.describe()
            ))),
            None => Err(self.error_here(format!(
                "expected {}, found end of input",
                want.describe()
            ))),
        }
    }

    fn statement(&mut self, out: &mut Vec<Rule>) -> Result<(), ParseError> {
        if self.peek_tok() == Some(&Tok::If) {
            self.bump();
            let body = self.body()?;
            self.expect(Tok::Dot)?;
            out.push(Rule { head: None, body });
            return Ok(());
        }
        let head = self.atom()?;
        match self.peek_tok() {
            Some(Tok::Dot) => {
                self.bump();
                expand_fact(head, out)
            }
            Some(Tok::If) => {
                self.bump();
                if !head.is_plain() {
                    return Err(ParseError::syntax(
                        head.line,
                        head.col,
                        "pools and intervals are only allowed in facts",
                    ));
                }
                let body = self.body()?;
                self.expect(Tok::Dot)?;
                out.push(Rule {
                    head: Some(head.into_plain()),
                    body,
                });
                Ok(())
            }
            Some(t) => {
                let d = t.describe();
                Err(self.error_here(format!("expected `.` or `:-`, found {d}")))
            }
            None => Err(self.error_here("expected `.` or `:-`, found end of input")),
        }
    }

    fn body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut lits = vec![self.literal()?];
        while self.peek_tok() == Some(&Tok::Comma) {
            self.bump();
            lits.push(self.literal()?);
        }
        Ok(lits)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        match self.peek_tok() {
            Some(Tok::Not) => {
                self.bump();
                let a = self.plain_atom()?;
                Ok(Literal::Neg(a))
            }
            Some(Tok::Ident(_)) => {
                // An identifier starts an atom unless a comparison follows a
                // bare constant (e.g. `a = X`).
                let next = self.peek_at(1);
                let bare_then_op = matches!(
                    next,
                    Some(
                        Tok::Lt
                            | Tok::Le
                            | Tok::Gt
                            | Tok::Ge
                            | Tok::Eq
                            | Tok::Ne
                            | Tok::Plus
                            | Tok::Minus
                    )
                );
                if bare_then_op {
                    self.comparison()
                } else {
                    let a = self.plain_atom()?;
                    if let Some(op) = self.peek_tok().and_then(cmp_op) {
                        return Err(self.error_here(format!(
                            "atom `{}` cannot be compared with `{}`",
                            a.predicate,
                            op.symbol()
                        )));
                    }
                    Ok(Literal::Pos(a))
                }
            }
            Some(_) => self.comparison(),
            None => Err(self.error_here("expected a literal, found end of input")),
        }
    }

    fn comparison(&mut self) -> Result<Literal, ParseError> {
        let lhs = self.term()?;
        let op = match self.peek_tok().and_then(cmp_op) {
            Some(op) => op,
            None => {
                return Err(match self.peek_tok() {
                    Some(t) => {
                        let d = t.describe();
                        self.error_here(format!("expected a comparison operator, found {d}"))
                    }
                    None => self.error_here("expected a comparison operator"),
                })
            }
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Literal::Cmp(Comparison { lhs, op, rhs }))
    }

    fn plain_atom(&mut self) -> Result<Atom, ParseError> {
        let raw = self.atom()?;
        if !raw.is_plain() {
            return Err(ParseError::syntax(
                raw.line,
                raw.col,
                "pools and intervals are only allowed in facts",
            ));
        }
        Ok(raw.into_plain())
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let (line, col) = self.here();
        let name = match self.bump() {
            Some(Tok::Ident(s)) => s,
            Some(t) => {
                self.pos -= 1;
                return Err(self.error_here(format!("expected a predicate, found {}", t.describe())));
            }
            None => return Err(self.error_here("expected a predicate, found end of input")),
        };
        let mut args = Vec::new();
        if self.peek_tok() == Some(&Tok::LParen) {
            self.bump();
            args.push(self.pooled_arg()?);
            while self.peek_tok() == Some(&Tok::Comma) {
                self.bump();
                args.push(self.pooled_arg()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(RawAtom {
            predicate: name,
            args,
            line,
            col,
        })
    }

    fn pooled_arg(&mut self) -> Result<Vec<Alt>, ParseError> {
        let mut alts = vec![self.alt()?];
        while self.peek_tok() == Some(&Tok::Semi) {
            self.bump();
            alts.push(self.alt()?);
        }
        Ok(alts)
    }

    fn alt(&mut self) -> Result<Alt, ParseError> {
        let t = self.term()?;
        if self.peek_tok() == Some(&Tok::DotDot) {
            let (l, c) = self.here();
            self.bump();
            let hi = self.term()?;
            return match (t, hi) {
                (Term::Const(Value::Int(a)), Term::Const(Value::Int(b))) => {
                    Ok(Alt::Interval(a, b))
                }
                _ => Err(ParseError::syntax(l, c, "interval bounds must be integers")),
            };
        }
        Ok(Alt::Term(t))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (l, c) = self.here();
        let mut acc = self.primary()?;
        loop {
            let op = match self.peek_tok() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.primary()?;
            acc = Term::Arith(Box::new(acc), op, Box::new(rhs));
        }
        fold_ground(acc).map_err(|m| ParseError::syntax(l, c, m))
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Some(Tok::Int(i)) => Ok(Term::int(i)),
            Some(Tok::Minus) => match self.bump() {
                Some(Tok::Int(i)) => Ok(Term::int(-i)),
                _ => {
                    self.pos -= 1;
                    Err(self.error_here("expected an integer after unary `-`"))
                }
            },
            Some(Tok::Ident(s)) => Ok(Term::sym(&s)),
            Some(Tok::Var(s)) => Ok(Term::var(&s)),
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(t) => {
                self.pos -= 1;
                Err(self.error_here(format!("expected a term, found {}", t.describe())))
            }
            None => Err(self.error_here("expected a term, found end of input")),
        }
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        _ => return None,
    })
}

/// Variable-free arithmetic is evaluated at parse time.
fn fold_ground(t: Term) -> Result<Term, String> {
    match t {
        Term::Arith(..) if t.is_ground() => match t.eval(&|_| None) {
            Some(v) => Ok(Term::Const(v)),
            None => Err("arithmetic on a symbolic constant or integer overflow".into()),
        },
        other => Ok(other),
    }
}

fn expand_fact(head: RawAtom, out: &mut Vec<Rule>) -> Result<(), ParseError> {
    let mut positions: Vec<Vec<Term>> = Vec::with_capacity(head.args.len());
    for alts in head.args {
        let mut values = Vec::new();
        for alt in alts {
            match alt {
                Alt::Term(t) => values.push(t),
                Alt::Interval(lo, hi) => {
                    if lo > hi {
                        return Err(ParseError::EmptyInterval {
                            line: head.line,
                            col: head.col,
                            lo,
                            hi,
                        });
                    }
                    values.extend((lo..=hi).map(Term::int));
                }
            }
        }
        positions.push(values);
    }
    let predicate: Symbol = Arc::from(head.predicate.as_str());
    // Cartesian product over argument positions, leftmost position slowest.
    let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
    for values in &positions {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for prefix in &combos {
            for v in values {
                let mut c = prefix.clone();
                c.push(v.clone());
                next.push(c);
            }
        }
        combos = next;
    }
    out.extend(combos.into_iter().map(|args| {
        Rule::fact(Atom {
            predicate: predicate.clone(),
            args,
        })
    }));
    Ok(())
}

/// Every predicate name is used with a single arity throughout a program.
pub fn check_arities(program: &Program) -> Result<(), ParseError> {
    let mut seen: HashMap<Symbol, usize> = HashMap::new();
    let mut visit = |a: &Atom| -> Result<(), ParseError> {
        match seen.get(&a.predicate) {
            Some(&n) if n != a.arity() => Err(ParseError::Arity {
                predicate: a.predicate.to_string(),
                expected: n,
                found: a.arity(),
            }),
            Some(_) => Ok(()),
            None => {
                seen.insert(a.predicate.clone(), a.arity());
                Ok(())
            }
        }
    };
    for rule in &program.rules {
        if let Some(h) = &rule.head {
            visit(h)?;
        }
        for lit in &rule.body {
            match lit {
                Literal::Pos(a) | Literal::Neg(a) => visit(a)?,
                Literal::Cmp(_) => {}
            }
        }
    }
    Ok(())
}

/// Safety: every variable of the rule must occur as a plain argument of a
/// positive body atom, which is where the grounder binds it.
pub fn check_safety(rule: &Rule) -> Result<(), ParseError> {
    let mut bound: BTreeSet<&Symbol> = BTreeSet::new();
    for a in rule.positive_body() {
        for t in &a.args {
            if let Term::Var(v) = t {
                bound.insert(v);
            }
        }
    }
    let mut used: Vec<&Symbol> = Vec::new();
    if let Some(h) = &rule.head {
        h.collect_vars(&mut used);
    }
    for lit in &rule.body {
        match lit {
            Literal::Pos(a) | Literal::Neg(a) => a.collect_vars(&mut used),
            Literal::Cmp(c) => {
                c.lhs.collect_vars(&mut used);
                c.rhs.collect_vars(&mut used);
            }
        }
    }
    for v in used {
        if !bound.contains(v) {
            return Err(ParseError::Unsafe {
                rule: super::format::format_rule(rule),
                variable: v.to_string(),
            });
        }
    }
    Ok(())
}
