//! Abstract syntax of the rule language.
//!
//! A [`Program`] is always held in expanded form: pooled arguments and
//! integer intervals are unfolded into plain facts by the parser, so no
//! AST node carries a pool or an interval.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Interned-by-sharing name of a predicate, constant or variable.
pub type Symbol = Arc<str>;

/// A ground constant: either an integer or a symbolic constant.
///
/// Integers order before symbols; integers compare numerically and symbols
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Sym(Symbol),
}

impl Value {
    pub fn sym(s: &str) -> Self {
        Value::Sym(Arc::from(s))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Sym(_) => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Int(_) => None,
            Value::Sym(s) => Some(s),
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Int(_), Value::Sym(_)) => Ordering::Less,
            (Value::Sym(_), Value::Int(_)) => Ordering::Greater,
            (Value::Sym(a), Value::Sym(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::sym(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

impl ArithOp {
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Value),
    Var(Symbol),
    Arith(Box<Term>, ArithOp, Box<Term>),
}

impl Term {
    pub fn int(i: i64) -> Self {
        Term::Const(Value::Int(i))
    }

    pub fn sym(s: &str) -> Self {
        Term::Const(Value::sym(s))
    }

    pub fn var(s: &str) -> Self {
        Term::Var(Arc::from(s))
    }

    /// Appends every variable occurring in the term, in order of occurrence.
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Symbol>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => out.push(v),
            Term::Arith(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Arith(l, _, r) => l.is_ground() && r.is_ground(),
        }
    }

    /// Evaluates a term under a variable lookup. Returns `None` when a
    /// variable is unbound or arithmetic is applied to a symbol or overflows.
    pub fn eval<F>(&self, lookup: &F) -> Option<Value>
    where
        F: Fn(&Symbol) -> Option<Value>,
    {
        match self {
            Term::Const(v) => Some(v.clone()),
            Term::Var(v) => lookup(v),
            Term::Arith(l, op, r) => {
                let a = l.eval(lookup)?.as_int()?;
                let b = r.eval(lookup)?.as_int()?;
                op.apply(a, b).map(Value::Int)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: Arc::from(predicate),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Symbol>) {
        for t in &self.args {
            t.collect_vars(out);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, a: &Value, b: &Value) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp(Comparison),
}

/// `head :- body.`; a missing head makes the rule a constraint and an empty
/// body makes it a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Option<Atom>,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn fact(head: Atom) -> Self {
        Rule {
            head: Some(head),
            body: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    /// r⁺: the positive body atoms.
    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Pos(a) => Some(a),
            _ => None,
        })
    }

    /// r⁻: the atoms under default negation.
    pub fn negative_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Neg(a) => Some(a),
            _ => None,
        })
    }

    pub fn comparisons(&self) -> impl Iterator<Item = &Comparison> {
        self.body.iter().filter_map(|l| match l {
            Literal::Cmp(c) => Some(c),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        self.rules
            .iter()
            .filter(|r| r.is_fact())
            .filter_map(|r| r.head.as_ref())
    }

    /// Rules that are not facts.
    pub fn proper_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| !r.is_fact())
    }

    pub fn append(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }
}

impl Extend<Rule> for Program {
    fn extend<T: IntoIterator<Item = Rule>>(&mut self, iter: T) {
        self.rules.extend(iter);
    }
}
