//! Canonical text rendering of programs. Output re-parses to a structurally
//! equal [`Program`].

use std::fmt::Write;

use super::ast::*;

pub fn format_program(p: &Program) -> String {
    let mut out = String::new();
    for r in &p.rules {
        out.push_str(&format_rule(r));
        out.push('\n');
    }
    out
}

pub fn format_rule(r: &Rule) -> String {
    let mut s = String::new();
    if let Some(h) = &r.head {
        s.push_str(&format_atom(h));
    }
    if !r.body.is_empty() {
        if r.head.is_some() {
            s.push(' ');
        }
        s.push_str(":- ");
        let lits: Vec<String> = r.body.iter().map(format_literal).collect();
        s.push_str(&lits.join(", "));
    }
    s.push('.');
    s
}

pub fn format_literal(l: &Literal) -> String {
    match l {
        Literal::Pos(a) => format_atom(a),
        Literal::Neg(a) => format!("not {}", format_atom(a)),
        Literal::Cmp(c) => format!(
            "{}{}{}",
            format_term(&c.lhs),
            c.op.symbol(),
            format_term(&c.rhs)
        ),
    }
}

pub fn format_atom(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.predicate.to_string();
    }
    let mut s = String::with_capacity(16);
    s.push_str(&a.predicate);
    s.push('(');
    for (i, t) in a.args.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format_term(t));
    }
    s.push(')');
    s
}

pub fn format_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn write_term(s: &mut String, t: &Term) {
    match t {
        Term::Const(v) => {
            let _ = write!(s, "{v}");
        }
        Term::Var(v) => s.push_str(v),
        Term::Arith(l, op, r) => {
            write_term(s, l);
            s.push_str(op.symbol());
            // Arithmetic is left-associative, so a compound or negative right
            // operand needs parentheses to survive a re-parse.
            let wrap = match &**r {
                Term::Arith(..) => true,
                Term::Const(Value::Int(i)) => *i < 0,
                _ => false,
            };
            if wrap {
                s.push('(');
                write_term(s, r);
                s.push(')');
            } else {
                write_term(s, r);
            }
        }
    }
}
