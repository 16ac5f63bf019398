//! Semi-naive bottom-up instantiation.
//!
//! Each predicate keeps a relation of derivable tuples (an over-approximation
//! that ignores negation). A rule is re-instantiated in round `r` only through
//! joins that use at least one tuple first derived in round `r - 1`: for the
//! body atom at position `j` reading the delta, atoms before `j` read the old
//! part and atoms after `j` read the full relation, so each combination is
//! produced exactly once.

use std::collections::{HashMap, HashSet};

use super::program::{GroundAtom, GroundProgram, GroundProgramBuilder};
use super::EngineError;
use crate::rulelang::{
    check_arities, check_safety, format_rule, ArithOp, Atom, CmpOp, Literal, Program, Rule,
    Symbol, Term, Value,
};

#[derive(Clone, Debug)]
pub struct GroundOptions {
    /// Instantiation stops with an error once this many distinct ground rules
    /// have been produced.
    pub max_ground_rules: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_ground_rules: 10_000_000,
        }
    }
}

pub fn ground(program: &Program) -> Result<GroundProgram, EngineError> {
    ground_with(program, &GroundOptions::default())
}

pub fn ground_with(program: &Program, opts: &GroundOptions) -> Result<GroundProgram, EngineError> {
    check_arities(program)?;
    for r in &program.rules {
        check_safety(r)?;
    }
    Grounder::new(program)?.run(opts)
}

#[derive(Clone, Debug)]
enum CTerm {
    Const(Value),
    Var(usize),
    Arith(Box<CTerm>, ArithOp, Box<CTerm>),
}

impl CTerm {
    fn eval(&self, b: &[Option<Value>]) -> Option<Value> {
        match self {
            CTerm::Const(v) => Some(v.clone()),
            CTerm::Var(i) => b[*i].clone(),
            CTerm::Arith(l, op, r) => {
                let x = l.eval(b)?.as_int()?;
                let y = r.eval(b)?.as_int()?;
                op.apply(x, y).map(Value::Int)
            }
        }
    }

    fn vars(&self) -> u64 {
        match self {
            CTerm::Const(_) => 0,
            CTerm::Var(i) => 1 << i,
            CTerm::Arith(l, _, r) => l.vars() | r.vars(),
        }
    }
}

#[derive(Debug)]
struct CAtom {
    rel: usize,
    pred: Symbol,
    args: Vec<CTerm>,
    /// Variables occurring inside arithmetic arguments.
    arith_vars: u64,
}

impl CAtom {
    fn eval(&self, b: &[Option<Value>]) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| t.eval(b))
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            predicate: self.pred.clone(),
            args,
        })
    }
}

#[derive(Debug)]
struct CCmp {
    lhs: CTerm,
    op: CmpOp,
    rhs: CTerm,
    vars: u64,
}

impl CCmp {
    fn eval(&self, b: &[Option<Value>]) -> Option<(Value, Value)> {
        let l = self.lhs.eval(b)?;
        let r = self.rhs.eval(b)?;
        self.op.holds(&l, &r).then_some((l, r))
    }
}

#[derive(Debug)]
struct CRule<'a> {
    src: &'a Rule,
    nvars: usize,
    head: Option<CAtom>,
    pos: Vec<CAtom>,
    neg: Vec<CAtom>,
    cmps: Vec<CCmp>,
}

#[derive(Default)]
struct Relation {
    tuples: Vec<Vec<Value>>,
    set: HashSet<Vec<Value>>,
    /// Bound-position mask -> key values -> tuple ids in insertion order.
    indexes: HashMap<u64, HashMap<Vec<Value>, Vec<u32>>>,
}

fn project(t: &[Value], mask: u64) -> Vec<Value> {
    t.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, v)| v.clone())
        .collect()
}

impl Relation {
    fn insert(&mut self, t: Vec<Value>) -> bool {
        if self.set.contains(&t) {
            return false;
        }
        let id = self.tuples.len() as u32;
        for (&mask, idx) in self.indexes.iter_mut() {
            idx.entry(project(&t, mask)).or_default().push(id);
        }
        self.set.insert(t.clone());
        self.tuples.push(t);
        true
    }

    fn ensure_index(&mut self, mask: u64) {
        if mask == 0 || self.indexes.contains_key(&mask) {
            return;
        }
        let mut idx: HashMap<Vec<Value>, Vec<u32>> = HashMap::new();
        for (i, t) in self.tuples.iter().enumerate() {
            idx.entry(project(t, mask)).or_default().push(i as u32);
        }
        self.indexes.insert(mask, idx);
    }
}

/// How one positive body atom is matched within a join plan.
#[derive(Debug)]
struct Step {
    atom: usize,
    /// Argument positions whose value is known before matching.
    key_mask: u64,
    key_terms: Vec<usize>,
    /// `(position, variable, first occurrence)` for positions binding a variable.
    binds: Vec<(usize, usize, bool)>,
    /// Arithmetic positions that could not be evaluated before matching; they
    /// are re-checked once every variable is bound.
    deferred: Vec<usize>,
    /// Comparisons whose variables are all bound after this step.
    checks: Vec<usize>,
}

struct Plan {
    pre_checks: Vec<usize>,
    steps: Vec<Step>,
}

struct Grounder<'a> {
    rules: Vec<CRule<'a>>,
    rels: Vec<Relation>,
}

fn compile_term(t: &Term, vars: &mut Vec<Symbol>) -> CTerm {
    match t {
        Term::Const(v) => CTerm::Const(v.clone()),
        Term::Var(v) => {
            let i = match vars.iter().position(|x| x == v) {
                Some(i) => i,
                None => {
                    vars.push(v.clone());
                    vars.len() - 1
                }
            };
            CTerm::Var(i)
        }
        Term::Arith(l, op, r) => CTerm::Arith(
            Box::new(compile_term(l, vars)),
            *op,
            Box::new(compile_term(r, vars)),
        ),
    }
}

impl<'a> Grounder<'a> {
    fn new(program: &'a Program) -> Result<Self, EngineError> {
        let mut preds: HashMap<Symbol, usize> = HashMap::new();
        let mut rels = Vec::new();
        let mut rel_of = |p: &Symbol| -> usize {
            *preds.entry(p.clone()).or_insert_with(|| {
                rels.push(Relation::default());
                rels.len() - 1
            })
        };
        let mut rules = Vec::with_capacity(program.len());
        for r in &program.rules {
            let mut vars: Vec<Symbol> = Vec::new();
            let mut atom = |a: &Atom, vars: &mut Vec<Symbol>| {
                let args: Vec<CTerm> = a.args.iter().map(|t| compile_term(t, vars)).collect();
                let arith_vars = args
                    .iter()
                    .filter(|t| matches!(t, CTerm::Arith(..)))
                    .fold(0, |m, t| m | t.vars());
                CAtom {
                    rel: rel_of(&a.predicate),
                    pred: a.predicate.clone(),
                    args,
                    arith_vars,
                }
            };
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            let mut cmps = Vec::new();
            for l in &r.body {
                if let Literal::Pos(a) = l {
                    pos.push(atom(a, &mut vars));
                }
            }
            for l in &r.body {
                match l {
                    Literal::Pos(_) => {}
                    Literal::Neg(a) => neg.push(atom(a, &mut vars)),
                    Literal::Cmp(c) => {
                        let lhs = compile_term(&c.lhs, &mut vars);
                        let rhs = compile_term(&c.rhs, &mut vars);
                        let vars = lhs.vars() | rhs.vars();
                        cmps.push(CCmp {
                            lhs,
                            op: c.op,
                            rhs,
                            vars,
                        });
                    }
                }
            }
            let head = r.head.as_ref().map(|h| atom(h, &mut vars));
            if vars.len() > 64 {
                return Err(EngineError::TooManyVariables {
                    rule: format_rule(r),
                });
            }
            rules.push(CRule {
                src: r,
                nvars: vars.len(),
                head,
                pos,
                neg,
                cmps,
            });
        }
        Ok(Grounder { rules, rels })
    }

    fn plan(&self, rule: &CRule, first: Option<usize>, ranges: &[(usize, usize)]) -> Plan {
        let mut bound: u64 = 0;
        let mut done_cmps = vec![false; rule.cmps.len()];
        let take_checks = |bound: u64, done: &mut Vec<bool>| -> Vec<usize> {
            let mut out = Vec::new();
            for (i, c) in rule.cmps.iter().enumerate() {
                if !done[i] && c.vars & !bound == 0 {
                    done[i] = true;
                    out.push(i);
                }
            }
            out
        };
        let pre_checks = take_checks(0, &mut done_cmps);
        let mut remaining: Vec<usize> = (0..rule.pos.len()).collect();
        let mut steps = Vec::new();
        while !remaining.is_empty() {
            let pick = match first.filter(|f| steps.is_empty() && remaining.contains(f)) {
                Some(f) => f,
                None => {
                    let key_count = |a: &CAtom| {
                        a.args.iter().filter(|t| t.vars() & !bound == 0).count() as i32
                    };
                    let eligible: Vec<usize> = remaining
                        .iter()
                        .copied()
                        .filter(|&i| rule.pos[i].arith_vars & !bound == 0)
                        .collect();
                    let pool = if eligible.is_empty() {
                        &remaining
                    } else {
                        &eligible
                    };
                    *pool
                        .iter()
                        .min_by(|&&a, &&b| {
                            let cost = |i: usize| {
                                let (lo, hi) = ranges[i];
                                (hi - lo) as f64 / 10f64.powi(key_count(&rule.pos[i]))
                            };
                            cost(a).total_cmp(&cost(b)).then(a.cmp(&b))
                        })
                        .expect("non-empty pool")
                }
            };
            remaining.retain(|&i| i != pick);
            let atom = &rule.pos[pick];
            let mut key_mask = 0u64;
            let mut key_terms = Vec::new();
            let mut binds = Vec::new();
            let mut deferred = Vec::new();
            let mut newly: u64 = 0;
            for (i, t) in atom.args.iter().enumerate() {
                if t.vars() & !bound == 0 {
                    key_mask |= 1 << i;
                    key_terms.push(i);
                } else if let CTerm::Var(v) = t {
                    let first = newly & (1 << v) == 0;
                    newly |= 1 << v;
                    binds.push((i, *v, first));
                } else {
                    deferred.push(i);
                }
            }
            bound |= newly;
            let checks = take_checks(bound, &mut done_cmps);
            steps.push(Step {
                atom: pick,
                key_mask,
                key_terms,
                binds,
                deferred,
                checks,
            });
        }
        Plan { pre_checks, steps }
    }

    fn run(mut self, opts: &GroundOptions) -> Result<GroundProgram, EngineError> {
        let mut out = GroundProgramBuilder::new();
        let mut old_end = vec![0usize; self.rels.len()];
        let mut round = 0usize;
        loop {
            let full_end: Vec<usize> = self.rels.iter().map(|r| r.tuples.len()).collect();
            let mut new_heads: Vec<(usize, Vec<Value>)> = Vec::new();
            for ri in 0..self.rules.len() {
                let rule = &self.rules[ri];
                if rule.pos.is_empty() {
                    if round == 0 {
                        let plan = self.plan(rule, None, &[]);
                        self.instantiate(rule, &plan, &[], &mut out, &mut new_heads, opts)?;
                    }
                    continue;
                }
                if round == 0 {
                    continue;
                }
                for j in 0..rule.pos.len() {
                    let rj = rule.pos[j].rel;
                    if old_end[rj] == full_end[rj] {
                        continue;
                    }
                    let ranges: Vec<(usize, usize)> = rule
                        .pos
                        .iter()
                        .enumerate()
                        .map(|(i, a)| match i.cmp(&j) {
                            std::cmp::Ordering::Less => (0, old_end[a.rel]),
                            std::cmp::Ordering::Equal => (old_end[a.rel], full_end[a.rel]),
                            std::cmp::Ordering::Greater => (0, full_end[a.rel]),
                        })
                        .collect();
                    if ranges.iter().any(|(lo, hi)| lo == hi) {
                        continue;
                    }
                    let plan = self.plan(rule, Some(j), &ranges);
                    let masks: Vec<(usize, u64)> = plan
                        .steps
                        .iter()
                        .map(|s| (rule.pos[s.atom].rel, s.key_mask))
                        .collect();
                    for (rel, mask) in masks {
                        self.rels[rel].ensure_index(mask);
                    }
                    let rule = &self.rules[ri];
                    self.instantiate(rule, &plan, &ranges, &mut out, &mut new_heads, opts)?;
                }
            }
            old_end = full_end;
            let mut grew = false;
            for (rel, t) in new_heads {
                grew |= self.rels[rel].insert(t);
            }
            // Relations created lazily never change length, so this is stable.
            if !grew {
                break;
            }
            round += 1;
        }
        log::debug!(
            "grounding finished after {} rounds with {} rules",
            round + 1,
            out.rule_count()
        );
        Ok(out.build())
    }

    fn instantiate(
        &self,
        rule: &CRule,
        plan: &Plan,
        ranges: &[(usize, usize)],
        out: &mut GroundProgramBuilder,
        new_heads: &mut Vec<(usize, Vec<Value>)>,
        opts: &GroundOptions,
    ) -> Result<(), EngineError> {
        let mut binding: Vec<Option<Value>> = vec![None; rule.nvars];
        if !plan.pre_checks.iter().all(|&c| rule.cmps[c].eval(&binding).is_some()) {
            return Ok(());
        }
        let mut matched = vec![0u32; rule.pos.len()];
        let mut ctx = JoinCtx {
            g: self,
            rule,
            plan,
            ranges,
            out,
            new_heads,
            opts,
        };
        ctx.join(0, &mut binding, &mut matched)
    }
}

struct JoinCtx<'g, 'a, 'o> {
    g: &'g Grounder<'a>,
    rule: &'g CRule<'a>,
    plan: &'g Plan,
    ranges: &'g [(usize, usize)],
    out: &'o mut GroundProgramBuilder,
    new_heads: &'o mut Vec<(usize, Vec<Value>)>,
    opts: &'o GroundOptions,
}

impl JoinCtx<'_, '_, '_> {
    fn join(
        &mut self,
        k: usize,
        binding: &mut Vec<Option<Value>>,
        matched: &mut Vec<u32>,
    ) -> Result<(), EngineError> {
        if k == self.plan.steps.len() {
            return self.emit(binding, matched);
        }
        let step = &self.plan.steps[k];
        let atom = &self.rule.pos[step.atom];
        let rel = &self.g.rels[atom.rel];
        let (lo, hi) = self.ranges[step.atom];
        let mut key = Vec::with_capacity(step.key_terms.len());
        for &i in &step.key_terms {
            match atom.args[i].eval(binding) {
                Some(v) => key.push(v),
                None => return Ok(()),
            }
        }
        let candidates: Box<dyn Iterator<Item = u32>> = if step.key_mask == 0 {
            Box::new(lo as u32..hi as u32)
        } else {
            match rel.indexes[&step.key_mask].get(&key) {
                Some(ids) => {
                    let start = ids.partition_point(|&i| (i as usize) < lo);
                    Box::new(
                        ids[start..]
                            .iter()
                            .copied()
                            .take_while(move |&i| (i as usize) < hi),
                    )
                }
                None => return Ok(()),
            }
        };
        for id in candidates {
            let t = &rel.tuples[id as usize];
            let mut ok = true;
            for &(pos, var, first) in &step.binds {
                if first {
                    binding[var] = Some(t[pos].clone());
                } else if binding[var].as_ref() != Some(&t[pos]) {
                    ok = false;
                    break;
                }
            }
            if ok {
                ok = step
                    .checks
                    .iter()
                    .all(|&c| self.rule.cmps[c].eval(binding).is_some());
            }
            if ok {
                matched[step.atom] = id;
                self.join(k + 1, binding, matched)?;
            }
            for &(_, var, first) in &step.binds {
                if first {
                    binding[var] = None;
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, binding: &[Option<Value>], matched: &[u32]) -> Result<(), EngineError> {
        let rule = self.rule;
        for step in &self.plan.steps {
            let atom = &rule.pos[step.atom];
            let t = &self.g.rels[atom.rel].tuples[matched[step.atom] as usize];
            for &i in &step.deferred {
                if atom.args[i].eval(binding).as_ref() != Some(&t[i]) {
                    return Ok(());
                }
            }
        }
        let head = match &rule.head {
            Some(h) => match h.eval(binding) {
                Some(a) => Some(a),
                None => return Ok(()),
            },
            None => None,
        };
        let pos: Vec<GroundAtom> = rule
            .pos
            .iter()
            .enumerate()
            .map(|(i, a)| GroundAtom {
                predicate: a.pred.clone(),
                args: self.g.rels[a.rel].tuples[matched[i] as usize].clone(),
            })
            .collect();
        let mut neg = Vec::with_capacity(rule.neg.len());
        for a in &rule.neg {
            match a.eval(binding) {
                Some(g) => neg.push(g),
                None => return Ok(()),
            }
        }
        let mut cmps = Vec::with_capacity(rule.cmps.len());
        for c in &rule.cmps {
            match c.eval(binding) {
                Some((l, r)) => cmps.push(format!("{l}{}{r}", c.op.symbol())),
                None => return Ok(()),
            }
        }
        let head_tuple = head.as_ref().map(|h| (rule.head.as_ref().unwrap().rel, h.args.clone()));
        if self.out.add_rule(head, pos, neg, cmps) {
            if self.out.rule_count() > self.opts.max_ground_rules {
                return Err(EngineError::TooManyGroundRules {
                    rule: format_rule(rule.src),
                    limit: self.opts.max_ground_rules,
                });
            }
            if let Some(t) = head_tuple {
                self.new_heads.push(t);
            }
        }
        Ok(())
    }
}
