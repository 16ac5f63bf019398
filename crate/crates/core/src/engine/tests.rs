use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;

use super::*;
use crate::oracle::answer_sets_by_enumeration;
use crate::rulelang::{parse_program, Literal, Program, Term, Value};

fn atom(s: &str) -> GroundAtom {
    s.parse().unwrap()
}

fn interp(atoms: &[&str]) -> Interpretation {
    atoms.iter().map(|s| atom(s)).collect()
}

fn ground_src(src: &str) -> GroundProgram {
    ground(&parse_program(src).unwrap()).unwrap()
}

fn rule_strings(gp: &GroundProgram) -> BTreeSet<String> {
    gp.rules().iter().map(|r| gp.rule_to_string(r)).collect()
}

#[test]
fn ground_atom_text_round_trip() {
    let a = atom("pump_flow(condensate_pump_a,100,-3)");
    assert_eq!(a.to_string(), "pump_flow(condensate_pump_a,100,-3)");
    assert_eq!(a.time(), Some(-3));
    assert_eq!(atom("on").to_string(), "on");
    assert_eq!(serde_json::to_string(&a).unwrap(), "\"pump_flow(condensate_pump_a,100,-3)\"");
}

#[test]
fn atom_order_is_predicate_then_arguments() {
    let mut v = [atom("b(1)"), atom("a(z)"), atom("a(10)"), atom("a(2)")];
    v.sort();
    let s: Vec<String> = v.iter().map(|a| a.to_string()).collect();
    assert_eq!(s, vec!["a(2)", "a(10)", "a(z)", "b(1)"]);
}

#[test]
fn pump_trip_instantiation() {
    let gp = ground_src(
        "pump(p1). time(1). time(2).
         pump_flow(p1,100,0). pump_flow(p1,0,1). pump_flow(p1,0,2).
         it_happened(trip,P,T) :- pump(P), time(T), pump_flow(P,F,T-1), pump_flow(P,0,T), F>0.",
    );
    let rules: Vec<String> = gp
        .rules()
        .iter()
        .filter(|r| !r.is_fact())
        .map(|r| gp.rule_to_string(r))
        .collect();
    assert_eq!(
        rules,
        vec!["it_happened(trip,p1,1) :- pump(p1), pump_flow(p1,0,1), pump_flow(p1,100,0), time(1)."]
    );
    let r = gp.rules().iter().find(|r| !r.is_fact()).unwrap();
    assert_eq!(r.comparisons, vec!["100>0".to_string()]);
    let m = answer_sets(&gp, &SolveOptions::default()).unwrap();
    assert!(m[0].contains(&atom("it_happened(trip,p1,1)")));
}

#[test]
fn recursive_closure() {
    let gp = ground_src(
        "e(1,2). e(2,3). e(3,4). e(4,1).
         path(X,Y) :- e(X,Y).
         path(X,Z) :- path(X,Y), e(Y,Z).",
    );
    let m = stratified_model(&gp).unwrap().unwrap();
    assert_eq!(m.with_predicate("path").count(), 16);
}

#[test]
fn negated_atoms_join_the_universe() {
    let gp = ground_src("q(1). p(X) :- q(X), not r(X).");
    assert!(gp.contains(&atom("r(1)")));
    assert_eq!(nant(&gp), [atom("r(1)")].into_iter().collect());
    let m = answer_sets(&gp, &SolveOptions::default()).unwrap();
    assert_eq!(m, vec![interp(&["p(1)", "q(1)"])]);
}

#[test]
fn symbol_arithmetic_does_not_match() {
    let gp = ground_src("q(a). q(3). p(X) :- q(X), q(Y), Y = X+0.");
    let m = stratified_model(&gp).unwrap().unwrap();
    assert_eq!(m.with_predicate("p").count(), 1);
}

#[test]
fn mutually_dependent_arithmetic_positions() {
    let gp = ground_src("a(1,5). b(4,2). r(X,Y) :- a(X,Y+1), b(Y,X+1).");
    let m = stratified_model(&gp).unwrap().unwrap();
    assert!(m.contains(&atom("r(1,4)")));
}

#[test]
fn ground_rule_cap_names_the_rule() {
    let p = parse_program("n(1..50). pair(X,Y) :- n(X), n(Y).").unwrap();
    let err = ground_with(&p, &GroundOptions { max_ground_rules: 500 }).unwrap_err();
    match err {
        EngineError::TooManyGroundRules { rule, limit } => {
            assert_eq!(limit, 500);
            assert_eq!(rule, "pair(X,Y) :- n(X), n(Y).");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn duplicate_instances_are_merged() {
    let gp = ground_src("q(1). q(1). p :- q(X). p :- q(1).");
    assert_eq!(gp.rules().len(), 2);
}

#[test]
fn even_loop_has_two_answer_sets() {
    let gp = ground_src("a :- not b. b :- not a.");
    assert!(!is_stratified(&gp));
    let sets = answer_sets(&gp, &SolveOptions::default()).unwrap();
    assert_eq!(sets, vec![interp(&["a"]), interp(&["b"])]);
    let cc = cautious_consequences(&gp, &SolveOptions::default()).unwrap();
    assert!(cc.plus.is_empty() && cc.minus.is_empty() && !cc.no_answer_set);
    let limited = answer_sets(&gp, &SolveOptions { limit: 1, ..Default::default() }).unwrap();
    assert_eq!(limited, vec![interp(&["a"])]);

    let a = interp(&["a"]);
    let us = assumption_sets(&gp, &a, &SolveOptions::default()).unwrap();
    assert_eq!(us, vec![[atom("b")].into_iter().collect::<AssumptionSet>()]);
    validate_assumption_set(&gp, &a, &us[0], &SolveOptions::default()).unwrap();
    assert!(validate_assumption_set(&gp, &a, &AssumptionSet::default(), &SolveOptions::default())
        .is_err());
}

#[test]
fn odd_loop_has_no_answer_set() {
    let gp = ground_src("a :- not a. b.");
    assert!(answer_sets(&gp, &SolveOptions::default()).unwrap().is_empty());
    let cc = cautious_consequences(&gp, &SolveOptions::default()).unwrap();
    assert!(cc.no_answer_set);
    assert_eq!(cc.plus, gp.universe());
    assert_eq!(cc.minus, gp.universe());
}

#[test]
fn constraint_kills_the_model() {
    let gp = ground_src("a. :- a.");
    assert_eq!(stratified_model(&gp), Some(None));
    assert!(answer_sets(&gp, &SolveOptions::default()).unwrap().is_empty());
}

#[test]
fn stratified_program_has_empty_assumption_set() {
    let gp = ground_src("q. p :- q, not r.");
    let a = interp(&["p", "q"]);
    let us = assumption_sets(&gp, &a, &SolveOptions::default()).unwrap();
    assert_eq!(us, vec![AssumptionSet::default()]);
}

#[test]
fn non_answer_set_is_rejected() {
    let gp = ground_src("a :- not b. b :- not a.");
    assert_eq!(
        assumption_sets(&gp, &interp(&["a", "b"]), &SolveOptions::default()),
        Err(EngineError::NotAnAnswerSet)
    );
}

#[test]
fn least_model_requires_negation_free() {
    let gp = ground_src("a :- not b.");
    assert_eq!(least_model(&gp), Err(EngineError::NotNegationFree));
    let r = reduct(&gp, &Interpretation::new());
    assert_eq!(least_model(&r).unwrap(), interp(&["a"]));
    let r = reduct(&gp, &interp(&["b"]));
    assert!(r.rules().is_empty());
}

#[test]
fn nant_bound_is_enforced() {
    let src: String = (0..30).map(|i| format!("a{i} :- not b{i}. b{i} :- not a{i}.\n")).collect();
    let gp = ground_src(&src);
    assert!(matches!(
        answer_sets(&gp, &SolveOptions::default()),
        Err(EngineError::TooManyNegatedAtoms { count: 60, bound: 24 })
    ));
}

#[test]
fn interpretation_serialization() {
    let i = interp(&["b(2)", "a(x,1)"]);
    assert_eq!(i.to_text(), "a(x,1)\nb(2)\n");
    assert_eq!(Interpretation::from_text(&i.to_text()).unwrap(), i);
    assert_eq!(Interpretation::from_json(&i.to_json()).unwrap(), i);
    let v: serde_json::Value = serde_json::from_str(&i.to_json()).unwrap();
    assert_eq!(v["atoms"][0], "a(x,1)");
}

// --- oracles ----------------------------------------------------------------

/// Naive instantiation over rules whose positive atoms have only variable
/// arguments: re-join every rule against the full relations until
/// nothing new appears. Nested loops in body order, no indexes.
fn naive_join(p: &Program) -> BTreeSet<String> {
    let mut rels: HashMap<String, BTreeSet<Vec<Value>>> = HashMap::new();
    let mut out: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = (out.len(), rels.values().map(|s| s.len()).sum::<usize>());
        for r in &p.rules {
            let pos: Vec<_> = r.positive_body().collect();
            let mut stack: Vec<(usize, HashMap<String, Value>, Vec<GroundAtom>)> =
                vec![(0, HashMap::new(), Vec::new())];
            while let Some((k, env, body)) = stack.pop() {
                if k == pos.len() {
                    let look = |v: &crate::rulelang::Symbol| env.get(&**v).cloned();
                    let cmps_ok = r.comparisons().all(|c| match (c.lhs.eval(&look), c.rhs.eval(&look)) {
                        (Some(a), Some(b)) => c.op.holds(&a, &b),
                        _ => false,
                    });
                    if !cmps_ok {
                        continue;
                    }
                    let ev = |a: &crate::rulelang::Atom| -> Option<GroundAtom> {
                        Some(GroundAtom {
                            predicate: a.predicate.clone(),
                            args: a.args.iter().map(|t| t.eval(&look)).collect::<Option<_>>()?,
                        })
                    };
                    let head = match &r.head {
                        Some(h) => match ev(h) {
                            Some(g) => Some(g),
                            None => continue,
                        },
                        None => None,
                    };
                    let mut negs = Vec::new();
                    let mut ok = true;
                    for a in r.negative_body() {
                        match ev(a) {
                            Some(g) => negs.push(g),
                            None => ok = false,
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let mut pb = body.clone();
                    pb.sort();
                    pb.dedup();
                    negs.sort();
                    negs.dedup();
                    let mut all: Vec<String> = pb.iter().map(|a| a.to_string()).collect();
                    all.extend(negs.iter().map(|a| format!("not {a}")));
                    let mut s = head.as_ref().map(|h| h.to_string()).unwrap_or_default();
                    if !all.is_empty() {
                        if head.is_some() {
                            s.push(' ');
                        }
                        s.push_str(":- ");
                        s.push_str(&all.join(", "));
                    }
                    s.push('.');
                    out.insert(s);
                    if let Some(h) = head {
                        rels.entry(h.predicate.to_string()).or_default().insert(h.args);
                    }
                    continue;
                }
                let a = pos[k];
                let tuples: Vec<Vec<Value>> = rels
                    .get(&*a.predicate)
                    .map(|s| s.iter().cloned().collect())
                    .unwrap_or_default();
                'tuples: for t in tuples {
                    let mut env2 = env.clone();
                    for (term, v) in a.args.iter().zip(&t) {
                        if let Term::Var(x) = term {
                            match env2.get(&**x) {
                                Some(b) if b != v => continue 'tuples,
                                _ => {
                                    env2.insert(x.to_string(), v.clone());
                                }
                            }
                        }
                    }
                    let mut body2 = body.clone();
                    body2.push(GroundAtom {
                        predicate: a.predicate.clone(),
                        args: t.clone(),
                    });
                    stack.push((k + 1, env2, body2));
                }
            }
        }
        let after = (out.len(), rels.values().map(|s| s.len()).sum::<usize>());
        if after == before {
            break;
        }
    }
    out
}

/// Naive instantiation of an arbitrary program.
fn naive_ground(p: &Program) -> BTreeSet<String> {
    // Rewrite each non-variable argument `t` at position i of a positive
    // body atom into a fresh variable `Vi` plus the comparison `Vi = t`.
    let mut rules = Vec::new();
    for r in &p.rules {
        let mut fresh = 0;
        let mut extra = Vec::new();
        let body = r
            .body
            .iter()
            .map(|l| match l {
                Literal::Pos(a) => {
                    let args = a
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(_) => t.clone(),
                            _ => {
                                fresh += 1;
                                let v = Term::var(&format!("Fresh{fresh}"));
                                extra.push(Literal::Cmp(crate::rulelang::Comparison {
                                    lhs: v.clone(),
                                    op: crate::rulelang::CmpOp::Eq,
                                    rhs: t.clone(),
                                }));
                                v
                            }
                        })
                        .collect();
                    Literal::Pos(crate::rulelang::Atom {
                        predicate: a.predicate.clone(),
                        args,
                    })
                }
                other => other.clone(),
            })
            .collect::<Vec<_>>();
        let mut body = body;
        body.extend(extra);
        rules.push(crate::rulelang::Rule {
            head: r.head.clone(),
            body,
        });
    }
    naive_join(&Program::new(rules))
}

fn arb_prop_program(n_atoms: usize, allow_neg: bool) -> impl Strategy<Value = GroundProgram> {
    let rule = (
        prop::option::weighted(0.85, 0..n_atoms),
        prop::collection::btree_set(0..n_atoms, 0..3),
        prop::collection::btree_set(0..n_atoms, 0..if allow_neg { 3 } else { 1 }),
    );
    prop::collection::vec(rule, 1..8).prop_map(move |rules| {
        let name = |i: usize| GroundAtom::prop(&format!("a{i}"));
        let mut b = GroundProgramBuilder::new();
        for (h, p, n) in rules {
            b.add_rule(
                h.map(name),
                p.into_iter().map(name).collect(),
                n.into_iter().map(name).collect(),
                Vec::new(),
            );
        }
        b.build()
    })
}

/// Stratified by construction: a_i depends on a_j only for j <= i, and
/// negatively only for j < i.
fn arb_stratified_program() -> impl Strategy<Value = GroundProgram> {
    let rule = (1usize..6, prop::collection::btree_set(0usize..6, 0..3), prop::collection::btree_set(0usize..6, 0..3));
    prop::collection::vec(rule, 1..10).prop_map(|rules| {
        let name = |i: usize| GroundAtom::prop(&format!("a{i}"));
        let mut b = GroundProgramBuilder::new();
        b.fact(name(0));
        for (h, p, n) in rules {
            let neg: Vec<GroundAtom> = n.into_iter().filter(|&j| j < h).map(name).collect();
            let pos: Vec<GroundAtom> = p.into_iter().filter(|&j| j <= h).map(name).collect();
            b.add_rule(Some(name(h)), pos, neg, Vec::new());
        }
        b.build()
    })
}

fn arb_first_order() -> impl Strategy<Value = String> {
    let facts = prop::collection::vec((0i64..4, 0i64..4), 1..6);
    let rule = prop::sample::select(vec![
        "p(X) :- e(X,Y), Y>X.",
        "p(Y) :- e(X,Y), not q(X).",
        "q(T) :- p(T-1), e(T,Z).",
        "r(X,Z) :- e(X,Y), e(Y,Z).",
        "r(X,Y) :- r(X,Z), e(Z,Y), X!=Y.",
        "q(X) :- r(X,X).",
        "s(X) :- e(X,X+1).",
        "t(X,Y) :- p(X), p(Y), X<=Y, not r(X,Y).",
        ":- s(X), q(X).",
        "u(X+1) :- p(X), X<3.",
        "p(X) :- u(X), not t(X,X).",
    ]);
    (facts, prop::collection::vec(rule, 1..5)).prop_map(|(facts, rules)| {
        let mut s: String = facts.iter().map(|(a, b)| format!("e({a},{b}).\n")).collect();
        for r in rules {
            s.push_str(r);
            s.push('\n');
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn semi_naive_matches_naive_instantiation(src in arb_first_order()) {
        let p = parse_program(&src).unwrap();
        let gp = ground(&p).unwrap();
        prop_assert_eq!(rule_strings(&gp), naive_ground(&p));
    }

    #[test]
    fn answer_sets_match_brute_force(gp in arb_prop_program(6, true)) {
        let expect = answer_sets_by_enumeration(&gp);
        prop_assert_eq!(answer_sets(&gp, &SolveOptions::default()).unwrap(), expect.clone());
        for a in &expect {
            prop_assert!(is_answer_set(&gp, a));
        }
    }

    #[test]
    fn stratified_model_agrees_with_guess_and_check(gp in arb_stratified_program()) {
        prop_assert!(is_stratified(&gp));
        let direct = match stratified_model(&gp).unwrap() {
            Some(m) => vec![m],
            None => vec![],
        };
        prop_assert_eq!(direct, guess_and_check(&gp, &SolveOptions::default()).unwrap());
    }

    #[test]
    fn negation_free_least_model_is_the_answer_set(gp in arb_prop_program(6, false)) {
        let lm = least_model(&gp).unwrap();
        let brute = answer_sets_by_enumeration(&gp);
        let constraints_hold = !brute.is_empty();
        if constraints_hold {
            prop_assert_eq!(brute, vec![lm]);
        }
    }

    #[test]
    fn cautious_consequences_bound_every_answer_set(gp in arb_prop_program(6, true)) {
        let sets = answer_sets_by_enumeration(&gp);
        let cc = cautious_consequences(&gp, &SolveOptions::default()).unwrap();
        prop_assert_eq!(cc.no_answer_set, sets.is_empty());
        for s in &sets {
            prop_assert!(cc.plus.iter().all(|a| s.contains(a)));
            prop_assert!(cc.minus.iter().all(|a| !s.contains(a)));
        }
        prop_assert!(cc.no_answer_set || cc.plus.is_disjoint(&cc.minus));
    }

    #[test]
    fn assumption_sets_are_valid_and_minimal(gp in arb_prop_program(6, true)) {
        let opts = SolveOptions::default();
        for a in answer_sets_by_enumeration(&gp) {
            let us = assumption_sets(&gp, &a, &opts).unwrap();
            for u in &us {
                prop_assert!(validate_assumption_set(&gp, &a, u, &opts).is_ok());
                for x in u.iter() {
                    let mut smaller = u.0.clone();
                    smaller.remove(x);
                    let smaller = AssumptionSet(smaller);
                    prop_assert!(validate_assumption_set(&gp, &a, &smaller, &opts).is_err());
                }
            }
            let mut sorted = us.clone();
            sorted.sort();
            prop_assert_eq!(sorted, us);
        }
    }

    #[test]
    fn interpretation_text_round_trip(atoms in prop::collection::btree_set((0i64..5, "[a-c]{1,2}"), 0..8)) {
        let i: Interpretation = atoms
            .into_iter()
            .map(|(n, s)| GroundAtom::new("f", vec![Value::Int(n - 2), Value::sym(&s)]))
            .collect();
        prop_assert_eq!(Interpretation::from_text(&i.to_text()).unwrap(), i.clone());
        prop_assert_eq!(Interpretation::from_json(&i.to_json()).unwrap(), i);
    }
}
