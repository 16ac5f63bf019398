//! Reference implementations by exhaustive enumeration. Exponential in the
//! program size; meant for cross-checking the engine and the explanation
//! generator on small programs.

use std::collections::BTreeSet;

use crate::engine::{AssumptionSet, GroundAtom, GroundProgram, Interpretation};
use crate::explain::{validate_graph, Edge, ExplanationGraph, Label, Node};

/// Answer sets by definition: every subset of the universe, checked against
/// a naive least-model fixpoint of its reduct. Panics above 24 atoms.
pub fn answer_sets_by_enumeration(gp: &GroundProgram) -> Vec<Interpretation> {
    let n = gp.universe_size();
    assert!(n <= 24, "enumeration over {n} atoms is out of reach");
    let mut out = Vec::new();
    for bits in 0u64..(1 << n) {
        let s: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
        let mut m = vec![false; n];
        loop {
            let mut changed = false;
            for r in gp.rules() {
                if r.neg.iter().any(|&a| s[a as usize]) {
                    continue;
                }
                if let Some(h) = r.head {
                    if !m[h as usize] && r.pos.iter().all(|&a| m[a as usize]) {
                        m[h as usize] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let constraint_ok = gp.rules().iter().all(|r| {
            r.head.is_some()
                || !(r.pos.iter().all(|&a| s[a as usize]) && r.neg.iter().all(|&a| !s[a as usize]))
        });
        if m == s && constraint_ok {
            out.push(gp.interpretation_of(&s));
        }
    }
    out.sort();
    out
}

/// Every graph with at most `k` edges that passes the validator. Candidate
/// edges respect the node typing and only reach atoms occurring in rules
/// for the node's own atom:
///
/// - true atom: `+` to true atoms and ⊤, `-` to false atoms;
/// - negative atom: `-` to true atoms, `+` to false atoms and ⊥, `∘` to
///   assume.
pub fn graphs_by_enumeration(
    gp: &GroundProgram,
    a: &Interpretation,
    u: &AssumptionSet,
    root: Node,
    k: usize,
) -> BTreeSet<ExplanationGraph> {
    fn candidates(gp: &GroundProgram, a: &Interpretation, n: &Node) -> Vec<(Node, Label)> {
        let Some(x) = n.atom() else { return vec![] };
        let id = gp.id_of(x).expect("graph atoms belong to the program");
        let mut related: BTreeSet<GroundAtom> = BTreeSet::new();
        for &ri in gp.rules_with_head(id) {
            let r = &gp.rules()[ri];
            related.extend(r.pos.iter().chain(&r.neg).map(|&i| gp.atom(i).clone()));
        }
        let typed = |b: GroundAtom| {
            if a.contains(&b) {
                Node::Atom(b)
            } else {
                Node::NotAtom(b)
            }
        };
        let mut out: Vec<(Node, Label)> = Vec::new();
        match n {
            Node::Atom(_) => {
                for b in related {
                    let t = typed(b);
                    let l = if t.is_negative() { Label::Minus } else { Label::Plus };
                    out.push((t, l));
                }
                out.push((Node::Top, Label::Plus));
            }
            _ => {
                for b in related {
                    let t = typed(b);
                    let l = if t.is_negative() { Label::Plus } else { Label::Minus };
                    out.push((t, l));
                }
                out.push((Node::Bottom, Label::Plus));
                out.push((Node::Assume, Label::Circ));
            }
        }
        out
    }

    fn rec(
        gp: &GroundProgram,
        a: &Interpretation,
        u: &AssumptionSet,
        g: &mut ExplanationGraph,
        pending: &mut BTreeSet<Node>,
        budget: usize,
        out: &mut BTreeSet<ExplanationGraph>,
    ) {
        let Some(n) = pending.pop_first() else {
            if validate_graph(g, gp, a, u).is_ok() {
                out.insert(g.clone());
            }
            return;
        };
        let c = candidates(gp, a, &n);
        for mask in 0u32..(1 << c.len()) {
            let size = mask.count_ones() as usize;
            if size > budget {
                continue;
            }
            let chosen: Vec<&(Node, Label)> =
                (0..c.len()).filter(|i| mask & (1 << i) != 0).map(|i| &c[i]).collect();
            let added: Vec<Node> = chosen
                .iter()
                .map(|(t, _)| t.clone())
                .filter(|t| !g.nodes.contains(t))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for (t, l) in &chosen {
                g.add_edge(n.clone(), t.clone(), *l);
            }
            for t in &added {
                if !t.is_sink() {
                    pending.insert(t.clone());
                }
            }
            rec(gp, a, u, g, pending, budget - size, out);
            for (t, l) in &chosen {
                g.edges.remove(&Edge::new(n.clone(), t.clone(), *l));
            }
            for t in &added {
                g.nodes.remove(t);
                pending.remove(t);
            }
        }
        pending.insert(n);
    }

    let mut out = BTreeSet::new();
    let mut g = ExplanationGraph::new(root.clone());
    let mut pending: BTreeSet<Node> = [root].into_iter().collect();
    rec(gp, a, u, &mut g, &mut pending, k, &mut out);
    out
}
