use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use super::graph::{Edge, ExplanationGraph, Label, Node};
use super::Explainer;
use crate::engine::{AtomId, GroundAtom};

/// One violated condition of the explanation-graph definition.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("root {0} must be the atom if it is true and its negation otherwise")]
    Root(Node),
    #[error("node {0} does not agree with the answer set or is not in the program")]
    NodeTruth(Node),
    #[error("node {0} is not reachable from the root")]
    Unreachable(Node),
    #[error("no edge may leave a sink: {0}")]
    SinkOutEdge(Edge),
    #[error("fact must link to ⊤ with + and nothing else: {0}")]
    FactEdge(GroundAtom),
    #[error("only facts may link to ⊤: {0}")]
    NonFactToTop(GroundAtom),
    #[error("edge {0} is not allowed: {1}")]
    BadEdge(Edge, &'static str),
    #[error("no rule with head {0} has exactly the body given by its out-edges")]
    NoMatchingRule(GroundAtom),
    #[error("comparison {0} must link to ⊤ with + and nothing else")]
    ComparisonEdge(String),
    #[error("assumed atom ~{0} must link to assume with ∘ and nothing else")]
    AssumeEdge(GroundAtom),
    #[error("~{0} has no rule and must link to ⊥ with + and nothing else")]
    BottomEdge(GroundAtom),
    #[error("~{atom} leaves the rule `{rule}` unrefuted")]
    Unrefuted { atom: GroundAtom, rule: String },
    #[error("the refutation of ~{0} is not minimal")]
    NonMinimalRefutation(GroundAtom),
    #[error("positive node {0} lies on a cycle")]
    PositiveCycle(Node),
    #[error("a cycle containing {0} passes through a node that is not negative")]
    MixedCycle(Node),
}

impl Explainer<'_> {
    /// Checks every condition of the definition and returns all violations.
    pub fn validate(&self, g: &ExplanationGraph) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let truth_ok = |n: &Node| match n {
            Node::Atom(a) => self.id(a).is_some_and(|i| self.truth[i as usize]),
            Node::NotAtom(a) => self.id(a).is_some_and(|i| !self.truth[i as usize]),
            _ => true,
        };
        if !matches!(g.root, Node::Atom(_) | Node::NotAtom(_)) || !truth_ok(&g.root) {
            v.push(Violation::Root(g.root.clone()));
        }
        for n in &g.nodes {
            if !truth_ok(n) && n != &g.root {
                v.push(Violation::NodeTruth(n.clone()));
            }
        }

        let mut out: BTreeMap<&Node, Vec<&Edge>> = BTreeMap::new();
        for e in &g.edges {
            out.entry(&e.from).or_default().push(e);
        }
        let mut seen: BTreeSet<&Node> = BTreeSet::new();
        let mut stack = vec![&g.root];
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                for e in out.get(n).into_iter().flatten() {
                    stack.push(&e.to);
                }
            }
        }
        for n in &g.nodes {
            if !seen.contains(n) {
                v.push(Violation::Unreachable(n.clone()));
            }
        }

        for n in &g.nodes {
            let edges: &[&Edge] = out.get(n).map(Vec::as_slice).unwrap_or(&[]);
            match n {
                Node::Top | Node::Bottom | Node::Assume => {
                    v.extend(edges.iter().map(|e| Violation::SinkOutEdge((*e).clone())));
                }
                Node::Comparison(c) => {
                    if !only_edge(edges, &Node::Top, Label::Plus) {
                        v.push(Violation::ComparisonEdge(c.clone()));
                    }
                }
                Node::Atom(a) => self.check_true(a, edges, &mut v),
                Node::NotAtom(a) => self.check_false(a, edges, &mut v),
            }
        }

        self.check_cycles(g, &mut v);
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    fn check_true(&self, a: &GroundAtom, edges: &[&Edge], v: &mut Vec<Violation>) {
        let Some(id) = self.id(a) else { return };
        if self.gp.is_fact(id) {
            if !only_edge(edges, &Node::Top, Label::Plus) {
                v.push(Violation::FactEdge(a.clone()));
            }
            return;
        }
        let mut pos: Vec<AtomId> = Vec::new();
        let mut neg: Vec<AtomId> = Vec::new();
        let mut cmps: BTreeSet<&str> = BTreeSet::new();
        let mut ok = true;
        for e in edges {
            match (&e.to, e.label) {
                (Node::Top, _) => {
                    v.push(Violation::NonFactToTop(a.clone()));
                    ok = false;
                }
                (Node::Atom(b), Label::Plus) => pos.extend(self.id(b)),
                (Node::NotAtom(b), Label::Minus) => neg.extend(self.id(b)),
                (Node::Comparison(c), Label::Plus) => {
                    cmps.insert(c);
                }
                (Node::Atom(_), _) => {
                    v.push(Violation::BadEdge((*e).clone(), "a true atom links to a true atom only with +"));
                    ok = false;
                }
                (Node::NotAtom(_), _) => {
                    v.push(Violation::BadEdge((*e).clone(), "a true atom links to a negative node only with -"));
                    ok = false;
                }
                _ => {
                    v.push(Violation::BadEdge((*e).clone(), "a true atom is supported by a rule body"));
                    ok = false;
                }
            }
        }
        if !ok {
            return;
        }
        pos.sort_unstable();
        neg.sort_unstable();
        let matches = self.gp.rules_with_head(id).iter().any(|&ri| {
            let r = &self.gp.rules()[ri];
            r.pos == pos
                && r.neg == neg
                && r.comparisons.iter().map(String::as_str).collect::<BTreeSet<_>>() == cmps
        });
        if !matches {
            v.push(Violation::NoMatchingRule(a.clone()));
        }
    }

    fn check_false(&self, a: &GroundAtom, edges: &[&Edge], v: &mut Vec<Violation>) {
        let Some(id) = self.id(a) else { return };
        if self.assumed[id as usize] {
            if !only_edge(edges, &Node::Assume, Label::Circ) {
                v.push(Violation::AssumeEdge(a.clone()));
            }
            return;
        }
        let rules = self.gp.rules_with_head(id);
        if rules.is_empty() {
            if !only_edge(edges, &Node::Bottom, Label::Plus) {
                v.push(Violation::BottomEdge(a.clone()));
            }
            return;
        }
        // X⁺: true atoms reached with -, X⁻: false atoms reached with +.
        let mut x_plus: BTreeSet<AtomId> = BTreeSet::new();
        let mut x_minus: BTreeSet<AtomId> = BTreeSet::new();
        for e in edges {
            match (&e.to, e.label) {
                (Node::Atom(b), Label::Minus) => x_plus.extend(self.id(b)),
                (Node::NotAtom(b), Label::Plus) => x_minus.extend(self.id(b)),
                (Node::Bottom, _) => v.push(Violation::BadEdge(
                    (*e).clone(),
                    "only atoms without rules link to ⊥",
                )),
                (Node::Assume, _) => v.push(Violation::BadEdge(
                    (*e).clone(),
                    "only assumed atoms link to assume",
                )),
                (Node::Atom(_), _) => v.push(Violation::BadEdge(
                    (*e).clone(),
                    "a negative node links to a true atom only with -",
                )),
                (Node::NotAtom(_), _) => v.push(Violation::BadEdge(
                    (*e).clone(),
                    "a negative node links to a negative node only with +",
                )),
                _ => v.push(Violation::BadEdge(
                    (*e).clone(),
                    "a negative node is supported by refuting atoms",
                )),
            }
        }
        let refuted = |ri: usize, xp: &BTreeSet<AtomId>, xm: &BTreeSet<AtomId>| {
            let r = &self.gp.rules()[ri];
            r.pos.iter().any(|p| xm.contains(p)) || r.neg.iter().any(|n| xp.contains(n))
        };
        let mut all = true;
        for &ri in rules {
            if !refuted(ri, &x_plus, &x_minus) {
                all = false;
                v.push(Violation::Unrefuted {
                    atom: a.clone(),
                    rule: self.gp.rule_to_string(&self.gp.rules()[ri]),
                });
            }
        }
        if !all {
            return;
        }
        let redundant_plus = x_plus.iter().any(|&b| {
            let mut xp = x_plus.clone();
            xp.remove(&b);
            rules.iter().all(|&ri| refuted(ri, &xp, &x_minus))
        });
        let redundant_minus = x_minus.iter().any(|&b| {
            let mut xm = x_minus.clone();
            xm.remove(&b);
            rules.iter().all(|&ri| refuted(ri, &x_plus, &xm))
        });
        if redundant_plus || redundant_minus {
            v.push(Violation::NonMinimalRefutation(a.clone()));
        }
    }

    pub(super) fn check_cycles(&self, g: &ExplanationGraph, v: &mut Vec<Violation>) {
        let nodes: Vec<&Node> = g.nodes.iter().collect();
        let index: BTreeMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut dg: DiGraph<(), ()> = DiGraph::new();
        for _ in &nodes {
            dg.add_node(());
        }
        let mut self_loop = vec![false; nodes.len()];
        for e in &g.edges {
            let (Some(&f), Some(&t)) = (index.get(&e.from), index.get(&e.to)) else {
                continue;
            };
            if f == t {
                self_loop[f] = true;
            }
            dg.add_edge(NodeIndex::new(f), NodeIndex::new(t), ());
        }
        let mut sccs = tarjan_scc(&dg);
        sccs.sort();
        for scc in sccs {
            if scc.len() == 1 && !self_loop[scc[0].index()] {
                continue;
            }
            let mut members: Vec<&Node> = scc.iter().map(|i| nodes[i.index()]).collect();
            members.sort();
            let mixed = members.iter().any(|n| !n.is_negative());
            for n in members {
                if n.is_negative() {
                    if mixed {
                        v.push(Violation::MixedCycle(n.clone()));
                    }
                } else {
                    v.push(Violation::PositiveCycle(n.clone()));
                }
            }
        }
    }
}

fn only_edge(edges: &[&Edge], to: &Node, label: Label) -> bool {
    edges.len() == 1 && &edges[0].to == to && edges[0].label == label
}
