//! Depth-first enumeration of explanation graphs.
//!
//! Every node in a graph carries exactly one support: the ⊤ edge of a fact,
//! the body of one applicable rule, the ∘ edge of an assumption, the ⊥ edge of
//! an atom without rules, or a subset-minimal set of atoms refuting every
//! rule of a false atom. The search fixes supports node by node and checks
//! the cycle conditions once no node is left open.

use std::collections::{BTreeSet, HashMap};

use super::graph::{ExplanationGraph, Label, Node};
use super::{Explainer, Explanation};
use crate::engine::AtomId;

/// Upper bound on complete graphs collected before the result is marked
/// truncated, as a multiple of the requested count.
const COLLECT_FACTOR: usize = 8;
const MIN_COLLECT: usize = 256;
/// Upper bound on search steps (support choices tried) per atom.
const MAX_STEPS: usize = 2_000_000;

type Support = Vec<(Node, Label)>;

pub(super) struct Search<'e, 'a> {
    ex: &'e Explainer<'a>,
    cap: usize,
    steps: usize,
    exhausted: bool,
    found: BTreeSet<ExplanationGraph>,
    options: HashMap<Node, Vec<Support>>,
}

impl<'e, 'a> Search<'e, 'a> {
    pub(super) fn run(ex: &'e Explainer<'a>, root: Node, max_graphs: usize) -> Explanation {
        let mut s = Search {
            ex,
            cap: (max_graphs.saturating_mul(COLLECT_FACTOR)).max(MIN_COLLECT),
            steps: 0,
            exhausted: false,
            found: BTreeSet::new(),
            options: HashMap::new(),
        };
        let mut g = ExplanationGraph::new(root.clone());
        let mut pending = BTreeSet::new();
        pending.insert(root.clone());
        s.dfs(&mut g, &mut pending);
        let total = s.found.len();
        let graphs: Vec<ExplanationGraph> = s.found.into_iter().take(max_graphs).collect();
        Explanation {
            root,
            truncated: s.exhausted || total > max_graphs,
            graphs,
        }
    }

    fn dfs(&mut self, g: &mut ExplanationGraph, pending: &mut BTreeSet<Node>) {
        if self.exhausted {
            return;
        }
        let Some(n) = pending.pop_first() else {
            if self.cycles_admissible(g) {
                self.found.insert(g.clone());
                if self.found.len() >= self.cap {
                    self.exhausted = true;
                }
            }
            return;
        };
        let opts = self.options_for(&n);
        for support in opts {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                self.exhausted = true;
                break;
            }
            if !n.is_negative() && support.iter().any(|(t, _)| self.reaches(g, t, &n)) {
                continue;
            }
            let mut added = Vec::new();
            for (t, _) in &support {
                if !g.nodes.contains(t) {
                    added.push(t.clone());
                }
            }
            for (t, l) in &support {
                g.add_edge(n.clone(), t.clone(), *l);
            }
            for t in &added {
                if !t.is_sink() {
                    pending.insert(t.clone());
                }
            }
            self.dfs(g, pending);
            for (t, l) in &support {
                g.edges.remove(&super::graph::Edge::new(n.clone(), t.clone(), *l));
            }
            for t in &added {
                g.nodes.remove(t);
                pending.remove(t);
            }
            if self.exhausted {
                break;
            }
        }
        pending.insert(n);
    }

    /// Whether `to` is reachable from `from` over the current edges.
    fn reaches(&self, g: &ExplanationGraph, from: &Node, to: &Node) -> bool {
        if !g.nodes.contains(from) {
            return false;
        }
        let mut seen: BTreeSet<&Node> = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if seen.insert(x) {
                stack.extend(g.out_edges(x).map(|e| &e.to));
            }
        }
        false
    }

    fn cycles_admissible(&self, g: &ExplanationGraph) -> bool {
        let mut v = Vec::new();
        self.ex.check_cycles(g, &mut v);
        v.is_empty()
    }

    fn options_for(&mut self, n: &Node) -> Vec<Support> {
        if let Some(o) = self.options.get(n) {
            return o.clone();
        }
        let o = self.compute_options(n);
        self.options.insert(n.clone(), o.clone());
        o
    }

    fn compute_options(&self, n: &Node) -> Vec<Support> {
        let ex = self.ex;
        let node_of = |id: AtomId| {
            let a = ex.gp.atom(id).clone();
            if ex.truth[id as usize] {
                Node::Atom(a)
            } else {
                Node::NotAtom(a)
            }
        };
        match n {
            Node::Comparison(_) => vec![vec![(Node::Top, Label::Plus)]],
            Node::Atom(a) => {
                let id = ex.id(a).expect("graph atoms come from the program");
                if ex.gp.is_fact(id) {
                    return vec![vec![(Node::Top, Label::Plus)]];
                }
                let mut out = Vec::new();
                for &ri in ex.gp.rules_with_head(id) {
                    let r = &ex.gp.rules()[ri];
                    let applicable = r.pos.iter().all(|&p| ex.truth[p as usize])
                        && r.neg.iter().all(|&q| !ex.truth[q as usize]);
                    if !applicable {
                        continue;
                    }
                    let mut s: Support = Vec::new();
                    s.extend(r.pos.iter().map(|&p| (node_of(p), Label::Plus)));
                    s.extend(r.neg.iter().map(|&q| (node_of(q), Label::Minus)));
                    s.extend(
                        r.comparisons
                            .iter()
                            .map(|c| (Node::Comparison(c.clone()), Label::Plus)),
                    );
                    s.sort();
                    s.dedup();
                    out.push(s);
                }
                out.sort();
                out.dedup();
                out
            }
            Node::NotAtom(a) => {
                let id = ex.id(a).expect("graph atoms come from the program");
                if ex.assumed[id as usize] {
                    return vec![vec![(Node::Assume, Label::Circ)]];
                }
                let rules = ex.gp.rules_with_head(id);
                if rules.is_empty() {
                    return vec![vec![(Node::Bottom, Label::Plus)]];
                }
                // Refuters of a rule: a false positive-body atom (linked with
                // +) or a true negative-body atom (linked with -).
                let families: Vec<Vec<(Node, Label)>> = rules
                    .iter()
                    .map(|&ri| {
                        let r = &ex.gp.rules()[ri];
                        let mut f: Vec<(Node, Label)> = r
                            .pos
                            .iter()
                            .filter(|&&p| !ex.truth[p as usize])
                            .map(|&p| (node_of(p), Label::Plus))
                            .collect();
                        f.extend(
                            r.neg
                                .iter()
                                .filter(|&&q| ex.truth[q as usize])
                                .map(|&q| (node_of(q), Label::Minus)),
                        );
                        f
                    })
                    .collect();
                minimal_hitting_sets(&families)
            }
            Node::Top | Node::Bottom | Node::Assume => vec![Vec::new()],
        }
    }
}

/// All subset-minimal sets meeting every family, each sorted, in canonical
/// order. An empty family makes the result empty.
pub(super) fn minimal_hitting_sets<T: Ord + Clone>(families: &[Vec<T>]) -> Vec<Vec<T>> {
    fn go<T: Ord + Clone>(
        families: &[Vec<T>],
        chosen: &mut BTreeSet<T>,
        out: &mut BTreeSet<Vec<T>>,
    ) {
        match families.iter().find(|f| !f.iter().any(|x| chosen.contains(x))) {
            None => {
                let minimal = chosen.iter().all(|x| {
                    families
                        .iter()
                        .any(|f| f.contains(x) && f.iter().filter(|y| chosen.contains(y)).count() == 1)
                });
                if minimal {
                    out.insert(chosen.iter().cloned().collect());
                }
            }
            Some(f) => {
                for x in f {
                    chosen.insert(x.clone());
                    go(families, chosen, out);
                    chosen.remove(x);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(families, &mut BTreeSet::new(), &mut out);
    out.into_iter().collect()
}
