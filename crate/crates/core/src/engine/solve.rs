use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::program::{AtomId, GroundAtom, GroundProgram, GroundProgramBuilder, Interpretation};
use super::EngineError;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Stop after this many answer sets (they are still returned in canonical
    /// order among those found).
    pub limit: usize,
    /// Largest number of atoms under negation that guess-and-check accepts.
    pub nant_bound: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limit: usize::MAX,
            nant_bound: 24,
        }
    }
}

/// Π^I: drops every rule whose negative body meets `i` and strips the
/// negative bodies of the rest.
pub fn reduct(gp: &GroundProgram, i: &Interpretation) -> GroundProgram {
    let mut b = GroundProgramBuilder::new();
    for r in gp.rules() {
        if r.neg.iter().any(|&a| i.contains(gp.atom(a))) {
            continue;
        }
        b.push_ids(gp, r, false);
    }
    b.build()
}

/// Least model of a negation-free program. Constraints are ignored.
pub fn least_model(gp: &GroundProgram) -> Result<Interpretation, EngineError> {
    if !gp.is_negation_free() {
        return Err(EngineError::NotNegationFree);
    }
    let all = vec![false; gp.universe_size()];
    Ok(gp.interpretation_of(&reduct_least_model(gp, &all)))
}

/// Least model of Π^I computed directly on atom ids, where `i` is the truth
/// mask of I.
pub(crate) fn reduct_least_model(gp: &GroundProgram, i: &[bool]) -> Vec<bool> {
    let n = gp.universe_size();
    let rules = gp.rules();
    let mut truth = vec![false; n];
    let mut missing: Vec<usize> = vec![0; rules.len()];
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut queue: Vec<AtomId> = Vec::new();
    for (ri, r) in rules.iter().enumerate() {
        let Some(h) = r.head else { continue };
        if r.neg.iter().any(|&a| i[a as usize]) {
            continue;
        }
        missing[ri] = r.pos.len();
        for &a in &r.pos {
            watch[a as usize].push(ri);
        }
        if r.pos.is_empty() && !truth[h as usize] {
            truth[h as usize] = true;
            queue.push(h);
        }
    }
    while let Some(a) = queue.pop() {
        for &ri in &watch[a as usize] {
            missing[ri] -= 1;
            if missing[ri] == 0 {
                let h = rules[ri].head.expect("watched rules have heads") as usize;
                if !truth[h] {
                    truth[h] = true;
                    queue.push(h as AtomId);
                }
            }
        }
    }
    truth
}

fn violates_constraint(gp: &GroundProgram, truth: &[bool]) -> bool {
    gp.rules().iter().any(|r| {
        r.head.is_none()
            && r.pos.iter().all(|&a| truth[a as usize])
            && r.neg.iter().all(|&a| !truth[a as usize])
    })
}

/// I is an answer set iff it equals the least model of Π^I and satisfies
/// every constraint.
pub fn is_answer_set(gp: &GroundProgram, i: &Interpretation) -> bool {
    if i.iter().any(|a| !gp.contains(a)) {
        return false;
    }
    let mask = gp.mask_of(i);
    let lm = reduct_least_model(gp, &mask);
    lm == mask && !violates_constraint(gp, &lm)
}

/// Atoms occurring under default negation in some rule.
pub fn nant(gp: &GroundProgram) -> BTreeSet<GroundAtom> {
    nant_ids(gp).into_iter().map(|a| gp.atom(a).clone()).collect()
}

pub(crate) fn nant_ids(gp: &GroundProgram) -> Vec<AtomId> {
    let mut seen = vec![false; gp.universe_size()];
    for r in gp.rules() {
        for &a in &r.neg {
            seen[a as usize] = true;
        }
    }
    let mut ids: Vec<AtomId> = (0..gp.universe_size() as AtomId)
        .filter(|&a| seen[a as usize])
        .collect();
    ids.sort_by(|&a, &b| gp.atom(a).cmp(gp.atom(b)));
    ids
}

/// Atom-level dependency graph: an edge from each head to each body atom,
/// labelled negative when the body occurrence is negated.
fn dependency_sccs(gp: &GroundProgram) -> (Vec<Vec<NodeIndex>>, DiGraph<(), bool>) {
    let mut g: DiGraph<(), bool> = DiGraph::with_capacity(gp.universe_size(), 0);
    for _ in 0..gp.universe_size() {
        g.add_node(());
    }
    for r in gp.rules() {
        let Some(h) = r.head else { continue };
        for &a in &r.pos {
            g.add_edge(NodeIndex::new(h as usize), NodeIndex::new(a as usize), false);
        }
        for &a in &r.neg {
            g.add_edge(NodeIndex::new(h as usize), NodeIndex::new(a as usize), true);
        }
    }
    (tarjan_scc(&g), g)
}

/// No atom depends negatively on an atom of its own strongly connected
/// component.
pub fn is_stratified(gp: &GroundProgram) -> bool {
    let (sccs, _) = dependency_sccs(gp);
    let comp = component_index(gp, &sccs);
    gp.rules().iter().all(|r| match r.head {
        Some(h) => r.neg.iter().all(|&a| comp[a as usize] != comp[h as usize]),
        None => true,
    })
}

fn component_index(gp: &GroundProgram, sccs: &[Vec<NodeIndex>]) -> Vec<usize> {
    let mut comp = vec![0usize; gp.universe_size()];
    for (ci, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = ci;
        }
    }
    comp
}

/// The perfect model of a stratified program, or `None` when the program is
/// not stratified. A violated constraint yields `Some(None)`.
pub fn stratified_model(gp: &GroundProgram) -> Option<Option<Interpretation>> {
    let (sccs, _) = dependency_sccs(gp);
    let comp = component_index(gp, &sccs);
    let mut by_comp: Vec<Vec<usize>> = vec![Vec::new(); sccs.len()];
    for (ri, r) in gp.rules().iter().enumerate() {
        if let Some(h) = r.head {
            let c = comp[h as usize];
            if r.neg.iter().any(|&a| comp[a as usize] == c) {
                return None;
            }
            by_comp[c].push(ri);
        }
    }
    let mut truth = vec![false; gp.universe_size()];
    // tarjan_scc emits components in reverse topological order: every
    // component a rule body depends on is finished before its head's.
    for rules in &by_comp {
        loop {
            let mut changed = false;
            for &ri in rules {
                let r = &gp.rules()[ri];
                let h = r.head.expect("grouped by head") as usize;
                if !truth[h]
                    && r.pos.iter().all(|&a| truth[a as usize])
                    && r.neg.iter().all(|&a| !truth[a as usize])
                {
                    truth[h] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    if violates_constraint(gp, &truth) {
        Some(None)
    } else {
        Some(Some(gp.interpretation_of(&truth)))
    }
}

/// Enumerates answer sets by guessing the truth of every atom under negation
/// and checking the guess against the least model of the reduct.
pub fn guess_and_check(
    gp: &GroundProgram,
    opts: &SolveOptions,
) -> Result<Vec<Interpretation>, EngineError> {
    let nant = nant_ids(gp);
    if nant.len() > opts.nant_bound {
        return Err(EngineError::TooManyNegatedAtoms {
            count: nant.len(),
            bound: opts.nant_bound,
        });
    }
    let mut found = Vec::new();
    let mut guess = vec![false; gp.universe_size()];
    for bits in 0u64..(1u64 << nant.len()) {
        for (k, &a) in nant.iter().enumerate() {
            guess[a as usize] = bits & (1 << k) != 0;
        }
        let lm = reduct_least_model(gp, &guess);
        if nant.iter().all(|&a| lm[a as usize] == guess[a as usize])
            && !violates_constraint(gp, &lm)
        {
            found.push(gp.interpretation_of(&lm));
        }
    }
    found.sort();
    found.truncate(opts.limit);
    Ok(found)
}

/// All answer sets in canonical order, up to `opts.limit`. Stratified
/// programs are solved directly; others fall back to guess-and-check.
pub fn answer_sets(
    gp: &GroundProgram,
    opts: &SolveOptions,
) -> Result<Vec<Interpretation>, EngineError> {
    match stratified_model(gp) {
        Some(Some(m)) if opts.limit > 0 => Ok(vec![m]),
        Some(_) => Ok(Vec::new()),
        None => guess_and_check(gp, opts),
    }
}
