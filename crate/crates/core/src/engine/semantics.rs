use std::collections::BTreeSet;

use super::program::{GroundAtom, GroundProgram, Interpretation};
use super::solve::{answer_sets, is_answer_set, nant, SolveOptions};
use super::EngineError;

/// C⁺ and C⁻: atoms true in every answer set and atoms false in every answer
/// set. Without any answer set both are the whole universe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CautiousConsequences {
    pub plus: BTreeSet<GroundAtom>,
    pub minus: BTreeSet<GroundAtom>,
    pub no_answer_set: bool,
}

impl CautiousConsequences {
    pub fn contains(&self, a: &GroundAtom) -> bool {
        self.plus.contains(a) || self.minus.contains(a)
    }
}

pub fn cautious_consequences(
    gp: &GroundProgram,
    opts: &SolveOptions,
) -> Result<CautiousConsequences, EngineError> {
    let sets = answer_sets(
        gp,
        &SolveOptions {
            limit: usize::MAX,
            ..opts.clone()
        },
    )?;
    Ok(cautious_from(gp, &sets))
}

fn cautious_from(gp: &GroundProgram, sets: &[Interpretation]) -> CautiousConsequences {
    if sets.is_empty() {
        return CautiousConsequences {
            plus: gp.universe(),
            minus: gp.universe(),
            no_answer_set: true,
        };
    }
    let plus = gp
        .atoms()
        .iter()
        .filter(|a| sets.iter().all(|s| s.contains(a)))
        .cloned()
        .collect();
    let minus = gp
        .atoms()
        .iter()
        .filter(|a| sets.iter().all(|s| !s.contains(a)))
        .cloned()
        .collect();
    CautiousConsequences {
        plus,
        minus,
        no_answer_set: false,
    }
}

/// A set of atoms that, assumed false, makes a chosen answer set the unique
/// one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AssumptionSet(pub BTreeSet<GroundAtom>);

impl AssumptionSet {
    pub fn contains(&self, a: &GroundAtom) -> bool {
        self.0.contains(a)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> {
        self.0.iter()
    }
}

impl Ord for AssumptionSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for AssumptionSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<GroundAtom> for AssumptionSet {
    fn from_iter<T: IntoIterator<Item = GroundAtom>>(iter: T) -> Self {
        AssumptionSet(iter.into_iter().collect())
    }
}

/// Atoms eligible for an assumption set: NANT(Π) \ (A ∪ C⁺ ∪ C⁻).
pub fn assumption_candidates(
    gp: &GroundProgram,
    a: &Interpretation,
    cc: &CautiousConsequences,
) -> BTreeSet<GroundAtom> {
    nant(gp)
        .into_iter()
        .filter(|x| !a.contains(x) && !cc.contains(x))
        .collect()
}

fn unique_answer_set_is(
    gp: &GroundProgram,
    u: &BTreeSet<GroundAtom>,
    a: &Interpretation,
    opts: &SolveOptions,
) -> Result<bool, EngineError> {
    let reduced = gp.without_heads(u);
    let sets = answer_sets(
        &reduced,
        &SolveOptions {
            limit: usize::MAX,
            ..opts.clone()
        },
    )?;
    Ok(sets.len() == 1 && sets[0] == *a)
}

/// Checks the membership condition (not minimality) for `u`.
pub fn validate_assumption_set(
    gp: &GroundProgram,
    a: &Interpretation,
    u: &AssumptionSet,
    opts: &SolveOptions,
) -> Result<(), EngineError> {
    if !is_answer_set(gp, a) {
        return Err(EngineError::NotAnAnswerSet);
    }
    let cc = cautious_consequences(gp, opts)?;
    let cand = assumption_candidates(gp, a, &cc);
    if let Some(x) = u.iter().find(|x| !cand.contains(x)) {
        return Err(EngineError::InvalidAssumptionSet(format!(
            "{x} is not a negated atom outside A and the cautious consequences"
        )));
    }
    if !unique_answer_set_is(gp, &u.0, a, opts)? {
        return Err(EngineError::InvalidAssumptionSet(
            "A is not the unique answer set once the assumed atoms lose their rules".into(),
        ));
    }
    Ok(())
}

/// Every subset-minimal assumption set of `a`, ordered by size and then
/// lexicographically.
pub fn assumption_sets(
    gp: &GroundProgram,
    a: &Interpretation,
    opts: &SolveOptions,
) -> Result<Vec<AssumptionSet>, EngineError> {
    if !is_answer_set(gp, a) {
        return Err(EngineError::NotAnAnswerSet);
    }
    let cc = cautious_consequences(gp, opts)?;
    let cand: Vec<GroundAtom> = assumption_candidates(gp, a, &cc).into_iter().collect();
    if cand.len() > opts.nant_bound {
        return Err(EngineError::TooManyNegatedAtoms {
            count: cand.len(),
            bound: opts.nant_bound,
        });
    }
    let mut found: Vec<BTreeSet<GroundAtom>> = Vec::new();
    for k in 0..=cand.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let u: BTreeSet<GroundAtom> = idx.iter().map(|&i| cand[i].clone()).collect();
            if !found.iter().any(|f| f.is_subset(&u)) && unique_answer_set_is(gp, &u, a, opts)? {
                found.push(u);
            }
            if !next_combination(&mut idx, cand.len()) {
                break;
            }
        }
    }
    let mut out: Vec<AssumptionSet> = found.into_iter().map(AssumptionSet).collect();
    out.sort();
    Ok(out)
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
