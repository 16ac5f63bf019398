use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rulelang::{parse_ground_atom, ParseError, Symbol, Value};

/// A variable-free atom. Ordered by predicate name, then argument list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: Symbol,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: Vec<Value>) -> Self {
        GroundAtom {
            predicate: Symbol::from(predicate),
            args,
        }
    }

    pub fn prop(predicate: &str) -> Self {
        GroundAtom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Integer value of the last argument, which by convention is the time
    /// stamp of every time-dependent predicate.
    pub fn time(&self) -> Option<i64> {
        self.args.last().and_then(Value::as_int)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for GroundAtom {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (predicate, args) = parse_ground_atom(s.trim())?;
        Ok(GroundAtom { predicate, args })
    }
}

impl Serialize for GroundAtom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroundAtom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Index of an atom in a [`GroundProgram`]'s universe.
pub type AtomId = u32;

/// A propositional rule. `pos` and `neg` are sorted and duplicate-free.
/// `comparisons` records the comparison literals that were evaluated (and
/// held) when the rule was instantiated; they carry no semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    pub head: Option<AtomId>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    pub comparisons: Vec<String>,
}

impl GroundRule {
    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.pos.is_empty() && self.neg.is_empty()
    }
}

/// A propositional program together with its atom universe: exactly the atoms
/// occurring in its rules.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    atoms: Vec<GroundAtom>,
    ids: HashMap<GroundAtom, AtomId>,
    rules: Vec<GroundRule>,
    by_head: Vec<Vec<usize>>,
}

impl GroundProgram {
    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn id_of(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.ids.get(atom).copied()
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.ids.contains_key(atom)
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn universe_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn universe(&self) -> BTreeSet<GroundAtom> {
        self.atoms.iter().cloned().collect()
    }

    /// Indices of the rules whose head is `id`.
    pub fn rules_with_head(&self, id: AtomId) -> &[usize] {
        &self.by_head[id as usize]
    }

    /// An atom is a fact when some rule with an empty body derives it.
    pub fn is_fact(&self, id: AtomId) -> bool {
        self.rules_with_head(id)
            .iter()
            .any(|&r| self.rules[r].is_fact())
    }

    pub fn is_negation_free(&self) -> bool {
        self.rules.iter().all(|r| r.neg.is_empty())
    }

    pub fn mask_of(&self, i: &Interpretation) -> Vec<bool> {
        let mut m = vec![false; self.atoms.len()];
        for a in i.iter() {
            if let Some(id) = self.id_of(a) {
                m[id as usize] = true;
            }
        }
        m
    }

    pub fn interpretation_of(&self, mask: &[bool]) -> Interpretation {
        Interpretation(
            mask.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| self.atoms[i].clone())
                .collect(),
        )
    }

    /// The program without the rules whose head is in `heads`.
    pub fn without_heads(&self, heads: &BTreeSet<GroundAtom>) -> GroundProgram {
        let mut b = GroundProgramBuilder::new();
        for r in &self.rules {
            if let Some(h) = r.head {
                if heads.contains(self.atom(h)) {
                    continue;
                }
            }
            b.push_ids(self, r, true);
        }
        b.build()
    }

    /// Body atoms are printed in canonical order, positive before negative.
    pub fn rule_to_string(&self, r: &GroundRule) -> String {
        let mut s = String::new();
        if let Some(h) = r.head {
            s.push_str(&self.atom(h).to_string());
        }
        let mut pos: Vec<&GroundAtom> = r.pos.iter().map(|&a| self.atom(a)).collect();
        let mut neg: Vec<&GroundAtom> = r.neg.iter().map(|&a| self.atom(a)).collect();
        pos.sort();
        neg.sort();
        let mut body: Vec<String> = pos.iter().map(|a| a.to_string()).collect();
        body.extend(neg.iter().map(|a| format!("not {a}")));
        if !body.is_empty() {
            if r.head.is_some() {
                s.push(' ');
            }
            s.push_str(":- ");
            s.push_str(&body.join(", "));
        }
        s.push('.');
        s
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.rule_to_string(r))?;
        }
        Ok(())
    }
}

/// Builds a [`GroundProgram`], interning atoms and dropping duplicate rules
/// (same head, positive and negative body).
#[derive(Default)]
pub struct GroundProgramBuilder {
    atoms: Vec<GroundAtom>,
    ids: HashMap<GroundAtom, AtomId>,
    rules: Vec<GroundRule>,
    seen: HashSet<(Option<AtomId>, Vec<AtomId>, Vec<AtomId>)>,
}

impl GroundProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push(atom.clone());
        self.ids.insert(atom, id);
        id
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Adds a rule; returns `false` when an identical rule already exists.
    pub fn add_rule(
        &mut self,
        head: Option<GroundAtom>,
        pos: Vec<GroundAtom>,
        neg: Vec<GroundAtom>,
        comparisons: Vec<String>,
    ) -> bool {
        let head = head.map(|h| self.intern(h));
        let mut pos: Vec<AtomId> = pos.into_iter().map(|a| self.intern(a)).collect();
        let mut neg: Vec<AtomId> = neg.into_iter().map(|a| self.intern(a)).collect();
        pos.sort_unstable();
        pos.dedup();
        neg.sort_unstable();
        neg.dedup();
        self.insert(head, pos, neg, comparisons)
    }

    pub fn fact(&mut self, atom: GroundAtom) -> bool {
        self.add_rule(Some(atom), Vec::new(), Vec::new(), Vec::new())
    }

    fn insert(
        &mut self,
        head: Option<AtomId>,
        pos: Vec<AtomId>,
        neg: Vec<AtomId>,
        comparisons: Vec<String>,
    ) -> bool {
        let key = (head, pos, neg);
        if self.seen.contains(&key) {
            return false;
        }
        let (head, pos, neg) = key.clone();
        self.seen.insert(key);
        // Facts keep no comparison annotations.
        let comparisons = if pos.is_empty() && neg.is_empty() {
            Vec::new()
        } else {
            comparisons
        };
        self.rules.push(GroundRule {
            head,
            pos,
            neg,
            comparisons,
        });
        true
    }

    /// Copies a rule of another program, optionally keeping its negative body.
    pub(crate) fn push_ids(&mut self, from: &GroundProgram, r: &GroundRule, keep_neg: bool) {
        let head = r.head.map(|h| self.intern(from.atom(h).clone()));
        let mut pos: Vec<AtomId> = r
            .pos
            .iter()
            .map(|&a| self.intern(from.atom(a).clone()))
            .collect();
        let mut neg: Vec<AtomId> = if keep_neg {
            r.neg
                .iter()
                .map(|&a| self.intern(from.atom(a).clone()))
                .collect()
        } else {
            Vec::new()
        };
        pos.sort_unstable();
        neg.sort_unstable();
        self.insert(head, pos, neg, r.comparisons.clone());
    }

    pub fn build(self) -> GroundProgram {
        let mut by_head = vec![Vec::new(); self.atoms.len()];
        for (i, r) in self.rules.iter().enumerate() {
            if let Some(h) = r.head {
                by_head[h as usize].push(i);
            }
        }
        GroundProgram {
            atoms: self.atoms,
            ids: self.ids,
            rules: self.rules,
            by_head,
        }
    }
}

/// A set of ground atoms, e.g. a candidate answer set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation(pub BTreeSet<GroundAtom>);

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, a: &GroundAtom) -> bool {
        self.0.contains(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, a: GroundAtom) -> bool {
        self.0.insert(a)
    }

    /// Atoms of the given predicate.
    pub fn with_predicate<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a GroundAtom> {
        self.0.iter().filter(move |a| &*a.predicate == pred)
    }

    /// Sorted, newline-terminated atom lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in &self.0 {
            s.push_str(&a.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut set = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if !line.is_empty() {
                set.insert(line.parse()?);
            }
        }
        Ok(Interpretation(set))
    }

    /// `{"atoms": [...]}` with atoms in canonical order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AtomsDoc {
            atoms: self.0.iter().cloned().collect(),
        })
        .expect("atom strings always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let doc: AtomsDoc = serde_json::from_str(text)?;
        Ok(Interpretation(doc.atoms.into_iter().collect()))
    }
}

#[derive(Serialize, Deserialize)]
struct AtomsDoc {
    atoms: Vec<GroundAtom>,
}

impl FromIterator<GroundAtom> for Interpretation {
    fn from_iter<T: IntoIterator<Item = GroundAtom>>(iter: T) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

impl IntoIterator for Interpretation {
    type Item = GroundAtom;
    type IntoIter = std::collections::btree_set::IntoIter<GroundAtom>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Interpretation {
    type Item = &'a GroundAtom;
    type IntoIter = std::collections::btree_set::Iter<'a, GroundAtom>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
