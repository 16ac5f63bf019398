use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExplainError;
use crate::engine::GroundAtom;

pub const FORMAT_VERSION: u32 = 1;

/// A node of an explanation graph. `Comparison` is a synthetic true leaf
/// carrying an evaluated comparison literal such as `20<30`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Atom(GroundAtom),
    NotAtom(GroundAtom),
    Comparison(String),
    Top,
    Bottom,
    Assume,
}

impl Node {
    pub fn atom(&self) -> Option<&GroundAtom> {
        match self {
            Node::Atom(a) | Node::NotAtom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_sink(&self) -> bool {
        matches!(self, Node::Top | Node::Bottom | Node::Assume)
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Node::NotAtom(_))
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Node::Atom(_) => "atom",
            Node::NotAtom(_) => "not_atom",
            Node::Comparison(_) => "comparison",
            Node::Top => "top",
            Node::Bottom => "bottom",
            Node::Assume => "assume",
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Atom(a) => write!(f, "{a}"),
            Node::NotAtom(a) => write!(f, "~{a}"),
            Node::Comparison(c) => f.write_str(c),
            Node::Top => f.write_str("⊤"),
            Node::Bottom => f.write_str("⊥"),
            Node::Assume => f.write_str("assume"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Plus,
    Minus,
    Circ,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Plus => "+",
            Label::Minus => "-",
            Label::Circ => "o",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Label::Plus),
            "-" | "−" => Some(Label::Minus),
            "o" | "∘" => Some(Label::Circ),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
    pub label: Label,
}

impl Edge {
    pub fn new(from: Node, to: Node, label: Label) -> Self {
        Edge { from, to, label }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.from, self.to, self.label.as_str())
    }
}

/// A rooted, labelled, directed graph. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExplanationGraph {
    pub root: Node,
    pub nodes: BTreeSet<Node>,
    pub edges: BTreeSet<Edge>,
}

impl ExplanationGraph {
    pub fn new(root: Node) -> Self {
        let mut nodes = BTreeSet::new();
        nodes.insert(root.clone());
        ExplanationGraph {
            root,
            nodes,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, from: Node, to: Node, label: Label) {
        self.nodes.insert(from.clone());
        self.nodes.insert(to.clone());
        self.edges.insert(Edge { from, to, label });
    }

    pub fn out_edges<'a>(&'a self, n: &'a Node) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.from == n)
    }

    pub fn has_node(&self, n: &Node) -> bool {
        self.nodes.contains(n)
    }

    /// Atoms (true or false) appearing as nodes.
    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.nodes.iter().filter_map(Node::atom)
    }

    pub fn label_histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for e in &self.edges {
            h[e.label as usize] += 1;
        }
        h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents serialize")
    }

    pub fn to_document(&self) -> GraphDocument {
        let ids: BTreeMap<&Node, String> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n, format!("n{i}")))
            .collect();
        GraphDocument {
            format_version: FORMAT_VERSION,
            root: ids[&self.root].clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: ids[n].clone(),
                    kind: n.kind_name().to_string(),
                    atom: match n {
                        Node::Atom(a) | Node::NotAtom(a) => Some(a.to_string()),
                        Node::Comparison(c) => Some(c.clone()),
                        _ => None,
                    },
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: ids[&e.from].clone(),
                    to: ids[&e.to].clone(),
                    label: e.label.as_str().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExplainError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| ExplainError::Document(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, ExplainError> {
        let bad = |m: String| ExplainError::Document(m);
        if doc.format_version != FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        let mut by_id: BTreeMap<&str, Node> = BTreeMap::new();
        for n in &doc.nodes {
            let atom = || -> Result<GroundAtom, ExplainError> {
                let text = n
                    .atom
                    .as_deref()
                    .ok_or_else(|| bad(format!("node {} lacks an atom", n.id)))?;
                text.parse()
                    .map_err(|e| bad(format!("node {}: {e}", n.id)))
            };
            let node = match n.kind.as_str() {
                "atom" => Node::Atom(atom()?),
                "not_atom" => Node::NotAtom(atom()?),
                "comparison" => Node::Comparison(
                    n.atom
                        .clone()
                        .ok_or_else(|| bad(format!("node {} lacks its text", n.id)))?,
                ),
                "top" => Node::Top,
                "bottom" => Node::Bottom,
                "assume" => Node::Assume,
                other => return Err(bad(format!("unknown node kind `{other}`"))),
            };
            if by_id.insert(&n.id, node).is_some() {
                return Err(bad(format!("duplicate node id {}", n.id)));
            }
        }
        let get = |id: &str| {
            by_id
                .get(id)
                .cloned()
                .ok_or_else(|| bad(format!("unknown node id {id}")))
        };
        let mut g = ExplanationGraph::new(get(&doc.root)?);
        g.nodes.extend(by_id.values().cloned());
        for e in &doc.edges {
            let label =
                Label::parse(&e.label).ok_or_else(|| bad(format!("unknown label `{}`", e.label)))?;
            g.add_edge(get(&e.from)?, get(&e.to)?, label);
        }
        Ok(g)
    }
}

impl Ord for ExplanationGraph {
    /// Smaller graphs first: node count, edge count, then the sorted edge
    /// lists lexicographically.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.nodes
            .len()
            .cmp(&other.nodes.len())
            .then(self.edges.len().cmp(&other.edges.len()))
            .then_with(|| self.edges.iter().cmp(other.edges.iter()))
            .then_with(|| self.root.cmp(&other.root))
            .then_with(|| self.nodes.iter().cmp(other.nodes.iter()))
    }
}

impl PartialOrd for ExplanationGraph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub format_version: u32,
    pub root: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub label: String,
}
