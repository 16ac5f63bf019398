use std::collections::BTreeMap;
use std::fmt::Write;

use super::graph::{ExplanationGraph, Label, Node, FORMAT_VERSION};

#[derive(Clone, Copy, Debug)]
pub struct DotOptions {
    /// Draw facts (and comparison leaves) as dashed boxes and omit their
    /// edges to ⊤.
    pub elide_facts: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions { elide_facts: true }
    }
}

pub fn to_dot(g: &ExplanationGraph) -> String {
    to_dot_with(g, DotOptions::default())
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A node is drawn as a fact leaf when its only support is `(x, ⊤, +)`.
fn is_fact_leaf(g: &ExplanationGraph, n: &Node) -> bool {
    matches!(n, Node::Atom(_) | Node::Comparison(_)) && {
        let mut out = g.out_edges(n);
        matches!(
            (out.next(), out.next()),
            (Some(e), None) if e.to == Node::Top && e.label == Label::Plus
        )
    }
}

pub fn to_dot_with(g: &ExplanationGraph, opts: DotOptions) -> String {
    let hidden = |n: &Node| opts.elide_facts && is_fact_leaf(g, n);
    let drawn_edges: Vec<_> = g
        .edges
        .iter()
        .filter(|e| !(e.to == Node::Top && hidden(&e.from)))
        .collect();
    let used_top = drawn_edges.iter().any(|e| e.to == Node::Top);

    let ids: BTreeMap<&Node, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut s = String::new();
    writeln!(s, "// explanation graph, format_version {FORMAT_VERSION}").unwrap();
    writeln!(s, "digraph explanation {{").unwrap();
    writeln!(s, "  rankdir=TB;").unwrap();
    writeln!(s, "  node [fontname=\"Helvetica\"];").unwrap();
    for n in &g.nodes {
        if *n == Node::Top && !used_top {
            continue;
        }
        let (shape, style) = match n {
            Node::Top | Node::Bottom => ("plaintext", "solid"),
            Node::Assume => ("diamond", "solid"),
            Node::Comparison(_) => ("ellipse", if hidden(n) { "dashed" } else { "solid" }),
            Node::Atom(_) | Node::NotAtom(_) => ("box", if hidden(n) { "dashed" } else { "solid" }),
        };
        let root = if *n == g.root { ", penwidth=2" } else { "" };
        writeln!(
            s,
            "  n{} [label=\"{}\", shape={shape}, style={style}{root}];",
            ids[n],
            escape(&n.to_string())
        )
        .unwrap();
    }
    for e in drawn_edges {
        let style = match e.label {
            Label::Plus => "solid",
            Label::Minus => "dashed",
            Label::Circ => "dotted",
        };
        writeln!(
            s,
            "  n{} -> n{} [label=\"{}\", style={style}];",
            ids[&e.from],
            ids[&e.to],
            e.label.as_str()
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}
