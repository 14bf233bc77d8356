//! Graphviz export. Marked states are shaded, bad markers drawn as red
//! double circles, transducer edges labelled `σ/u`.

use std::fmt::Write as _;

use crate::automaton::Automaton;
use crate::fsm::{Fsm, Label, StateId};
use crate::transducer::Transducer;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn render<L: Label>(fsm: &Fsm<L>, label: impl Fn(&L) -> String, dump: impl Fn(StateId) -> bool) -> String {
    let mut out = String::from("digraph model {\n  rankdir=LR;\n  node [shape=circle];\n");
    let Some(init) = fsm.initial() else {
        out.push_str("  empty [shape=plaintext, label=\"empty\"];\n}\n");
        return out;
    };
    // Node ids are positions in name order so the output does not depend on
    // internal numbering.
    let mut order: Vec<StateId> = (0..fsm.num_states()).collect();
    order.sort_by(|&a, &b| fsm.name(a).cmp(fsm.name(b)).then(a.cmp(&b)));
    let mut node = vec![String::new(); fsm.num_states()];
    for (i, &s) in order.iter().enumerate() {
        node[s] = format!("n{i}");
    }
    let _ = writeln!(out, "  start [shape=point];\n  start -> {};", node[init]);
    for &s in &order {
        let mut attrs = vec![format!("label={}", quote(fsm.name(s)))];
        if fsm.is_marked(s) {
            attrs.push("style=filled, fillcolor=lightgray".into());
        }
        if fsm.is_bad(s) {
            attrs.push("shape=doublecircle, color=red, penwidth=2".into());
        }
        if dump(s) {
            attrs.push("shape=box, style=dashed".into());
        }
        let _ = writeln!(out, "  {} [{}];", node[s], attrs.join(", "));
    }
    let mut edges: Vec<(String, String, String)> = fsm
        .edges()
        .map(|(s, l, t)| (node[s].clone(), label(l), node[t].clone()))
        .collect();
    edges.sort();
    for (s, l, t) in edges {
        let _ = writeln!(out, "  {s} -> {t} [label={}];", quote(&l));
    }
    out.push_str("}\n");
    out
}

pub fn automaton_to_dot(a: &Automaton) -> String {
    render(a.fsm(), |l| l.to_string(), |_| false)
}

pub fn transducer_to_dot(t: &Transducer) -> String {
    render(t.fsm(), |p| p.to_string(), |s| t.is_dump(s))
}
